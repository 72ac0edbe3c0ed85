#include "lightfluct/numerics.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

namespace lightfluct {

TimeGrid::TimeGrid(double start, double step, std::size_t n) : t_start(start), dt(step), n_samples(n)
{
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("TimeGrid: dt must be positive and finite");
    if (n_samples < 1)
        throw std::invalid_argument("TimeGrid: n_samples must be at least 1");
    if (!std::isfinite(t_start))
        throw std::invalid_argument("TimeGrid: t_start must be finite");
}

TimeGrid TimeGrid::covering(double t_start, double duration, double dt)
{
    if (!(duration > 0.0))
        throw std::invalid_argument("TimeGrid::covering: duration must be positive");
    if (!(dt > 0.0))
        throw std::invalid_argument("TimeGrid::covering: dt must be positive");
    const auto n = static_cast<std::size_t>(std::llround(std::ceil(duration / dt - 1e-9)));
    return TimeGrid(t_start, dt, std::max<std::size_t>(n, 1));
}

double Spectrum::parseval_energy() const
{
    if (n_input == 0)
        return 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const bool unpaired = k == 0 || (n_input % 2 == 0 && k == n_input / 2);
        sum += (unpaired ? 1.0 : 2.0) * std::norm(values[k]);
    }
    return sum / static_cast<double>(n_input);
}

Spectrum discrete_fourier_transform(std::span<const double> series, double dt)
{
    if (series.size() < 2)
        throw std::invalid_argument("discrete_fourier_transform: need at least two samples");
    if (!(dt > 0.0))
        throw std::invalid_argument("discrete_fourier_transform: dt must be positive");

    const std::size_t n = series.size();
    std::vector<double> input(series.begin(), series.end());
    std::vector<std::complex<double>> full;
    Eigen::FFT<double> fft;
    fft.fwd(full, input);

    Spectrum out;
    out.n_input = n;
    out.dt = dt;
    const std::size_t half = n / 2 + 1;
    out.frequencies.resize(half);
    out.values.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(half));
    for (std::size_t k = 0; k < half; ++k)
        out.frequencies[k] = static_cast<double>(k) / (static_cast<double>(n) * dt);
    return out;
}

std::vector<double> inverse_discrete_fourier_transform(const Spectrum& spectrum)
{
    const std::size_t n = spectrum.n_input;
    if (n < 2 || spectrum.values.size() != n / 2 + 1)
        throw std::invalid_argument("inverse_discrete_fourier_transform: malformed spectrum");

    std::vector<std::complex<double>> full(n);
    for (std::size_t k = 0; k < spectrum.values.size(); ++k)
        full[k] = spectrum.values[k];
    for (std::size_t k = spectrum.values.size(); k < n; ++k)
        full[k] = std::conj(spectrum.values[n - k]);

    std::vector<std::complex<double>> time;
    Eigen::FFT<double> fft;
    fft.inv(time, full);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = time[i].real();
    return out;
}

} // namespace lightfluct
