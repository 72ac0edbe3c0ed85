#include "lightfluct/field.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lightfluct::field {
namespace {

void require_positive(double v, const char* what)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string("field model: ") + what + " must be positive and finite");
}

void require_finite(double v, const char* what)
{
    if (!std::isfinite(v))
        throw std::invalid_argument(std::string("field model: ") + what + " must be finite");
}

// Bursts are truncated where exp(-decay |u|) falls below exp(-kBurstSupport).
constexpr double kBurstSupport = 14.0;
constexpr double kInvSqrt2 = 0.70710678118654752440;

} // namespace

void FieldPath::validate() const
{
    if (static_cast<std::size_t>(envelope.size()) != grid.n_samples)
        throw std::invalid_argument("FieldPath: sample count does not match grid");
    if (!envelope.allFinite())
        throw std::invalid_argument("FieldPath: non-finite envelope sample");
}

void validate(const FieldModel& model)
{
    std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, CoherentField>) {
                if (!(m.amplitude >= 0.0))
                    throw std::invalid_argument("field model: coherent amplitude must be >= 0");
                require_finite(m.amplitude, "coherent amplitude");
                require_finite(m.phase, "coherent phase");
            } else if constexpr (std::is_same_v<T, ThermalOuField>) {
                require_positive(m.correlation_time, "correlation_time");
                require_positive(m.mean_intensity, "mean_intensity");
            } else {
                require_finite(m.background_amplitude, "background_amplitude");
                require_positive(m.burst_rate, "burst_rate");
                require_positive(m.decay_rate, "burst decay_rate");
                require_finite(m.burst_amplitude, "burst_amplitude");
                if (!(m.frequency >= 0.0))
                    throw std::invalid_argument("field model: burst frequency must be >= 0");
                require_finite(m.phase, "burst phase");
            }
        },
        model);
}

std::string model_name(const FieldModel& model)
{
    switch (model.index()) {
    case 0:
        return "coherent";
    case 1:
        return "thermal_ou";
    default:
        return "modulated_burst";
    }
}

BurstSign parse_burst_sign(std::string_view tag)
{
    if (tag == "positive")
        return BurstSign::positive;
    if (tag == "negative")
        return BurstSign::negative;
    if (tag == "symmetric")
        return BurstSign::symmetric;
    throw std::invalid_argument("unknown burst sign '" + std::string(tag) + "' (expected positive|negative|symmetric)");
}

std::string_view to_string(BurstSign sign)
{
    switch (sign) {
    case BurstSign::positive:
        return "positive";
    case BurstSign::negative:
        return "negative";
    default:
        return "symmetric";
    }
}

namespace {

Eigen::VectorXcd coherent_envelope(const CoherentField& m, const TimeGrid& grid)
{
    return Eigen::VectorXcd::Constant(static_cast<Eigen::Index>(grid.n_samples), std::polar(m.amplitude, m.phase));
}

Eigen::VectorXcd thermal_envelope(const ThermalOuField& m, const TimeGrid& grid, RngStream& stream)
{
    // Exact discretisation of d alpha = -alpha/tau_c dt + sqrt(I/tau_c) (dW1 + i dW2).
    const double decay = std::exp(-grid.dt / m.correlation_time);
    const double kick = std::sqrt(0.5 * m.mean_intensity * (1.0 - decay * decay));
    const double stationary = std::sqrt(0.5 * m.mean_intensity);

    Eigen::VectorXcd env(static_cast<Eigen::Index>(grid.n_samples));
    std::complex<double> alpha(stationary * stream.standard_gaussian(), stationary * stream.standard_gaussian());
    for (Eigen::Index i = 0; i < env.size(); ++i) {
        env[i] = alpha;
        const double re = stream.standard_gaussian();
        const double im = stream.standard_gaussian();
        alpha = decay * alpha + kick * std::complex<double>(re, im);
    }
    return env;
}

Eigen::VectorXcd burst_envelope(const BurstField& m, const TimeGrid& grid, RngStream& stream)
{
    const Eigen::Index n = static_cast<Eigen::Index>(grid.n_samples);
    Eigen::VectorXd amplitude = Eigen::VectorXd::Constant(n, m.background_amplitude);

    const double support = kBurstSupport / m.decay_rate;
    const double first = grid.t_start - support;
    const double last = grid.t_end() + support;
    for (double center = first + stream.exponential(1.0 / m.burst_rate); center < last;
         center += stream.exponential(1.0 / m.burst_rate)) {
        double sign = 1.0;
        if (m.sign == BurstSign::negative)
            sign = -1.0;
        else if (m.sign == BurstSign::symmetric)
            sign = stream.uniform01() < 0.5 ? 1.0 : -1.0;

        const auto lo = static_cast<Eigen::Index>(std::max(0.0, std::ceil((center - support - grid.t_start) / grid.dt)));
        const auto hi = static_cast<Eigen::Index>(
            std::min(static_cast<double>(n - 1), std::floor((center + support - grid.t_start) / grid.dt)));
        for (Eigen::Index i = lo; i <= hi; ++i) {
            const double u = grid.time(static_cast<std::size_t>(i)) - center;
            amplitude[i] += sign * m.burst_amplitude * std::exp(-m.decay_rate * std::abs(u)) * std::cos(m.frequency * u);
        }
    }
    return amplitude.cast<std::complex<double>>() * std::polar(1.0, m.phase);
}

} // namespace

FieldPath generate_path(const FieldModel& model, const TimeGrid& grid, RngStream& stream)
{
    validate(model);
    FieldPath path{grid, {}};
    path.envelope = std::visit(
        [&](const auto& m) -> Eigen::VectorXcd {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, CoherentField>)
                return coherent_envelope(m, grid);
            else if constexpr (std::is_same_v<T, ThermalOuField>)
                return thermal_envelope(m, grid, stream);
            else
                return burst_envelope(m, grid, stream);
        },
        model);
    return path;
}

std::pair<FieldPath, FieldPath> split_beam(const FieldPath& path)
{
    path.validate();
    FieldPath out{path.grid, path.envelope * kInvSqrt2};
    return {out, out};
}

std::pair<FieldPath, FieldPath> mix_with_local_oscillator(const FieldPath& signal, const LocalOscillator& lo)
{
    signal.validate();
    if (!(lo.amplitude >= 0.0) || !std::isfinite(lo.amplitude))
        throw std::invalid_argument("LocalOscillator: amplitude must be finite and >= 0");
    const Eigen::VectorXcd ref =
        Eigen::VectorXcd::Constant(signal.envelope.size(), lo.envelope());
    return {FieldPath{signal.grid, (ref + signal.envelope) * kInvSqrt2},
            FieldPath{signal.grid, (ref - signal.envelope) * kInvSqrt2}};
}

} // namespace lightfluct::field
