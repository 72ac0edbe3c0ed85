#include "lightfluct/blackbody.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lightfluct::blackbody {

ThermalParameter::ThermalParameter(double x) : x_(x)
{
    if (!(x > 0.0) || !std::isfinite(x))
        throw std::invalid_argument("ThermalParameter: x must be positive and finite, got " + std::to_string(x));
}

EnergyModel parse_energy_model(std::string_view tag)
{
    if (tag == "continuous")
        return EnergyModel::continuous;
    if (tag == "discrete")
        return EnergyModel::discrete;
    throw std::invalid_argument("unknown energy model '" + std::string(tag) + "' (expected continuous|discrete)");
}

std::string_view to_string(EnergyModel model)
{
    return model == EnergyModel::continuous ? "continuous" : "discrete";
}

EnergyMoments moments_continuous(ThermalParameter x)
{
    const double mean = 1.0 / x.value();
    return {mean, mean * mean};
}

EnergyMoments moments_discrete(ThermalParameter x)
{
    const double mean = 1.0 / std::expm1(x.value());
    return {mean, mean * mean + mean};
}

std::vector<double> sample_energy(ThermalParameter x, EnergyModel model, std::size_t n, RngStream& stream)
{
    if (n < 1)
        throw std::invalid_argument("sample_energy: n must be at least 1");
    std::vector<double> out(n);
    const double inv_x = 1.0 / x.value();
    switch (model) {
    case EnergyModel::continuous:
        for (auto& v : out)
            v = stream.exponential(inv_x);
        break;
    case EnergyModel::discrete:
        for (auto& v : out)
            v = std::floor(-std::log(stream.uniform_open_left()) * inv_x);
        break;
    default:
        throw std::invalid_argument("sample_energy: invalid model tag");
    }
    return out;
}

SampleSummary summarize(const std::vector<double>& samples)
{
    SampleSummary s;
    s.count = samples.size();
    if (s.count < 2)
        throw std::invalid_argument("summarize: need at least two samples");
    const double n = static_cast<double>(s.count);
    double sum = 0.0;
    for (double v : samples)
        sum += v;
    s.mean = sum / n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : samples) {
        const double d2 = (v - s.mean) * (v - s.mean);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    s.variance = m2 * n / (n - 1.0);
    s.mean_stderr = std::sqrt(s.variance / n);
    s.variance_stderr = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
    return s;
}

} // namespace lightfluct::blackbody
