#ifndef LIGHTFLUCT_BLACKBODY_HPP
#define LIGHTFLUCT_BLACKBODY_HPP

#include "lightfluct/rng.hpp"

#include <cstddef>
#include <string_view>
#include <vector>

namespace lightfluct::blackbody {

/// Dimensionless inverse temperature x = h nu / k T.
class ThermalParameter {
public:
    explicit ThermalParameter(double x);
    [[nodiscard]] double value() const { return x_; }

private:
    double x_;
};

/// Mean and variance of the oscillator energy in units of h nu.
struct EnergyMoments {
    double mean = 0.0;
    double variance = 0.0;
};

enum class EnergyModel { continuous, discrete };

EnergyModel parse_energy_model(std::string_view tag);
std::string_view to_string(EnergyModel model);

// Continuous energy: Boltzmann weight over y >= 0. Mean 1/x, variance mean^2.
EnergyMoments moments_continuous(ThermalParameter x);
// Discrete energy n = 0, 1, 2, ...: mean 1/(e^x - 1), variance mean^2 + mean.
EnergyMoments moments_discrete(ThermalParameter x);

/// Draws n energies. Continuous: exponential with mean 1/x. Discrete:
/// geometric on {0, 1, ...} via n = floor(-ln(u) / x), u uniform on (0, 1],
/// which gives P(n >= k) = exp(-k x) exactly.
std::vector<double> sample_energy(ThermalParameter x, EnergyModel model, std::size_t n, RngStream& stream);

struct SampleSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;
    double mean_stderr = 0.0;
    double variance_stderr = 0.0;
};

SampleSummary summarize(const std::vector<double>& samples);

} // namespace lightfluct::blackbody

#endif // LIGHTFLUCT_BLACKBODY_HPP
