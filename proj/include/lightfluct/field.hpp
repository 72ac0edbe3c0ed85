#ifndef LIGHTFLUCT_FIELD_HPP
#define LIGHTFLUCT_FIELD_HPP

#include "lightfluct/numerics.hpp"
#include "lightfluct/rng.hpp"

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace lightfluct::field {

// Complex envelope alpha_t = A_t exp(i phi_t) with the optical carrier
// factored out. Units are root-rate: |alpha_t|^2 is a photoelectron rate.
struct FieldPath {
    TimeGrid grid;
    Eigen::VectorXcd envelope;

    [[nodiscard]] Eigen::VectorXd intensity() const { return envelope.cwiseAbs2(); }
    void validate() const;
};

struct CoherentField {
    double amplitude = 1.0;
    double phase = 0.0;
};

// Stationary complex Ornstein-Uhlenbeck envelope (chaotic light):
// <alpha(t)* alpha(t+tau)> = mean_intensity * exp(-|tau| / correlation_time).
struct ThermalOuField {
    double correlation_time = 1.0;
    double mean_intensity = 1.0;
};

enum class BurstSign { positive, negative, symmetric };

// Coherent background plus Poisson-placed damped-cosine amplitude bursts:
// A_t = background + sum_k s_k * amplitude * exp(-decay |t - t_k|) cos(frequency (t - t_k)),
// with s_k fixed by `sign` (symmetric draws s_k = +/-1 with equal odds).
// `frequency` is angular (rad per time unit).
struct BurstField {
    double background_amplitude = 1.0;
    double burst_rate = 0.2;
    double burst_amplitude = 0.2;
    double frequency = 2.0;
    double decay_rate = 0.5;
    BurstSign sign = BurstSign::positive;
    double phase = 0.0;
};

using FieldModel = std::variant<CoherentField, ThermalOuField, BurstField>;

void validate(const FieldModel& model);
std::string model_name(const FieldModel& model);
BurstSign parse_burst_sign(std::string_view tag);
std::string_view to_string(BurstSign sign);

struct LocalOscillator {
    double amplitude = 10.0;
    double phase = 0.0;

    [[nodiscard]] std::complex<double> envelope() const { return std::polar(amplitude, phase); }
};

FieldPath generate_path(const FieldModel& model, const TimeGrid& grid, RngStream& stream);

/// 50/50 beam splitter with vacuum in the unused port: both outputs carry input / sqrt(2).
std::pair<FieldPath, FieldPath> split_beam(const FieldPath& path);

/// Superposes the signal with a local oscillator at a 50/50 splitter. Returns
/// the constructive port (lo + signal)/sqrt(2) and destructive port
/// (lo - signal)/sqrt(2), keeping the exact quadratic intensity.
std::pair<FieldPath, FieldPath> mix_with_local_oscillator(const FieldPath& signal, const LocalOscillator& lo);

} // namespace lightfluct::field

#endif // LIGHTFLUCT_FIELD_HPP
