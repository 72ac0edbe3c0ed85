#ifndef LIGHTFLUCT_DETECTION_HPP
#define LIGHTFLUCT_DETECTION_HPP

#include "lightfluct/analyzers.hpp"
#include "lightfluct/field.hpp"
#include "lightfluct/records.hpp"
#include "lightfluct/rng.hpp"

#include <Eigen/Dense>

#include <optional>

namespace lightfluct::detection {

// Non-ideal detector hooks. The defaults reproduce the ideal detector where
// the click rate equals the incident intensity.
struct DetectorOptions {
    double quantum_efficiency = 1.0;
    double dark_count_rate = 0.0;
    double dead_time = 0.0;

    void validate() const;
};

/// Inhomogeneous Poisson clicks at rate intensity(t), piecewise constant on
/// the grid cells, drawn by thinning a homogeneous process at 1.1 * max rate.
CountRecord sample_counts(const Eigen::VectorXd& intensity, const TimeGrid& grid, RngStream& stream,
                          const DetectorOptions& options = {});

/// Click-count difference of two detectors, binned on the grid as a current
/// (counts per unit time) and passed through a one-pole low-pass filter
///   y_k = y_{k-1} + beta (i_k - y_{k-1}),  beta = 1 - exp(-2 pi B dt).
/// The two detectors use the independent streams stream.derive(1) and
/// stream.derive(2).
PhotocurrentRecord bhd_difference_current(const Eigen::VectorXd& port1_intensity,
                                          const Eigen::VectorXd& port2_intensity, const TimeGrid& grid,
                                          double bandwidth, const RngStream& stream,
                                          const DetectorOptions& options = {});

double filter_coefficient(double bandwidth, double dt);

struct NoiseWidthPrediction {
    double shot_width = 0.0;
    double signal_width = 0.0;

    [[nodiscard]] double total_width() const;
};

/// RMS widths of the filtered difference current.
///   shot:   A_LO * sqrt(beta / (2 - beta) / dt), or A_LO * sqrt(pi B) without dt
///   signal: 2 * A_LO * sqrt(var A_t), for amplitude fluctuations inside the passband
NoiseWidthPrediction predict_noise_widths(const field::LocalOscillator& lo, double signal_variance, double bandwidth,
                                          std::optional<double> dt = std::nullopt);

struct CorrelatorRun {
    analysis::CorrelationSeries conditional;  // raw conditional average current
    std::size_t counts_used = 0;
    CountRecord triggers;
    PhotocurrentRecord current;
};

/// Semiclassical wave-particle correlator: one field path is split 50/50,
/// one arm is photon counted, the other is homodyned against `lo`, and
/// current segments are averaged around each click. No triggers gives an
/// all-zero series flagged inconclusive.
CorrelatorRun run_semiclassical_correlator(const field::FieldModel& model, const field::LocalOscillator& lo,
                                           const TimeGrid& grid, double halfwidth, double bandwidth,
                                           RngStream& stream, const DetectorOptions& options = {});

} // namespace lightfluct::detection

#endif // LIGHTFLUCT_DETECTION_HPP
