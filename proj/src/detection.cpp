#include "lightfluct/detection.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lightfluct::detection {

void DetectorOptions::validate() const
{
    if (!(quantum_efficiency > 0.0 && quantum_efficiency <= 1.0))
        throw std::invalid_argument("detector: quantum_efficiency must lie in (0, 1]");
    if (!(dark_count_rate >= 0.0) || !std::isfinite(dark_count_rate))
        throw std::invalid_argument("detector: dark_count_rate must be >= 0");
    if (!(dead_time >= 0.0) || !std::isfinite(dead_time))
        throw std::invalid_argument("detector: dead_time must be >= 0");
}

CountRecord sample_counts(const Eigen::VectorXd& intensity, const TimeGrid& grid, RngStream& stream,
                          const DetectorOptions& options)
{
    options.validate();
    if (static_cast<std::size_t>(intensity.size()) != grid.n_samples)
        throw std::invalid_argument("sample_counts: intensity length does not match grid");
    if (!intensity.allFinite())
        throw std::invalid_argument("sample_counts: non-finite intensity");
    if ((intensity.array() < 0.0).any())
        throw std::invalid_argument("sample_counts: negative intensity sample");

    CountRecord record;
    record.t0 = grid.t_start;
    record.t1 = grid.t_end();

    const double peak = options.quantum_efficiency * intensity.maxCoeff() + options.dark_count_rate;
    if (!(peak > 0.0))
        return record;
    const double majorant = 1.1 * peak;
    const double mean_gap = 1.0 / majorant;

    double last = -std::numeric_limits<double>::infinity();
    for (double t = grid.t_start + stream.exponential(mean_gap); t < record.t1; t += stream.exponential(mean_gap)) {
        auto cell = static_cast<std::size_t>((t - grid.t_start) / grid.dt);
        cell = std::min(cell, grid.n_samples - 1);
        const double rate = options.quantum_efficiency * intensity[static_cast<Eigen::Index>(cell)] + options.dark_count_rate;
        if (stream.uniform01() * majorant >= rate)
            continue;
        if (t - last < options.dead_time)
            continue;
        if (!record.timestamps.empty() && !(t > record.timestamps.back()))
            continue;
        record.timestamps.push_back(t);
        last = t;
    }
    return record;
}

double filter_coefficient(double bandwidth, double dt)
{
    return -std::expm1(-2.0 * std::numbers::pi * bandwidth * dt);
}

namespace {

Eigen::VectorXd bin_counts(const CountRecord& record, const TimeGrid& grid)
{
    Eigen::VectorXd bins = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.n_samples));
    for (double t : record.timestamps) {
        auto cell = static_cast<std::size_t>((t - grid.t_start) / grid.dt);
        bins[static_cast<Eigen::Index>(std::min(cell, grid.n_samples - 1))] += 1.0;
    }
    return bins;
}

} // namespace

PhotocurrentRecord bhd_difference_current(const Eigen::VectorXd& port1_intensity,
                                          const Eigen::VectorXd& port2_intensity, const TimeGrid& grid,
                                          double bandwidth, const RngStream& stream, const DetectorOptions& options)
{
    if (!(bandwidth > 0.0))
        throw std::invalid_argument("bhd_difference_current: bandwidth must be positive");
    if (bandwidth > grid.nyquist() * (1.0 + 1e-12))
        throw std::invalid_argument("bhd_difference_current: bandwidth exceeds the Nyquist frequency of the grid");
    if (port1_intensity.size() != port2_intensity.size())
        throw std::invalid_argument("bhd_difference_current: port lengths differ");

    RngStream s1 = stream.derive(1);
    RngStream s2 = stream.derive(2);
    const CountRecord c1 = sample_counts(port1_intensity, grid, s1, options);
    const CountRecord c2 = sample_counts(port2_intensity, grid, s2, options);
    const Eigen::VectorXd impulses = (bin_counts(c1, grid) - bin_counts(c2, grid)) / grid.dt;

    const double beta = filter_coefficient(bandwidth, grid.dt);
    PhotocurrentRecord out{grid, Eigen::VectorXd(impulses.size()), bandwidth};
    double y = options.quantum_efficiency * (port1_intensity[0] - port2_intensity[0]);
    for (Eigen::Index k = 0; k < impulses.size(); ++k) {
        y += beta * (impulses[k] - y);
        out.samples[k] = y;
    }
    return out;
}

double NoiseWidthPrediction::total_width() const
{
    return std::hypot(shot_width, signal_width);
}

NoiseWidthPrediction predict_noise_widths(const field::LocalOscillator& lo, double signal_variance, double bandwidth,
                                          std::optional<double> dt)
{
    if (!(lo.amplitude >= 0.0) || !(signal_variance >= 0.0) || !(bandwidth >= 0.0))
        throw std::invalid_argument("predict_noise_widths: inputs must be >= 0");
    NoiseWidthPrediction out;
    if (dt) {
        if (!(*dt > 0.0))
            throw std::invalid_argument("predict_noise_widths: dt must be positive");
        const double beta = filter_coefficient(bandwidth, *dt);
        out.shot_width = lo.amplitude * std::sqrt(beta / (2.0 - beta) / *dt);
    } else {
        out.shot_width = lo.amplitude * std::sqrt(std::numbers::pi * bandwidth);
    }
    out.signal_width = 2.0 * lo.amplitude * std::sqrt(signal_variance);
    return out;
}

CorrelatorRun run_semiclassical_correlator(const field::FieldModel& model, const field::LocalOscillator& lo,
                                           const TimeGrid& grid, double halfwidth, double bandwidth,
                                           RngStream& stream, const DetectorOptions& options)
{
    if (!(halfwidth > 0.0) || !(2.0 * halfwidth < grid.duration()))
        throw std::invalid_argument("run_semiclassical_correlator: halfwidth must be positive and short against the run");

    RngStream field_stream = stream.derive(10);
    RngStream count_stream = stream.derive(11);
    const RngStream current_stream = stream.derive(12);

    const field::FieldPath path = field::generate_path(model, grid, field_stream);
    const auto [counted, homodyned] = field::split_beam(path);
    const auto [port1, port2] = field::mix_with_local_oscillator(homodyned, lo);

    CorrelatorRun run;
    run.triggers = sample_counts(counted.intensity(), grid, count_stream, options);
    run.current = bhd_difference_current(port1.intensity(), port2.intensity(), grid, bandwidth, current_stream, options);

    analysis::HAccumulator acc(halfwidth);
    acc.add(run.triggers, run.current);
    run.counts_used = acc.triggers_used();
    if (run.counts_used > 0) {
        run.conditional = acc.raw();
    } else {
        const auto half = static_cast<Eigen::Index>(std::llround(halfwidth / grid.dt));
        run.conditional.lags = Eigen::VectorXd::LinSpaced(2 * half + 1, -static_cast<double>(half) * grid.dt,
                                                          static_cast<double>(half) * grid.dt);
        run.conditional.values = Eigen::VectorXd::Zero(2 * half + 1);
        run.conditional.standard_error = Eigen::VectorXd::Zero(2 * half + 1);
        run.conditional.inconclusive = true;
    }
    return run;
}

} // namespace lightfluct::detection
