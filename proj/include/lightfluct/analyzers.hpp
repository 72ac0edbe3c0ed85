#ifndef LIGHTFLUCT_ANALYZERS_HPP
#define LIGHTFLUCT_ANALYZERS_HPP

#include "lightfluct/records.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lightfluct::analysis {

class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Not enough data to form an estimate (no usable triggers, undefined normalisation, ...).
class InconclusiveStatistics : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

enum class Normalization { g2, h, raw };
std::string_view to_string(Normalization n);
Normalization parse_normalization(std::string_view tag);

/// Correlation estimate on a lag grid. Lags are either symmetric about zero
/// or one-sided (all >= 0, e.g. regression results for the h function).
struct CorrelationSeries {
    Eigen::VectorXd lags;
    Eigen::VectorXd values;
    Eigen::VectorXd standard_error;
    Normalization normalization = Normalization::raw;
    bool inconclusive = false;
    std::size_t events = 0;

    void validate() const;
    [[nodiscard]] Eigen::Index size() const { return lags.size(); }
    [[nodiscard]] bool symmetric(double tol = 1e-9) const;
    /// Index of the smallest non-negative lag (the tau = 0 estimate).
    [[nodiscard]] Eigen::Index zero_index() const;
    [[nodiscard]] double at_zero() const { return values[zero_index()]; }
    [[nodiscard]] double stderr_at_zero() const { return standard_error[zero_index()]; }
};

/// Histogram of ordered detection pairs for g2(tau).
///
/// Pairs (t_i, t_j), j > i, with 0 <= t_j - t_i < max_lag fall into bins
/// [k b, (k+1) b). Each bin is normalised by the coincidences expected for N
/// uncorrelated events in the window T, N (N - 1) (T - tau_k) b / T^2 with
/// tau_k the bin centre, summed over records. The result is mirrored onto
/// negative lags.
class G2Accumulator {
public:
    G2Accumulator(double bin_width, double max_lag);

    void add(const CountRecord& record);
    void merge(const G2Accumulator& other);
    [[nodiscard]] CorrelationSeries finalize() const;

    [[nodiscard]] std::size_t events() const { return events_; }
    [[nodiscard]] double observed_time() const { return observed_time_; }

private:
    double bin_width_;
    std::size_t n_bins_;
    std::vector<double> pairs_;
    std::vector<double> expected_;
    std::size_t events_ = 0;
    double observed_time_ = 0.0;
};

/// Trigger-centred average of a photocurrent.
///
/// For a trigger at time t the lag-0 sample is the first sample starting at or
/// after t, so it never contains current from before the trigger.
class HAccumulator {
public:
    explicit HAccumulator(double halfwidth);

    void add(const CountRecord& triggers, const PhotocurrentRecord& current);
    void merge(const HAccumulator& other);

    /// Conditional average current versus lag (normalization = raw).
    [[nodiscard]] CorrelationSeries raw() const;
    /// raw() divided by the unconditional mean current (normalization = h).
    [[nodiscard]] CorrelationSeries finalize() const;

    [[nodiscard]] std::size_t triggers_used() const { return used_; }
    [[nodiscard]] double mean_current() const;
    [[nodiscard]] double mean_current_stderr() const;

private:
    double halfwidth_;
    double dt_ = 0.0;
    Eigen::Index half_samples_ = 0;
    Eigen::VectorXd sum_;
    Eigen::VectorXd sum_sq_;
    std::size_t used_ = 0;
    double current_sum_ = 0.0;
    double current_count_ = 0.0;
    double batch_sum_ = 0.0;
    double batch_sum_sq_ = 0.0;
    double batch_count_ = 0.0;
};

CorrelationSeries estimate_g2(const CountRecord& record, double bin_width, double max_lag);
CorrelationSeries estimate_h(const CountRecord& triggers, const PhotocurrentRecord& current, double halfwidth);

/// Averages groups of `group` adjacent lags (group odd, centred on lag 0).
CorrelationSeries rebin(const CorrelationSeries& series, int group);

struct SqueezingSpectrum {
    Eigen::VectorXd frequencies;  // ordinary frequency, cycles per time unit
    Eigen::VectorXd values;       // 0 is the shot-noise baseline, negative = squeezed
    Eigen::VectorXd standard_error;
};

/// Transform of h(tau) - 1 with a Bartlett window:
///   S(f) = dtau * sum_k w_k (h_k - 1) cos(2 pi f tau_k),  w_k = 1 - |tau_k| / (tau_max + dtau).
/// The flux prefactor relating S to an absolute noise level is set to one,
/// so only the sign and shape of S are meaningful.
SqueezingSpectrum squeezing_spectrum(const CorrelationSeries& h, int zero_padding = 8);

enum class Verdict { satisfied, violated, inconclusive };
std::string_view to_string(Verdict v);

struct AuditCheck {
    std::string name;
    std::string inequality;
    double margin = 0.0;  // amount by which the inequality is broken (> 0 means broken)
    double standard_error = 0.0;
    double tau = 0.0;     // lag of the worst case
    Verdict verdict = Verdict::inconclusive;
};

struct AuditReport {
    std::vector<AuditCheck> checks;

    [[nodiscard]] std::size_t count(Verdict v) const;
    [[nodiscard]] const AuditCheck* find(std::string_view name) const;
};

/// Standard errors below this are treated as round-off when applying the 3-sigma rule.
inline constexpr double kAuditStderrFloor = 1e-9;

/// Classical-field bounds under intensity-proportional detection:
///   g2(0) >= 1;  |g2(tau) - 1| <= |g2(0) - 1|;
///   h(0) >= 1;   |h(tau) - 1| <= |h(0) - 1|;   h(tau) <= 2.
/// A check is violated when its margin exceeds three standard errors.
AuditReport audit_classical_bounds(const CorrelationSeries& g2, const std::optional<CorrelationSeries>& h);

enum class Extremum { maximum, minimum, none };
std::string_view to_string(Extremum e);
/// Whether tau = 0 holds a significant (3 sigma) global maximum or minimum of the series.
Extremum extremum_at_zero(const CorrelationSeries& series);

/// Ordinary frequency of the strongest spectral peak of (samples - baseline)
/// outside the lobe around zero frequency.
double oscillation_peak_frequency(std::span<const double> samples, double dt, double baseline, int zero_padding = 8);

} // namespace lightfluct::analysis

#endif // LIGHTFLUCT_ANALYZERS_HPP
