#include "lightfluct/analyzers.hpp"

#include "lightfluct/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lightfluct::analysis {

std::string_view to_string(Normalization n)
{
    switch (n) {
    case Normalization::g2:
        return "g2";
    case Normalization::h:
        return "h";
    default:
        return "raw";
    }
}

Normalization parse_normalization(std::string_view tag)
{
    if (tag == "g2")
        return Normalization::g2;
    if (tag == "h")
        return Normalization::h;
    if (tag == "raw")
        return Normalization::raw;
    throw std::invalid_argument("unknown normalization '" + std::string(tag) + "'");
}

std::string_view to_string(Verdict v)
{
    switch (v) {
    case Verdict::satisfied:
        return "satisfied";
    case Verdict::violated:
        return "violated";
    default:
        return "inconclusive";
    }
}

std::string_view to_string(Extremum e)
{
    switch (e) {
    case Extremum::maximum:
        return "maximum";
    case Extremum::minimum:
        return "minimum";
    default:
        return "none";
    }
}

// ---------------------------------------------------------------------------
// CorrelationSeries

void CorrelationSeries::validate() const
{
    if (values.size() != lags.size() || standard_error.size() != lags.size())
        throw std::invalid_argument("CorrelationSeries: lags, values and standard_error differ in length");
    if (lags.size() == 0)
        throw std::invalid_argument("CorrelationSeries: empty series");
    if (!values.allFinite() || !standard_error.allFinite() || !lags.allFinite())
        throw std::invalid_argument("CorrelationSeries: non-finite entries");
    if ((standard_error.array() < 0.0).any())
        throw std::invalid_argument("CorrelationSeries: negative standard error");
    for (Eigen::Index i = 1; i < lags.size(); ++i)
        if (!(lags[i] > lags[i - 1]))
            throw std::invalid_argument("CorrelationSeries: lags must be strictly increasing");
    if (!symmetric() && lags[0] < -1e-12)
        throw std::invalid_argument("CorrelationSeries: lags must be symmetric about 0 or one-sided");
}

bool CorrelationSeries::symmetric(double tol) const
{
    const Eigen::Index n = lags.size();
    const double scale = std::max(1.0, lags.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < n; ++i)
        if (std::abs(lags[i] + lags[n - 1 - i]) > tol * scale)
            return false;
    return true;
}

Eigen::Index CorrelationSeries::zero_index() const
{
    const double scale = std::max(1.0, lags.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < lags.size(); ++i)
        if (lags[i] >= -1e-12 * scale)
            return i;
    throw std::invalid_argument("CorrelationSeries: no non-negative lag");
}

// ---------------------------------------------------------------------------
// g2

G2Accumulator::G2Accumulator(double bin_width, double max_lag) : bin_width_(bin_width)
{
    if (!(bin_width > 0.0) || !(max_lag > 0.0))
        throw std::invalid_argument("G2Accumulator: bin_width and max_lag must be positive");
    n_bins_ = static_cast<std::size_t>(std::ceil(max_lag / bin_width - 1e-9));
    n_bins_ = std::max<std::size_t>(n_bins_, 1);
    pairs_.assign(n_bins_, 0.0);
    expected_.assign(n_bins_, 0.0);
}

void G2Accumulator::add(const CountRecord& record)
{
    record.validate();
    const double window = record.window();
    if (!(window > 0.0))
        return;
    const auto& t = record.timestamps;
    const double max_lag = bin_width_ * static_cast<double>(n_bins_);
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (std::size_t j = i + 1; j < t.size(); ++j) {
            const double lag = t[j] - t[i];
            if (lag >= max_lag)
                break;
            const auto bin = static_cast<std::size_t>(lag / bin_width_);
            if (bin < n_bins_)
                pairs_[bin] += 1.0;
        }
    }
    // N (N - 1) / T^2 rather than (N / T)^2: the pair count of N uncorrelated
    // events in the window, which keeps short records unbiased.
    const auto n = static_cast<double>(t.size());
    const double rate_sq = n > 1.0 ? n * (n - 1.0) / (window * window) : 0.0;
    for (std::size_t k = 0; k < n_bins_; ++k) {
        const double center = (static_cast<double>(k) + 0.5) * bin_width_;
        expected_[k] += rate_sq * std::max(window - center, 0.0) * bin_width_;
    }
    events_ += t.size();
    observed_time_ += window;
}

void G2Accumulator::merge(const G2Accumulator& other)
{
    if (other.n_bins_ != n_bins_ || std::abs(other.bin_width_ - bin_width_) > 1e-12 * bin_width_)
        throw std::invalid_argument("G2Accumulator::merge: incompatible binning");
    for (std::size_t k = 0; k < n_bins_; ++k) {
        pairs_[k] += other.pairs_[k];
        expected_[k] += other.expected_[k];
    }
    events_ += other.events_;
    observed_time_ += other.observed_time_;
}

CorrelationSeries G2Accumulator::finalize() const
{
    const auto k_bins = static_cast<Eigen::Index>(n_bins_);
    CorrelationSeries out;
    out.normalization = Normalization::g2;
    out.events = events_;
    out.lags.resize(2 * k_bins);
    out.values.resize(2 * k_bins);
    out.standard_error.resize(2 * k_bins);

    const bool usable = events_ >= 2 && expected_[0] > 0.0;
    out.inconclusive = !usable;
    for (Eigen::Index k = 0; k < k_bins; ++k) {
        const double lag = (static_cast<double>(k) + 0.5) * bin_width_;
        const auto idx = static_cast<std::size_t>(k);
        double value = 0.0;
        double err = 0.0;
        if (usable && expected_[idx] > 0.0) {
            value = pairs_[idx] / expected_[idx];
            err = std::sqrt(std::max(pairs_[idx], 1.0)) / expected_[idx];
        }
        out.lags[k_bins + k] = lag;
        out.lags[k_bins - 1 - k] = -lag;
        out.values[k_bins + k] = out.values[k_bins - 1 - k] = value;
        out.standard_error[k_bins + k] = out.standard_error[k_bins - 1 - k] = err;
    }
    return out;
}

CorrelationSeries estimate_g2(const CountRecord& record, double bin_width, double max_lag)
{
    G2Accumulator acc(bin_width, max_lag);
    acc.add(record);
    return acc.finalize();
}

// ---------------------------------------------------------------------------
// h

HAccumulator::HAccumulator(double halfwidth) : halfwidth_(halfwidth)
{
    if (!(halfwidth > 0.0))
        throw std::invalid_argument("HAccumulator: halfwidth must be positive");
}

void HAccumulator::add(const CountRecord& triggers, const PhotocurrentRecord& current)
{
    triggers.validate();
    current.validate();
    const double dt = current.grid.dt;
    if (dt_ == 0.0) {
        dt_ = dt;
        half_samples_ = static_cast<Eigen::Index>(std::llround(halfwidth_ / dt));
        if (half_samples_ < 1)
            throw std::invalid_argument("HAccumulator: halfwidth shorter than one current sample");
        sum_ = Eigen::VectorXd::Zero(2 * half_samples_ + 1);
        sum_sq_ = Eigen::VectorXd::Zero(2 * half_samples_ + 1);
    } else if (std::abs(dt - dt_) > 1e-9 * dt_) {
        throw std::invalid_argument("HAccumulator: current records have different sample spacing");
    }

    const Eigen::Index n = current.samples.size();
    const Eigen::Index width = 2 * half_samples_ + 1;
    for (double t : triggers.timestamps) {
        const double pos = (t - current.grid.t_start) / dt;
        const auto idx = static_cast<Eigen::Index>(std::ceil(pos - 1e-9));
        if (idx - half_samples_ < 0 || idx + half_samples_ >= n)
            continue;
        const auto segment = current.samples.segment(idx - half_samples_, width);
        sum_ += segment;
        sum_sq_ += segment.cwiseAbs2();
        ++used_;
    }

    current_sum_ += current.samples.sum();
    current_count_ += static_cast<double>(n);
    const Eigen::Index n_batches = std::min<Eigen::Index>(64, n);
    const Eigen::Index batch = n / n_batches;
    for (Eigen::Index b = 0; b < n_batches; ++b) {
        const double m = current.samples.segment(b * batch, batch).mean();
        batch_sum_ += m;
        batch_sum_sq_ += m * m;
        batch_count_ += 1.0;
    }
}

void HAccumulator::merge(const HAccumulator& other)
{
    if (other.dt_ == 0.0)
        return;
    if (dt_ == 0.0) {
        *this = other;
        return;
    }
    if (std::abs(other.dt_ - dt_) > 1e-9 * dt_ || other.half_samples_ != half_samples_)
        throw std::invalid_argument("HAccumulator::merge: incompatible accumulators");
    sum_ += other.sum_;
    sum_sq_ += other.sum_sq_;
    used_ += other.used_;
    current_sum_ += other.current_sum_;
    current_count_ += other.current_count_;
    batch_sum_ += other.batch_sum_;
    batch_sum_sq_ += other.batch_sum_sq_;
    batch_count_ += other.batch_count_;
}

double HAccumulator::mean_current() const
{
    return current_count_ > 0.0 ? current_sum_ / current_count_ : 0.0;
}

double HAccumulator::mean_current_stderr() const
{
    if (batch_count_ < 2.0)
        return std::numeric_limits<double>::infinity();
    const double m = batch_sum_ / batch_count_;
    const double var = std::max(batch_sum_sq_ / batch_count_ - m * m, 0.0) * batch_count_ / (batch_count_ - 1.0);
    return std::sqrt(var / batch_count_);
}

CorrelationSeries HAccumulator::raw() const
{
    if (used_ == 0)
        throw InconclusiveStatistics("estimate_h: no usable triggers");
    CorrelationSeries out;
    out.normalization = Normalization::raw;
    out.events = used_;
    out.inconclusive = used_ < 2;
    const Eigen::Index width = sum_.size();
    const double n = static_cast<double>(used_);
    out.lags.resize(width);
    for (Eigen::Index k = 0; k < width; ++k)
        out.lags[k] = static_cast<double>(k - half_samples_) * dt_;
    out.values = sum_ / n;
    if (used_ >= 2) {
        const Eigen::VectorXd var =
            ((sum_sq_ / n - out.values.cwiseAbs2()).cwiseMax(0.0)) * (n / (n - 1.0));
        out.standard_error = (var / n).cwiseSqrt();
    } else {
        out.standard_error = Eigen::VectorXd::Zero(width);
    }
    return out;
}

CorrelationSeries HAccumulator::finalize() const
{
    CorrelationSeries out = raw();
    const double mean = mean_current();
    const double mean_err = mean_current_stderr();
    if (mean == 0.0 || !(std::abs(mean) > 3.0 * mean_err))
        throw InconclusiveStatistics("estimate_h: mean current is consistent with zero; normalisation undefined");
    out.values /= mean;
    out.standard_error /= std::abs(mean);
    out.normalization = Normalization::h;
    return out;
}

CorrelationSeries estimate_h(const CountRecord& triggers, const PhotocurrentRecord& current, double halfwidth)
{
    HAccumulator acc(halfwidth);
    acc.add(triggers, current);
    return acc.finalize();
}

CorrelationSeries rebin(const CorrelationSeries& series, int group)
{
    series.validate();
    if (group < 1 || group % 2 == 0)
        throw std::invalid_argument("rebin: group must be a positive odd number");
    const Eigen::Index zero = series.zero_index();
    if (std::abs(series.lags[zero]) > 1e-9 * std::max(1.0, std::abs(series.lags[series.size() - 1])))
        throw std::invalid_argument("rebin: series has no zero lag");
    const Eigen::Index half = group / 2;
    const Eigen::Index right = (series.size() - 1 - zero - half) / group;
    const Eigen::Index left = series.symmetric() ? right : 0;

    CorrelationSeries out;
    out.normalization = series.normalization;
    out.inconclusive = series.inconclusive;
    out.events = series.events;
    const Eigen::Index m = left + right + 1;
    out.lags.resize(m);
    out.values.resize(m);
    out.standard_error.resize(m);
    for (Eigen::Index j = -left; j <= right; ++j) {
        const Eigen::Index center = zero + j * group;
        Eigen::Index lo = center - half;
        Eigen::Index hi = center + half;
        lo = std::max<Eigen::Index>(lo, 0);
        const Eigen::Index count = hi - lo + 1;
        out.lags[j + left] = series.lags[center];
        out.values[j + left] = series.values.segment(lo, count).mean();
        out.standard_error[j + left] =
            std::sqrt(series.standard_error.segment(lo, count).cwiseAbs2().sum()) / static_cast<double>(count);
    }
    return out;
}

// ---------------------------------------------------------------------------
// squeezing spectrum

SqueezingSpectrum squeezing_spectrum(const CorrelationSeries& h, int zero_padding)
{
    h.validate();
    if (h.normalization != Normalization::h)
        throw AnalysisError("squeezing_spectrum: input must be a normalised h series");
    if (!h.symmetric() || h.size() < 3)
        throw AnalysisError("squeezing_spectrum: lags must be symmetric about zero");
    const Eigen::Index m = h.size();
    const double step = h.lags[1] - h.lags[0];
    for (Eigen::Index i = 1; i < m; ++i)
        if (std::abs(h.lags[i] - h.lags[i - 1] - step) > 1e-6 * step)
            throw AnalysisError("squeezing_spectrum: lags must be uniformly spaced");
    if (zero_padding < 1)
        throw std::invalid_argument("squeezing_spectrum: zero_padding must be >= 1");

    const double tau_max = h.lags[m - 1];
    const Eigen::VectorXd window = 1.0 - h.lags.array().abs() / (tau_max + step);
    const Eigen::VectorXd weighted = window.cwiseProduct(h.values.array().matrix() - Eigen::VectorXd::Ones(m));

    std::vector<double> padded(static_cast<std::size_t>(m) * static_cast<std::size_t>(zero_padding), 0.0);
    std::copy(weighted.data(), weighted.data() + m, padded.begin());
    const Spectrum dft = discrete_fourier_transform(padded, step);

    const auto nf = static_cast<Eigen::Index>(dft.frequencies.size());
    SqueezingSpectrum out;
    out.frequencies.resize(nf);
    out.values.resize(nf);
    out.standard_error.resize(nf);
    const double tau0 = h.lags[0];
    for (Eigen::Index j = 0; j < nf; ++j) {
        const double f = dft.frequencies[static_cast<std::size_t>(j)];
        const std::complex<double> shift = std::polar(1.0, -2.0 * std::numbers::pi * f * tau0);
        out.frequencies[j] = f;
        out.values[j] = step * (shift * dft.values[static_cast<std::size_t>(j)]).real();
        double var = 0.0;
        for (Eigen::Index k = 0; k < m; ++k) {
            const double c = window[k] * std::cos(2.0 * std::numbers::pi * f * h.lags[k]) * h.standard_error[k];
            var += c * c;
        }
        out.standard_error[j] = step * std::sqrt(var);
    }
    return out;
}

// ---------------------------------------------------------------------------
// audits

std::size_t AuditReport::count(Verdict v) const
{
    return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [v](const auto& c) { return c.verdict == v; }));
}

const AuditCheck* AuditReport::find(std::string_view name) const
{
    for (const auto& c : checks)
        if (c.name == name)
            return &c;
    return nullptr;
}

namespace {

Verdict decide(double margin, double err, bool inconclusive)
{
    if (inconclusive)
        return Verdict::inconclusive;
    return margin > 3.0 * std::max(err, kAuditStderrFloor) ? Verdict::violated : Verdict::satisfied;
}

double exceedance(double margin, double err)
{
    return margin - 3.0 * std::max(err, kAuditStderrFloor);
}

// Worst case over lags of |x(tau) - 1| <= |x(0) - 1|.
AuditCheck bounded_by_zero_lag(const CorrelationSeries& s, std::string name, std::string inequality,
                               bool nonnegative_only)
{
    const Eigen::Index z = s.zero_index();
    const double d0 = std::abs(s.values[z] - 1.0);
    AuditCheck check{std::move(name), std::move(inequality), 0.0, 0.0, 0.0, Verdict::inconclusive};
    double worst = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        if (k == z || (nonnegative_only && k < z))
            continue;
        const double margin = std::abs(s.values[k] - 1.0) - d0;
        const double err = std::hypot(s.standard_error[k], s.standard_error[z]);
        if (exceedance(margin, err) > worst) {
            worst = exceedance(margin, err);
            check.margin = margin;
            check.standard_error = err;
            check.tau = s.lags[k];
            any = true;
        }
    }
    check.verdict = decide(check.margin, check.standard_error, s.inconclusive || !any);
    return check;
}

} // namespace

AuditReport audit_classical_bounds(const CorrelationSeries& g2, const std::optional<CorrelationSeries>& h)
{
    g2.validate();
    if (g2.normalization != Normalization::g2)
        throw std::invalid_argument("audit_classical_bounds: first series must be a g2 estimate");
    AuditReport report;

    const Eigen::Index z = g2.zero_index();
    {
        AuditCheck c{"g2_zero_lag_bunching", "g2(0) - 1 >= 0", 1.0 - g2.values[z], g2.standard_error[z], g2.lags[z],
                     Verdict::inconclusive};
        c.verdict = decide(c.margin, c.standard_error, g2.inconclusive);
        report.checks.push_back(c);
    }
    report.checks.push_back(
        bounded_by_zero_lag(g2, "g2_bounded_by_zero_lag", "|g2(tau) - 1| <= |g2(0) - 1|", true));

    if (h) {
        h->validate();
        if (h->normalization != Normalization::h)
            throw std::invalid_argument("audit_classical_bounds: second series must be a normalised h estimate");
        const Eigen::Index hz = h->zero_index();
        AuditCheck c{"h_zero_lag_above_one", "h(0) >= 1", 1.0 - h->values[hz], h->standard_error[hz], h->lags[hz],
                     Verdict::inconclusive};
        c.verdict = decide(c.margin, c.standard_error, h->inconclusive);
        report.checks.push_back(c);
        report.checks.push_back(
            bounded_by_zero_lag(*h, "h_bounded_by_zero_lag", "|h(tau) - 1| <= |h(0) - 1|", false));

        AuditCheck bound{"h_absolute_bound", "h(tau) <= 2", 0.0, 0.0, 0.0, Verdict::inconclusive};
        double worst = -std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < h->size(); ++k) {
            const double margin = h->values[k] - 2.0;
            if (exceedance(margin, h->standard_error[k]) > worst) {
                worst = exceedance(margin, h->standard_error[k]);
                bound.margin = margin;
                bound.standard_error = h->standard_error[k];
                bound.tau = h->lags[k];
            }
        }
        bound.verdict = decide(bound.margin, bound.standard_error, h->inconclusive);
        report.checks.push_back(bound);
    }
    return report;
}

Extremum extremum_at_zero(const CorrelationSeries& series)
{
    series.validate();
    const Eigen::Index z = series.zero_index();
    const Eigen::Index n = series.size();
    const double v0 = series.values[z];
    const double e0 = series.standard_error[z];

    // Baseline from the outermost tenth of lags on each available side.
    const Eigen::Index edge = std::max<Eigen::Index>(1, n / 10);
    double base = 0.0, base_var = 0.0;
    Eigen::Index used = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        if (k < edge || k >= n - edge) {
            if (k == z)
                continue;
            base += series.values[k];
            base_var += series.standard_error[k] * series.standard_error[k];
            ++used;
        }
    }
    if (used == 0)
        return Extremum::none;
    base /= static_cast<double>(used);
    const double base_err = std::sqrt(base_var) / static_cast<double>(used);
    const double tol0 = 3.0 * std::max(std::hypot(e0, base_err), kAuditStderrFloor);

    auto dominates = [&](double sign) {
        for (Eigen::Index k = 0; k < n; ++k) {
            if (k == z)
                continue;
            const double tol = 3.0 * std::max(std::hypot(e0, series.standard_error[k]), kAuditStderrFloor);
            if (sign * (series.values[k] - v0) > tol)
                return false;
        }
        return true;
    };
    if (v0 - base > tol0 && dominates(+1.0))
        return Extremum::maximum;
    if (base - v0 > tol0 && dominates(-1.0))
        return Extremum::minimum;
    return Extremum::none;
}

double oscillation_peak_frequency(std::span<const double> samples, double dt, double baseline, int zero_padding)
{
    if (samples.size() < 4)
        throw std::invalid_argument("oscillation_peak_frequency: need at least four samples");
    std::vector<double> x(samples.size() * static_cast<std::size_t>(std::max(zero_padding, 1)), 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i)
        x[i] = samples[i] - baseline;
    const Spectrum s = discrete_fourier_transform(x, dt);
    std::size_t k = 1;
    while (k < s.values.size() && std::abs(s.values[k]) <= std::abs(s.values[k - 1]))
        ++k;
    if (k >= s.values.size())
        throw AnalysisError("oscillation_peak_frequency: spectrum has no peak beyond the zero-frequency lobe");
    std::size_t best = k;
    for (std::size_t j = k; j < s.values.size(); ++j)
        if (std::abs(s.values[j]) > std::abs(s.values[best]))
            best = j;
    return s.frequencies[best];
}

} // namespace lightfluct::analysis
