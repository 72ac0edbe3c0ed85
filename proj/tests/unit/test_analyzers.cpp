#include "doctest.h"

#include "lightfluct/analyzers.hpp"
#include "lightfluct/detection.hpp"
#include "lightfluct/field.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <numbers>
#include <vector>

using namespace lightfluct;
using namespace lightfluct::analysis;

namespace {

CountRecord poisson_record(double rate, double duration, std::uint64_t seed)
{
    RngStream s(seed, 0);
    CountRecord r;
    r.t0 = 0.0;
    r.t1 = duration;
    for (double t = s.exponential(1.0 / rate); t < duration; t += s.exponential(1.0 / rate))
        r.timestamps.push_back(t);
    return r;
}

CorrelationSeries make_series(std::vector<double> lags, std::vector<double> values, double err, Normalization n)
{
    CorrelationSeries s;
    s.lags = Eigen::Map<Eigen::VectorXd>(lags.data(), static_cast<Eigen::Index>(lags.size()));
    s.values = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    s.standard_error = Eigen::VectorXd::Constant(s.lags.size(), err);
    s.normalization = n;
    return s;
}

// Symmetric series on a uniform grid from a function of tau.
template <typename F>
CorrelationSeries sampled(F f, double step, int half, double err, Normalization n)
{
    std::vector<double> lags, values;
    for (int k = -half; k <= half; ++k) {
        lags.push_back(k * step);
        values.push_back(f(k * step));
    }
    return make_series(lags, values, err, n);
}

// Mean of g(tau) = 1 + m^2/2 cos(w tau) over [a, b).
double cosine_bin_mean(double m, double w, double a, double b)
{
    return 1.0 + 0.5 * m * m * (std::sin(w * b) - std::sin(w * a)) / (w * (b - a));
}

} // namespace

TEST_SUITE("analyzers") {

TEST_CASE("series validation")
{
    auto s = make_series({-1.0, 0.0, 1.0}, {1.0, 2.0, 1.0}, 0.1, Normalization::h);
    CHECK_NOTHROW(s.validate());
    CHECK(s.symmetric());
    CHECK(s.zero_index() == 1);
    auto bad = s;
    bad.values[0] = std::nan("");
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = s;
    bad.standard_error[2] = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = make_series({-2.0, 0.0, 1.0}, {1.0, 2.0, 1.0}, 0.1, Normalization::h);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    const auto one_sided = make_series({0.0, 1.0, 2.0}, {0.5, 0.8, 1.0}, 0.0, Normalization::h);
    CHECK_NOTHROW(one_sided.validate());
    CHECK_FALSE(one_sided.symmetric());
    CHECK(parse_normalization(to_string(Normalization::g2)) == Normalization::g2);
}

TEST_CASE("Poisson record gives g2 = 1 in every bin")
{
    const auto r = poisson_record(2.0, 20000.0, 1);
    const auto g2 = estimate_g2(r, 0.25, 5.0);
    CHECK(g2.size() == 40);
    CHECK(g2.symmetric());
    CHECK_FALSE(g2.inconclusive);
    for (Eigen::Index k = 0; k < g2.size(); ++k) {
        CAPTURE(g2.lags[k]);
        CHECK(std::abs(g2.values[k] - 1.0) <= 3.0 * g2.standard_error[k]);
    }
}

TEST_CASE("chaotic light: g2 follows 1 + exp(-2 tau / tau_c)")
{
    // Pair counts of bunched light are not Poisson, so the scatter over
    // independent paths sets the tolerance here.
    const double dt = 0.02, tau_c = 1.0, b = 0.1;
    const TimeGrid grid(0.0, dt, 125000);
    const int n_paths = 64;
    Eigen::VectorXd sum, sum_sq, lags;
    for (int p = 0; p < n_paths; ++p) {
        RngStream fs(2, static_cast<std::uint64_t>(2 * p)), cs(2, static_cast<std::uint64_t>(2 * p + 1));
        const auto path = field::generate_path(field::ThermalOuField{tau_c, 2.0}, grid, fs);
        const auto g2 = estimate_g2(detection::sample_counts(path.intensity(), grid, cs), b, 3.0);
        const Eigen::VectorXd half = g2.values.tail(g2.size() / 2);
        if (p == 0) {
            lags = g2.lags.tail(g2.size() / 2);
            sum = sum_sq = Eigen::VectorXd::Zero(half.size());
        }
        sum += half;
        sum_sq += half.cwiseAbs2();
    }
    const Eigen::VectorXd mean = sum / n_paths;
    const Eigen::VectorXd se =
        ((sum_sq / n_paths - mean.cwiseAbs2()) * (n_paths / (n_paths - 1.0)) / static_cast<double>(n_paths)).cwiseSqrt();
    // Bonferroni threshold for a 1% family-wise false alarm over all bins.
    const double z_max = boost::math::quantile(boost::math::complement(
        boost::math::normal(), 0.005 / static_cast<double>(mean.size())));
    for (Eigen::Index k = 0; k < mean.size(); ++k) {
        const double a = lags[k] - 0.5 * b;
        const double expected = 1.0 + tau_c / (2.0 * b) * (std::exp(-2.0 * a / tau_c) - std::exp(-2.0 * (a + b) / tau_c));
        CAPTURE(lags[k]);
        CHECK(std::abs(mean[k] - expected) <= z_max * se[k]);
    }
    CHECK(mean[0] == doctest::Approx(2.0).epsilon(0.12));
}

TEST_CASE("cosine-modulated rate: error shrinks as one over root events")
{
    const double r0 = 2.0, m = 0.6, w = 2.0, b = 0.1;
    auto rms_error = [&](double duration, std::uint64_t seed, std::size_t* events) {
        const double dt = 0.01;
        const TimeGrid grid(0.0, dt, static_cast<std::size_t>(duration / dt));
        Eigen::VectorXd rate(static_cast<Eigen::Index>(grid.n_samples));
        for (Eigen::Index i = 0; i < rate.size(); ++i)
            rate[i] = r0 * (1.0 + m * std::cos(w * (grid.time(static_cast<std::size_t>(i)) + 0.5 * dt)));
        RngStream s(seed, 0);
        const auto r = detection::sample_counts(rate, grid, s);
        *events = r.size();
        const auto g2 = estimate_g2(r, b, 3.0);
        double sum = 0.0;
        int n = 0;
        for (Eigen::Index k = g2.zero_index(); k < g2.size(); ++k) {
            const double a = g2.lags[k] - 0.5 * b;
            const double d = g2.values[k] - cosine_bin_mean(m, w, a, a + b);
            sum += d * d;
            ++n;
        }
        return std::sqrt(sum / n);
    };
    std::size_t n_small = 0, n_large = 0;
    const double e_small = rms_error(4000.0, 3, &n_small);
    const double e_large = rms_error(64000.0, 4, &n_large);
    const double predicted = std::sqrt(static_cast<double>(n_large) / static_cast<double>(n_small));
    CAPTURE(e_small);
    CAPTURE(e_large);
    CHECK(e_small / e_large == doctest::Approx(predicted).epsilon(0.35));
}

TEST_CASE("g2 accumulation merges like a single pass")
{
    const auto a = poisson_record(1.0, 500.0, 5);
    const auto b = poisson_record(1.0, 500.0, 6);
    G2Accumulator one(0.5, 4.0), two(0.5, 4.0), both(0.5, 4.0);
    one.add(a);
    two.add(b);
    both.add(a);
    both.add(b);
    one.merge(two);
    const auto x = one.finalize(), y = both.finalize();
    CHECK((x.values - y.values).cwiseAbs().maxCoeff() == 0.0);
    CHECK(x.events == y.events);
    CHECK_THROWS_AS(one.merge(G2Accumulator(0.25, 4.0)), std::invalid_argument);
}

TEST_CASE("many short Poisson records merge to g2 = 1")
{
    // About five events per record, where (N / T)^2 normalization would sit near 1 - 1/5.
    G2Accumulator acc(0.5, 2.0);
    for (std::uint64_t i = 0; i < 20000; ++i)
        acc.add(poisson_record(0.5, 10.0, 100 + i));
    const auto g2 = acc.finalize();
    for (Eigen::Index k = g2.zero_index(); k < g2.size(); ++k) {
        CAPTURE(g2.lags[k]);
        CHECK(std::abs(g2.values[k] - 1.0) <= 3.0 * g2.standard_error[k]);
    }
}

TEST_CASE("g2 with fewer than two events is inconclusive")
{
    CountRecord r;
    r.t0 = 0.0;
    r.t1 = 10.0;
    r.timestamps = {3.0};
    const auto g2 = estimate_g2(r, 0.5, 2.0);
    CHECK(g2.inconclusive);
    const auto report = audit_classical_bounds(g2, std::nullopt);
    CHECK(report.count(Verdict::inconclusive) == report.checks.size());
}

TEST_CASE("h estimation")
{
    const double dt = 0.05;
    PhotocurrentRecord cur;
    cur.grid = TimeGrid(0.0, dt, 2000);
    cur.bandwidth = cur.grid.nyquist();
    cur.samples = Eigen::VectorXd::Constant(2000, 2.0);
    CountRecord trig;
    trig.t0 = 0.0;
    trig.t1 = cur.grid.t_end();

    SUBCASE("no usable triggers")
    {
        trig.timestamps = {0.1, 99.9};
        CHECK_THROWS_AS(estimate_h(trig, cur, 1.0), InconclusiveStatistics);
    }
    SUBCASE("constant current normalises to one")
    {
        trig.timestamps = {10.0, 20.01, 50.04};
        const auto h = estimate_h(trig, cur, 1.0);
        CHECK(h.size() == 41);
        CHECK(h.events == 3);
        CHECK((h.values.array() - 1.0).abs().maxCoeff() < 1e-12);
    }
    SUBCASE("lag zero is the first sample starting at or after the trigger")
    {
        for (Eigen::Index i = 0; i < 2000; ++i)
            cur.samples[i] = static_cast<double>(i);
        trig.timestamps = {10.01};
        HAccumulator acc(0.5);
        acc.add(trig, cur);
        const auto raw = acc.raw();
        CHECK(raw.at_zero() == doctest::Approx(201.0));
        trig.timestamps = {10.0};
        HAccumulator exact(0.5);
        exact.add(trig, cur);
        CHECK(exact.raw().at_zero() == doctest::Approx(200.0));
    }
    SUBCASE("zero mean current leaves h undefined")
    {
        RngStream s(1, 0);
        for (Eigen::Index i = 0; i < 2000; ++i)
            cur.samples[i] = s.standard_gaussian();
        trig.timestamps = {10.0, 20.0, 30.0};
        CHECK_THROWS_AS(estimate_h(trig, cur, 1.0), InconclusiveStatistics);
    }
    SUBCASE("merge matches a single accumulation")
    {
        trig.timestamps = {10.0, 20.0};
        CountRecord other = trig;
        other.timestamps = {30.0, 40.0};
        HAccumulator a(1.0), b(1.0), c(1.0);
        a.add(trig, cur);
        b.add(other, cur);
        c.add(trig, cur);
        c.add(other, cur);
        a.merge(b);
        CHECK(a.triggers_used() == 4);
        CHECK((a.raw().values - c.raw().values).norm() == 0.0);
        CHECK(a.mean_current() == c.mean_current());
    }
    CHECK_THROWS_AS(HAccumulator(0.0), std::invalid_argument);
}

TEST_CASE("h tends to one at the segment edge for stationary sources")
{
    const TimeGrid grid(0.0, 0.05, 2000000);
    const field::FieldModel models[] = {field::CoherentField{1.0, 0.0},
                                        field::BurstField{1.0, 0.3, 0.4, 2.0, 0.5, field::BurstSign::positive, 0.0}};
    std::uint64_t seed = 20;
    for (const auto& model : models) {
        RngStream s(seed++, 0);
        const auto run = detection::run_semiclassical_correlator(model, {5.0, 0.0}, grid, 8.0, 2.0, s);
        const auto h = rebin(estimate_h(run.triggers, run.current, 8.0), 11);
        CAPTURE(field::model_name(model));
        CHECK(std::abs(h.values[0] - 1.0) <= 3.0 * h.standard_error[0]);
        CHECK(std::abs(h.values[h.size() - 1] - 1.0) <= 3.0 * h.standard_error[h.size() - 1]);
    }
}

TEST_CASE("rebinning")
{
    const auto s = sampled([](double t) { return t * t; }, 0.5, 7, 0.3, Normalization::raw);
    const auto r = rebin(s, 3);
    CHECK(r.size() == 5);
    CHECK(r.lags[2] == 0.0);
    CHECK(r.values[2] == doctest::Approx((0.25 + 0.0 + 0.25) / 3.0));
    CHECK(r.standard_error[2] == doctest::Approx(0.3 / std::sqrt(3.0)));
    CHECK(r.symmetric());
    CHECK_THROWS_AS(rebin(s, 2), std::invalid_argument);
    CHECK_THROWS_AS(rebin(make_series({-0.5, 0.5}, {1.0, 1.0}, 0.1, Normalization::g2), 1), std::invalid_argument);
    const auto one_sided = make_series({0.0, 1.0, 2.0, 3.0, 4.0}, {1, 2, 3, 4, 5}, 0.0, Normalization::h);
    const auto o = rebin(one_sided, 3);
    CHECK(o.size() == 2);
    CHECK(o.values[0] == doctest::Approx(1.5));
    CHECK(o.values[1] == doctest::Approx(4.0));
}

TEST_CASE("squeezing spectrum")
{
    SUBCASE("flat h sits on the shot-noise baseline")
    {
        const auto h = sampled([](double) { return 1.0; }, 0.1, 50, 0.01, Normalization::h);
        const auto s = squeezing_spectrum(h);
        CHECK(s.values.cwiseAbs().maxCoeff() < 1e-12);
        CHECK(s.standard_error.minCoeff() > 0.0);
    }
    SUBCASE("damped cosine matches its closed-form transform")
    {
        const double amp = -0.4, gamma = 1.0, omega = 3.0, step = 0.05;
        const auto h = sampled([&](double t) { return 1.0 + amp * std::exp(-gamma * std::abs(t)) * std::cos(omega * t); },
                               step, 4000, 0.0, Normalization::h);
        const auto s = squeezing_spectrum(h, 1);
        double err = 0.0, ref = 0.0;
        for (Eigen::Index j = 0; j < s.frequencies.size(); ++j) {
            const double w = 2.0 * std::numbers::pi * s.frequencies[j];
            const double exact = amp * (gamma / (gamma * gamma + (w - omega) * (w - omega)) +
                                        gamma / (gamma * gamma + (w + omega) * (w + omega)));
            err += (s.values[j] - exact) * (s.values[j] - exact);
            ref += exact * exact;
        }
        CHECK(std::sqrt(err / ref) < 0.02);
    }
    SUBCASE("invalid inputs")
    {
        auto raw = sampled([](double) { return 1.0; }, 0.1, 5, 0.0, Normalization::raw);
        CHECK_THROWS_AS(squeezing_spectrum(raw), AnalysisError);
        const auto one_sided = make_series({0.0, 1.0, 2.0}, {1, 1, 1}, 0.0, Normalization::h);
        CHECK_THROWS_AS(squeezing_spectrum(one_sided), AnalysisError);
        const auto uneven = make_series({-2.0, -0.5, 0.0, 0.5, 2.0}, {1, 1, 1, 1, 1}, 0.0, Normalization::h);
        CHECK_THROWS_AS(squeezing_spectrum(uneven), AnalysisError);
    }
}

TEST_CASE("classical bound audit")
{
    const auto flat_g2 = sampled([](double) { return 1.0; }, 0.2, 10, 0.01, Normalization::g2);
    SUBCASE("coherent statistics satisfy every bound")
    {
        const auto h = sampled([](double) { return 1.0; }, 0.2, 10, 0.01, Normalization::h);
        const auto report = audit_classical_bounds(flat_g2, h);
        CHECK(report.checks.size() == 5);
        CHECK(report.count(Verdict::satisfied) == 5);
    }
    SUBCASE("antibunching violates the zero-lag inequality")
    {
        const auto g2 = sampled([](double t) { return 1.0 - 0.3 * std::exp(-std::abs(t)); }, 0.2, 10, 0.01,
                                Normalization::g2);
        const auto report = audit_classical_bounds(g2, std::nullopt);
        CHECK(report.find("g2_zero_lag_bunching")->verdict == Verdict::violated);
        CHECK(report.find("g2_zero_lag_bunching")->margin == doctest::Approx(0.3));
    }
    SUBCASE("a side peak above the zero-lag value violates the second inequality")
    {
        const auto g2 = sampled([](double t) { return 1.2 + 0.5 * std::exp(-(t - 1.0) * (t - 1.0) * 10.0); }, 0.2, 10,
                                0.01, Normalization::g2);
        const auto report = audit_classical_bounds(g2, std::nullopt);
        const auto* c = report.find("g2_bounded_by_zero_lag");
        CHECK(c->verdict == Verdict::violated);
        CHECK(c->tau == doctest::Approx(1.0));
    }
    SUBCASE("small excursions within three sigma are not violations")
    {
        const auto g2 = sampled([](double) { return 0.98; }, 0.2, 10, 0.01, Normalization::g2);
        CHECK(audit_classical_bounds(g2, std::nullopt).count(Verdict::violated) == 0);
    }
    SUBCASE("h minimum at zero and h above two")
    {
        const auto dip = sampled([](double t) { return 1.0 - 0.4 * std::exp(-std::abs(t)); }, 0.2, 10, 0.01,
                                 Normalization::h);
        const auto r1 = audit_classical_bounds(flat_g2, dip);
        CHECK(r1.find("h_zero_lag_above_one")->verdict == Verdict::violated);
        CHECK(r1.find("h_absolute_bound")->verdict == Verdict::satisfied);
        const auto tall = sampled([](double t) { return 1.0 + 2.0 * std::exp(-std::abs(t)); }, 0.2, 10, 0.01,
                                  Normalization::h);
        const auto r2 = audit_classical_bounds(flat_g2, tall);
        CHECK(r2.find("h_absolute_bound")->verdict == Verdict::violated);
        CHECK(r2.find("h_absolute_bound")->tau == doctest::Approx(0.0));
        CHECK(r2.find("h_zero_lag_above_one")->verdict == Verdict::satisfied);
    }
    SUBCASE("zero-error series use the round-off floor")
    {
        const auto g2 = sampled([](double) { return 1.0 - 1e-12; }, 0.2, 10, 0.0, Normalization::g2);
        CHECK(audit_classical_bounds(g2, std::nullopt).count(Verdict::violated) == 0);
    }
    CHECK_THROWS_AS(audit_classical_bounds(sampled([](double) { return 1.0; }, 0.2, 3, 0.0, Normalization::h),
                                           std::nullopt),
                    std::invalid_argument);
    CHECK(to_string(Verdict::violated) == "violated");
}

TEST_CASE("extremum at zero")
{
    const auto peak = sampled([](double t) { return 1.0 + std::exp(-t * t); }, 0.1, 50, 0.01, Normalization::h);
    CHECK(extremum_at_zero(peak) == Extremum::maximum);
    const auto dip = sampled([](double t) { return 1.0 - 0.5 * std::exp(-t * t); }, 0.1, 50, 0.01, Normalization::h);
    CHECK(extremum_at_zero(dip) == Extremum::minimum);
    const auto flat = sampled([](double) { return 1.0; }, 0.1, 50, 0.01, Normalization::h);
    CHECK(extremum_at_zero(flat) == Extremum::none);
    const auto shifted = sampled([](double t) { return 1.0 + std::exp(-(t - 1.0) * (t - 1.0) * 4.0); }, 0.1, 50, 0.01,
                                 Normalization::h);
    CHECK(extremum_at_zero(shifted) == Extremum::none);
    CHECK(to_string(Extremum::minimum) == "minimum");
}

TEST_CASE("oscillation peak frequency")
{
    const double dt = 0.02, f0 = 1.3;
    std::vector<double> x(2000);
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = 1.0 + std::exp(-0.2 * dt * i) * std::cos(2 * std::numbers::pi * f0 * dt * i);
    CHECK(oscillation_peak_frequency(x, dt, 1.0) == doctest::Approx(f0).epsilon(0.01));
    std::vector<double> decay(400);
    for (std::size_t i = 0; i < decay.size(); ++i)
        decay[i] = std::exp(-5.0 * dt * i);
    CHECK_THROWS_AS(oscillation_peak_frequency(decay, dt, 0.0), AnalysisError);
}

}
