#include "doctest.h"
#include "stats.hpp"

#include "lightfluct/analyzers.hpp"
#include "lightfluct/quantum.hpp"

#include <cmath>
#include <numbers>

using namespace lightfluct;
using namespace lightfluct::quantum;

namespace {

SystemParams empty_cavity(double drive)
{
    return SystemParams{0.0, 1.0, 1.0, drive, 12};
}

double factorial(int n)
{
    return std::tgamma(n + 1.0);
}

} // namespace

TEST_SUITE("quantum") {

TEST_CASE("operator structure")
{
    SUBCASE("undriven, uncoupled Hamiltonian vanishes")
    {
        const auto ops = build_system(SystemParams{0.0, 1.0, 1.0, 0.0, 5});
        CHECK(ops.hamiltonian.norm() == 0.0);
    }
    SUBCASE("Hamiltonian is Hermitian")
    {
        const auto ops = build_system(strong_coupling_params());
        CHECK((ops.hamiltonian - ops.hamiltonian.adjoint()).norm() == 0.0);
        CHECK(ops.dimension() == 16);
    }
    SUBCASE("truncated commutator is the identity except on the top level")
    {
        const int n = 6;
        const auto ops = build_system(SystemParams{1.0, 1.0, 1.0, 0.1, n});
        const MatrixXc comm = ops.a * ops.a.adjoint() - ops.a.adjoint() * ops.a;
        for (int atom = 0; atom < 2; ++atom)
            for (int k = 0; k < n; ++k) {
                const int i = atom * n + k;
                CHECK(comm(i, i).real() == doctest::Approx(k == n - 1 ? 1.0 - n : 1.0));
            }
        MatrixXc off = comm;
        off.diagonal().setZero();
        CHECK(off.norm() == 0.0);
    }
    SUBCASE("quadrature is Hermitian")
    {
        const auto ops = build_system(default_params());
        const MatrixXc q = ops.quadrature(0.3);
        CHECK((q - q.adjoint()).norm() < 1e-15);
    }
    CHECK_THROWS_AS(build_system(SystemParams{1.0, 1.0, 1.0, 0.1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(build_system(SystemParams{1.0, -1.0, 1.0, 0.1, 4}), std::invalid_argument);
}

TEST_CASE("master equation")
{
    SUBCASE("dark vacuum is stationary")
    {
        const auto p = SystemParams{2.0, 1.0, 1.0, 0.0, 6};
        const auto rho0 = ground_state(p);
        CHECK((evolve_master(rho0, p, 5.0) - rho0).norm() < 1e-14);
    }
    SUBCASE("driven empty cavity relaxes to a coherent state")
    {
        const auto p = empty_cavity(0.2);
        const auto ops = build_system(p);
        const auto rho = evolve_master(ground_state(p), p, 60.0);
        const std::complex<double> alpha(0.0, -2.0 * p.drive / p.kappa);
        CHECK(std::abs(expect(rho, ops.a) - alpha) < 1e-8);
        CHECK(std::abs(expect(rho, ops.a.adjoint() * ops.a).real() - std::norm(alpha)) < 1e-8);
    }
    SUBCASE("trace and hermiticity are preserved")
    {
        const auto p = strong_coupling_params();
        const MasterEquation me(p);
        const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(11, 0.0, 10.0);
        for (const auto& rho : me.evolve_series(ground_state(p), times)) {
            CHECK(std::abs(rho.trace() - 1.0) < 1e-8);
            validate_density(rho, 1e-8);
            const Eigen::SelfAdjointEigenSolver<MatrixXc> eig(0.5 * (rho + rho.adjoint()));
            CHECK(eig.eigenvalues().minCoeff() > -1e-10);
        }
    }
    SUBCASE("transient oscillates at the vacuum-Rabi frequency")
    {
        const auto p = strong_coupling_params();
        const double dt = 0.05;
        const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(401, 0.0, 400 * dt);
        const Eigen::VectorXd n = transient_photon_number(p, times);
        const double n_ss = expect(steady_state(p), build_system(p).a.adjoint() * build_system(p).a).real();
        const double f = analysis::oscillation_peak_frequency(std::span<const double>(n.data(), n.size()), dt, n_ss);
        CHECK(2.0 * std::numbers::pi * f == doctest::Approx(p.g).epsilon(0.05));
    }
    CHECK_THROWS_AS(evolve_master(ground_state(default_params()), default_params(), -1.0), std::invalid_argument);
    CHECK_THROWS_AS(evolve_master(MatrixXc::Identity(3, 3), default_params(), 1.0), std::invalid_argument);
}

TEST_CASE("steady state")
{
    SUBCASE("undriven system rests in the ground state")
    {
        const auto p = SystemParams{1.0, 1.0, 1.0, 0.0, 5};
        CHECK((steady_state(p) - ground_state(p)).norm() < 1e-10);
    }
    SUBCASE("empty cavity gives a coherent-state density matrix")
    {
        const auto p = SystemParams{0.0, 1.0, 1.0, 0.3, 10};
        const auto rho = steady_state(p);
        const std::complex<double> alpha(0.0, -2.0 * p.drive / p.kappa);
        VectorXc coherent = VectorXc::Zero(p.dimension());
        for (int k = 0; k < p.fock_cutoff; ++k)
            coherent[k] = std::exp(-0.5 * std::norm(alpha)) * std::pow(alpha, k) / std::sqrt(factorial(k));
        const MatrixXc expected = coherent * coherent.adjoint();
        CHECK((rho - expected).norm() < 1e-6);
    }
    SUBCASE("residual is below 1e-10 and matches long-time evolution")
    {
        const auto p = strong_coupling_params();
        const MasterEquation me(p);
        const auto rho = me.steady_state();
        CHECK(me.residual(rho) < 1e-10);
        const MatrixXc n_op = me.operators().a.adjoint() * me.operators().a;
        const auto late = me.evolve(ground_state(p), 60.0);
        CHECK(std::abs(expect(rho, n_op).real() - expect(late, n_op).real()) < 1e-8);
        CHECK(top_fock_population(rho, p.fock_cutoff) < 1e-8);
    }
    CHECK_THROWS_AS(steady_state(SystemParams{1.0, 0.0, 0.0, 0.1, 4}), QuantumError);
}

TEST_CASE("default source sits inside the truncation")
{
    const auto rho = steady_state(default_params());
    CHECK(top_fock_population(rho, default_params().fock_cutoff) < 1e-8);
}

TEST_CASE("intensity regression")
{
    const Eigen::VectorXd taus = Eigen::VectorXd::LinSpaced(201, 0.0, 20.0);
    SUBCASE("coherent output is uncorrelated")
    {
        const auto g2 = g2_regression(empty_cavity(0.2), taus);
        CHECK((g2.values.array() - 1.0).abs().maxCoeff() < 1e-8);
    }
    SUBCASE("default source is antibunched and relaxes to one")
    {
        const auto g2 = g2_regression(default_params(), taus);
        CHECK(g2.normalization == analysis::Normalization::g2);
        CHECK(g2.symmetric());
        CHECK(g2.at_zero() < 1.0);
        // slowest decay rate is (kappa + gamma) / 4 here, so 1e-6 is reached by tau = 40
        const auto late = g2_regression(default_params(), Eigen::VectorXd::LinSpaced(401, 0.0, 40.0));
        CHECK(std::abs(late.values[late.size() - 1] - 1.0) < 1e-6);
        CHECK(std::abs(late.values[0] - 1.0) < 1e-6);
        CHECK(g2.standard_error.cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK_THROWS_AS(g2_regression(default_params(), Eigen::VectorXd::LinSpaced(3, 0.5, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(g2_regression(SystemParams{1.0, 1.0, 1.0, 0.0, 4}, taus), QuantumError);
}

TEST_CASE("field regression")
{
    const Eigen::VectorXd taus = Eigen::VectorXd::LinSpaced(201, 0.0, 20.0);
    SUBCASE("coherent output is uncorrelated")
    {
        const auto h = h_regression(empty_cavity(0.2), kDefaultLoPhase, taus);
        CHECK((h.values.array() - 1.0).abs().maxCoeff() < 1e-8);
    }
    SUBCASE("default source has its minimum at zero delay")
    {
        const auto h = h_regression(default_params(), kDefaultLoPhase, taus);
        CHECK(h.values[0] < 1.0);
        CHECK(h.values.minCoeff() == h.values[0]);
        const auto late = h_regression(default_params(), kDefaultLoPhase, Eigen::VectorXd::LinSpaced(401, 0.0, 40.0));
        CHECK(std::abs(late.values[late.size() - 1] - 1.0) < 1e-6);
    }
    SUBCASE("orthogonal LO phase is degenerate")
    {
        CHECK_THROWS_AS(h_regression(empty_cavity(0.2), 0.0, taus), QuantumError);
    }
}

TEST_CASE("truncation raised by two leaves the correlations unchanged")
{
    const Eigen::VectorXd taus = Eigen::VectorXd::LinSpaced(2, 0.0, 0.1);
    auto p = default_params();
    const double g2a = g2_regression(p, taus).at_zero();
    const double ha = h_regression(p, kDefaultLoPhase, taus).values[0];
    p.fock_cutoff += 2;
    CHECK(std::abs(g2_regression(p, taus).at_zero() - g2a) < 1e-6);
    CHECK(std::abs(h_regression(p, kDefaultLoPhase, taus).values[0] - ha) < 1e-6);
}

TEST_CASE("unravel option validation")
{
    UnravelOptions o;
    o.split_to_counter = 0.0;
    CHECK_THROWS_AS(o.validate(default_params()), std::invalid_argument);
    o.split_to_counter = 1.0;
    CHECK_THROWS_AS(o.validate(default_params()), std::invalid_argument);
    o.split_to_counter = 0.5;
    o.dt = 0.1;
    CHECK_THROWS_AS(o.validate(strong_coupling_params()), std::invalid_argument);
    o.dt = 0.01;
    CHECK_NOTHROW(o.validate(strong_coupling_params()));
}

TEST_CASE("dark source: no jumps and a zero-mean current")
{
    const auto p = SystemParams{0.6, 1.0, 1.0, 0.0, 6};
    UnravelOptions o;
    o.duration = 2000.0;
    o.dt = 0.02;
    RngStream s(3, 0);
    const auto rec = unravel_mixed(p, o, s);
    CHECK(rec.jumps.size() == 0);
    CHECK(rec.atom_jumps == 0);
    const double se = std::sqrt(1.0 / (o.dt * static_cast<double>(rec.current.samples.size())));
    CHECK(std::abs(rec.current.samples.mean()) <= 3.0 * se);
    rec.current.validate();
}

TEST_CASE("trajectory record layout")
{
    UnravelOptions o;
    o.duration = 10.0;
    o.burn_in = 2.0;
    o.dt = 0.02;
    o.observe_every = 50;
    RngStream s(7, 4);
    const auto rec = unravel_mixed(default_params(), o, s);
    CHECK(rec.seed == 7);
    CHECK(rec.stream_id == 4);
    CHECK(rec.jumps.t0 == doctest::Approx(2.0));
    CHECK(rec.jumps.t1 == doctest::Approx(12.0));
    CHECK(rec.current.grid.n_samples == 500);
    CHECK(rec.observe_times.size() == 13);
    CHECK(rec.observe_times[12] == doctest::Approx(12.0));
    rec.jumps.validate();

    RngStream again(7, 4);
    const auto rec2 = unravel_mixed(default_params(), o, again);
    CHECK(rec2.current.samples == rec.current.samples);
    CHECK(rec2.jumps.timestamps == rec.jumps.timestamps);
}

TEST_CASE("ensemble means follow the master equation")
{
    const auto p = default_params();
    UnravelOptions o;
    o.duration = 4.0;
    o.dt = 0.01;
    o.observe_every = 50;
    const int n_traj = 4000;
    Eigen::VectorXd sn, sn2, sq, sq2, times;
    for (int i = 0; i < n_traj; ++i) {
        RngStream s(31, static_cast<std::uint64_t>(i));
        const auto rec = unravel_mixed(p, o, s);
        if (i == 0) {
            times = rec.observe_times;
            sn = sn2 = sq = sq2 = Eigen::VectorXd::Zero(times.size());
        }
        sn += rec.photon_number;
        sn2 += rec.photon_number.cwiseAbs2();
        sq += rec.quadrature;
        sq2 += rec.quadrature.cwiseAbs2();
    }
    const MasterEquation me(p);
    const auto states = me.evolve_series(ground_state(p), times);
    const MatrixXc n_op = me.operators().a.adjoint() * me.operators().a;
    const MatrixXc q_op = me.operators().quadrature(o.lo_phase);
    const double n = n_traj;
    // before t = 1 fewer than one jump is expected across the ensemble and the
    // sample standard error does not see the jump contribution
    for (Eigen::Index k = 2; k < times.size(); ++k) {
        const double mn = sn[k] / n, mq = sq[k] / n;
        const double se_n = std::sqrt(std::max(sn2[k] / n - mn * mn, 0.0) / (n - 1.0));
        const double se_q = std::sqrt(std::max(sq2[k] / n - mq * mq, 0.0) / (n - 1.0));
        CAPTURE(times[k]);
        CHECK(std::abs(mn - expect(states[static_cast<std::size_t>(k)], n_op).real()) <= 3.0 * se_n);
        CHECK(std::abs(mq - expect(states[static_cast<std::size_t>(k)], q_op).real()) <= 3.0 * se_q);
    }
}

TEST_CASE("counting-channel rate matches the steady state")
{
    const auto p = default_params();
    UnravelOptions o;
    o.duration = 500.0;
    o.burn_in = 20.0;
    o.dt = 0.04;
    std::vector<double> counts;
    for (int i = 0; i < 40; ++i) {
        RngStream s(41, static_cast<std::uint64_t>(i));
        counts.push_back(static_cast<double>(unravel_mixed(p, o, s).jumps.size()));
    }
    const auto m = testing_stats::moments(counts);
    const auto ops = build_system(p);
    const double n_ss = expect(steady_state(p), ops.a.adjoint() * ops.a).real();
    const double expected = o.split_to_counter * p.kappa * n_ss * o.duration;
    CHECK(testing_stats::within_sigma(m.mean, expected, m.mean_stderr()));
}

TEST_CASE("counting-channel g2 does not depend on the split")
{
    const auto p = SystemParams{0.6, 1.0, 1.0, 0.6, 8};
    std::vector<analysis::CorrelationSeries> series;
    for (double split : {0.2, 0.5, 0.8}) {
        UnravelOptions o;
        o.split_to_counter = split;
        o.duration = 5000.0;
        o.burn_in = 20.0;
        o.dt = 0.04;
        analysis::G2Accumulator acc(0.5, 2.0);
        for (int i = 0; i < 20; ++i) {
            RngStream s(51, static_cast<std::uint64_t>(i));
            acc.add(unravel_mixed(p, o, s).jumps);
        }
        series.push_back(acc.finalize());
    }
    for (std::size_t a = 0; a < series.size(); ++a)
        for (std::size_t b = a + 1; b < series.size(); ++b)
            for (Eigen::Index k = 0; k < series[a].size(); ++k) {
                CAPTURE(series[a].lags[k]);
                const double ratio = series[a].values[k] / series[b].values[k];
                const double se = ratio * std::hypot(series[a].standard_error[k] / series[a].values[k],
                                                     series[b].standard_error[k] / series[b].values[k]);
                CHECK(std::abs(ratio - 1.0) <= 3.0 * se);
            }
}

}
