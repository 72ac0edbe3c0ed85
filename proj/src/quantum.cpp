#include "lightfluct/quantum.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>

namespace lightfluct::quantum {

using cd = std::complex<double>;

void SystemParams::validate() const
{
    for (const auto& [value, name] : {std::pair{g, "g"}, std::pair{kappa, "kappa"}, std::pair{gamma, "gamma"},
                                      std::pair{drive, "drive"}}) {
        if (!(value >= 0.0) || !std::isfinite(value))
            throw std::invalid_argument(std::string("SystemParams: ") + name + " must be finite and >= 0");
    }
    if (fock_cutoff < 2)
        throw std::invalid_argument("SystemParams: fock_cutoff must be >= 2");
}

double SystemParams::max_rate() const
{
    return std::max({kappa, gamma, g, drive});
}

SystemParams default_params()
{
    return SystemParams{};
}

SystemParams strong_coupling_params()
{
    return SystemParams{3.0, 1.0, 1.0, 0.1, 8};
}

MatrixXc OperatorSet::quadrature(double theta) const
{
    const cd phase = std::polar(1.0, theta);
    return 0.5 * (a * std::conj(phase) + a.adjoint() * phase);
}

OperatorSet build_system(const SystemParams& params)
{
    params.validate();
    const int n = params.fock_cutoff;
    MatrixXc cavity_a = MatrixXc::Zero(n, n);
    for (int k = 1; k < n; ++k)
        cavity_a(k - 1, k) = std::sqrt(static_cast<double>(k));
    MatrixXc lower = MatrixXc::Zero(2, 2);
    lower(0, 1) = 1.0;

    OperatorSet ops;
    ops.fock_cutoff = n;
    ops.a = Eigen::kroneckerProduct(MatrixXc::Identity(2, 2), cavity_a).eval();
    ops.sigma = Eigen::kroneckerProduct(lower, MatrixXc::Identity(n, n)).eval();
    const MatrixXc ad = ops.a.adjoint();
    ops.hamiltonian = params.g * (ad * ops.sigma + ops.a * ops.sigma.adjoint()) + params.drive * (ad + ops.a);
    ops.collapse_cavity = std::sqrt(params.kappa) * ops.a;
    ops.collapse_atom = std::sqrt(params.gamma) * ops.sigma;
    ops.field = ops.collapse_cavity;
    return ops;
}

MatrixXc liouvillian(const OperatorSet& ops)
{
    const Eigen::Index d = ops.dimension();
    const MatrixXc id = MatrixXc::Identity(d, d);
    MatrixXc l = cd(0.0, -1.0) * (Eigen::kroneckerProduct(id, ops.hamiltonian).eval() -
                                  Eigen::kroneckerProduct(ops.hamiltonian.transpose(), id).eval());
    for (const MatrixXc* c : {&ops.collapse_cavity, &ops.collapse_atom}) {
        const MatrixXc cdc = c->adjoint() * *c;
        l += Eigen::kroneckerProduct(c->conjugate(), *c).eval();
        l -= 0.5 * Eigen::kroneckerProduct(id, cdc).eval();
        l -= 0.5 * Eigen::kroneckerProduct(cdc.transpose(), id).eval();
    }
    return l;
}

DensityMatrix ground_state(const SystemParams& params)
{
    DensityMatrix rho = DensityMatrix::Zero(params.dimension(), params.dimension());
    rho(0, 0) = 1.0;
    return rho;
}

cd expect(const DensityMatrix& rho, const MatrixXc& op)
{
    return (op * rho).trace();
}

cd expect(const PureState& psi, const MatrixXc& op)
{
    return psi.dot(op * psi);
}

void validate_density(const DensityMatrix& rho, double tol)
{
    if (rho.rows() != rho.cols())
        throw std::invalid_argument("density matrix must be square");
    if (!rho.allFinite())
        throw std::invalid_argument("density matrix has non-finite entries");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument("density matrix is not Hermitian");
    if (std::abs(rho.trace() - cd(1.0)) > tol)
        throw std::invalid_argument("density matrix trace differs from 1");
}

double top_fock_population(const DensityMatrix& rho, int fock_cutoff)
{
    const Eigen::Index top = fock_cutoff - 1;
    return rho(top, top).real() + rho(fock_cutoff + top, fock_cutoff + top).real();
}

namespace {

VectorXc vec(const DensityMatrix& rho)
{
    return Eigen::Map<const VectorXc>(rho.data(), rho.size());
}

DensityMatrix unvec(const VectorXc& v, Eigen::Index d)
{
    return Eigen::Map<const MatrixXc>(v.data(), d, d);
}

} // namespace

MasterEquation::MasterEquation(const SystemParams& params)
    : params_(params), ops_(build_system(params)), generator_(liouvillian(ops_))
{
    const double norm = generator_.cwiseAbs().rowwise().sum().maxCoeff();
    max_step_ = norm > 0.0 ? std::min(0.01, 0.2 / norm) : 0.01;
}

VectorXc MasterEquation::advance(VectorXc v, double t) const
{
    if (!(t >= 0.0))
        throw std::invalid_argument("evolve_master: time must be >= 0");
    if (t == 0.0)
        return v;
    const auto steps = static_cast<std::size_t>(std::ceil(t / max_step_ - 1e-9));
    const double h = t / static_cast<double>(steps);
    auto it = cache_.find(h);
    if (it == cache_.end()) {
        if (cache_.size() > 16)
            cache_.clear();
        it = cache_.emplace(h, LinearPropagator<double>(generator_, h)).first;
    }
    try {
        return it->second.advance(std::move(v), steps);
    } catch (const NumericsError& e) {
        throw QuantumError(std::string("evolve_master: ") + e.what());
    }
}

DensityMatrix MasterEquation::evolve(const DensityMatrix& rho, double t) const
{
    if (rho.rows() != ops_.dimension() || rho.cols() != ops_.dimension())
        throw std::invalid_argument("evolve_master: density matrix dimension does not match the system");
    return unvec(advance(vec(rho), t), ops_.dimension());
}

std::vector<DensityMatrix> MasterEquation::evolve_series(const DensityMatrix& rho, const Eigen::VectorXd& times) const
{
    std::vector<DensityMatrix> out;
    out.reserve(static_cast<std::size_t>(times.size()));
    VectorXc v = vec(rho);
    double now = 0.0;
    for (Eigen::Index i = 0; i < times.size(); ++i) {
        if (times[i] < now)
            throw std::invalid_argument("evolve_series: times must be non-decreasing and >= 0");
        v = advance(std::move(v), times[i] - now);
        now = times[i];
        out.push_back(unvec(v, ops_.dimension()));
    }
    return out;
}

double MasterEquation::residual(const DensityMatrix& rho) const
{
    return (generator_ * vec(rho)).cwiseAbs().maxCoeff();
}

DensityMatrix MasterEquation::steady_state() const
{
    if (!(params_.kappa > 0.0 || params_.gamma > 0.0))
        throw QuantumError("steady_state: needs kappa > 0 or gamma > 0");
    const Eigen::Index d = ops_.dimension();
    // Replace the first equation by the trace condition.
    MatrixXc m = generator_;
    m.row(0).setZero();
    for (Eigen::Index i = 0; i < d; ++i)
        m(0, i * d + i) = 1.0;
    VectorXc b = VectorXc::Zero(d * d);
    b[0] = 1.0;
    const Eigen::PartialPivLU<MatrixXc> lu(m);
    VectorXc x = lu.solve(b);
    for (int refine = 0; refine < 3 && (generator_ * x).cwiseAbs().maxCoeff() > 1e-12; ++refine)
        x += lu.solve(b - m * x);
    DensityMatrix rho = unvec(x, d);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace();
    if (!rho.allFinite() || residual(rho) > 1e-10)
        throw QuantumError("steady_state: linear solve did not converge (residual " + std::to_string(residual(rho)) + ")");
    return rho;
}

DensityMatrix evolve_master(const DensityMatrix& rho, const SystemParams& params, double t)
{
    return MasterEquation(params).evolve(rho, t);
}

DensityMatrix steady_state(const SystemParams& params)
{
    return MasterEquation(params).steady_state();
}

namespace {

void check_tau_grid(const Eigen::VectorXd& taus)
{
    if (taus.size() < 1 || taus[0] != 0.0)
        throw std::invalid_argument("regression: tau grid must start at 0");
    for (Eigen::Index i = 1; i < taus.size(); ++i)
        if (!(taus[i] > taus[i - 1]))
            throw std::invalid_argument("regression: tau grid must be increasing");
}

DensityMatrix collapsed(const MasterEquation& me, const DensityMatrix& rho)
{
    const MatrixXc& a = me.operators().a;
    DensityMatrix rc = a * rho * a.adjoint();
    const cd tr = rc.trace();
    return rc / tr;
}

} // namespace

analysis::CorrelationSeries g2_regression(const SystemParams& params, const Eigen::VectorXd& taus)
{
    check_tau_grid(taus);
    const MasterEquation me(params);
    const DensityMatrix rho = me.steady_state();
    const MatrixXc number = me.operators().a.adjoint() * me.operators().a;
    const double n_ss = expect(rho, number).real();
    if (!(n_ss > 1e-14))
        throw QuantumError("g2_regression: steady-state photon number below numerical floor");

    const auto states = me.evolve_series(collapsed(me, rho), taus);
    const Eigen::Index m = taus.size();
    analysis::CorrelationSeries out;
    out.normalization = analysis::Normalization::g2;
    out.lags.resize(2 * m - 1);
    out.values.resize(2 * m - 1);
    out.standard_error = Eigen::VectorXd::Zero(2 * m - 1);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double v = expect(states[static_cast<std::size_t>(i)], number).real() / n_ss;
        out.lags[m - 1 + i] = taus[i];
        out.lags[m - 1 - i] = -taus[i];
        out.values[m - 1 + i] = out.values[m - 1 - i] = v;
    }
    return out;
}

analysis::CorrelationSeries h_regression(const SystemParams& params, double lo_phase, const Eigen::VectorXd& taus)
{
    check_tau_grid(taus);
    const MasterEquation me(params);
    const DensityMatrix rho = me.steady_state();
    const MatrixXc quad = me.operators().quadrature(lo_phase);
    const double q_ss = expect(rho, quad).real();
    if (!(std::abs(q_ss) > 1e-12))
        throw QuantumError("h_regression: steady-state quadrature vanishes at this LO phase");
    if (!(expect(rho, me.operators().a.adjoint() * me.operators().a).real() > 1e-14))
        throw QuantumError("h_regression: steady-state photon number below numerical floor");

    const auto states = me.evolve_series(collapsed(me, rho), taus);
    analysis::CorrelationSeries out;
    out.normalization = analysis::Normalization::h;
    out.lags = taus;
    out.values.resize(taus.size());
    out.standard_error = Eigen::VectorXd::Zero(taus.size());
    for (Eigen::Index i = 0; i < taus.size(); ++i)
        out.values[i] = expect(states[static_cast<std::size_t>(i)], quad).real() / q_ss;
    return out;
}

Eigen::VectorXd transient_photon_number(const SystemParams& params, const Eigen::VectorXd& times)
{
    const MasterEquation me(params);
    const MatrixXc number = me.operators().a.adjoint() * me.operators().a;
    const auto states = me.evolve_series(ground_state(params), times);
    Eigen::VectorXd out(times.size());
    for (Eigen::Index i = 0; i < times.size(); ++i)
        out[i] = expect(states[static_cast<std::size_t>(i)], number).real();
    return out;
}

// ---------------------------------------------------------------------------
// trajectories

void UnravelOptions::validate(const SystemParams& params) const
{
    if (!(split_to_counter > 0.0 && split_to_counter < 1.0))
        throw std::invalid_argument("unravel_mixed: split_to_counter must lie in (0, 1)");
    if (!(dt > 0.0) || !(duration > 0.0) || !(burn_in >= 0.0))
        throw std::invalid_argument("unravel_mixed: dt and duration must be positive, burn_in >= 0");
    if (!std::isfinite(lo_phase))
        throw std::invalid_argument("unravel_mixed: lo_phase must be finite");
    if (!(dt * params.max_rate() < 0.05))
        throw std::invalid_argument("unravel_mixed: dt too coarse (need dt * max rate < 0.05)");
}

namespace {

constexpr double kNormTolerance = 1e-12;

class JcState {
public:
    explicit JcState(int cutoff) : n_(cutoff) {}

    // a |psi>
    void apply_a(const VectorXc& in, VectorXc& out) const
    {
        out.setZero(in.size());
        for (int atom = 0; atom < 2; ++atom)
            for (int k = 0; k + 1 < n_; ++k)
                out[atom * n_ + k] = std::sqrt(static_cast<double>(k + 1)) * in[atom * n_ + k + 1];
    }

    // sigma |psi>
    void apply_sigma(const VectorXc& in, VectorXc& out) const
    {
        out.setZero(in.size());
        out.head(n_) = in.tail(n_);
    }

    [[nodiscard]] double photon_number(const VectorXc& psi) const
    {
        double s = 0.0;
        for (int atom = 0; atom < 2; ++atom)
            for (int k = 1; k < n_; ++k)
                s += static_cast<double>(k) * std::norm(psi[atom * n_ + k]);
        return s;
    }

    [[nodiscard]] cd mean_a(const VectorXc& psi) const
    {
        cd s = 0.0;
        for (int atom = 0; atom < 2; ++atom)
            for (int k = 1; k < n_; ++k)
                s += std::conj(psi[atom * n_ + k - 1]) * std::sqrt(static_cast<double>(k)) * psi[atom * n_ + k];
        return s;
    }

    [[nodiscard]] double excitation(const VectorXc& psi) const { return psi.tail(n_).squaredNorm(); }

private:
    int n_;
};

} // namespace

TrajectoryRecord unravel_mixed(const SystemParams& params, const UnravelOptions& options, RngStream& stream)
{
    params.validate();
    options.validate(params);
    const OperatorSet ops = build_system(params);
    const JcState basis(params.fock_cutoff);
    const double dt = options.dt;
    const double s = options.split_to_counter;
    const double homodyne_gain = std::sqrt((1.0 - s) * params.kappa);
    const cd lo_conj = std::polar(1.0, -options.lo_phase);
    const double sqrt_dt = std::sqrt(dt);

    const MatrixXc h_eff = ops.hamiltonian - cd(0.0, 0.5) * (params.kappa * ops.a.adjoint() * ops.a +
                                                             params.gamma * ops.sigma.adjoint() * ops.sigma);
    const MatrixXc step = rk4_step_matrix<double>(cd(0.0, -1.0) * h_eff, dt);

    const auto burn_steps = static_cast<std::size_t>(std::llround(options.burn_in / dt));
    const auto record_steps = static_cast<std::size_t>(std::llround(options.duration / dt));
    const std::size_t total = burn_steps + record_steps;
    const double record_start = static_cast<double>(burn_steps) * dt;

    TrajectoryRecord rec;
    rec.seed = stream.seed();
    rec.stream_id = stream.stream_id();
    rec.jumps.t0 = record_start;
    rec.jumps.t1 = record_start + static_cast<double>(record_steps) * dt;
    rec.current.grid = TimeGrid(record_start, dt, record_steps);
    rec.current.samples.resize(static_cast<Eigen::Index>(record_steps));
    rec.current.bandwidth = rec.current.grid.nyquist();

    std::vector<double> obs_t, obs_n, obs_q;
    const std::size_t every = options.observe_every;

    VectorXc psi = VectorXc::Zero(params.dimension());
    psi[0] = 1.0;
    VectorXc next(psi.size()), scratch(psi.size()), second(psi.size());

    for (std::size_t step_index = 0; step_index < total; ++step_index) {
        const double t = static_cast<double>(step_index) * dt;
        const cd mean_a = basis.mean_a(psi);
        const double n = basis.photon_number(psi);
        if (every > 0 && step_index % every == 0) {
            obs_t.push_back(t);
            obs_n.push_back(n);
            obs_q.push_back((lo_conj * mean_a).real());
        }

        const double drift = homodyne_gain * 2.0 * (lo_conj * mean_a).real();
        const double d_current = drift * dt + sqrt_dt * stream.standard_gaussian();
        const double p_counter = s * params.kappa * n * dt;
        const double p_atom = params.gamma * basis.excitation(psi) * dt;
        const double u = stream.uniform01();

        // Measurement factor 1 + c dI + c^2 (dI^2 - dt) / 2 applied after the
        // no-jump propagator, so coherent states pass through exactly.
        second.noalias() = step * psi;
        basis.apply_a(second, scratch);
        next = second + (homodyne_gain * lo_conj * d_current) * scratch;
        basis.apply_a(scratch, second);
        next += (0.5 * homodyne_gain * homodyne_gain * lo_conj * lo_conj * (d_current * d_current - dt)) * second;

        const bool recording = step_index >= burn_steps;
        if (u < p_counter) {
            basis.apply_a(next, scratch);
            next.swap(scratch);
            if (recording) {
                const double jitter = stream.uniform_open_left();
                const double stamp = t + dt * jitter;
                auto& ts = rec.jumps.timestamps;
                if (ts.empty() || stamp > ts.back())
                    ts.push_back(std::min(stamp, rec.jumps.t1));
            }
        } else if (u < p_counter + p_atom) {
            basis.apply_sigma(next, scratch);
            next.swap(scratch);
            ++rec.atom_jumps;
        }
        if (recording)
            rec.current.samples[static_cast<Eigen::Index>(step_index - burn_steps)] = d_current / dt;

        const double norm = next.norm();
        if (!std::isfinite(norm) || norm < kNormTolerance)
            throw QuantumError("unravel_mixed: state norm lost at t = " + std::to_string(t + dt));
        psi = next / norm;
    }
    if (every > 0 && total % every == 0) {
        obs_t.push_back(static_cast<double>(total) * dt);
        obs_n.push_back(basis.photon_number(psi));
        obs_q.push_back((lo_conj * basis.mean_a(psi)).real());
    }
    rec.observe_times = Eigen::Map<const Eigen::VectorXd>(obs_t.data(), static_cast<Eigen::Index>(obs_t.size()));
    rec.photon_number = Eigen::Map<const Eigen::VectorXd>(obs_n.data(), static_cast<Eigen::Index>(obs_n.size()));
    rec.quadrature = Eigen::Map<const Eigen::VectorXd>(obs_q.data(), static_cast<Eigen::Index>(obs_q.size()));
    return rec;
}

} // namespace lightfluct::quantum
