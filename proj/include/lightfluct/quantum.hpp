#ifndef LIGHTFLUCT_QUANTUM_HPP
#define LIGHTFLUCT_QUANTUM_HPP

#include "lightfluct/analyzers.hpp"
#include "lightfluct/numerics.hpp"
#include "lightfluct/records.hpp"
#include "lightfluct/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>

namespace lightfluct::quantum {

class QuantumError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Resonant driven Jaynes-Cummings system in the rotating frame:
//   H = g (a^+ s- + a s+) + drive (a^+ + a),
// cavity loss sqrt(kappa) a, atomic decay sqrt(gamma) s-.
struct SystemParams {
    double g = 0.6;
    double kappa = 1.0;
    double gamma = 1.0;
    double drive = 0.2;
    int fock_cutoff = 8;

    void validate() const;
    [[nodiscard]] int dimension() const { return 2 * fock_cutoff; }
    [[nodiscard]] double max_rate() const;
};

/// Weak-coupling antibunching point used as the default source.
SystemParams default_params();
/// kappa = gamma = 1, g = 3, drive = 0.1.
SystemParams strong_coupling_params();

using PureState = VectorXc;
using DensityMatrix = MatrixXc;

// Basis index = atom * fock_cutoff + n, atom 0 = ground, atom 1 = excited.
struct OperatorSet {
    MatrixXc hamiltonian;
    MatrixXc a;
    MatrixXc sigma;
    MatrixXc collapse_cavity;
    MatrixXc collapse_atom;
    MatrixXc field;  // output field operator, proportional to a
    int fock_cutoff = 0;

    [[nodiscard]] Eigen::Index dimension() const { return hamiltonian.rows(); }
    /// (a e^{-i theta} + a^+ e^{i theta}) / 2
    [[nodiscard]] MatrixXc quadrature(double theta) const;
};

OperatorSet build_system(const SystemParams& params);

/// Column-stacking Lindblad superoperator: vec(d rho/dt) = L vec(rho).
MatrixXc liouvillian(const OperatorSet& ops);

DensityMatrix ground_state(const SystemParams& params);
std::complex<double> expect(const DensityMatrix& rho, const MatrixXc& op);
std::complex<double> expect(const PureState& psi, const MatrixXc& op);
/// Throws std::invalid_argument unless rho is Hermitian with unit trace (tol).
void validate_density(const DensityMatrix& rho, double tol = 1e-10);
/// Population of the highest retained Fock level.
double top_fock_population(const DensityMatrix& rho, int fock_cutoff);

/// Fixed-step master-equation integrator with cached propagators.
class MasterEquation {
public:
    explicit MasterEquation(const SystemParams& params);

    [[nodiscard]] const SystemParams& params() const { return params_; }
    [[nodiscard]] const OperatorSet& operators() const { return ops_; }
    [[nodiscard]] const MatrixXc& generator() const { return generator_; }

    DensityMatrix evolve(const DensityMatrix& rho, double t) const;
    /// States at each time of a non-decreasing grid starting at or after 0.
    std::vector<DensityMatrix> evolve_series(const DensityMatrix& rho, const Eigen::VectorXd& times) const;
    DensityMatrix steady_state() const;
    [[nodiscard]] double residual(const DensityMatrix& rho) const;

private:
    VectorXc advance(VectorXc v, double t) const;

    SystemParams params_;
    OperatorSet ops_;
    MatrixXc generator_;
    double max_step_;
    mutable std::map<double, LinearPropagator<double>> cache_;
};

DensityMatrix evolve_master(const DensityMatrix& rho, const SystemParams& params, double t);
DensityMatrix steady_state(const SystemParams& params);

/// g2(tau) by collapse-then-evolve from the steady state. `taus` must start at
/// 0 and increase; the result is mirrored onto tau < 0.
analysis::CorrelationSeries g2_regression(const SystemParams& params, const Eigen::VectorXd& taus);
/// h(tau >= 0) = <a_theta>(tau) after a collapse, over <a_theta>_ss. One-sided.
analysis::CorrelationSeries h_regression(const SystemParams& params, double lo_phase, const Eigen::VectorXd& taus);
/// <a^+ a>(t) starting from the empty cavity with the atom in its ground state.
Eigen::VectorXd transient_photon_number(const SystemParams& params, const Eigen::VectorXd& times);

/// LO phase along the steady-state mean field (the empty driven cavity has <a> on -i).
inline constexpr double kDefaultLoPhase = -1.5707963267948966;

struct UnravelOptions {
    double split_to_counter = 0.5;
    double lo_phase = kDefaultLoPhase;
    double duration = 100.0;
    double dt = 0.01;
    double burn_in = 0.0;
    /// Record <a^+ a> and <a_theta> every this many steps (0 disables).
    std::size_t observe_every = 0;

    void validate(const SystemParams& params) const;
};

struct TrajectoryRecord {
    CountRecord jumps;
    PhotocurrentRecord current;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::size_t atom_jumps = 0;
    Eigen::VectorXd observe_times;
    Eigen::VectorXd photon_number;
    Eigen::VectorXd quadrature;
};

/// Mixed unraveling of the cavity output: a fraction split_to_counter goes to
/// a photon counter (jumps a), the rest to a homodyne detector at lo_phase
/// (diffusive), atomic decay is an unobserved jump channel. Each step applies
/// the no-jump propagator and then the homodyne factor
/// 1 + c dI + c^2 (dI^2 - dt) / 2 with c = sqrt((1-s) kappa) e^{-i theta} a.
/// Jumps are per-step Bernoulli trials; the current sample of step n is
/// dI_n / dt with dI_n = sqrt((1-s) kappa) <a e^{-i theta} + h.c.> dt + dW_n.
/// Records cover [burn_in, burn_in + duration); observables are sampled
/// from t = 0, including the burn-in.
TrajectoryRecord unravel_mixed(const SystemParams& params, const UnravelOptions& options, RngStream& stream);

} // namespace lightfluct::quantum

#endif // LIGHTFLUCT_QUANTUM_HPP
