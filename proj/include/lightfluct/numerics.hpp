#ifndef LIGHTFLUCT_NUMERICS_HPP
#define LIGHTFLUCT_NUMERICS_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lightfluct {

template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

using MatrixXc = ComplexMatrix<double>;
using VectorXc = ComplexVector<double>;

class NumericsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Uniform sampling grid. Sample i represents the interval [time(i), time(i) + dt).
struct TimeGrid {
    double t_start = 0.0;
    double dt = 1.0;
    std::size_t n_samples = 1;

    TimeGrid() = default;
    TimeGrid(double start, double step, std::size_t n);

    [[nodiscard]] double time(std::size_t i) const { return t_start + static_cast<double>(i) * dt; }
    [[nodiscard]] double t_end() const { return time(n_samples); }
    [[nodiscard]] double duration() const { return static_cast<double>(n_samples) * dt; }
    [[nodiscard]] double nyquist() const { return 0.5 / dt; }

    static TimeGrid covering(double t_start, double duration, double dt);
};

/// One step of the classical fourth-order Runge-Kutta scheme applied to the
/// linear system dy/dt = G y. For a constant generator the four stages
/// collapse to multiplication by the truncated Taylor series
/// I + hG + (hG)^2/2 + (hG)^3/6 + (hG)^4/24, which is what this returns.
template <typename Scalar>
ComplexMatrix<Scalar> rk4_step_matrix(const ComplexMatrix<Scalar>& generator, Scalar dt)
{
    if (generator.rows() != generator.cols())
        throw std::invalid_argument("rk4_step_matrix: generator must be square");
    if (!(dt > Scalar(0)))
        throw std::invalid_argument("rk4_step_matrix: dt must be positive");
    const auto n = generator.rows();
    const ComplexMatrix<Scalar> hg = generator * std::complex<Scalar>(dt);
    ComplexMatrix<Scalar> term = ComplexMatrix<Scalar>::Identity(n, n);
    ComplexMatrix<Scalar> step = term;
    for (int k = 1; k <= 4; ++k) {
        term = (hg * term) / std::complex<Scalar>(Scalar(k));
        step += term;
    }
    return step;
}

/// Fixed-step propagator for dy/dt = G y, reusable across many states.
template <typename Scalar>
class LinearPropagator {
public:
    LinearPropagator(const ComplexMatrix<Scalar>& generator, Scalar dt)
        : step_(rk4_step_matrix(generator, dt)), dt_(dt)
    {
    }

    [[nodiscard]] Scalar dt() const { return dt_; }
    [[nodiscard]] const ComplexMatrix<Scalar>& step_matrix() const { return step_; }

    ComplexVector<Scalar> advance(ComplexVector<Scalar> state, std::size_t n_steps) const
    {
        if (state.size() != step_.cols())
            throw std::invalid_argument("LinearPropagator: state dimension does not match generator");
        ComplexVector<Scalar> next(state.size());
        for (std::size_t i = 0; i < n_steps; ++i) {
            next.noalias() = step_ * state;
            state.swap(next);
            if (!state.allFinite())
                throw NumericsError("integrate_linear_ode: non-finite state at step " + std::to_string(i + 1));
        }
        return state;
    }

private:
    ComplexMatrix<Scalar> step_;
    Scalar dt_;
};

template <typename Scalar>
ComplexVector<Scalar> integrate_linear_ode(const ComplexMatrix<Scalar>& generator,
                                           ComplexVector<Scalar> state, Scalar dt,
                                           std::size_t n_steps)
{
    if (generator.rows() != generator.cols() || generator.cols() != state.size())
        throw std::invalid_argument("integrate_linear_ode: dimension mismatch");
    if (n_steps == 0)
        return state;
    return LinearPropagator<Scalar>(generator, dt).advance(std::move(state), n_steps);
}

// One-sided discrete Fourier transform X_k = sum_n x_n exp(-2 pi i k n / N),
// k = 0..N/2, at frequencies k / (N dt).
struct Spectrum {
    std::vector<double> frequencies;
    std::vector<std::complex<double>> values;
    std::size_t n_input = 0;
    double dt = 1.0;

    // sum_k |X_k|^2 / N over the full two-sided spectrum (equals sum x_n^2).
    [[nodiscard]] double parseval_energy() const;
};

Spectrum discrete_fourier_transform(std::span<const double> series, double dt);
std::vector<double> inverse_discrete_fourier_transform(const Spectrum& spectrum);

} // namespace lightfluct

#endif // LIGHTFLUCT_NUMERICS_HPP
