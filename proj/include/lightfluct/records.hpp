#ifndef LIGHTFLUCT_RECORDS_HPP
#define LIGHTFLUCT_RECORDS_HPP

#include "lightfluct/numerics.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace lightfluct {

/// Photoelectric detection times inside an observation window [t0, t1].
struct CountRecord {
    std::vector<double> timestamps;
    double t0 = 0.0;
    double t1 = 0.0;

    [[nodiscard]] std::size_t size() const { return timestamps.size(); }
    [[nodiscard]] double window() const { return t1 - t0; }
    [[nodiscard]] double rate() const { return window() > 0.0 ? static_cast<double>(size()) / window() : 0.0; }
    /// Throws std::invalid_argument when timestamps are unordered or out of window.
    void validate() const;
};

/// Uniformly sampled photocurrent. Sample i is the mean current over
/// [grid.time(i), grid.time(i) + grid.dt).
struct PhotocurrentRecord {
    TimeGrid grid;
    Eigen::VectorXd samples;
    double bandwidth = 0.0;

    void validate() const;
};

} // namespace lightfluct

#endif // LIGHTFLUCT_RECORDS_HPP
