#include "lightfluct/records.hpp"

#include <cmath>
#include <stdexcept>

namespace lightfluct {

void CountRecord::validate() const
{
    if (!std::isfinite(t0) || !std::isfinite(t1) || t1 < t0)
        throw std::invalid_argument("CountRecord: window must satisfy t0 <= t1");
    for (std::size_t i = 0; i < timestamps.size(); ++i) {
        const double t = timestamps[i];
        if (!(t >= t0 && t <= t1))
            throw std::invalid_argument("CountRecord: timestamp " + std::to_string(i) + " outside window");
        if (i > 0 && !(t > timestamps[i - 1]))
            throw std::invalid_argument("CountRecord: timestamps must be strictly increasing");
    }
}

void PhotocurrentRecord::validate() const
{
    if (static_cast<std::size_t>(samples.size()) != grid.n_samples)
        throw std::invalid_argument("PhotocurrentRecord: sample count does not match grid");
    if (!samples.allFinite())
        throw std::invalid_argument("PhotocurrentRecord: non-finite sample");
    if (!(bandwidth > 0.0) || bandwidth > grid.nyquist() * (1.0 + 1e-12))
        throw std::invalid_argument("PhotocurrentRecord: bandwidth must lie in (0, nyquist]");
}

} // namespace lightfluct
