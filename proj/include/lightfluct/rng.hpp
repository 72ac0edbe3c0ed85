#ifndef LIGHTFLUCT_RNG_HPP
#define LIGHTFLUCT_RNG_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <variant>

namespace lightfluct {

/// Reproducible random stream keyed by (seed, stream_id).
///
/// Draws come from the Philox4x32-10 counter-based generator: the seed is the
/// key, the 128-bit counter is (block index, stream_id). A stream is therefore
/// fully described by (seed, stream_id, position) and independent streams can
/// be handed to concurrent workers without coordination.
///
/// Distribution transforms are implemented here rather than taken from
/// <random> so that sequences are identical across standard libraries.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01();
    /// Uniform on (0, 1].
    double uniform_open_left();
    double standard_gaussian();
    double exponential(double mean);

    /// Independent stream derived from this one's key and a tag.
    [[nodiscard]] RngStream derive(std::uint64_t tag) const;

    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] std::uint64_t stream_id() const { return stream_id_; }
    /// Number of 64-bit words consumed so far.
    [[nodiscard]] std::uint64_t position() const { return 2 * block_ - (buffered_ ? 1 : 0); }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    bool buffered_ = false;
    double spare_gaussian_ = 0.0;
    bool has_spare_gaussian_ = false;
};

struct Uniform01 {};
struct StandardGaussian {};
struct Exponential {
    double mean = 1.0;
};
using Distribution = std::variant<Uniform01, StandardGaussian, Exponential>;

double draw(RngStream& stream, const Distribution& kind);

} // namespace lightfluct

#endif // LIGHTFLUCT_RNG_HPP
