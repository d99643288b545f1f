#pragma once

#include <array>
#include <cstdint>

namespace fkmc {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Maps a 128-bit counter and 64-bit key to 128
/// pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Mixes a base seed with an index into a new 64-bit seed (splitmix64
/// finalizer). Used to give each query point of a job its own key.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Counter-based random stream keyed by (seed, stream_id).
///
/// The seed is the Philox key; the stream id occupies the upper half of the
/// counter and the block index the lower half, so streams never overlap and
/// a stream's output depends only on (seed, stream_id) and how many values
/// have been drawn. Copying a stream copies its position.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64();

    /// Uniform on the open interval (0, 1).
    double uniform();

    /// Standard normal (Box-Muller, second variate cached).
    double normal();

    /// Standard exponential.
    double exponential();

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace fkmc
