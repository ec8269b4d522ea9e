// Counter-based splittable pseudo-random streams.
//
// Every stream is identified by a 64-bit key; output word i is a strong
// 64-bit hash of (key, i).  derive(label) produces a child stream whose
// key is a hash of the parent key and the label, so any tree of streams
// (block nodes, shards, reps) is reproducible from the root seed alone
// and streams can be consumed in any order or in parallel.

#ifndef BLOCKMIX_RNG_HPP
#define BLOCKMIX_RNG_HPP

#include <cstdint>
#include <cmath>

namespace blockmix {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer (Vigna / Steele-Lea-Flood).
inline std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) noexcept
        : key_(mix64(seed + kGolden)), counter_(0) {}

    // Child stream, independent of this one and of any sibling label.
    RngStream derive(std::uint64_t label) const noexcept {
        RngStream child(0);
        child.key_ = mix64(key_ ^ mix64(label * kGolden + 0x632BE59BD9B4E019ULL));
        child.counter_ = 0;
        return child;
    }

    std::uint64_t next_u64() noexcept {
        return mix64(key_ + (++counter_) * kGolden);
    }

    // Uniform in [0, 1): 53 random bits.
    double uniform01() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1]: never returns exactly 0.
    double uniform01_pos() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform sign, +1 or -1.
    int sign() noexcept {
        return (next_u64() & 1) ? 1 : -1;
    }

    bool bernoulli(double p) noexcept {
        return uniform01() < p;
    }

    // Uniform integer in [0, n).  Bias is O(n / 2^64), negligible here.
    std::uint64_t below(std::uint64_t n) noexcept {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    std::uint64_t key() const noexcept { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

// Fixed stream labels, one per consumer of randomness.  Keeping them in
// one place guarantees distinct sub-streams for distinct purposes.
namespace stream_label {
inline constexpr std::uint64_t y_blocks = 0x59;       // per-block tree roots
inline constexpr std::uint64_t tau = 0x7461;          // stationarizing shift
inline constexpr std::uint64_t marks = 0x56;          // Bernoulli thinning marks
inline constexpr std::uint64_t source = 0x58;         // values for occupied slots
inline constexpr std::uint64_t shard = 0x5348;        // estimator shards
}  // namespace stream_label

}  // namespace blockmix

#endif  // BLOCKMIX_RNG_HPP
