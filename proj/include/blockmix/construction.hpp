// Hierarchical block process and its stationarized / thinned variants.
//
// A level-0 block is a single symmetric value eps * sqrt(3) * U.  A
// level-(k+1) block concatenates L independent level-k blocks after
// flipping their signs: the first L-1 flips are free coin tosses, the
// last one is chosen so that the product of the L sub-block sums comes
// out negative on every draw.  Windows of the block process (Y), its
// random-shift stationarization (X) and the Bernoulli-thinned process
// (X-tilde) are all deterministic functions of (params, stream).

#ifndef BLOCKMIX_CONSTRUCTION_HPP
#define BLOCKMIX_CONSTRUCTION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "blockmix/rng.hpp"
#include "blockmix/sparsifier.hpp"

namespace blockmix {

inline constexpr double kSqrt3 = 1.7320508075688772935;

struct ConstructionParams {
    int arity = 6;           // L: even, >= 6
    int level = 0;           // n: >= 0
    double thinning = 0.5;   // p in (0, 1)
    std::uint64_t seed = 0;

    void validate() const {
        if (arity < 6 || arity % 2 != 0)
            throw std::invalid_argument("arity L must be even and >= 6, got " +
                                        std::to_string(arity));
        if (level < 0)
            throw std::invalid_argument("level n must be >= 0");
        if (!(thinning > 0.0 && thinning < 1.0))
            throw std::invalid_argument("thinning p must lie in (0,1)");
        block_length();  // overflow check
    }

    // L^level, rejecting values that do not fit in int64.
    std::int64_t block_length() const {
        std::int64_t len = 1;
        for (int i = 0; i < level; ++i) {
            if (len > std::numeric_limits<std::int64_t>::max() / arity)
                throw std::invalid_argument("L^n overflows 64-bit integer");
            len *= arity;
        }
        return len;
    }
};

struct BlockSample {
    int level = 0;
    std::vector<double> values;
};

enum class Process { Y, X, XTilde };

struct PathWindow {
    std::int64_t start = 0;
    std::vector<double> values;
    std::optional<std::vector<std::uint8_t>> marks;  // present for X-tilde
    Process tag = Process::Y;
};

namespace detail {

// Writes one level-`level` block into out[0 .. L^level).
inline void build_block_into(const ConstructionParams& params, int level,
                             RngStream node, std::span<double> out) {
    if (level == 0) {
        const int eps = node.sign();
        out[0] = eps * kSqrt3 * node.uniform01_pos();
        return;
    }
    const int L = params.arity;
    const std::size_t sub = out.size() / static_cast<std::size_t>(L);
    int sgn_product = 1;  // product of sgn(t_i) over pre-flip sums, sgn(0) := +1
    for (int i = 0; i < L; ++i) {
        auto seg = out.subspan(static_cast<std::size_t>(i) * sub, sub);
        build_block_into(params, level - 1,
                         node.derive(static_cast<std::uint64_t>(i)), seg);
        const double t = std::accumulate(seg.begin(), seg.end(), 0.0);
        if (t < 0.0) sgn_product = -sgn_product;
    }

    // Sign flips: free coin tosses for the first L-1 sub-blocks, forced
    // for the last so the product of the signed sub-block sums is negative.
    int eps_product = 1;
    for (int i = 0; i + 1 < L; ++i) {
        const int eps = node.sign();
        eps_product *= eps;
        if (eps < 0) {
            auto seg = out.subspan(static_cast<std::size_t>(i) * sub, sub);
            for (double& v : seg) v = -v;
        }
    }
    if (-eps_product * sgn_product < 0) {
        auto seg = out.subspan(static_cast<std::size_t>(L - 1) * sub, sub);
        for (double& v : seg) v = -v;
    }
}

}  // namespace detail

// Fast window sampler; holds scratch so the per-rep path is allocation
// free once warmed up.  Not thread safe: use one instance per shard.
class Sampler {
public:
    explicit Sampler(const ConstructionParams& params)
        : params_(params), block_len_(params.block_length()) {
        params_.validate();
    }

    const ConstructionParams& params() const { return params_; }
    std::int64_t block_length() const { return block_len_; }

    // Y[0, h): block-aligned concatenation of independent level-n blocks.
    void y_window(std::span<double> out, RngStream& stream) {
        fill_y(out, 0, stream);
    }

    // X[0, h) = Y[tau, tau+h) with tau uniform on {0, .., L^n - 1}.
    void x_window(std::span<double> out, RngStream& stream) {
        auto tau_stream = stream.derive(stream_label::tau);
        const auto tau = static_cast<std::int64_t>(
            tau_stream.below(static_cast<std::uint64_t>(block_len_)));
        fill_y(out, tau, stream);
    }

    // X-tilde[0, h): Bernoulli(p) marks, X values in the occupied slots.
    void xtilde_window(std::span<double> values, std::span<std::uint8_t> marks,
                       RngStream& stream) {
        auto mark_stream = stream.derive(stream_label::marks);
        std::size_t occupied = 0;
        for (auto& m : marks) {
            m = mark_stream.bernoulli(params_.thinning) ? 1 : 0;
            occupied += m;
        }
        source_.resize(occupied);
        if (occupied > 0) {
            auto src_stream = stream.derive(stream_label::source);
            x_window(source_, src_stream);
        }
        sparsify_into(source_, marks, values);
    }

private:
    // Y[shift, shift + out.size()) from blocks indexed off the stream.
    void fill_y(std::span<double> out, std::int64_t shift, RngStream& stream) {
        auto blocks = stream.derive(stream_label::y_blocks);
        const auto h = static_cast<std::int64_t>(out.size());
        std::int64_t written = 0;
        std::int64_t pos = shift;
        scratch_.resize(static_cast<std::size_t>(block_len_));
        while (written < h) {
            const std::int64_t j = pos / block_len_;
            const std::int64_t off = pos % block_len_;
            const std::int64_t take = std::min(block_len_ - off, h - written);
            if (off == 0 && take == block_len_) {
                detail::build_block_into(params_, params_.level,
                                         blocks.derive(static_cast<std::uint64_t>(j)),
                                         out.subspan(static_cast<std::size_t>(written),
                                                     static_cast<std::size_t>(take)));
            } else {
                detail::build_block_into(params_, params_.level,
                                         blocks.derive(static_cast<std::uint64_t>(j)),
                                         scratch_);
                std::copy(scratch_.begin() + off, scratch_.begin() + off + take,
                          out.begin() + written);
            }
            written += take;
            pos += take;
        }
    }

    ConstructionParams params_;
    std::int64_t block_len_;
    std::vector<double> scratch_;
    std::vector<double> source_;
};

// -- spec-level operations ---------------------------------------------------

inline BlockSample build_block(const ConstructionParams& params, int level,
                               RngStream stream) {
    params.validate();
    if (level < 0) throw std::invalid_argument("block level must be >= 0");
    ConstructionParams at_level = params;
    at_level.level = level;
    BlockSample block;
    block.level = level;
    block.values.resize(static_cast<std::size_t>(at_level.block_length()));
    detail::build_block_into(at_level, level, stream, block.values);
    return block;
}

inline PathWindow sample_y_window(const ConstructionParams& params,
                                  std::int64_t h, RngStream stream) {
    if (h <= 0) throw std::invalid_argument("window length h must be >= 1");
    Sampler sampler(params);
    PathWindow w;
    w.tag = Process::Y;
    w.values.resize(static_cast<std::size_t>(h));
    sampler.y_window(w.values, stream);
    return w;
}

inline PathWindow sample_x_window(const ConstructionParams& params,
                                  std::int64_t h, RngStream stream) {
    if (h <= 0) throw std::invalid_argument("window length h must be >= 1");
    Sampler sampler(params);
    PathWindow w;
    w.tag = Process::X;
    w.values.resize(static_cast<std::size_t>(h));
    sampler.x_window(w.values, stream);
    return w;
}

inline PathWindow sample_xtilde_window(const ConstructionParams& params,
                                       std::int64_t h, RngStream stream) {
    if (h <= 0) throw std::invalid_argument("window length h must be >= 1");
    Sampler sampler(params);
    PathWindow w;
    w.tag = Process::XTilde;
    w.values.resize(static_cast<std::size_t>(h));
    w.marks.emplace(static_cast<std::size_t>(h));
    sampler.xtilde_window(w.values, *w.marks, stream);
    return w;
}

// Sums of consecutive length-L^k slices of a block.
inline std::vector<double> subblock_sums(const ConstructionParams& params,
                                         const BlockSample& block, int sublevel) {
    if (sublevel < 0 || sublevel > block.level)
        throw std::invalid_argument("sublevel out of range [0, block.level]");
    ConstructionParams at = params;
    at.level = sublevel;
    const auto slice = static_cast<std::size_t>(at.block_length());
    std::vector<double> sums;
    sums.reserve(block.values.size() / slice);
    for (std::size_t i = 0; i < block.values.size(); i += slice)
        sums.push_back(std::accumulate(block.values.begin() + i,
                                       block.values.begin() + i + slice, 0.0));
    return sums;
}

}  // namespace blockmix

#endif  // BLOCKMIX_CONSTRUCTION_HPP
