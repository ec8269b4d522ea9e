// Monte Carlo estimators with deterministic sharding.
//
// Reps are split over a fixed number of shards regardless of worker
// count; shard i draws from sub-stream derive(shard_label).derive(i) and
// each rep gets its own derived stream, so results are bit-identical for
// any number of workers.  Shard accumulators are merged in shard order.

#ifndef BLOCKMIX_STATISTICS_HPP
#define BLOCKMIX_STATISTICS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "blockmix/construction.hpp"
#include "blockmix/cylinder.hpp"
#include "blockmix/rng.hpp"

namespace blockmix {

struct MomentReport {
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t reps = 0;
    std::optional<double> exact_ref;
    std::optional<double> z_score;

    MomentReport& with_reference(double reference) {
        exact_ref = reference;
        if (std_error > 0.0) z_score = (estimate - reference) / std_error;
        return *this;
    }
};

struct Accumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::int64_t n = 0;

    void add(double x) {
        sum += x;
        sum_sq += x * x;
        ++n;
    }
    void merge(const Accumulator& other) {
        sum += other.sum;
        sum_sq += other.sum_sq;
        n += other.n;
    }
    double mean() const { return n ? sum / double(n) : 0.0; }
    double variance() const {
        if (n < 2) return 0.0;
        const double m = mean();
        return std::max(0.0, (sum_sq - double(n) * m * m) / double(n - 1));
    }
    double std_error() const {
        return n ? std::sqrt(variance() / double(n)) : 0.0;
    }
    MomentReport report() const { return {mean(), std_error(), n, {}, {}}; }
};

inline constexpr int kShardCount = 64;

// Runs `reps` repetitions split over kShardCount shards.  State must be
// default-constructible with a merge(const State&) member; per_rep is
// called as per_rep(ctx, rep_stream, state).  make_context() builds one
// scratch context per worker thread.
template <class State, class MakeContext, class PerRep>
State sharded_run(RngStream base, std::int64_t reps, int workers,
                  MakeContext make_context, PerRep per_rep) {
    if (reps < 1) throw std::invalid_argument("rep count must be >= 1");
    const int shards =
        static_cast<int>(std::min<std::int64_t>(kShardCount, reps));
    std::vector<State> states(static_cast<std::size_t>(shards));
    const RngStream shard_base = base.derive(stream_label::shard);
    std::atomic<int> next_shard{0};

    auto run_shards = [&] {
        auto ctx = make_context();
        int i;
        while ((i = next_shard.fetch_add(1)) < shards) {
            const std::int64_t lo = reps * i / shards;
            const std::int64_t hi = reps * (i + 1) / shards;
            const RngStream shard_stream =
                shard_base.derive(static_cast<std::uint64_t>(i));
            for (std::int64_t r = lo; r < hi; ++r) {
                RngStream rep_stream =
                    shard_stream.derive(static_cast<std::uint64_t>(r - lo));
                per_rep(ctx, rep_stream, states[static_cast<std::size_t>(i)]);
            }
        }
    };

    if (workers <= 1) {
        run_shards();
    } else {
        std::vector<std::thread> pool;
        const int nthreads = std::min(workers, shards);
        pool.reserve(static_cast<std::size_t>(nthreads));
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(run_shards);
        for (auto& th : pool) th.join();
    }

    State merged = std::move(states[0]);
    for (std::size_t i = 1; i < states.size(); ++i) merged.merge(states[i]);
    return merged;
}

namespace detail {

struct WindowCtx {
    explicit WindowCtx(const ConstructionParams& params, std::size_t h)
        : sampler(params), values(h), marks(h) {}
    Sampler sampler;
    std::vector<double> values;
    std::vector<std::uint8_t> marks;

    void draw(Process process, RngStream& stream) {
        switch (process) {
            case Process::Y: sampler.y_window(values, stream); break;
            case Process::X: sampler.x_window(values, stream); break;
            case Process::XTilde:
                sampler.xtilde_window(values, marks, stream);
                break;
        }
    }
};

}  // namespace detail

// Sample mean of (sum of window)^power with its standard error.
inline MomentReport estimate_moment(Process process,
                                    const ConstructionParams& params,
                                    std::int64_t h, int power, std::int64_t reps,
                                    RngStream stream, int workers = 1) {
    if (reps < 1000) throw std::invalid_argument("need at least 1000 reps");
    if (power < 1) throw std::invalid_argument("power must be >= 1");
    if (h < 1) throw std::invalid_argument("window length must be >= 1");
    auto acc = sharded_run<Accumulator>(
        stream, reps, workers,
        [&] { return detail::WindowCtx(params, static_cast<std::size_t>(h)); },
        [process, power](detail::WindowCtx& ctx, RngStream& rs,
                         Accumulator& state) {
            ctx.draw(process, rs);
            double s = 0.0;
            for (double v : ctx.values) s += v;
            double powed = 1.0;
            for (int i = 0; i < power; ++i) powed *= s;
            state.add(powed);
        });
    if (!std::isfinite(acc.sum) || !std::isfinite(acc.sum_sq))
        throw std::runtime_error("non-finite moment accumulation");
    return acc.report();
}

// Monte Carlo probability that a sampled window satisfies the spec.
inline MomentReport cylinder_probability(Process process,
                                         const ConstructionParams& params,
                                         const CylinderSpec& spec,
                                         std::int64_t reps, RngStream stream,
                                         int workers = 1) {
    if (reps < 1000) throw std::invalid_argument("need at least 1000 reps");
    if (spec.marks && process != Process::XTilde)
        throw std::invalid_argument("mark constraints need the thinned process");
    const std::size_t h = spec.window_length();
    if (h < 1) throw std::invalid_argument("spec must constrain a window");
    auto acc = sharded_run<Accumulator>(
        stream, reps, workers, [&] { return detail::WindowCtx(params, h); },
        [process, &spec](detail::WindowCtx& ctx, RngStream& rs,
                         Accumulator& state) {
            ctx.draw(process, rs);
            const bool hit = (process == Process::XTilde)
                                 ? spec.matches(ctx.values, ctx.marks)
                                 : spec.matches_values(ctx.values);
            state.add(hit ? 1.0 : 0.0);
        });
    return acc.report();
}

namespace detail {

struct JointAccum {
    std::int64_t n = 0, a = 0, b = 0, ab = 0;
    void merge(const JointAccum& o) {
        n += o.n;
        a += o.a;
        b += o.b;
        ab += o.ab;
    }
};

}  // namespace detail

// |P(head in A, tail at lag N in B) - P(A) P(B)|, head and tail cut from
// one contiguous thinned window so the joint law is preserved.
inline MomentReport mixing_gap(const ConstructionParams& params,
                               const CylinderSpec& spec_a,
                               const CylinderSpec& spec_b, std::int64_t lag,
                               std::int64_t reps, RngStream stream,
                               int workers = 1) {
    if (reps < 1000) throw std::invalid_argument("need at least 1000 reps");
    const std::int64_t block = params.block_length();
    if (lag <= 2 * block)
        throw std::invalid_argument("lag N must exceed 2 L^n");
    const auto win = static_cast<std::size_t>(block);
    if (spec_a.window_length() != win || spec_b.window_length() != win)
        throw std::invalid_argument("head/tail specs must have length L^n");
    // head occupies [0, L^n), tail starts lag steps after the head's end
    // index, i.e. at L^n - 1 + lag.
    const std::size_t total = win - 1 + static_cast<std::size_t>(lag) + win;
    auto acc = sharded_run<detail::JointAccum>(
        stream, reps, workers, [&] { return detail::WindowCtx(params, total); },
        [&](detail::WindowCtx& ctx, RngStream& rs, detail::JointAccum& state) {
            ctx.draw(Process::XTilde, rs);
            std::span<const double> vals(ctx.values);
            std::span<const std::uint8_t> mk(ctx.marks);
            const bool in_a = spec_a.matches(vals.first(win), mk.first(win));
            const bool in_b = spec_b.matches(vals.last(win), mk.last(win));
            ++state.n;
            state.a += in_a;
            state.b += in_b;
            state.ab += in_a && in_b;
        });
    const double n = double(acc.n);
    const double pa = acc.a / n, pb = acc.b / n, pab = acc.ab / n;
    const double var_a = pa * (1 - pa) / n;
    const double var_b = pb * (1 - pb) / n;
    const double var_ab = pab * (1 - pab) / n;
    MomentReport report;
    report.estimate = std::abs(pab - pa * pb);
    report.std_error = std::sqrt(var_ab + pb * pb * var_a + pa * pa * var_b);
    report.reps = acc.n;
    return report;
}

// Difference between the level-m and level-n probabilities of the same
// cylinder event, with combined standard error.
inline MomentReport level_consistency_gap(const ConstructionParams& params,
                                          int higher_level,
                                          const CylinderSpec& spec,
                                          std::int64_t reps, RngStream stream,
                                          int workers = 1) {
    if (higher_level <= params.level)
        throw std::invalid_argument("comparison level m must exceed n");
    if (static_cast<std::int64_t>(spec.window_length()) > params.block_length())
        throw std::invalid_argument("spec window longer than L^n");
    ConstructionParams higher = params;
    higher.level = higher_level;
    const auto low = cylinder_probability(Process::XTilde, params, spec, reps,
                                          stream.derive(1), workers);
    const auto high = cylinder_probability(Process::XTilde, higher, spec, reps,
                                           stream.derive(2), workers);
    MomentReport report;
    report.estimate = high.estimate - low.estimate;
    report.std_error = std::sqrt(high.std_error * high.std_error +
                                 low.std_error * low.std_error);
    report.reps = low.reps + high.reps;
    return report;
}

struct TupleIndependenceResult {
    double max_discrepancy = 0.0;  // worst cell: |joint - prod(marginals)|
    double threshold = 0.0;        // 4-standard-error bound at that cell
    bool all_within = true;        // every cell within its own threshold
    std::int64_t reps = 0;
};

namespace detail {

struct TupleCounts {
    std::int64_t n = 0;
    std::vector<std::int64_t> joint;                  // per cell
    std::vector<std::vector<std::int64_t>> marginal;  // per cell, per coord
    void merge(const TupleCounts& o) {
        n += o.n;
        if (joint.empty()) {
            joint = o.joint;
            marginal = o.marginal;
            return;
        }
        for (std::size_t c = 0; c < joint.size(); ++c) {
            joint[c] += o.joint[c];
            for (std::size_t i = 0; i < marginal[c].size(); ++i)
                marginal[c][i] += o.marginal[c][i];
        }
    }
};

}  // namespace detail

// Max over grid cells of |joint frequency - product of marginals|, with
// the 4-standard-error (delta method) threshold per cell.  Each cell is
// one interval per tuple coordinate.
inline TupleIndependenceResult tuple_independence_discrepancy(
    Process process, const ConstructionParams& params,
    std::span<const std::int64_t> coordinates,
    std::span<const std::vector<Interval>> cells, std::int64_t reps,
    RngStream stream, int workers = 1) {
    const std::size_t t = coordinates.size();
    if (t < 2 || t > static_cast<std::size_t>(params.arity))
        throw std::invalid_argument("tuple size must lie in [2, L]");
    if (cells.empty()) throw std::invalid_argument("grid must be nonempty");
    for (const auto& cell : cells)
        if (cell.size() != t)
            throw std::invalid_argument("each cell needs one interval per coord");
    std::int64_t max_coord = 0;
    for (auto c : coordinates) {
        if (c < 0) throw std::invalid_argument("coordinates must be >= 0");
        max_coord = std::max(max_coord, c);
    }
    const auto h = static_cast<std::size_t>(max_coord + 1);

    auto counts = sharded_run<detail::TupleCounts>(
        stream, reps, workers, [&] { return detail::WindowCtx(params, h); },
        [&](detail::WindowCtx& ctx, RngStream& rs, detail::TupleCounts& state) {
            if (state.joint.empty()) {
                state.joint.assign(cells.size(), 0);
                state.marginal.assign(cells.size(),
                                      std::vector<std::int64_t>(t, 0));
            }
            ctx.draw(process, rs);
            ++state.n;
            for (std::size_t c = 0; c < cells.size(); ++c) {
                bool all = true;
                for (std::size_t i = 0; i < t; ++i) {
                    const bool in = cells[c][i].contains(
                        ctx.values[static_cast<std::size_t>(coordinates[i])]);
                    state.marginal[c][i] += in;
                    all = all && in;
                }
                state.joint[c] += all;
            }
        });

    TupleIndependenceResult result;
    result.reps = counts.n;
    const double n = double(counts.n);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const double pj = counts.joint[c] / n;
        double prod = 1.0;
        double var_prod = 0.0;
        for (std::size_t i = 0; i < t; ++i) {
            const double pi = counts.marginal[c][i] / n;
            prod *= pi;
        }
        for (std::size_t i = 0; i < t; ++i) {
            const double pi = counts.marginal[c][i] / n;
            double partial = 1.0;
            for (std::size_t k = 0; k < t; ++k)
                if (k != i) partial *= counts.marginal[c][k] / n;
            var_prod += partial * partial * pi * (1 - pi) / n;
        }
        const double disc = std::abs(pj - prod);
        const double thr = 4.0 * std::sqrt(pj * (1 - pj) / n + var_prod);
        if (disc > result.max_discrepancy) {
            result.max_discrepancy = disc;
            result.threshold = thr;
        }
        if (disc > thr) result.all_within = false;
    }
    return result;
}

// Product of coordinate signs over one aligned level-1 block; the
// construction pins this to exactly -1 on every draw.
inline MomentReport sign_product_moment(const ConstructionParams& params,
                                        std::int64_t reps, RngStream stream,
                                        int workers = 1) {
    ConstructionParams level1 = params;
    level1.level = 1;
    const auto h = static_cast<std::size_t>(params.arity);
    auto acc = sharded_run<Accumulator>(
        stream, reps, workers, [&] { return detail::WindowCtx(level1, h); },
        [](detail::WindowCtx& ctx, RngStream& rs, Accumulator& state) {
            ctx.draw(Process::Y, rs);
            double prod = 1.0;
            for (double v : ctx.values) prod *= (v >= 0.0) ? 1.0 : -1.0;
            state.add(prod);
        });
    return acc.report();
}

// Kolmogorov-Smirnov sup-distance between the empirical CDF of samples
// and the normal CDF with the given mean and variance.
inline double ks_distance(std::span<const double> samples, double target_mean,
                          double target_variance) {
    if (samples.size() < 100)
        throw std::invalid_argument("need at least 100 samples");
    if (!(target_variance > 0.0))
        throw std::invalid_argument("target variance must be positive");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = double(sorted.size());
    const double sd = std::sqrt(target_variance);
    double sup = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double z = (sorted[i] - target_mean) / sd;
        const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
        sup = std::max(sup, std::max((double(i) + 1.0) / n - cdf,
                                     cdf - double(i) / n));
    }
    return sup;
}

struct SubblockProductReport {
    MomentReport product_moment;   // (a) E[prod of the L top sub-block sums]
    MomentReport abs_sum_moment;   // (b) E|t| for one level-(k-1) block sum
    double predicted_product = 0;  // -(E|t|)^L from (b)
    double predicted_se = 0;       // delta-method error of the prediction
};

namespace detail {

struct SubblockAccum {
    Accumulator product;
    Accumulator abs_sum;
    void merge(const SubblockAccum& o) {
        product.merge(o.product);
        abs_sum.merge(o.abs_sum);
    }
};

}  // namespace detail

// Samples level-k blocks and checks the identity prod T_i = -prod |t_i|:
// the product of top sub-block sums is deterministically negative, with
// magnitude (E|t|)^L in expectation by sub-block independence.
inline SubblockProductReport subblock_product_check(
    const ConstructionParams& params, int level, std::int64_t reps,
    RngStream stream, int workers = 1) {
    if (level < 1) throw std::invalid_argument("level must be >= 1");
    if (reps < 10000) throw std::invalid_argument("need at least 10^4 reps");
    ConstructionParams at = params;
    at.level = level;
    const auto block_len = static_cast<std::size_t>(at.block_length());
    const int L = params.arity;
    const std::size_t sub_len = block_len / static_cast<std::size_t>(L);

    auto acc = sharded_run<detail::SubblockAccum>(
        stream, reps, workers, [&] { return detail::WindowCtx(at, block_len); },
        [L, sub_len](detail::WindowCtx& ctx, RngStream& rs,
                     detail::SubblockAccum& state) {
            ctx.draw(Process::Y, rs);
            double prod = 1.0;
            for (int i = 0; i < L; ++i) {
                double t = 0.0;
                for (std::size_t k = 0; k < sub_len; ++k)
                    t += ctx.values[static_cast<std::size_t>(i) * sub_len + k];
                prod *= t;
                state.abs_sum.add(std::abs(t));
            }
            state.product.add(prod);
        });

    SubblockProductReport report;
    report.product_moment = acc.product.report();
    report.abs_sum_moment = acc.abs_sum.report();
    const double b = report.abs_sum_moment.estimate;
    report.predicted_product = -std::pow(b, L);
    report.predicted_se =
        L * std::pow(b, L - 1) * report.abs_sum_moment.std_error;
    return report;
}

}  // namespace blockmix

#endif  // BLOCKMIX_STATISTICS_HPP
