// Experiment orchestration: a fixed catalog of verification suites,
// config-driven scale knobs, deterministic sub-seeding, and JSON/CSV/text
// reports.  Suites encode what is verified; configs only tune how hard.

#ifndef BLOCKMIX_HARNESS_HPP
#define BLOCKMIX_HARNESS_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "blockmix/construction.hpp"
#include "blockmix/oracle.hpp"
#include "blockmix/statistics.hpp"

namespace blockmix::harness {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr std::uint64_t kDefaultSeed = 0xB10C5EEDULL;

// Regression constants, pinned once computed by the exact oracles.
// Least m with the Binomial(m,1/2) residues mod 6 all within 1e-6 of 1/6.
inline constexpr std::int64_t kEquidistributionTrialsMod6 = 89;
// Least h with |E(S(thinned-normal,h)/sqrt(h))^6 - 15/8| <= 1e-3.
inline constexpr std::int64_t kGaussianMixtureSettleH = 5625;

struct ExperimentConfig {
    // {"all"} expands to the full catalog; an empty list runs nothing.
    std::vector<std::string> suites{"all"};
    int arity = 6;
    int level = 1;
    double thinning = 0.5;
    std::uint64_t seed = kDefaultSeed;
    int workers = 8;
    std::string output_dir = "runs";

    std::int64_t reps_scalar = 1'000'000;
    std::int64_t reps_cylinder = 100'000;
    std::int64_t reps_mixing = 1'000'000;
    std::int64_t reps_deficit_mc = 10'000'000;
    std::int64_t reps_ks = 100'000;
    std::int64_t reps_tuple = 1'000'000;
    std::int64_t reps_sign = 10'000;
    std::int64_t reps_subblock = 100'000;

    ConstructionParams params() const {
        ConstructionParams p;
        p.arity = arity;
        p.level = level;
        p.thinning = thinning;
        p.seed = seed;
        p.validate();
        return p;
    }
};

struct TestEntry {
    std::string name;
    double estimate = 0.0;
    double std_error = 0.0;
    std::optional<double> reference;
    std::optional<double> z_score;
    bool pass = false;
    std::string note;
};

struct RunRecord {
    ExperimentConfig config;
    std::string suite;
    std::vector<TestEntry> entries;
    double duration_seconds = 0.0;
    std::string version = kVersion;
    std::uint64_t seed = 0;

    bool passed() const {
        for (const auto& e : entries)
            if (!e.pass) return false;
        return true;
    }
};

// ---------------------------------------------------------------------------
// Config file: UTF-8 text, one `key = value` per line, `#` comments.

namespace detail {

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected `key = value`");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key == "suites") {
            cfg.suites.clear();
            if (value == "all") {
                cfg.suites.push_back("all");
            } else {
                std::stringstream ss(value);
                std::string name;
                while (std::getline(ss, name, ','))
                    if (auto t = detail::trim(name); !t.empty())
                        cfg.suites.push_back(t);
            }
        } else if (key == "L") {
            cfg.arity = std::stoi(value);
        } else if (key == "n") {
            cfg.level = std::stoi(value);
        } else if (key == "p") {
            cfg.thinning = std::stod(value);
        } else if (key == "seed") {
            cfg.seed = std::stoull(value);
        } else if (key == "workers") {
            cfg.workers = std::stoi(value);
        } else if (key == "output_dir") {
            cfg.output_dir = value;
        } else if (key == "reps_scalar") {
            cfg.reps_scalar = std::stoll(value);
        } else if (key == "reps_cylinder") {
            cfg.reps_cylinder = std::stoll(value);
        } else if (key == "reps_mixing") {
            cfg.reps_mixing = std::stoll(value);
        } else if (key == "reps_deficit_mc") {
            cfg.reps_deficit_mc = std::stoll(value);
        } else if (key == "reps_ks") {
            cfg.reps_ks = std::stoll(value);
        } else if (key == "reps_tuple") {
            cfg.reps_tuple = std::stoll(value);
        } else if (key == "reps_sign") {
            cfg.reps_sign = std::stoll(value);
        } else if (key == "reps_subblock") {
            cfg.reps_subblock = std::stoll(value);
        } else {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": unknown key `" + key + "`");
        }
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    return parse_config(in);
}

// ---------------------------------------------------------------------------
// Entry helpers.

namespace detail {

inline TestEntry z_entry(std::string name, const MomentReport& report,
                         double reference, std::string note = "") {
    TestEntry e;
    e.name = std::move(name);
    e.estimate = report.estimate;
    e.std_error = report.std_error;
    e.reference = reference;
    if (report.std_error > 0.0)
        e.z_score = (report.estimate - reference) / report.std_error;
    e.pass = e.z_score ? std::abs(*e.z_score) <= 4.0
                       : report.estimate == reference;
    e.note = std::move(note);
    return e;
}

inline TestEntry exact_entry(std::string name, double value, double reference,
                             double tolerance, std::string note = "") {
    TestEntry e;
    e.name = std::move(name);
    e.estimate = value;
    e.std_error = 0.0;
    e.reference = reference;
    e.pass = std::abs(value - reference) <= tolerance;
    e.note = std::move(note);
    return e;
}

inline TestEntry bound_entry(std::string name, double value, double bound,
                             bool value_must_be_below, std::string note = "") {
    TestEntry e;
    e.name = std::move(name);
    e.estimate = value;
    e.reference = bound;
    e.pass = value_must_be_below ? value <= bound : value >= bound;
    e.note = std::move(note);
    return e;
}

inline RngStream suite_stream(const ExperimentConfig& cfg,
                              const std::string& suite) {
    return RngStream(cfg.seed).derive(fnv1a(suite));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Suites.

namespace suites {

// E Xt0, E Xt0^2, E Xt0^4 against 0, 1/2, 9/10.
inline std::vector<TestEntry> marginal(const ExperimentConfig& cfg) {
    const auto params = cfg.params();
    auto stream = detail::suite_stream(cfg, "marginal");
    std::vector<TestEntry> out;
    out.push_back(detail::z_entry(
        "marginal/mean",
        estimate_moment(Process::XTilde, params, 1, 1, cfg.reps_scalar,
                        stream.derive(1), cfg.workers),
        0.0));
    out.push_back(detail::z_entry(
        "marginal/second_moment",
        estimate_moment(Process::XTilde, params, 1, 2, cfg.reps_scalar,
                        stream.derive(2), cfg.workers),
        0.5));
    out.push_back(detail::z_entry(
        "marginal/fourth_moment",
        estimate_moment(Process::XTilde, params, 1, 4, cfg.reps_scalar,
                        stream.derive(3), cfg.workers),
        0.9));
    return out;
}

namespace impl {

struct CdfCounts {
    std::int64_t n = 0;
    std::vector<std::int64_t> below;
    void merge(const CdfCounts& o) {
        n += o.n;
        if (below.empty()) {
            below = o.below;
            return;
        }
        for (std::size_t i = 0; i < below.size(); ++i) below[i] += o.below[i];
    }
};

inline std::vector<double> cdf_grid() {
    std::vector<double> xs;
    for (int i = 0; i < 9; ++i) xs.push_back(-1.7 + 0.2 * i);  // -1.7 .. -0.1
    xs.push_back(0.0);
    for (int i = 0; i < 9; ++i) xs.push_back(0.1 + 0.2 * i);  // 0.1 .. 1.7
    xs.push_back(1.72);
    return xs;
}

}  // namespace impl

// Empirical CDF of Xt0 on a 20-point grid against the thinning mixture.
inline std::vector<TestEntry> thinning_cdf(const ExperimentConfig& cfg) {
    const auto params = cfg.params();
    const auto grid = impl::cdf_grid();
    auto counts = sharded_run<impl::CdfCounts>(
        detail::suite_stream(cfg, "thinning_cdf"), cfg.reps_scalar, cfg.workers,
        [&] { return blockmix::detail::WindowCtx(params, 1); },
        [&grid](blockmix::detail::WindowCtx& ctx, RngStream& rs,
                impl::CdfCounts& state) {
            if (state.below.empty()) state.below.assign(grid.size(), 0);
            ctx.draw(Process::XTilde, rs);
            ++state.n;
            for (std::size_t i = 0; i < grid.size(); ++i)
                if (ctx.values[0] <= grid[i]) ++state.below[i];
        });
    std::vector<TestEntry> out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid[i];
        const double n = double(counts.n);
        const double phat = counts.below[i] / n;
        const double uniform_cdf =
            std::clamp((x + kSqrt3) / (2.0 * kSqrt3), 0.0, 1.0);
        const double ref = cdf_mixture(params.thinning, uniform_cdf, x);
        MomentReport r{phat, std::sqrt(phat * (1 - phat) / n), counts.n, {}, {}};
        std::ostringstream name;
        name << "thinning_cdf/x=" << x;
        out.push_back(detail::z_entry(name.str(), r, ref));
    }
    return out;
}

namespace impl {

// Prefix-sum power accumulators for S(., j), j = 1..h, at powers 2 and 4.
struct PrefixMoments {
    std::int64_t n = 0;
    std::vector<double> sum2, sumsq2, sum4, sumsq4;
    void init(std::size_t h) {
        if (sum2.empty()) {
            sum2.assign(h, 0.0);
            sumsq2.assign(h, 0.0);
            sum4.assign(h, 0.0);
            sumsq4.assign(h, 0.0);
        }
    }
    void merge(const PrefixMoments& o) {
        n += o.n;
        if (sum2.empty()) {
            *this = o;
            return;
        }
        for (std::size_t j = 0; j < sum2.size(); ++j) {
            sum2[j] += o.sum2[j];
            sumsq2[j] += o.sumsq2[j];
            sum4[j] += o.sum4[j];
            sumsq4[j] += o.sumsq4[j];
        }
    }
    MomentReport report(int power, std::size_t j) const {
        Accumulator a;
        a.n = n;
        a.sum = (power == 2) ? sum2[j] : sum4[j];
        a.sum_sq = (power == 2) ? sumsq2[j] : sumsq4[j];
        return a.report();
    }
};

inline PrefixMoments run_prefix_moments(const ExperimentConfig& cfg,
                                        Process process, std::size_t h,
                                        RngStream stream, std::int64_t reps) {
    const auto params = cfg.params();
    return sharded_run<PrefixMoments>(
        stream, reps, cfg.workers,
        [&] { return blockmix::detail::WindowCtx(params, h); },
        [process, h](blockmix::detail::WindowCtx& ctx, RngStream& rs,
                     PrefixMoments& state) {
            state.init(h);
            ctx.draw(process, rs);
            ++state.n;
            double s = 0.0;
            for (std::size_t j = 0; j < h; ++j) {
                s += ctx.values[j];
                const double s2 = s * s;
                const double s4 = s2 * s2;
                state.sum2[j] += s2;
                state.sumsq2[j] += s4;
                state.sum4[j] += s4;
                state.sumsq4[j] += s4 * s4;
            }
        });
}

}  // namespace impl

// E[S(Xt,h)]^r against the binomial mixture of E[S(X,j)]^r, r in {2,4},
// h in {4,8,12}.
inline std::vector<TestEntry> moment_mixture(const ExperimentConfig& cfg) {
    const std::size_t h_max = 12;
    auto stream = detail::suite_stream(cfg, "moment_mixture");
    const auto base = impl::run_prefix_moments(cfg, Process::X, h_max,
                                               stream.derive(1), cfg.reps_scalar);
    const auto lhs = impl::run_prefix_moments(cfg, Process::XTilde, h_max,
                                              stream.derive(2), cfg.reps_scalar);
    std::vector<TestEntry> out;
    for (int r : {2, 4}) {
        for (std::size_t h : {4u, 8u, 12u}) {
            std::vector<double> base_moments(h);
            double ref_var = 0.0;
            for (std::size_t j = 1; j <= h; ++j) {
                const auto b = base.report(r, j - 1);
                base_moments[j - 1] = b.estimate;
                const double w = blockmix::detail::binomial_weight(
                    std::int64_t(h), std::int64_t(j), cfg.thinning);
                ref_var += w * w * b.std_error * b.std_error;
            }
            const double ref = blockmix::moment_mixture(
                cfg.thinning, std::int64_t(h), r, base_moments);
            const auto l = lhs.report(r, h - 1);
            TestEntry e;
            e.name = "moment_mixture/r=" + std::to_string(r) +
                     ",h=" + std::to_string(h);
            e.estimate = l.estimate;
            e.std_error =
                std::sqrt(l.std_error * l.std_error + ref_var);
            e.reference = ref;
            e.z_score = (l.estimate - ref) / e.std_error;
            e.pass = std::abs(*e.z_score) <= 4.0;
            out.push_back(e);
        }
    }
    return out;
}

// E(S(Xt,n)/sqrt(n))^4 against 3/4 + 3/(20 n) for n in {1,2,4,16}.
inline std::vector<TestEntry> fourth_moment(const ExperimentConfig& cfg) {
    const std::size_t h_max = 16;
    auto prefixes = impl::run_prefix_moments(
        cfg, Process::XTilde, h_max, detail::suite_stream(cfg, "fourth_moment"),
        cfg.reps_scalar);
    std::vector<TestEntry> out;
    for (std::size_t n : {1u, 2u, 4u, 16u}) {
        auto raw = prefixes.report(4, n - 1);
        const double scale = 1.0 / (double(n) * double(n));
        MomentReport normalized{raw.estimate * scale, raw.std_error * scale,
                                raw.reps, {}, {}};
        out.push_back(detail::z_entry(
            "fourth_moment/n=" + std::to_string(n), normalized,
            oracle::normalized_fourth_moment(std::int64_t(n))));
    }
    return out;
}

// Exact level-1 L-th moment of the shifted partial sum: below the
// Gaussian reference minus the deficit, and confirmed by Monte Carlo.
// Pinned to L = 6, n = 1 (the deficit statement at base level 0).
inline std::vector<TestEntry> deficit_exact(const ExperimentConfig& cfg) {
    ConstructionParams params;
    params.arity = 6;
    params.level = 1;
    params.thinning = cfg.thinning;
    params.seed = cfg.seed;
    const int L = 6;
    const int h = 12;
    const double exact =
        oracle::exact_partial_sum_moment_level1(L, h, L, /*shifted=*/true);
    const double gaussian_ref =
        oracle::gaussian_even_moment(L) * std::pow(double(h), L / 2.0);
    const double bound = gaussian_ref - oracle::deficit_bound(L, 0);
    std::vector<TestEntry> out;
    out.push_back(detail::bound_entry(
        "deficit_exact/oracle_below_bound", exact, bound, true,
        "E[S(X,12)]^6 at level 1 vs 15*12^3 - 11.25"));
    const auto mc =
        estimate_moment(Process::X, params, h, L, cfg.reps_deficit_mc,
                        detail::suite_stream(cfg, "deficit_exact"), cfg.workers);
    out.push_back(detail::z_entry("deficit_exact/monte_carlo", mc, exact));
    return out;
}

// Level-2 sub-block sum diagnostics: the deficit's mechanism.
inline std::vector<TestEntry> deficit_scale(const ExperimentConfig& cfg) {
    const auto params = cfg.params();
    const int L = params.arity;
    const auto check =
        subblock_product_check(params, 2, cfg.reps_subblock,
                               detail::suite_stream(cfg, "deficit_scale"),
                               cfg.workers);
    std::vector<TestEntry> out;
    const auto& abs_sum = check.abs_sum_moment;
    TestEntry e1;
    e1.name = "deficit_scale/abs_sum_lower_bound";
    e1.estimate = abs_sum.estimate;
    e1.std_error = abs_sum.std_error;
    e1.reference = std::sqrt(double(L)) / 2.0;
    e1.pass = abs_sum.estimate - 4.0 * abs_sum.std_error >= *e1.reference;
    e1.note = "E|t| >= sqrt(L)/2 for a level-1 block sum";
    out.push_back(e1);

    const auto& prod = check.product_moment;
    TestEntry e2;
    e2.name = "deficit_scale/product_magnitude";
    e2.estimate = std::abs(prod.estimate);
    e2.std_error = prod.std_error;
    e2.reference = std::pow(2.0, -L) * std::pow(double(L), L / 2.0);
    e2.pass = e2.estimate - 4.0 * prod.std_error >= *e2.reference;
    e2.note = "|E prod T_i| >= 2^-L L^(L/2), the deficit scale at n = 1";
    out.push_back(e2);

    TestEntry e3;
    e3.name = "deficit_scale/product_identity";
    e3.estimate = prod.estimate;
    e3.reference = check.predicted_product;
    e3.std_error = std::sqrt(prod.std_error * prod.std_error +
                             check.predicted_se * check.predicted_se);
    e3.z_score = (prod.estimate - check.predicted_product) / e3.std_error;
    e3.pass = std::abs(*e3.z_score) <= 4.0;
    e3.note = "E[prod T_i] = -(E|t|)^L by the sign-coupling identity";
    out.push_back(e3);
    return out;
}

// Five-tuple factorization plus the arity-L sign-product violation.
inline std::vector<TestEntry> tuplewise(const ExperimentConfig& cfg) {
    ConstructionParams params = cfg.params();
    params.level = 1;  // tuples drawn from two adjacent level-1 blocks
    auto stream = detail::suite_stream(cfg, "tuplewise");
    auto pick_stream = stream.derive(0xC0);
    std::vector<TestEntry> out;

    const std::vector<Interval> menu = {
        Interval{-std::numeric_limits<double>::infinity(), -0.6, false, false},
        Interval{-0.6, 0.3, true, false},
        Interval{0.3, std::numeric_limits<double>::infinity(), true, false},
        Interval{0.0, 1.0, false, true},
    };
    const std::int64_t window = 2 * params.arity;
    for (int tuple_idx = 0; tuple_idx < 10; ++tuple_idx) {
        // seeded draw of 5 distinct coordinates in [0, 2L)
        std::vector<std::int64_t> coords;
        while (coords.size() < 5) {
            const auto c = static_cast<std::int64_t>(
                pick_stream.below(static_cast<std::uint64_t>(window)));
            if (std::find(coords.begin(), coords.end(), c) == coords.end())
                coords.push_back(c);
        }
        std::vector<std::vector<Interval>> cells(6);
        for (auto& cell : cells) {
            cell.resize(5);
            for (auto& iv : cell)
                iv = menu[pick_stream.below(menu.size())];
        }
        const auto result = tuple_independence_discrepancy(
            Process::X, params, coords, cells, cfg.reps_tuple,
            stream.derive(static_cast<std::uint64_t>(tuple_idx + 1)),
            cfg.workers);
        TestEntry e;
        e.name = "tuplewise/tuple_" + std::to_string(tuple_idx);
        e.estimate = result.max_discrepancy;
        e.std_error = result.threshold / 4.0;
        e.reference = 0.0;
        e.pass = result.all_within;
        out.push_back(e);
    }

    const auto sign = sign_product_moment(params, cfg.reps_sign,
                                          stream.derive(0x51), cfg.workers);
    TestEntry e;
    e.name = "tuplewise/sign_product_arity_L";
    e.estimate = sign.estimate;
    e.std_error = sign.std_error;
    e.reference = -1.0;
    e.pass = sign.estimate == -1.0 && sign.std_error == 0.0;
    e.note = "product of block signs is -1 on every draw; factorized "
             "value would be 0, so independence fails at arity L";
    out.push_back(e);
    return out;
}

// Exact binomial residue equidistribution and the median tail bound.
inline std::vector<TestEntry> binomial(const ExperimentConfig& cfg) {
    (void)cfg;
    std::vector<TestEntry> out;
    const auto least = oracle::least_equidistribution_trials(6);
    out.push_back(detail::exact_entry(
        "binomial/least_equidistribution_trials_mod6", double(least),
        double(kEquidistributionTrialsMod6), 0.0,
        "least m with all residue probabilities within 1e-6 of 1/6"));

    const auto dist = oracle::binomial_mod_distribution(
        kEquidistributionTrialsMod6, 6);
    double max_dev = 0.0, total = 0.0;
    for (double p : dist) {
        max_dev = std::max(max_dev, std::abs(p - 1.0 / 6.0));
        total += p;
    }
    out.push_back(detail::bound_entry("binomial/max_residue_deviation", max_dev,
                                      1e-6, true));
    out.push_back(detail::exact_entry("binomial/distribution_total", total, 1.0,
                                      1e-12));

    double min_tail = 1.0;
    for (std::int64_t h = 1; h <= 64; ++h)
        min_tail = std::min(min_tail, oracle::binomial_tail_half(h));
    out.push_back(detail::bound_entry("binomial/tail_half_min_h_le_64", min_tail,
                                      0.5, false,
                                      "P(beta_h >= floor(h/2)) >= 1/2"));
    return out;
}

// Level-consistency of cylinder probabilities across construction levels.
inline std::vector<TestEntry> level_consistency(const ExperimentConfig& cfg) {
    auto stream = detail::suite_stream(cfg, "level_consistency");
    std::vector<TestEntry> out;

    // n = 0 vs m = 1, single marked coordinate.
    {
        ConstructionParams params = cfg.params();
        params.level = 0;
        auto spec = parse_cylinder_spec("0:(0.5,inf);marks=1", 1);
        const auto gap =
            level_consistency_gap(params, 1, spec, cfg.reps_cylinder,
                                  stream.derive(1), cfg.workers);
        out.push_back(detail::z_entry("level_consistency/n0_m1_single", gap, 0.0));
    }
    // n = 1 vs m = 2, full-length window with marks.
    {
        ConstructionParams params = cfg.params();
        params.level = 1;
        auto spec = parse_cylinder_spec(
            "0:(0,inf);1:[-1,0.5);3:(-0.5,0.75];marks=110100", 6);
        const auto gap =
            level_consistency_gap(params, 2, spec, cfg.reps_cylinder,
                                  stream.derive(2), cfg.workers);
        out.push_back(detail::z_entry("level_consistency/n1_m2_window", gap, 0.0));
    }
    return out;
}

// Mixing gap over a lag ladder for a level-0 cylinder pair.
inline std::vector<TestEntry> mixing(const ExperimentConfig& cfg) {
    ConstructionParams params = cfg.params();
    params.level = 0;
    const auto spec_a = parse_cylinder_spec("0:(0.5,inf)", 1);
    const auto spec_b = parse_cylinder_spec("0:(-inf,-0.3)", 1);
    auto stream = detail::suite_stream(cfg, "mixing");
    std::vector<TestEntry> out;
    for (std::int64_t lag : {4, 8, 16, 32, 64}) {
        const auto gap = mixing_gap(params, spec_a, spec_b, lag, cfg.reps_mixing,
                                    stream.derive(static_cast<std::uint64_t>(lag)),
                                    cfg.workers);
        TestEntry e;
        e.name = "mixing/gap_N=" + std::to_string(lag);
        e.estimate = gap.estimate;
        e.std_error = gap.std_error;
        e.reference = 0.0;
        e.z_score = gap.estimate / gap.std_error;
        e.pass = std::abs(*e.z_score) <= 4.0;
        out.push_back(e);
    }
    return out;
}

// KS distance of normalized level-2 partial sums vs N(0, 1/2), next to an
// i.i.d.-normal control.  The distributional gap (~1.2e-7) is far below
// KS resolution at any desk-scale rep count: non-detection here is the
// expected outcome, and non-normality of the limit rests on the exact
// deficit suites instead.
inline std::vector<TestEntry> ks_nondetect(const ExperimentConfig& cfg) {
    ConstructionParams params = cfg.params();
    params.level = 2;
    const std::int64_t h = 64;
    const double norm = std::sqrt(double(h));
    auto stream = detail::suite_stream(cfg, "ks_nondetect");

    struct Samples {
        std::vector<double> values;
        void merge(const Samples& o) {
            values.insert(values.end(), o.values.begin(), o.values.end());
        }
    };
    auto draw = sharded_run<Samples>(
        stream.derive(1), cfg.reps_ks, cfg.workers,
        [&] {
            return blockmix::detail::WindowCtx(params,
                                               static_cast<std::size_t>(h));
        },
        [norm](blockmix::detail::WindowCtx& ctx, RngStream& rs, Samples& state) {
            ctx.draw(Process::XTilde, rs);
            double s = 0.0;
            for (double v : ctx.values) s += v;
            state.values.push_back(s / norm);
        });

    auto control_stream = stream.derive(2);
    std::vector<double> control(draw.values.size());
    for (auto& v : control) {
        // Box-Muller, N(0, 1/2)
        const double u1 = control_stream.uniform01_pos();
        const double u2 = control_stream.uniform01();
        v = std::sqrt(0.5) * std::sqrt(-2.0 * std::log(u1)) *
            std::cos(2.0 * M_PI * u2);
    }

    const double d_process = ks_distance(draw.values, 0.0, 0.5);
    const double d_control = ks_distance(control, 0.0, 0.5);
    const double sqrt_n = std::sqrt(double(draw.values.size()));
    const double crit_999 = 1.9495 / sqrt_n;  // alpha = 0.001 critical value

    std::vector<TestEntry> out;
    out.push_back(detail::bound_entry(
        "ks_nondetect/process_below_null_critical", d_process, crit_999, true,
        "KS cannot see the ~1.2e-7 moment gap; non-normality of the limit "
        "is established by the deficit suites, not by KS"));
    out.push_back(detail::bound_entry(
        "ks_nondetect/control_below_null_critical", d_control, crit_999, true));
    out.push_back(detail::bound_entry(
        "ks_nondetect/indistinguishable_from_control",
        std::abs(d_process - d_control), 2.0 * 1.3581 / sqrt_n, true));
    return out;
}

// Thinned-Gaussian L-th moment: convergence to E(Z/sqrt(2))^L and the
// global (L-1)!! bound.
inline std::vector<TestEntry> gaussian_mixture(const ExperimentConfig& cfg) {
    (void)cfg;
    const int L = 6;
    const double target = oracle::gaussian_even_moment(L) / std::pow(2.0, L / 2);
    std::vector<TestEntry> out;
    out.push_back(detail::exact_entry(
        "gaussian_mixture/settled_at_h=" +
            std::to_string(kGaussianMixtureSettleH),
        oracle::gaussian_mixture_moment(kGaussianMixtureSettleH, L, 0.5), target,
        1e-3));
    double max_value = 0.0;
    for (std::int64_t h = 1; h <= 1000; ++h)
        max_value =
            std::max(max_value, oracle::gaussian_mixture_moment(h, L, 0.5));
    out.push_back(detail::bound_entry("gaussian_mixture/bounded_by_gaussian",
                                      max_value, oracle::gaussian_even_moment(L),
                                      true));
    out.push_back(detail::exact_entry(
        "gaussian_mixture/gap_constant_ratio",
        oracle::clt_gap_constant_finite_h(L) / oracle::clt_gap_constant(L), 2.0,
        0.0));
    return out;
}

}  // namespace suites

inline const std::vector<std::string>& suite_catalog() {
    static const std::vector<std::string> names = {
        "marginal",      "thinning_cdf",    "moment_mixture", "fourth_moment",
        "deficit_exact", "deficit_scale",   "tuplewise",      "binomial",
        "level_consistency", "mixing",      "ks_nondetect",   "gaussian_mixture",
    };
    return names;
}

inline std::vector<TestEntry> run_suite_tests(const ExperimentConfig& cfg,
                                              const std::string& suite) {
    if (suite == "marginal") return suites::marginal(cfg);
    if (suite == "thinning_cdf") return suites::thinning_cdf(cfg);
    if (suite == "moment_mixture") return suites::moment_mixture(cfg);
    if (suite == "fourth_moment") return suites::fourth_moment(cfg);
    if (suite == "deficit_exact") return suites::deficit_exact(cfg);
    if (suite == "deficit_scale") return suites::deficit_scale(cfg);
    if (suite == "tuplewise") return suites::tuplewise(cfg);
    if (suite == "binomial") return suites::binomial(cfg);
    if (suite == "level_consistency") return suites::level_consistency(cfg);
    if (suite == "mixing") return suites::mixing(cfg);
    if (suite == "ks_nondetect") return suites::ks_nondetect(cfg);
    if (suite == "gaussian_mixture") return suites::gaussian_mixture(cfg);
    throw std::invalid_argument("unknown suite: " + suite);
}

// ---------------------------------------------------------------------------
// Records and reports.

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    j["suites"] = cfg.suites;
    j["L"] = cfg.arity;
    j["n"] = cfg.level;
    j["p"] = cfg.thinning;
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    j["output_dir"] = cfg.output_dir;
    j["reps_scalar"] = cfg.reps_scalar;
    j["reps_cylinder"] = cfg.reps_cylinder;
    j["reps_mixing"] = cfg.reps_mixing;
    j["reps_deficit_mc"] = cfg.reps_deficit_mc;
    j["reps_ks"] = cfg.reps_ks;
    j["reps_tuple"] = cfg.reps_tuple;
    j["reps_sign"] = cfg.reps_sign;
    j["reps_subblock"] = cfg.reps_subblock;
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.suites = j.at("suites").get<std::vector<std::string>>();
    cfg.arity = j.at("L").get<int>();
    cfg.level = j.at("n").get<int>();
    cfg.thinning = j.at("p").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.workers = j.at("workers").get<int>();
    cfg.output_dir = j.at("output_dir").get<std::string>();
    cfg.reps_scalar = j.at("reps_scalar").get<std::int64_t>();
    cfg.reps_cylinder = j.at("reps_cylinder").get<std::int64_t>();
    cfg.reps_mixing = j.at("reps_mixing").get<std::int64_t>();
    cfg.reps_deficit_mc = j.at("reps_deficit_mc").get<std::int64_t>();
    cfg.reps_ks = j.at("reps_ks").get<std::int64_t>();
    cfg.reps_tuple = j.at("reps_tuple").get<std::int64_t>();
    cfg.reps_sign = j.at("reps_sign").get<std::int64_t>();
    cfg.reps_subblock = j.at("reps_subblock").get<std::int64_t>();
    return cfg;
}

inline nlohmann::ordered_json record_to_json(const RunRecord& record) {
    nlohmann::ordered_json j;
    j["suite"] = record.suite;
    j["seed"] = record.seed;
    j["version"] = record.version;
    j["duration_seconds"] = record.duration_seconds;
    j["config"] = config_to_json(record.config);
    j["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : record.entries) {
        nlohmann::ordered_json je;
        je["name"] = e.name;
        je["estimate"] = e.estimate;
        je["std_error"] = e.std_error;
        if (e.reference) je["reference"] = *e.reference;
        if (e.z_score) je["z_score"] = *e.z_score;
        je["verdict"] = e.pass ? "pass" : "fail";
        if (!e.note.empty()) je["note"] = e.note;
        j["entries"].push_back(je);
    }
    return j;
}

inline RunRecord record_from_json(const nlohmann::json& j) {
    RunRecord record;
    record.suite = j.at("suite").get<std::string>();
    record.seed = j.at("seed").get<std::uint64_t>();
    record.version = j.at("version").get<std::string>();
    record.duration_seconds = j.at("duration_seconds").get<double>();
    record.config = config_from_json(j.at("config"));
    for (const auto& je : j.at("entries")) {
        TestEntry e;
        e.name = je.at("name").get<std::string>();
        e.estimate = je.at("estimate").get<double>();
        e.std_error = je.at("std_error").get<double>();
        if (je.contains("reference")) e.reference = je.at("reference").get<double>();
        if (je.contains("z_score")) e.z_score = je.at("z_score").get<double>();
        e.pass = je.at("verdict").get<std::string>() == "pass";
        if (je.contains("note")) e.note = je.at("note").get<std::string>();
        record.entries.push_back(e);
    }
    return record;
}

enum class ReportFormat { Json, Csv, Text };

inline std::string emit_report(const RunRecord& record, ReportFormat format) {
    switch (format) {
        case ReportFormat::Json:
            return record_to_json(record).dump(2) + "\n";
        case ReportFormat::Csv: {
            std::ostringstream out;
            out << "test,estimate,std_error,reference,z_score,verdict\n";
            for (const auto& e : record.entries) {
                out << e.name << ',' << std::setprecision(17) << e.estimate << ','
                    << e.std_error << ',';
                if (e.reference) out << *e.reference;
                out << ',';
                if (e.z_score) out << *e.z_score;
                out << ',' << (e.pass ? "pass" : "fail") << '\n';
            }
            return out.str();
        }
        case ReportFormat::Text: {
            std::ostringstream out;
            out << "suite " << record.suite << "  seed " << record.seed
                << "  version " << record.version << "\n";
            for (const auto& e : record.entries) {
                out << (e.pass ? "  [pass] " : "  [FAIL] ") << std::left
                    << std::setw(44) << e.name << " estimate "
                    << std::setprecision(10) << e.estimate;
                if (e.reference) out << "  ref " << *e.reference;
                if (e.z_score) out << "  z " << std::setprecision(3) << *e.z_score;
                out << "\n";
            }
            return out.str();
        }
    }
    throw std::invalid_argument("unknown report format");
}

// Serialization with the execution environment (wall clock, worker count)
// stripped: identical configs and seeds must give byte-identical canonical
// reports for any worker count.
inline std::string canonical_report(const RunRecord& record) {
    RunRecord copy = record;
    copy.duration_seconds = 0.0;
    copy.config.workers = 0;
    return emit_report(copy, ReportFormat::Json);
}

// ---------------------------------------------------------------------------
// Execution.

inline RunRecord run_experiment(const ExperimentConfig& cfg,
                                const std::string& suite) {
    RunRecord record;
    record.config = cfg;
    record.suite = suite;
    record.seed = cfg.seed;
    const auto t0 = std::chrono::steady_clock::now();
    record.entries = run_suite_tests(cfg, suite);
    record.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return record;
}

// Append-only persistence: a fresh timestamped name, never overwriting.
inline std::filesystem::path persist_record(const RunRecord& record,
                                            const std::string& extension,
                                            const std::string& content) {
    namespace fs = std::filesystem;
    fs::create_directories(record.config.output_dir);
    const auto now = std::chrono::system_clock::now();
    const auto tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::ostringstream stamp;
    stamp << std::put_time(&tm, "%Y%m%dT%H%M%S");
    fs::path base = fs::path(record.config.output_dir) /
                    (record.suite + "-" + stamp.str() + "-" +
                     std::to_string(record.seed));
    fs::path path = base;
    path += "." + extension;
    for (int i = 1; fs::exists(path); ++i) {
        path = base;
        path += "-" + std::to_string(i) + "." + extension;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write record: " + path.string());
    out << content;
    return path;
}

struct VerifySummary {
    int status = 0;
    std::vector<RunRecord> records;
    int total_pass = 0;
    int total_fail = 0;
};

inline VerifySummary verify_suite(const ExperimentConfig& cfg,
                                  bool persist = true,
                                  std::ostream* log = nullptr) {
    VerifySummary summary;
    const bool expand_all =
        cfg.suites.size() == 1 && cfg.suites.front() == "all";
    const auto& names = expand_all ? suite_catalog() : cfg.suites;
    for (const auto& name : names) {
        auto record = run_experiment(cfg, name);
        int pass = 0, fail = 0;
        for (const auto& e : record.entries) (e.pass ? pass : fail)++;
        summary.total_pass += pass;
        summary.total_fail += fail;
        if (log)
            *log << (fail == 0 ? "[PASS] " : "[FAIL] ") << name << "  (" << pass
                 << " pass, " << fail << " fail, "
                 << record.duration_seconds << " s)\n";
        if (persist) {
            persist_record(record, "json", emit_report(record, ReportFormat::Json));
            persist_record(record, "csv", emit_report(record, ReportFormat::Csv));
        }
        summary.records.push_back(std::move(record));
    }
    summary.status = summary.total_fail == 0 ? 0 : 1;
    return summary;
}

}  // namespace blockmix::harness

#endif  // BLOCKMIX_HARNESS_HPP
