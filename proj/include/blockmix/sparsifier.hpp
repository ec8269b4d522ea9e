// Thinning operator S(W, V) and its exact distributional consequences.
//
// Given a source sequence W and i.i.d. 0/1 marks V, the thinned sequence
// carries the W values, in order, at the positions where V is 1, and 0
// elsewhere.  The one-dimensional CDF of the result is a point-mass /
// source mixture, and moments of partial sums mix binomially over the
// number of occupied slots.

#ifndef BLOCKMIX_SPARSIFIER_HPP
#define BLOCKMIX_SPARSIFIER_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace blockmix {

struct ThinnedPlacement {
    std::vector<std::int64_t> kappa;  // 1-based positions of the 1-marks
    std::int64_t source_count = 0;
};

// Positions k in [1, N] with V_k = 1, ascending.
inline ThinnedPlacement kappa_positions(std::span<const std::uint8_t> marks) {
    ThinnedPlacement placement;
    for (std::size_t k = 0; k < marks.size(); ++k) {
        if (marks[k] > 1)
            throw std::invalid_argument("marks must be 0/1, got " +
                                        std::to_string(int(marks[k])));
        if (marks[k] == 1)
            placement.kappa.push_back(static_cast<std::int64_t>(k) + 1);
    }
    placement.source_count = static_cast<std::int64_t>(placement.kappa.size());
    return placement;
}

// out[k] = W_j where k is the j-th occupied slot, 0 where V_k = 0.
inline void sparsify_into(std::span<const double> source,
                          std::span<const std::uint8_t> marks,
                          std::span<double> out) {
    if (marks.size() != out.size())
        throw std::invalid_argument("marks/output length mismatch");
    std::size_t j = 0;
    for (std::size_t k = 0; k < marks.size(); ++k) {
        if (marks[k] > 1)
            throw std::invalid_argument("marks must be 0/1");
        if (marks[k] == 1) {
            if (j >= source.size())
                throw std::invalid_argument("fewer source values than 1-marks");
            out[k] = source[j++];
        } else {
            out[k] = 0.0;
        }
    }
    if (j != source.size())
        throw std::invalid_argument("more source values than 1-marks");
}

inline std::vector<double> sparsify(std::span<const double> source,
                                    std::span<const std::uint8_t> marks) {
    std::vector<double> out(marks.size());
    sparsify_into(source, marks, out);
    return out;
}

// P(thinned <= x) = (1-p) * 1_{[0,inf)}(x) + p * F_W(x).
inline double cdf_mixture(double p, double source_cdf_at_x, double x) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("p must lie in (0,1)");
    if (!(source_cdf_at_x >= 0.0 && source_cdf_at_x <= 1.0))
        throw std::invalid_argument("CDF value must lie in [0,1]");
    return (1.0 - p) * (x >= 0.0 ? 1.0 : 0.0) + p * source_cdf_at_x;
}

namespace detail {

// log C(n, j) via lgamma; exact enough (>= 12 significant digits) for
// binomial weights up to n ~ 1e4.
inline double log_choose(std::int64_t n, std::int64_t j) {
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(j) + 1.0) -
           std::lgamma(double(n - j) + 1.0);
}

inline double binomial_weight(std::int64_t n, std::int64_t j, double p) {
    return std::exp(log_choose(n, j) + double(j) * std::log(p) +
                    double(n - j) * std::log1p(-p));
}

}  // namespace detail

// E[S(thinned, n)]^r = sum_j C(n,j) p^j (1-p)^(n-j) * E[S(source, j)]^r.
// base_moments[j-1] holds E[S(source, j)]^r for j = 1..n.
inline double moment_mixture(double p, std::int64_t n, int r,
                             std::span<const double> base_moments) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("p must lie in (0,1)");
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (r < 1) throw std::invalid_argument("moment order r must be >= 1");
    if (static_cast<std::int64_t>(base_moments.size()) != n)
        throw std::invalid_argument("need exactly n base moments");
    double sum = 0.0;
    for (std::int64_t j = 1; j <= n; ++j)
        sum += detail::binomial_weight(n, j, p) * base_moments[j - 1];
    return sum;
}

}  // namespace blockmix

#endif  // BLOCKMIX_SPARSIFIER_HPP
