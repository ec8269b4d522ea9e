// Exact reference values: closed forms, parity algebra at level 1, exact
// multinomial enumeration of partial-sum moments, and big-integer
// binomial distributions.

#ifndef BLOCKMIX_ORACLE_HPP
#define BLOCKMIX_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "blockmix/sparsifier.hpp"

namespace blockmix::oracle {

using boost::multiprecision::cpp_int;

// E|R|^m = 3^(m/2) / (m+1) for R uniform on [-sqrt(3), sqrt(3)].
inline double abs_uniform_moment(int m) {
    if (m < 0) throw std::invalid_argument("moment order must be >= 0");
    return std::pow(3.0, 0.5 * m) / (m + 1);
}

// E Z^L = (L-1)!! for Z standard normal, L even.
inline double gaussian_even_moment(int L) {
    if (L < 2 || L % 2 != 0)
        throw std::invalid_argument("Gaussian moment order must be even >= 2");
    double v = 1.0;
    for (int k = L - 1; k > 1; k -= 2) v *= k;
    return v;
}

// Joint moment E[prod Y_k^{e_k}] over distinct coordinates of one aligned
// level-1 block.  Signs are uniform on the 2^(L-1) sign vectors with
// product -1, magnitudes are i.i.d. |R|; so the expectation is zero
// unless the odd-exponent set is empty (value +prod E|R|^e) or the whole
// block (value -prod E|R|^e).
inline double parity_moment_level1(
    int L, std::span<const std::pair<int, int>> coordinates) {
    if (L < 6 || L % 2 != 0)
        throw std::invalid_argument("L must be even and >= 6");
    int odd_count = 0;
    double magnitude = 1.0;
    std::uint64_t seen = 0;
    for (const auto& [index, exponent] : coordinates) {
        if (index < 0 || index >= L)
            throw std::invalid_argument(
                "coordinate index outside the aligned block [0, L)");
        if (exponent < 1) throw std::invalid_argument("exponents must be >= 1");
        const std::uint64_t bit = 1ULL << index;
        if (seen & bit) throw std::invalid_argument("duplicate coordinate index");
        seen |= bit;
        if (exponent % 2 == 1) ++odd_count;
        magnitude *= abs_uniform_moment(exponent);
    }
    if (odd_count == 0) return magnitude;
    if (odd_count == L) return -magnitude;
    return 0.0;
}

namespace detail {

// Expectation of one multinomial term over the level-1 block process:
// window coordinates offset .. offset+h-1, exponents e[0..h), blocks of
// arity L aligned at multiples of L.  Factorizes over blocks; per block
// the parity rule of parity_moment_level1 applies, with the full-block
// negative case only reachable when the window covers the whole block.
inline double level1_term_value(int L, int offset, std::span<const int> e) {
    const int h = static_cast<int>(e.size());
    double value = 1.0;
    int k = 0;
    while (k < h) {
        const int coord = offset + k;
        const int block_end = (coord / L + 1) * L;  // exclusive, global
        const int span = std::min(block_end - coord, h - k);
        int odd = 0;
        bool covers_block = (coord % L == 0) && (span == L);
        double mag = 1.0;
        for (int i = 0; i < span; ++i) {
            const int exp = e[k + i];
            if (exp % 2 == 1) ++odd;
            if (exp > 0) mag *= abs_uniform_moment(exp);
        }
        if (odd == 0) {
            value *= mag;
        } else if (covers_block && odd == L) {
            value *= -mag;
        } else {
            return 0.0;
        }
        k += span;
    }
    return value;
}

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// Enumerates all weak compositions of `remaining` over e[pos..h).
inline double level1_enumerate(int L, int offset, std::vector<int>& e,
                               std::size_t pos, int remaining, double coeff_num) {
    if (pos == e.size()) {
        if (remaining != 0) return 0.0;
        double denom = 1.0;
        for (int exp : e) denom *= factorial(exp);
        return (coeff_num / denom) * level1_term_value(L, offset, e);
    }
    double total = 0.0;
    for (int v = 0; v <= remaining; ++v) {
        e[pos] = v;
        total += level1_enumerate(L, offset, e, pos + 1, remaining - v, coeff_num);
    }
    e[pos] = 0;
    return total;
}

}  // namespace detail

// Exact E[(Y_{i+1} + ... + Y_{i+h})^power] for the level-1 process, by
// multinomial enumeration; `shifted` averages over the L window offsets
// (the law of the shift-stationarized X at level 1).
inline double exact_partial_sum_moment_level1(int L, int h, int power,
                                              bool shifted) {
    if (L < 6 || L % 2 != 0)
        throw std::invalid_argument("L must be even and >= 6");
    if (h < 2 || h > 3 * L)
        throw std::invalid_argument("supported window range is 2 <= h <= 3L");
    if (power < 2 || power > L || power % 2 != 0)
        throw std::invalid_argument("supported powers are even, 2 <= power <= L");
    std::vector<int> exponents(static_cast<std::size_t>(h), 0);
    const double coeff_num = detail::factorial(power);
    auto aligned = [&](int offset) {
        return detail::level1_enumerate(L, offset, exponents, 0, power, coeff_num);
    };
    if (!shifted) return aligned(0);
    double sum = 0.0;
    for (int i = 0; i < L; ++i) sum += aligned(i);
    return sum / L;
}

// L! * 2^-L * (L^n)^(L/2): the amount by which the L-th partial-sum
// moment falls below the Gaussian reference.
inline double deficit_bound(int L, int n) {
    if (L < 6 || L % 2 != 0)
        throw std::invalid_argument("L must be even and >= 6");
    if (n < 0) throw std::invalid_argument("n must be >= 0");
    return detail::factorial(L) * std::pow(2.0, -L) *
           std::pow(double(L), 0.5 * double(n) * L);
}

// 2^-(5L+4)/2 * L! * L^-L: the asymptotic gap below E(Z/sqrt(2))^L.
inline double clt_gap_constant(int L) {
    if (L < 6 || L % 2 != 0)
        throw std::invalid_argument("L must be even and >= 6");
    return std::pow(2.0, -0.5 * (5 * L + 4)) * detail::factorial(L) *
           std::pow(double(L), -L);
}

// Finite-h variant 2^-(5L+2)/2 * L! * L^-L (exactly twice the above).
inline double clt_gap_constant_finite_h(int L) {
    return 2.0 * clt_gap_constant(L);
}

// h^(-L/2) sum_j C(h,j) p^j (1-p)^(h-j) j^(L/2) (L-1)!!: the L-th moment
// of S(thinned-iid-normal, h)/sqrt(h).
inline double gaussian_mixture_moment(std::int64_t h, int L, double p) {
    if (h < 1) throw std::invalid_argument("h must be >= 1");
    if (L < 2 || L % 2 != 0)
        throw std::invalid_argument("L must be even and >= 2");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must lie in (0,1)");
    const double z_moment = gaussian_even_moment(L);
    double sum = 0.0;
    for (std::int64_t j = 1; j <= h; ++j)
        sum += blockmix::detail::binomial_weight(h, j, p) *
               std::pow(double(j), 0.5 * L);
    return sum * z_moment * std::pow(double(h), -0.5 * L);
}

namespace detail {

// Residue-class counts of a Binomial(m, 1/2): counts[r] = #{k = r mod d}
// weighted C(m, k), exact.
inline std::vector<cpp_int> binomial_mod_counts(std::int64_t m, std::int64_t d) {
    if (m < 0) throw std::invalid_argument("trial count must be >= 0");
    if (d < 1) throw std::invalid_argument("modulus must be >= 1");
    std::vector<cpp_int> counts(static_cast<std::size_t>(d));
    counts[0] = 1;
    std::vector<cpp_int> next(static_cast<std::size_t>(d));
    for (std::int64_t step = 0; step < m; ++step) {
        for (std::int64_t r = 0; r < d; ++r)
            next[static_cast<std::size_t>(r)] =
                counts[static_cast<std::size_t>(r)] +
                counts[static_cast<std::size_t>((r - 1 + d) % d)];
        counts.swap(next);
    }
    return counts;
}

// c / 2^m to double without overflowing: (c << 64) / 2^m fits in ~64 bits.
inline double ratio_pow2(const cpp_int& c, std::int64_t m) {
    const cpp_int scaled = (c << 64) >> m;
    return scaled.convert_to<double>() * 0x1.0p-64;
}

}  // namespace detail

// Exact distribution of (beta_m mod d), beta_m ~ Binomial(m, 1/2).
inline std::vector<double> binomial_mod_distribution(std::int64_t m,
                                                     std::int64_t d) {
    const auto counts = detail::binomial_mod_counts(m, d);
    std::vector<double> probs(counts.size());
    for (std::size_t r = 0; r < counts.size(); ++r)
        probs[r] = detail::ratio_pow2(counts[r], m);
    return probs;
}

// Least m with max_r |P(beta_m = r mod d) - 1/d| <= 10^-tol_digits,
// decided in exact integer arithmetic.
inline std::int64_t least_equidistribution_trials(std::int64_t d,
                                                  int tol_digits = 6,
                                                  std::int64_t cap = 10000) {
    if (d < 1) throw std::invalid_argument("modulus must be >= 1");
    if (tol_digits < 1) throw std::invalid_argument("need at least one digit");
    cpp_int tol_den = 1;
    for (int i = 0; i < tol_digits; ++i) tol_den *= 10;
    std::vector<cpp_int> counts(static_cast<std::size_t>(d));
    counts[0] = 1;
    std::vector<cpp_int> next(static_cast<std::size_t>(d));
    cpp_int total = 1;  // 2^m
    for (std::int64_t m = 1; m <= cap; ++m) {
        for (std::int64_t r = 0; r < d; ++r)
            next[static_cast<std::size_t>(r)] =
                counts[static_cast<std::size_t>(r)] +
                counts[static_cast<std::size_t>((r - 1 + d) % d)];
        counts.swap(next);
        total <<= 1;
        bool ok = true;
        for (const auto& c : counts) {
            // |c/2^m - 1/d| <= 10^-t  <=>  |c*d - 2^m| * 10^t <= d * 2^m
            cpp_int diff = c * d - total;
            if (diff < 0) diff = -diff;
            if (diff * tol_den > d * total) {
                ok = false;
                break;
            }
        }
        if (ok) return m;
    }
    throw std::runtime_error("equidistribution not reached within cap trials");
}

// Exact P(beta_h >= floor(h/2)) for beta_h ~ Binomial(h, 1/2).
inline double binomial_tail_half(std::int64_t h) {
    if (h < 1) throw std::invalid_argument("h must be >= 1");
    cpp_int tail = 0;
    cpp_int binom = 1;  // C(h, 0)
    for (std::int64_t k = 0; k <= h; ++k) {
        if (k >= h / 2) tail += binom;
        binom = binom * (h - k) / (k + 1);
    }
    return detail::ratio_pow2(tail, h);
}

// E(S(X-tilde, n)/sqrt(n))^4 = 3/4 + 3/(20 n), exactly.
inline double normalized_fourth_moment(std::int64_t n) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    return 0.75 + 3.0 / (20.0 * double(n));
}

}  // namespace blockmix::oracle

#endif  // BLOCKMIX_ORACLE_HPP
