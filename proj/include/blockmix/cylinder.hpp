// Cylinder events: per-coordinate interval-union constraints, optionally
// joined with 0/1 thinning-mark constraints.
//
// Command-line / config grammar, one constrained coordinate per clause:
//   "0:(0.5,inf);2:[-1,0.25)" with an optional ";marks=0110" suffix.
// Interval brackets are honored exactly; the only atom of any sampled
// marginal sits at 0, so bracket choice matters only there.

#ifndef BLOCKMIX_CYLINDER_HPP
#define BLOCKMIX_CYLINDER_HPP

#include <cctype>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace blockmix {

struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool lo_closed = false;
    bool hi_closed = false;

    bool contains(double x) const {
        if (x < lo || (x == lo && !lo_closed)) return false;
        if (x > hi || (x == hi && !hi_closed)) return false;
        return true;
    }
};

struct CylinderSpec {
    // constraints[k] is a union of intervals for coordinate k; an empty
    // union means the coordinate is unconstrained (the full line).
    std::vector<std::vector<Interval>> constraints;
    std::optional<std::vector<std::uint8_t>> marks;

    std::size_t window_length() const { return constraints.size(); }

    bool has_constraints() const {
        if (marks) return true;
        for (const auto& u : constraints)
            if (!u.empty()) return true;
        return false;
    }

    bool matches_values(std::span<const double> values) const {
        if (values.size() != constraints.size())
            throw std::invalid_argument("window/spec length mismatch");
        for (std::size_t k = 0; k < constraints.size(); ++k) {
            if (constraints[k].empty()) continue;
            bool in_union = false;
            for (const auto& iv : constraints[k])
                if (iv.contains(values[k])) {
                    in_union = true;
                    break;
                }
            if (!in_union) return false;
        }
        return true;
    }

    bool matches(std::span<const double> values,
                 std::span<const std::uint8_t> window_marks) const {
        if (marks) {
            if (window_marks.size() != marks->size())
                throw std::invalid_argument("marks/spec length mismatch");
            for (std::size_t k = 0; k < marks->size(); ++k)
                if (window_marks[k] != (*marks)[k]) return false;
        }
        return matches_values(values);
    }

    // Convenience constructor: a single constrained coordinate.
    static CylinderSpec single(std::size_t window_length, std::size_t coordinate,
                               Interval interval) {
        if (coordinate >= window_length)
            throw std::invalid_argument("coordinate outside the window");
        CylinderSpec spec;
        spec.constraints.resize(window_length);
        spec.constraints[coordinate].push_back(interval);
        return spec;
    }
};

namespace detail {

inline double parse_endpoint(const std::string& token) {
    if (token == "inf" || token == "+inf")
        return std::numeric_limits<double>::infinity();
    if (token == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size())
        throw std::invalid_argument("bad interval endpoint: " + token);
    return v;
}

}  // namespace detail

// Parses the grammar described at the top of this header.  window_length
// must cover every referenced coordinate (and the marks string, if any).
inline CylinderSpec parse_cylinder_spec(const std::string& text,
                                        std::size_t window_length) {
    CylinderSpec spec;
    spec.constraints.resize(window_length);
    std::stringstream clauses(text);
    std::string clause;
    while (std::getline(clauses, clause, ';')) {
        if (clause.empty()) continue;
        if (clause.rfind("marks=", 0) == 0) {
            std::vector<std::uint8_t> m;
            for (char c : clause.substr(6)) {
                if (c != '0' && c != '1')
                    throw std::invalid_argument("marks must be a 0/1 string");
                m.push_back(c == '1' ? 1 : 0);
            }
            if (m.size() != window_length)
                throw std::invalid_argument("marks length != window length");
            spec.marks = std::move(m);
            continue;
        }
        const auto colon = clause.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("expected `coord:interval`, got: " + clause);
        const std::size_t coord = std::stoul(clause.substr(0, colon));
        if (coord >= window_length)
            throw std::invalid_argument("coordinate " + std::to_string(coord) +
                                        " outside window of length " +
                                        std::to_string(window_length));
        const std::string body = clause.substr(colon + 1);
        if (body.size() < 5 || (body.front() != '(' && body.front() != '[') ||
            (body.back() != ')' && body.back() != ']'))
            throw std::invalid_argument("bad interval syntax: " + body);
        const auto comma = body.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("bad interval syntax: " + body);
        Interval iv;
        iv.lo_closed = body.front() == '[';
        iv.hi_closed = body.back() == ']';
        iv.lo = detail::parse_endpoint(body.substr(1, comma - 1));
        iv.hi = detail::parse_endpoint(body.substr(comma + 1,
                                                   body.size() - comma - 2));
        if (!(iv.lo <= iv.hi))
            throw std::invalid_argument("interval endpoints out of order: " + body);
        spec.constraints[coord].push_back(iv);
    }
    return spec;
}

}  // namespace blockmix

#endif  // BLOCKMIX_CYLINDER_HPP
