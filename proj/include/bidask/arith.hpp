#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

#include "bidask/errors.hpp"

namespace bidask {

// Exact arithmetic mode. Header-only arbitrary-precision rationals; used for
// the golden example, the randomized cross-checks and the LP oracle.
using Rational = boost::multiprecision::cpp_rational;

// Per-number-type policy. Rational mode compares exactly; double mode uses a
// relative tolerance of 1e-9 for breakpoint merging and residual checks.
template <class R>
struct Arith;

template <>
struct Arith<double> {
    static constexpr bool exact = false;

    static double tol() { return 1e-9; }

    static bool close(double a, double b) {
        double s = std::max({1.0, std::fabs(a), std::fabs(b)});
        return std::fabs(a - b) <= tol() * s;
    }
    static bool leq(double a, double b) { return a <= b || close(a, b); }
    static bool geq(double a, double b) { return a >= b || close(a, b); }

    static double to_double(double x) { return x; }
    static double from_int(long n) { return static_cast<double>(n); }
    static double fraction(long num, long den) {
        return static_cast<double>(num) / static_cast<double>(den);
    }
};

template <>
struct Arith<Rational> {
    static constexpr bool exact = true;

    static bool close(const Rational& a, const Rational& b) { return a == b; }
    static bool leq(const Rational& a, const Rational& b) { return a <= b; }
    static bool geq(const Rational& a, const Rational& b) { return a >= b; }

    static double to_double(const Rational& x) { return x.convert_to<double>(); }
    static Rational from_int(long n) { return Rational(n); }
    static Rational fraction(long num, long den) { return Rational(num) / Rational(den); }
};

namespace detail {

// Parses "123", "-4.25", "9/2" into R.  Decimal strings convert exactly in
// rational mode, so model files mean the same thing in both modes.
template <class R>
R parse_number_impl(std::string_view s, int line) {
    if (s.empty()) throw ParseError(line, "empty number");
    auto slash = s.find('/');
    if (slash != std::string_view::npos) {
        R num = parse_number_impl<R>(s.substr(0, slash), line);
        R den = parse_number_impl<R>(s.substr(slash + 1), line);
        if (den == R(0)) throw ParseError(line, "zero denominator");
        return num / den;
    }
    bool neg = false;
    size_t i = 0;
    if (s[0] == '+' || s[0] == '-') {
        neg = s[0] == '-';
        i = 1;
    }
    R value(0);
    R scale(1);
    bool seen_digit = false, seen_dot = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c == '.') {
            if (seen_dot) throw ParseError(line, "malformed number '" + std::string(s) + "'");
            seen_dot = true;
        } else if (c >= '0' && c <= '9') {
            value = value * R(10) + R(c - '0');
            if (seen_dot) scale *= R(10);
            seen_digit = true;
        } else {
            throw ParseError(line, "malformed number '" + std::string(s) + "'");
        }
    }
    if (!seen_digit) throw ParseError(line, "malformed number '" + std::string(s) + "'");
    value /= scale;
    return neg ? R(-value) : value;
}

}  // namespace detail

template <class R>
R parse_number(std::string_view s, int line = 0) {
    return detail::parse_number_impl<R>(s, line);
}

}  // namespace bidask
