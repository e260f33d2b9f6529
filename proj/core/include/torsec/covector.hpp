#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <string>

#include "torsec/errors.hpp"

namespace torsec {

/// Integer homology class of a closed-up trajectory segment on T^d, d <= 3.
/// For d = 2 the third component is always 0.
using Winding = std::array<std::int32_t, 3>;

inline Winding winding_add(const Winding& a, const Winding& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

inline Winding winding_neg(const Winding& a) { return {-a[0], -a[1], -a[2]}; }

/// Integer cohomology class alpha in Z^d acting on windings by dot product.
/// divisibility() returns n_alpha: the gcd of the components (alpha = n_alpha
/// times a primitive class), with the convention n_alpha = 0 for alpha = 0.
struct Covector {
    std::array<std::int64_t, 3> c{0, 0, 0};
    int dim = 2;

    static Covector of(std::int64_t x, std::int64_t y) { return Covector{{x, y, 0}, 2}; }
    static Covector of(std::int64_t x, std::int64_t y, std::int64_t z) {
        return Covector{{x, y, z}, 3};
    }

    std::int64_t operator()(const Winding& w) const {
        return c[0] * w[0] + c[1] * w[1] + c[2] * w[2];
    }

    bool is_zero() const { return c[0] == 0 && c[1] == 0 && c[2] == 0; }

    std::int64_t divisibility() const {
        std::int64_t g = 0;
        for (int i = 0; i < dim; ++i) g = std::gcd(g, c[i] < 0 ? -c[i] : c[i]);
        return g;
    }

    Covector operator+(const Covector& o) const {
        Covector r = *this;
        for (int i = 0; i < 3; ++i) r.c[i] += o.c[i];
        return r;
    }

    Covector scaled(std::int64_t k) const {
        Covector r = *this;
        for (int i = 0; i < 3; ++i) r.c[i] *= k;
        return r;
    }

    bool operator==(const Covector& o) const { return c == o.c && dim == o.dim; }

    bool operator<(const Covector& o) const {
        if (dim != o.dim) return dim < o.dim;
        return c < o.c;
    }

    std::string to_string() const {
        std::string s = "(";
        for (int i = 0; i < dim; ++i) {
            if (i) s += ",";
            s += std::to_string(c[i]);
        }
        return s + ")";
    }

    /// Parses "a,b" or "a,b,c" (also accepts surrounding parentheses).
    static Covector parse(const std::string& text);
};

/// Exact rational p/q with q >= 1, stored reduced. Used for cycle means.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Rational of(std::int64_t n, std::int64_t d) {
        if (d == 0) throw AnalysisError("rational with zero denominator");
        if (d < 0) { n = -n; d = -d; }
        std::int64_t g = std::gcd(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        return Rational{n, d};
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    // Exact comparison by cross multiplication; operands stay well inside
    // int64 range for every graph this library produces (|num| <= V*max|w|).
    bool operator<(const Rational& o) const { return num * o.den < o.num * den; }
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
    bool operator<=(const Rational& o) const { return !(o < *this); }

    std::string to_string() const {
        return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
    }
};

} // namespace torsec
