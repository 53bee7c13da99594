#pragma once

// Exact integer and rational arithmetic used by every exact probability in
// the library. Backed by GMP; the wrappers here add checked division and the
// generalized binomial coefficient.

#include <gmpxx.h>

#include <cmath>
#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "vtest/errors.hpp"

namespace vtest {

using BigInt = mpz_class;

/// Exact rational number, always in lowest terms with a positive denominator.
class Rational {
public:
    Rational() = default;
    Rational(long v) : q_(v) {}  // NOLINT(google-explicit-constructor)
    Rational(const BigInt& v) : q_(v) {}  // NOLINT(google-explicit-constructor)

    Rational(const BigInt& num, const BigInt& den) {
        if (den == 0) throw DomainError("rational with zero denominator");
        q_ = mpq_class(num, den);
        q_.canonicalize();
    }

    Rational(long num, long den) : Rational(BigInt(num), BigInt(den)) {}

    /// Exact value of a finite double (every double is a dyadic rational).
    static Rational from_double(double v) {
        if (!std::isfinite(v)) throw DomainError("non-finite value has no rational form");
        Rational r;
        r.q_ = mpq_class(v);
        return r;
    }

    /// Parses "a/b" or an integer "a".
    static Rational parse(std::string_view text) {
        const auto slash = text.find('/');
        try {
            if (slash == std::string_view::npos) {
                return Rational(BigInt(std::string(text), 10));
            }
            return Rational(BigInt(std::string(text.substr(0, slash)), 10),
                            BigInt(std::string(text.substr(slash + 1)), 10));
        } catch (const std::invalid_argument&) {
            throw DomainError("malformed rational '" + std::string(text) + "'");
        }
    }

    BigInt num() const { return q_.get_num(); }
    BigInt den() const { return q_.get_den(); }
    /// Nearest double (mpq_get_d alone truncates toward zero).
    double to_double() const {
        const double d = q_.get_d();
        if (q_ == 0 || !std::isfinite(d)) return d;
        const double away = std::nextafter(d, q_ > 0 ? INFINITY : -INFINITY);
        if (!std::isfinite(away)) return d;
        const mpq_class err_d = abs(q_ - mpq_class(d));
        const mpq_class err_away = abs(q_ - mpq_class(away));
        return err_away < err_d ? away : d;
    }

    /// "num/den", or just "num" when the denominator is 1.
    std::string str() const { return q_.get_str(10); }

    /// Always "num/den", including "1/1" and "0/1".
    std::string fraction_str() const {
        return q_.get_num().get_str(10) + "/" + q_.get_den().get_str(10);
    }

    int sign() const { return sgn(q_); }

    Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
    Rational& operator-=(const Rational& o) { q_ -= o.q_; return *this; }
    Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }
    Rational& operator/=(const Rational& o) {
        if (o.q_ == 0) throw DomainError("rational division by zero");
        q_ /= o.q_;
        return *this;
    }

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
    friend Rational operator-(const Rational& a) {
        Rational r;
        r.q_ = -a.q_;
        return r;
    }

    friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        const int c = cmp(a.q_, b.q_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

    const mpq_class& raw() const { return q_; }

private:
    mpq_class q_;
};

/// Generalized binomial coefficient a(a-1)...(a-j+1)/j!, defined for any
/// integer a. Negative j yields 0.
inline BigInt binom(long a, long j) {
    BigInt out;
    if (j < 0) return out;
    if (a >= 0) {
        mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(a), static_cast<unsigned long>(j));
        return out;
    }
    // (-1)^j * binom(j - a - 1, j)
    mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(j - a - 1), static_cast<unsigned long>(j));
    if (j % 2 != 0) out = -out;
    return out;
}

/// floor(num / den), rounding toward negative infinity.
inline long floor_div(long num, long den) {
    if (den <= 0) throw DomainError("floor_div requires a positive denominator");
    long q = num / den;
    if ((num % den != 0) && (num < 0)) --q;
    return q;
}

inline BigInt floor_div(const BigInt& num, const BigInt& den) {
    if (den <= 0) throw DomainError("floor_div requires a positive denominator");
    BigInt q;
    mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return q;
}

inline BigInt floor(const Rational& x) { return floor_div(x.num(), x.den()); }

/// Largest integer q with q <= m * sqrt(r * (total - r)) * x, for x >= 0.
/// Decided by q^2 <= m^2 r (total - r) x^2 in exact integers.
inline BigInt floor_sqrt_scaled(long m, long r, long total, const Rational& x) {
    if (x.sign() < 0) throw DomainError("floor_sqrt_scaled requires x >= 0");
    if (r < 1 || r >= total) throw DomainError("floor_sqrt_scaled requires 1 <= r < total");
    // q^2 <= V / b^2  <=>  q^2 <= floor(V / b^2) since q^2 is an integer.
    const BigInt a = x.num();
    const BigInt b = x.den();
    BigInt v = BigInt(m) * m * r * (total - r) * a * a;
    v = floor_div(v, b * b);
    BigInt q;
    mpz_sqrt(q.get_mpz_t(), v.get_mpz_t());
    return q;
}

inline long to_long(const BigInt& v) {
    if (!v.fits_slong_p()) throw DomainError("integer does not fit in a machine word");
    return v.get_si();
}

}  // namespace vtest
