#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace genrelay {

/// Exact rational arithmetic used for bit accounting and budget math.
/// Values are kept reduced with a positive denominator; intermediate
/// products go through 128-bit integers and overflow throws instead of
/// silently wrapping.
class Rational {
public:
    constexpr Rational() : num_(0), den_(1) {}
    Rational(std::int64_t value) : num_(value), den_(1) {}
    Rational(std::int64_t num, std::int64_t den) { assign(num, den); }

    /// Parse a plain decimal literal such as "1.574" or "-0.092".
    static Rational from_decimal(std::string_view text);

    /// Exact conversion of a finite double (mantissa times power of two).
    static Rational from_double(double x);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    bool is_integer() const { return den_ == 1; }
    bool is_zero() const { return num_ == 0; }
    bool is_negative() const { return num_ < 0; }
    bool is_positive() const { return num_ > 0; }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    /// Largest integer <= value.
    std::int64_t floor() const;
    /// Smallest integer >= value.
    std::int64_t ceil() const;

    Rational operator-() const { return make_raw(-num_, den_); }
    Rational &operator+=(const Rational &o) { return *this = *this + o; }
    Rational &operator-=(const Rational &o) { return *this = *this - o; }
    Rational &operator*=(const Rational &o) { return *this = *this * o; }
    Rational &operator/=(const Rational &o) { return *this = *this / o; }

    friend Rational operator+(const Rational &a, const Rational &b);
    friend Rational operator-(const Rational &a, const Rational &b);
    friend Rational operator*(const Rational &a, const Rational &b);
    friend Rational operator/(const Rational &a, const Rational &b);

    friend bool operator==(const Rational &a, const Rational &b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational &a, const Rational &b) {
        __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
        __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
        if (lhs < rhs) return std::strong_ordering::less;
        if (lhs > rhs) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    std::string str() const;

private:
    void assign(std::int64_t num, std::int64_t den);
    static Rational make_raw(std::int64_t num, std::int64_t den) {
        Rational r;
        r.num_ = num;
        r.den_ = den;
        return r;
    }
    static Rational reduce128(__int128 num, __int128 den);

    std::int64_t num_;
    std::int64_t den_;
};

/// floor((a/b) / (c/d)) evaluated without constructing the quotient,
/// so arbitrarily fine denominators never overflow.
std::int64_t floor_div(const Rational &value, const Rational &divisor);
/// ceil counterpart of floor_div.
std::int64_t ceil_div(const Rational &value, const Rational &divisor);

} // namespace genrelay
