#include "genrelay/rational.hpp"

#include <cstdlib>

namespace genrelay {

namespace {

std::int64_t checked_cast(__int128 v, const char *what) {
    if (v > static_cast<__int128>(INT64_MAX) || v < static_cast<__int128>(INT64_MIN)) {
        throw std::overflow_error(std::string("Rational overflow in ") + what);
    }
    return static_cast<std::int64_t>(v);
}

__int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

} // namespace

void Rational::assign(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::domain_error("Rational with zero denominator");
    *this = reduce128(num, den);
}

Rational Rational::reduce128(__int128 num, __int128 den) {
    if (den == 0) throw std::domain_error("Rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    __int128 g = gcd128(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return make_raw(checked_cast(num, "numerator"), checked_cast(den, "denominator"));
}

Rational Rational::from_decimal(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty decimal literal");
    bool negative = false;
    std::size_t i = 0;
    if (text[i] == '+' || text[i] == '-') {
        negative = text[i] == '-';
        ++i;
    }
    __int128 digits = 0;
    __int128 den = 1;
    bool seen_digit = false, seen_dot = false;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c == '.') {
            if (seen_dot) throw std::invalid_argument("malformed decimal: " + std::string(text));
            seen_dot = true;
            continue;
        }
        if (c < '0' || c > '9') throw std::invalid_argument("malformed decimal: " + std::string(text));
        seen_digit = true;
        digits = digits * 10 + (c - '0');
        if (seen_dot) den *= 10;
        if (den > static_cast<__int128>(INT64_MAX)) {
            throw std::overflow_error("decimal literal too precise: " + std::string(text));
        }
    }
    if (!seen_digit) throw std::invalid_argument("malformed decimal: " + std::string(text));
    return reduce128(negative ? -digits : digits, den);
}

Rational Rational::from_double(double x) {
    if (!std::isfinite(x)) throw std::domain_error("non-finite double");
    if (x == 0.0) return Rational(0);
    int exp = 0;
    double mant = std::frexp(x, &exp); // x = mant * 2^exp, |mant| in [0.5, 1)
    // 53 mantissa bits make the scaled value an exact integer.
    __int128 num = static_cast<__int128>(std::ldexp(mant, 53));
    int e2 = exp - 53;
    __int128 den = 1;
    while (e2 < 0) {
        den <<= 1;
        ++e2;
        if (den > static_cast<__int128>(INT64_MAX)) {
            __int128 g = gcd128(num, den);
            num /= g;
            den /= g;
            if (den > static_cast<__int128>(INT64_MAX)) {
                throw std::overflow_error("double too fine for exact rational");
            }
        }
    }
    while (e2 > 0) {
        num <<= 1;
        --e2;
        if (num > static_cast<__int128>(INT64_MAX) || -num > static_cast<__int128>(INT64_MAX)) {
            throw std::overflow_error("double too large for exact rational");
        }
    }
    return reduce128(num, den);
}

std::int64_t Rational::floor() const {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return q;
}

std::int64_t Rational::ceil() const {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ > 0) ++q;
    return q;
}

Rational operator+(const Rational &a, const Rational &b) {
    __int128 num = static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_;
    __int128 den = static_cast<__int128>(a.den_) * b.den_;
    return Rational::reduce128(num, den);
}

Rational operator-(const Rational &a, const Rational &b) {
    __int128 num = static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_;
    __int128 den = static_cast<__int128>(a.den_) * b.den_;
    return Rational::reduce128(num, den);
}

Rational operator*(const Rational &a, const Rational &b) {
    __int128 num = static_cast<__int128>(a.num_) * b.num_;
    __int128 den = static_cast<__int128>(a.den_) * b.den_;
    return Rational::reduce128(num, den);
}

Rational operator/(const Rational &a, const Rational &b) {
    if (b.num_ == 0) throw std::domain_error("Rational division by zero");
    __int128 num = static_cast<__int128>(a.num_) * b.den_;
    __int128 den = static_cast<__int128>(a.den_) * b.num_;
    return Rational::reduce128(num, den);
}

std::string Rational::str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

std::int64_t floor_div(const Rational &value, const Rational &divisor) {
    if (divisor.is_zero()) throw std::domain_error("floor_div by zero");
    __int128 num = static_cast<__int128>(value.num()) * divisor.den();
    __int128 den = static_cast<__int128>(value.den()) * divisor.num();
    if (den < 0) {
        num = -num;
        den = -den;
    }
    __int128 q = num / den;
    if (num % den != 0 && num < 0) --q;
    if (q > static_cast<__int128>(INT64_MAX) || q < static_cast<__int128>(INT64_MIN)) {
        throw std::overflow_error("floor_div overflow");
    }
    return static_cast<std::int64_t>(q);
}

std::int64_t ceil_div(const Rational &value, const Rational &divisor) {
    if (divisor.is_zero()) throw std::domain_error("ceil_div by zero");
    __int128 num = static_cast<__int128>(value.num()) * divisor.den();
    __int128 den = static_cast<__int128>(value.den()) * divisor.num();
    if (den < 0) {
        num = -num;
        den = -den;
    }
    __int128 q = num / den;
    if (num % den != 0 && num > 0) ++q;
    if (q > static_cast<__int128>(INT64_MAX) || q < static_cast<__int128>(INT64_MIN)) {
        throw std::overflow_error("ceil_div overflow");
    }
    return static_cast<std::int64_t>(q);
}

} // namespace genrelay
