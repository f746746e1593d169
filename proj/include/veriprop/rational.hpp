#pragma once
// Exact rational arithmetic on 64-bit numerator/denominator.
// Quantities, unit factors and timeline offsets are kept rational so that
// value equality stays decidable; floats appear only at comparison and
// rendering boundaries.

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace veriprop {

class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t value) : num_(value), den_(1) {}

    Rational(std::int64_t num, std::int64_t den) {
        if (den == 0) throw std::invalid_argument("Rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
        num_ = num;
        den_ = den;
    }

    // Accepts "3", "-3", "8.2", "1/1000", "-0.25".
    static Rational parse(std::string_view text);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    bool is_integer() const { return den_ == 1; }

    // Canonical text form: "n" when integral, "n/d" otherwise.
    std::string str() const {
        return den_ == 1 ? std::to_string(num_)
                         : std::to_string(num_) + "/" + std::to_string(den_);
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return reduce(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return reduce(i128(a.num_) * b.den_ - i128(b.num_) * a.den_, i128(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return reduce(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::invalid_argument("Rational: division by zero");
        return reduce(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
    }
    Rational operator-() const { Rational r; r.num_ = -num_; r.den_ = den_; return r; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    Rational abs() const { return num_ < 0 ? -*this : *this; }

private:
    using i128 = __int128;

    static Rational reduce(i128 num, i128 den) {
        if (den < 0) { num = -num; den = -den; }
        i128 a = num < 0 ? -num : num;
        i128 b = den;
        while (b != 0) { i128 t = a % b; a = b; b = t; }
        if (a > 1) { num /= a; den /= a; }
        constexpr i128 lim = INT64_MAX;
        if (num > lim || num < -lim || den > lim)
            throw std::overflow_error("Rational: 64-bit overflow");
        Rational r;
        r.num_ = static_cast<std::int64_t>(num);
        r.den_ = static_cast<std::int64_t>(den);
        return r;
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

inline Rational Rational::parse(std::string_view text) {
    auto fail = [&] { throw std::invalid_argument("not a rational: '" + std::string(text) + "'"); };
    size_t i = 0, n = text.size();
    while (i < n && (text[i] == ' ' || text[i] == '\t')) ++i;
    size_t end = n;
    while (end > i && (text[end - 1] == ' ' || text[end - 1] == '\t')) --end;
    if (i >= end) fail();
    bool neg = false;
    if (text[i] == '+' || text[i] == '-') { neg = text[i] == '-'; ++i; }
    std::int64_t ipart = 0;
    bool digits = false;
    while (i < end && text[i] >= '0' && text[i] <= '9') {
        ipart = ipart * 10 + (text[i] - '0');
        digits = true;
        ++i;
    }
    if (i < end && text[i] == '/') {
        ++i;
        if (!digits || i >= end) fail();
        std::int64_t d = 0;
        while (i < end && text[i] >= '0' && text[i] <= '9') { d = d * 10 + (text[i] - '0'); ++i; }
        if (i != end || d == 0) fail();
        return Rational(neg ? -ipart : ipart, d);
    }
    std::int64_t num = ipart, den = 1;
    if (i < end && text[i] == '.') {
        ++i;
        bool fdigits = false;
        while (i < end && text[i] >= '0' && text[i] <= '9') {
            num = num * 10 + (text[i] - '0');
            den *= 10;
            fdigits = true;
            ++i;
        }
        if (!digits && !fdigits) fail();
    } else if (!digits) {
        fail();
    }
    if (i != end) fail();
    return Rational(neg ? -num : num, den);
}

} // namespace veriprop
