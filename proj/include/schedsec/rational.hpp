#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>

#include "schedsec/errors.hpp"

namespace schedsec {

/// Exact fraction kept in lowest terms with a positive denominator.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
        if (den_ == 0)
            throw_invalid("rational with zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        const std::int64_t g = std::gcd(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    constexpr std::int64_t num() const noexcept { return num_; }
    constexpr std::int64_t den() const noexcept { return den_; }
    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Rational operator*(const Rational &a, const Rational &b) {
        // cross-reduce first to keep intermediates small
        const std::int64_t g1 = std::gcd(a.num_, b.den_);
        const std::int64_t g2 = std::gcd(b.num_, a.den_);
        const std::int64_t n1 = g1 ? a.num_ / g1 : a.num_, d2 = g1 ? b.den_ / g1 : b.den_;
        const std::int64_t n2 = g2 ? b.num_ / g2 : b.num_, d1 = g2 ? a.den_ / g2 : a.den_;
        return Rational(n1 * n2, d1 * d2);
    }
    friend Rational operator-(const Rational &a, const Rational &b) {
        const std::int64_t l = std::lcm(a.den_, b.den_);
        return Rational(a.num_ * (l / a.den_) - b.num_ * (l / b.den_), l);
    }
    friend Rational operator+(const Rational &a, const Rational &b) {
        const std::int64_t l = std::lcm(a.den_, b.den_);
        return Rational(a.num_ * (l / a.den_) + b.num_ * (l / b.den_), l);
    }
    friend bool operator==(const Rational &a, const Rational &b) = default;
    friend std::ostream &operator<<(std::ostream &os, const Rational &r) {
        return os << r.num_ << '/' << r.den_;
    }

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

} // namespace schedsec
