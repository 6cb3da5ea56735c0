#include "amite/interval.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace amite {

namespace ivl {

double down(double x) { return std::nextafter(x, -std::numeric_limits<double>::infinity()); }
double up(double x) { return std::nextafter(x, std::numeric_limits<double>::infinity()); }

namespace {

constexpr double kMax = std::numeric_limits<double>::max();

// Exact error of a + b (a + b = s + err), valid when s did not overflow.
double two_sum_error(double a, double b, double s) {
    const double bb = s - a;
    return (a - (s - bb)) + (b - bb);
}

}  // namespace

double add_down(double a, double b) {
    const double s = a + b;
    if (!std::isfinite(s)) return (std::isfinite(a) && std::isfinite(b) && s > 0.0) ? kMax : s;
    return two_sum_error(a, b, s) < 0.0 ? down(s) : s;
}

double add_up(double a, double b) {
    const double s = a + b;
    if (!std::isfinite(s)) return (std::isfinite(a) && std::isfinite(b) && s < 0.0) ? -kMax : s;
    return two_sum_error(a, b, s) > 0.0 ? up(s) : s;
}

// 0 * inf is taken as 0: an infinite endpoint stands for unbounded finite values.
double mul_down(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    const double p = a * b;
    if (!std::isfinite(p)) return (std::isfinite(a) && std::isfinite(b) && p > 0.0) ? kMax : p;
    if (!std::isnormal(p)) return down(p);  // underflow: the FMA residual is not exact
    return std::fma(a, b, -p) < 0.0 ? down(p) : p;
}

double mul_up(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    const double p = a * b;
    if (!std::isfinite(p)) return (std::isfinite(a) && std::isfinite(b) && p < 0.0) ? -kMax : p;
    if (!std::isnormal(p)) return up(p);
    return std::fma(a, b, -p) > 0.0 ? up(p) : p;
}

}  // namespace ivl

namespace {

// Upper bound of x^n for x >= 0.
double pow_up(double x, unsigned n) {
    double result = 1.0;
    for (unsigned i = 0; i < n; ++i) result = ivl::mul_up(result, x);
    return result;
}

// Lower bound of x^n for x >= 0.
double pow_down(double x, unsigned n) {
    double result = 1.0;
    for (unsigned i = 0; i < n; ++i) result = std::max(0.0, ivl::mul_down(result, x));
    return result;
}

}  // namespace

Interval::Interval(double low, double high) : lo(low), hi(high) {
    if (std::isnan(low) || std::isnan(high) || low > high) {
        throw std::invalid_argument("interval requires lo <= hi");
    }
}

Interval Interval::entire() {
    return Interval(-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
}

Interval Interval::symmetric(double radius) { return Interval(-std::abs(radius), std::abs(radius)); }

double Interval::magnitude() const { return std::max(std::abs(lo), std::abs(hi)); }

bool Interval::contains(const Interval& other) const {
    if (other.is_empty()) return true;
    return !is_empty() && lo <= other.lo && other.hi <= hi;
}

Interval hull(const Interval& a, const Interval& b) {
    if (a.is_empty()) return b;
    if (b.is_empty()) return a;
    Interval r;
    r.lo = std::min(a.lo, b.lo);
    r.hi = std::max(a.hi, b.hi);
    return r;
}

Interval operator-(const Interval& a) {
    if (a.is_empty()) return a;
    Interval r;
    r.lo = -a.hi;
    r.hi = -a.lo;
    return r;
}

Interval operator+(const Interval& a, const Interval& b) {
    if (a.is_empty() || b.is_empty()) return Interval::empty();
    Interval r;
    r.lo = ivl::add_down(a.lo, b.lo);
    r.hi = ivl::add_up(a.hi, b.hi);
    return r;
}

Interval operator-(const Interval& a, const Interval& b) {
    if (a.is_empty() || b.is_empty()) return Interval::empty();
    Interval r;
    r.lo = ivl::add_down(a.lo, -b.hi);
    r.hi = ivl::add_up(a.hi, -b.lo);
    return r;
}

Interval operator*(const Interval& a, const Interval& b) {
    if (a.is_empty() || b.is_empty()) return Interval::empty();
    Interval r;
    r.lo = std::min({ivl::mul_down(a.lo, b.lo), ivl::mul_down(a.lo, b.hi), ivl::mul_down(a.hi, b.lo), ivl::mul_down(a.hi, b.hi)});
    r.hi = std::max({ivl::mul_up(a.lo, b.lo), ivl::mul_up(a.lo, b.hi), ivl::mul_up(a.hi, b.lo), ivl::mul_up(a.hi, b.hi)});
    return r;
}

Interval pow(const Interval& a, unsigned n) {
    if (a.is_empty()) return a;
    if (n == 0) return Interval(1.0);
    if (n == 1) return a;
    const double lo_mag = std::abs(a.lo);
    const double hi_mag = std::abs(a.hi);
    Interval r;
    if (n % 2 == 1) {
        // Odd powers are monotone.
        r.lo = a.lo < 0.0 ? -pow_up(lo_mag, n) : pow_down(a.lo, n);
        r.hi = a.hi < 0.0 ? -pow_down(hi_mag, n) : pow_up(a.hi, n);
        return r;
    }
    if (a.lo >= 0.0) {
        r.lo = pow_down(a.lo, n);
        r.hi = pow_up(a.hi, n);
    } else if (a.hi <= 0.0) {
        r.lo = pow_down(hi_mag, n);
        r.hi = pow_up(lo_mag, n);
    } else {
        r.lo = 0.0;
        r.hi = pow_up(std::max(lo_mag, hi_mag), n);
    }
    return r;
}

std::ostream& operator<<(std::ostream& os, const Interval& x) {
    if (x.is_empty()) return os << "[empty]";
    return os << '[' << x.lo << ", " << x.hi << ']';
}

Box centered_box(int dims, double width) {
    if (dims < 1) throw std::invalid_argument("a box needs at least one dimension");
    if (!(width >= 0.0)) throw std::invalid_argument("box width must be nonnegative");
    return Box(static_cast<std::size_t>(dims), Interval(-width / 2.0, width / 2.0));
}

}  // namespace amite
