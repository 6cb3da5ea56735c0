#pragma once

// Closed intervals over doubles with outward rounding. Each endpoint is the
// round-to-nearest result, moved one ulp outward when its exact rounding error
// (from TwoSum or an FMA residual) points the wrong way, so the exact real
// result set is always enclosed and exact results stay exact.

#include <cmath>
#include <iosfwd>
#include <limits>
#include <vector>

namespace amite {

struct Interval {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    Interval() = default;  // empty
    Interval(double value) : lo(value), hi(value) {}  // NOLINT(google-explicit-constructor)
    Interval(double low, double high);

    static Interval empty() { return Interval(); }
    static Interval entire();
    /// [-r, r]
    static Interval symmetric(double radius);

    bool is_empty() const { return !(lo <= hi); }
    bool is_finite() const { return std::isfinite(lo) && std::isfinite(hi); }
    double width() const { return is_empty() ? 0.0 : hi - lo; }
    double mid() const { return 0.5 * lo + 0.5 * hi; }
    /// max(|lo|, |hi|)
    double magnitude() const;
    bool contains(double x) const { return lo <= x && x <= hi; }
    bool contains(const Interval& other) const;
    bool straddles_zero() const { return lo < 0.0 && hi > 0.0; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

namespace ivl {

double down(double x);
double up(double x);
/// Lower and upper bounds on the exact a + b and a * b.
double add_down(double a, double b);
double add_up(double a, double b);
double mul_down(double a, double b);
double mul_up(double a, double b);

}  // namespace ivl

Interval hull(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);
Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator*(const Interval& a, const Interval& b);
Interval pow(const Interval& a, unsigned n);

inline Interval interval_add(const Interval& a, const Interval& b) { return a + b; }
inline Interval interval_sub(const Interval& a, const Interval& b) { return a - b; }
inline Interval interval_mul(const Interval& a, const Interval& b) { return a * b; }
inline Interval interval_pow(const Interval& a, unsigned n) { return pow(a, n); }

std::ostream& operator<<(std::ostream& os, const Interval& x);

using Box = std::vector<Interval>;

/// [-w/2, w/2] repeated `dims` times.
Box centered_box(int dims, double width);

}  // namespace amite
