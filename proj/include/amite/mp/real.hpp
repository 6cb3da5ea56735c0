#pragma once

#include <mpfr.h>

#include <compare>
#include <string>
#include <string_view>
#include <utility>

namespace amite::mp {

/// Number of MPFR mantissa bits used to carry `digits` significant decimal digits.
int bits_for_digits(int digits);

/// Arbitrary-precision real number. The working precision is tracked in
/// decimal digits; binary operations produce a result at the larger of the two
/// operand precisions.
class Real {
public:
    static constexpr int kDefaultDigits = 50;

    explicit Real(int digits = kDefaultDigits);
    Real(double value, int digits);
    Real(long value, int digits);
    Real(int value, int digits) : Real(static_cast<long>(value), digits) {}
    Real(const Real& other);
    Real(const Real& other, int digits);
    Real(Real&& other) noexcept;
    Real& operator=(const Real& other);
    Real& operator=(Real&& other) noexcept;
    ~Real();

    /// Parses a decimal (or scientific) string; throws std::invalid_argument on junk.
    static Real parse(std::string_view text, int digits);

    int digits() const noexcept { return digits_; }
    /// Rounds (or widens) this value to a new working precision.
    Real& set_digits(int digits);
    Real with_digits(int digits) const { return Real(*this, digits); }

    mpfr_ptr get() noexcept { return value_; }
    mpfr_srcptr get() const noexcept { return value_; }

    double to_double() const;
    /// Scientific-notation string with `significant` digits (0 = full working precision).
    std::string to_string(int significant = 0) const;

    bool is_zero() const { return mpfr_zero_p(value_) != 0; }
    bool is_finite() const { return mpfr_number_p(value_) != 0; }
    int sign() const { return mpfr_sgn(value_); }

    Real operator-() const;
    Real& operator+=(const Real& rhs);
    Real& operator-=(const Real& rhs);
    Real& operator*=(const Real& rhs);
    Real& operator/=(const Real& rhs);
    Real& operator*=(long rhs);
    Real& operator/=(long rhs);

    friend Real operator+(const Real& a, const Real& b);
    friend Real operator-(const Real& a, const Real& b);
    friend Real operator*(const Real& a, const Real& b);
    friend Real operator/(const Real& a, const Real& b);
    friend Real operator+(const Real& a, long b);
    friend Real operator-(const Real& a, long b);
    friend Real operator-(long a, const Real& b);
    friend Real operator*(const Real& a, long b);
    friend Real operator*(long a, const Real& b) { return b * a; }
    friend Real operator/(const Real& a, long b);
    friend Real operator/(long a, const Real& b);

    friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.value_, b.value_) != 0; }
    friend std::partial_ordering operator<=>(const Real& a, const Real& b);
    friend bool operator<(const Real& a, double b) { return mpfr_cmp_d(a.value_, b) < 0; }
    friend bool operator>(const Real& a, double b) { return mpfr_cmp_d(a.value_, b) > 0; }

private:
    mpfr_t value_;
    int digits_;
};

Real abs(const Real& x);
Real sqrt(const Real& x);
Real exp(const Real& x);
Real expm1(const Real& x);
Real log(const Real& x);
Real log1p(const Real& x);
Real sin(const Real& x);
Real cos(const Real& x);
Real sinh(const Real& x);
Real cosh(const Real& x);
Real tanh(const Real& x);
Real atan(const Real& x);
Real atan2(const Real& y, const Real& x);
Real pow(const Real& base, long exponent);
Real pow(const Real& base, const Real& exponent);
Real ldexp(const Real& x, long exponent);
Real max(const Real& a, const Real& b);
Real min(const Real& a, const Real& b);

Real pi(int digits);
/// Riemann zeta at an integer argument s >= 2.
Real zeta(unsigned long s, int digits);
Real factorial(unsigned long n, int digits);

/// Relative difference |a - b| / max(|a|, |b|), zero when both vanish.
Real relative_difference(const Real& a, const Real& b);

}  // namespace amite::mp
