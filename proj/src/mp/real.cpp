#include "amite/mp/real.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace amite::mp {

namespace {

constexpr mpfr_rnd_t kRnd = MPFR_RNDN;

int larger(const Real& a, const Real& b) { return a.digits() > b.digits() ? a.digits() : b.digits(); }

template <typename Fn>
Real unary(const Real& x, Fn fn) {
    Real out(x.digits());
    fn(out.get(), x.get(), kRnd);
    return out;
}

}  // namespace

int bits_for_digits(int digits) {
    if (digits < 1) throw std::invalid_argument("precision must be at least one digit");
    return static_cast<int>(std::ceil(digits * 3.321928094887362)) + 4;
}

Real::Real(int digits) : digits_(digits) {
    mpfr_init2(value_, bits_for_digits(digits));
    mpfr_set_zero(value_, 1);
}

Real::Real(double value, int digits) : digits_(digits) {
    mpfr_init2(value_, bits_for_digits(digits));
    mpfr_set_d(value_, value, kRnd);
}

Real::Real(long value, int digits) : digits_(digits) {
    mpfr_init2(value_, bits_for_digits(digits));
    mpfr_set_si(value_, value, kRnd);
}

Real::Real(const Real& other) : digits_(other.digits_) {
    mpfr_init2(value_, mpfr_get_prec(other.value_));
    mpfr_set(value_, other.value_, kRnd);
}

Real::Real(const Real& other, int digits) : digits_(digits) {
    mpfr_init2(value_, bits_for_digits(digits));
    mpfr_set(value_, other.value_, kRnd);
}

Real::Real(Real&& other) noexcept : digits_(other.digits_) {
    // Leave the source valid (tiny precision) so its destructor stays trivial to reason about.
    mpfr_init2(value_, MPFR_PREC_MIN);
    mpfr_swap(value_, other.value_);
}

Real& Real::operator=(const Real& other) {
    if (this != &other) {
        mpfr_set_prec(value_, mpfr_get_prec(other.value_));
        mpfr_set(value_, other.value_, kRnd);
        digits_ = other.digits_;
    }
    return *this;
}

Real& Real::operator=(Real&& other) noexcept {
    if (this != &other) {
        mpfr_swap(value_, other.value_);
        std::swap(digits_, other.digits_);
    }
    return *this;
}

Real::~Real() { mpfr_clear(value_); }

Real Real::parse(std::string_view text, int digits) {
    Real out(digits);
    const std::string owned(text);
    if (owned.empty()) throw std::invalid_argument("empty decimal string");
    char* end = nullptr;
    mpfr_strtofr(out.value_, owned.c_str(), &end, 10, kRnd);
    if (end != owned.c_str() + owned.size()) throw std::invalid_argument("not a decimal number: '" + owned + "'");
    return out;
}

Real& Real::set_digits(int digits) {
    mpfr_prec_round(value_, bits_for_digits(digits), kRnd);
    digits_ = digits;
    return *this;
}

double Real::to_double() const { return mpfr_get_d(value_, kRnd); }

std::string Real::to_string(int significant) const {
    if (mpfr_nan_p(value_)) return "nan";
    if (mpfr_inf_p(value_)) return mpfr_sgn(value_) > 0 ? "inf" : "-inf";
    // Full precision means enough digits to reproduce every mantissa bit on parsing.
    const int n = significant > 0
                      ? significant
                      : 1 + static_cast<int>(std::ceil(static_cast<double>(mpfr_get_prec(value_)) * 0.30102999566398120));
    const std::string fmt = "%." + std::to_string(n - 1) + "Re";
    char* buffer = nullptr;
    mpfr_asprintf(&buffer, fmt.c_str(), value_);
    std::string out(buffer);
    mpfr_free_str(buffer);
    return out;
}

Real Real::operator-() const { return unary(*this, mpfr_neg); }

Real& Real::operator+=(const Real& rhs) {
    if (rhs.digits_ > digits_) set_digits(rhs.digits_);
    mpfr_add(value_, value_, rhs.value_, kRnd);
    return *this;
}
Real& Real::operator-=(const Real& rhs) {
    if (rhs.digits_ > digits_) set_digits(rhs.digits_);
    mpfr_sub(value_, value_, rhs.value_, kRnd);
    return *this;
}
Real& Real::operator*=(const Real& rhs) {
    if (rhs.digits_ > digits_) set_digits(rhs.digits_);
    mpfr_mul(value_, value_, rhs.value_, kRnd);
    return *this;
}
Real& Real::operator/=(const Real& rhs) {
    if (rhs.digits_ > digits_) set_digits(rhs.digits_);
    mpfr_div(value_, value_, rhs.value_, kRnd);
    return *this;
}
Real& Real::operator*=(long rhs) {
    mpfr_mul_si(value_, value_, rhs, kRnd);
    return *this;
}
Real& Real::operator/=(long rhs) {
    mpfr_div_si(value_, value_, rhs, kRnd);
    return *this;
}

Real operator+(const Real& a, const Real& b) {
    Real out(larger(a, b));
    mpfr_add(out.value_, a.value_, b.value_, kRnd);
    return out;
}
Real operator-(const Real& a, const Real& b) {
    Real out(larger(a, b));
    mpfr_sub(out.value_, a.value_, b.value_, kRnd);
    return out;
}
Real operator*(const Real& a, const Real& b) {
    Real out(larger(a, b));
    mpfr_mul(out.value_, a.value_, b.value_, kRnd);
    return out;
}
Real operator/(const Real& a, const Real& b) {
    Real out(larger(a, b));
    mpfr_div(out.value_, a.value_, b.value_, kRnd);
    return out;
}
Real operator+(const Real& a, long b) {
    Real out(a.digits_);
    mpfr_add_si(out.value_, a.value_, b, kRnd);
    return out;
}
Real operator-(const Real& a, long b) {
    Real out(a.digits_);
    mpfr_sub_si(out.value_, a.value_, b, kRnd);
    return out;
}
Real operator-(long a, const Real& b) {
    Real out(b.digits_);
    mpfr_si_sub(out.value_, a, b.value_, kRnd);
    return out;
}
Real operator*(const Real& a, long b) {
    Real out(a.digits_);
    mpfr_mul_si(out.value_, a.value_, b, kRnd);
    return out;
}
Real operator/(const Real& a, long b) {
    Real out(a.digits_);
    mpfr_div_si(out.value_, a.value_, b, kRnd);
    return out;
}
Real operator/(long a, const Real& b) {
    Real out(b.digits_);
    mpfr_si_div(out.value_, a, b.value_, kRnd);
    return out;
}

std::partial_ordering operator<=>(const Real& a, const Real& b) {
    if (mpfr_unordered_p(a.value_, b.value_)) return std::partial_ordering::unordered;
    const int c = mpfr_cmp(a.value_, b.value_);
    if (c < 0) return std::partial_ordering::less;
    if (c > 0) return std::partial_ordering::greater;
    return std::partial_ordering::equivalent;
}

Real abs(const Real& x) { return unary(x, mpfr_abs); }
Real sqrt(const Real& x) { return unary(x, mpfr_sqrt); }
Real exp(const Real& x) { return unary(x, mpfr_exp); }
Real expm1(const Real& x) { return unary(x, mpfr_expm1); }
Real log(const Real& x) { return unary(x, mpfr_log); }
Real log1p(const Real& x) { return unary(x, mpfr_log1p); }
Real sin(const Real& x) { return unary(x, mpfr_sin); }
Real cos(const Real& x) { return unary(x, mpfr_cos); }
Real sinh(const Real& x) { return unary(x, mpfr_sinh); }
Real cosh(const Real& x) { return unary(x, mpfr_cosh); }
Real tanh(const Real& x) { return unary(x, mpfr_tanh); }
Real atan(const Real& x) { return unary(x, mpfr_atan); }

Real atan2(const Real& y, const Real& x) {
    Real out(larger(y, x));
    mpfr_atan2(out.get(), y.get(), x.get(), kRnd);
    return out;
}

Real pow(const Real& base, long exponent) {
    Real out(base.digits());
    mpfr_pow_si(out.get(), base.get(), exponent, kRnd);
    return out;
}

Real pow(const Real& base, const Real& exponent) {
    Real out(larger(base, exponent));
    mpfr_pow(out.get(), base.get(), exponent.get(), kRnd);
    return out;
}

Real ldexp(const Real& x, long exponent) {
    Real out(x.digits());
    mpfr_mul_2si(out.get(), x.get(), exponent, kRnd);
    return out;
}

Real max(const Real& a, const Real& b) { return a < b ? b : a; }
Real min(const Real& a, const Real& b) { return b < a ? b : a; }

Real pi(int digits) {
    Real out(digits);
    mpfr_const_pi(out.get(), kRnd);
    return out;
}

Real zeta(unsigned long s, int digits) {
    if (s < 2) throw std::domain_error("zeta(s) requires s >= 2");
    Real out(digits);
    mpfr_zeta_ui(out.get(), s, kRnd);
    return out;
}

Real factorial(unsigned long n, int digits) {
    Real out(digits);
    mpfr_fac_ui(out.get(), n, kRnd);
    return out;
}

Real relative_difference(const Real& a, const Real& b) {
    const Real scale = max(abs(a), abs(b));
    if (scale.is_zero()) return Real(scale.digits());
    return abs(a - b) / scale;
}

}  // namespace amite::mp
