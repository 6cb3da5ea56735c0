#include "amite/mp/special.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <shared_mutex>
#include <string>

namespace amite::mp {

namespace detail {

SeriesSum::SeriesSum(int digits) : sum_(digits), threshold_(digits) {
    mpfr_set_si(threshold_.get(), 10, MPFR_RNDN);
    mpfr_pow_si(threshold_.get(), threshold_.get(), -(digits + 10), MPFR_RNDN);
}

bool SeriesSum::add(const Real& term) {
    sum_ += term;
    ++count_;
    if (count_ > kMaxTerms) throw DivergenceError("series did not converge within the term limit");
    if (term.is_zero() || abs(term) <= threshold_ * abs(sum_)) {
        ++quiet_;
    } else {
        quiet_ = 0;
    }
    return quiet_ >= kQuietTerms;
}

double log10_peak_term(std::span<const double> a, std::span<const double> b, double z) {
    double log_term = 0.0;
    double peak = 0.0;
    const double log_z = std::log10(std::abs(z));
    for (int k = 0; k < 100000; ++k) {
        double step = log_z - std::log10(k + 1.0);
        for (double ai : a) step += std::log10(std::abs(ai + k));
        for (double bj : b) step -= std::log10(std::abs(bj + k));
        log_term += step;
        peak = std::max(peak, log_term);
        if (step < 0.0 && log_term < peak - 5.0) break;
    }
    return peak;
}

}  // namespace detail

namespace {

class BernoulliTable {
public:
    Rational get(unsigned n) {
        {
            std::shared_lock lock(mutex_);
            if (n < values_.size()) return values_[n];
        }
        std::unique_lock lock(mutex_);
        // Akiyama-Tanigawa: row_ holds the running triangle, extended one entry per index.
        while (values_.size() <= n) {
            const unsigned m = static_cast<unsigned>(values_.size());
            row_.emplace_back(1, m + 1);
            row_.back().canonicalize();
            for (unsigned j = m; j >= 1; --j) {
                row_[j - 1] = j * (row_[j - 1] - row_[j]);
            }
            values_.push_back(row_[0]);
        }
        return values_[n];
    }

private:
    std::shared_mutex mutex_;
    std::vector<Rational> row_;
    std::vector<Rational> values_;
};

BernoulliTable& bernoulli_table() {
    static BernoulliTable table;
    return table;
}

// zeta(n) for any integer n != 1; negative arguments through the reflection
// zeta(1-2k) = (-1)^k 2 (2k-1)! zeta(2k) / (2 pi)^(2k).
Real zeta_integer(long n, int digits) {
    if (n >= 2) return zeta(static_cast<unsigned long>(n), digits);
    if (n == 0) return Real(-0.5, digits);
    const long m = -n;
    if (m % 2 == 0) return Real(digits);
    const long k = (m + 1) / 2;
    Real value = factorial(static_cast<unsigned long>(2 * k - 1), digits) * 2L * zeta(static_cast<unsigned long>(2 * k), digits) /
                 pow(pi(digits) * 2L, 2 * k);
    return (k % 2 == 0) ? value : -value;
}

// Li_s(x) = sum x^k / k^s, for |x| <= 0.75.
Real polylog_direct(int s, const Real& x) {
    const int digits = x.digits();
    detail::SeriesSum sum(digits);
    Real power(x);
    Real denom(digits);
    for (unsigned long k = 1;; ++k) {
        mpfr_ui_pow_ui(denom.get(), k, static_cast<unsigned long>(s), MPFR_RNDN);
        if (sum.add(power / denom)) break;
        power *= x;
    }
    return sum.value();
}

// Li_s(e^mu) = mu^(s-1)/(s-1)! (H_(s-1) - ln(-mu)) + sum_(k != s-1) zeta(s-k) mu^k / k!, for mu < 0, |mu| < 2 pi.
Real polylog_log_series(int s, const Real& x) {
    const int digits = x.digits();
    const Real mu = log(x);
    detail::SeriesSum sum(digits);
    Real mu_power(1L, digits);
    Real harmonic(digits);
    for (int k = 1; k < s; ++k) harmonic += Real(1L, digits) / static_cast<long>(k);
    Real singular = pow(mu, s - 1) / factorial(static_cast<unsigned long>(s - 1), digits) * (harmonic - log(-mu));
    sum.add(singular);
    for (long k = 0;; ++k) {
        if (k > 0) mu_power = mu_power * mu / k;
        if (k == s - 1) continue;
        if (sum.add(zeta_integer(s - k, digits) * mu_power) && k > s) break;
    }
    return sum.value();
}

Real polylog_guarded(int s, const Real& x) {
    if (x.is_zero()) return Real(x.digits());
    if (s == 1) return -log1p(-x);
    if (abs(x) <= Real(0.75, x.digits())) return polylog_direct(s, x);
    if (x.sign() > 0) return polylog_log_series(s, x);
    // Duplication: Li_s(-y) = 2^(1-s) Li_s(y^2) - Li_s(y).
    const Real y = -x;
    return ldexp(polylog_log_series(s, y * y), 1 - s) - polylog_log_series(s, y);
}

bool is_nonpositive_integer(const Real& value) {
    return value.sign() <= 0 && mpfr_integer_p(value.get()) != 0;
}

}  // namespace

Rational bernoulli(unsigned n) {
    if (n == 1) return Rational(-1, 2);
    return bernoulli_table().get(n);
}

Real polylog(int s, const Real& x) {
    if (s < 1) throw ParameterError("polylog order must be >= 1");
    if (!(abs(x) < Real(1L, x.digits()))) throw DomainError("polylog requires |x| < 1, got " + x.to_string(17));
    const int digits = x.digits();
    Real result = polylog_guarded(s, x.with_digits(digits + kGuardDigits));
    return result.set_digits(digits);
}

Real legendre_chi(int s, const Real& z) {
    if (z.sign() < 0 || !(z < Real(1L, z.digits()))) {
        throw DomainError("legendre_chi requires 0 <= z < 1, got " + z.to_string(17));
    }
    const int digits = z.digits();
    if (z.is_zero()) return Real(digits);
    const Real wide = z.with_digits(digits + kGuardDigits);
    Real result = (polylog_guarded(s, wide) - polylog_guarded(s, -wide)) / 2L;
    return result.set_digits(digits);
}

Real hypergeometric(std::span<const Real> a, std::span<const Real> b, const Real& z) {
    const std::size_t p = a.size();
    const std::size_t q = b.size();
    const bool supported = (p == 1 && q == 2) || (p == 2 && q == 1) || (p == 2 && q == 3);
    if (!supported) {
        throw ParameterError("unsupported hypergeometric signature " + std::to_string(p) + "F" + std::to_string(q));
    }
    for (const Real& bj : b) {
        if (is_nonpositive_integer(bj)) throw ParameterError("hypergeometric denominator parameter is a nonpositive integer");
    }
    if (p == 2 && q == 1 && !(abs(z) < Real(1L, z.digits()))) {
        throw DivergenceError("2F1 series requires |z| < 1, got " + z.to_string(17));
    }
    const int digits = z.digits();
    if (z.is_zero()) return Real(1L, digits);

    std::vector<double> ad;
    std::vector<double> bd;
    for (const Real& ai : a) ad.push_back(ai.to_double());
    for (const Real& bj : b) bd.push_back(bj.to_double());
    const double peak = detail::log10_peak_term(ad, bd, z.to_double());
    const int work = digits + kGuardDigits + static_cast<int>(std::ceil(std::max(0.0, peak)));

    const Real zw = z.with_digits(work);
    std::vector<Real> aw;
    std::vector<Real> bw;
    for (const Real& ai : a) aw.push_back(ai.with_digits(work));
    for (const Real& bj : b) bw.push_back(bj.with_digits(work));

    detail::SeriesSum sum(work);
    Real term(1L, work);
    for (long k = 0;; ++k) {
        if (sum.add(term)) break;
        if (term.is_zero()) {
            // A numerator parameter hit a nonpositive integer: the series terminated.
            break;
        }
        for (const Real& ai : aw) term *= ai + k;
        for (const Real& bj : bw) term /= bj + k;
        term *= zw;
        term /= k + 1;
    }
    Real result = sum.value();
    return result.set_digits(digits);
}

Real sine_integral(const Real& x) {
    const int digits = x.digits();
    if (x.is_zero()) return Real(digits);
    if (x.sign() < 0) return -sine_integral(-x);

    const double xd = x.to_double();
    const double asymptotic_from = (digits + 20) * std::log(10.0);
    if (xd > asymptotic_from) {
        // Si(x) = pi/2 - f(x) cos x - g(x) sin x with the asymptotic auxiliary series,
        // summed up to the smallest term (which is below e^-x here).
        const int work = digits + kGuardDigits;
        const Real xw = x.with_digits(work);
        const Real inv2 = Real(1L, work) / (xw * xw);
        Real f(work);
        Real g(work);
        Real term_f = Real(1L, work) / xw;
        Real term_g = inv2;
        Real last = abs(term_f);
        for (long k = 0; k < 100000; ++k) {
            f += term_f;
            g += term_g;
            Real next_f = -term_f * ((2 * k + 1) * (2 * k + 2)) * inv2;
            Real next_g = -term_g * ((2 * k + 2) * (2 * k + 3)) * inv2;
            if (!(abs(next_f) < last)) break;
            last = abs(next_f);
            term_f = next_f;
            term_g = next_g;
        }
        Real result = pi(work) / 2L - f * cos(xw) - g * sin(xw);
        return result.set_digits(digits);
    }

    // Power series; the alternating terms peak near e^x, so carry x/ln(10) extra digits.
    const int work = digits + kGuardDigits + static_cast<int>(std::ceil(xd / std::log(10.0)));
    const Real xw = x.with_digits(work);
    const Real x2 = xw * xw;
    detail::SeriesSum sum(work);
    Real power = xw;  // (-1)^k x^(2k+1) / (2k+1)!
    for (long k = 0;; ++k) {
        if (sum.add(power / (2 * k + 1))) break;
        power *= x2;
        power /= -((2 * k + 2) * (2 * k + 3));
    }
    Real result = sum.value();
    return result.set_digits(digits);
}

Real log_factorial(unsigned n, int digits) {
    const int work = digits + kGuardDigits;
    Real sum(work);
    for (unsigned k = 2; k <= n; ++k) sum += log(Real(static_cast<long>(k), work));
    return sum.set_digits(digits);
}

Real factorial_root(unsigned n, int digits) {
    if (n == 0) throw ParameterError("factorial_root requires n >= 1");
    const int work = digits + kGuardDigits;
    Real result = exp(log_factorial(n, work) / static_cast<long>(n));
    return result.set_digits(digits);
}

}  // namespace amite::mp
