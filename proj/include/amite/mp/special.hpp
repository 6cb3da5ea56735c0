#pragma once

#include "amite/mp/real.hpp"

#include <gmpxx.h>

#include <span>
#include <stdexcept>
#include <vector>

namespace amite::mp {

using Rational = mpq_class;

/// Argument outside a function's domain (e.g. polylog with |x| >= 1).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A series that cannot converge for the requested argument.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unsupported or singular parameter list.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Guard digits carried internally by every special function.
inline constexpr int kGuardDigits = 15;

/// Bernoulli number B_n as an exact rational (B_1 = -1/2). Memoized; safe to
/// call concurrently.
Rational bernoulli(unsigned n);

/// Li_s(x) for integer s >= 1 and |x| < 1.
Real polylog(int s, const Real& x);

/// Legendre chi function chi_s(z) = (Li_s(z) - Li_s(-z)) / 2 for z in [0, 1).
Real legendre_chi(int s, const Real& z);

/// Generalized hypergeometric series pFq(a; b; z) for the signatures
/// (1;b1,b2), (a1,a2;b1) with |z| < 1, and (a1,a2;b1,b2,b3).
Real hypergeometric(std::span<const Real> a, std::span<const Real> b, const Real& z);

/// Sine integral Si(x).
Real sine_integral(const Real& x);

/// ln(n!) summed as the exact sum of logarithms.
Real log_factorial(unsigned n, int digits);

/// (n!)^(1/n) for n >= 1.
Real factorial_root(unsigned n, int digits);

namespace detail {

/// Running sum that applies the series stopping rule: stop after
/// `kQuietTerms` consecutive terms below 10^(-D-10) relative to the sum.
class SeriesSum {
public:
    static constexpr int kQuietTerms = 20;
    static constexpr long kMaxTerms = 2'000'000;

    explicit SeriesSum(int digits);

    /// Adds a term; returns true once the series has converged.
    bool add(const Real& term);
    const Real& value() const { return sum_; }
    long terms() const { return count_; }

private:
    Real sum_;
    Real threshold_;
    int quiet_ = 0;
    long count_ = 0;
};

/// Estimated log10 of the largest term in a pFq series with double arithmetic,
/// used to size guard digits for cancelling alternating series.
double log10_peak_term(std::span<const double> a, std::span<const double> b, double z);

}  // namespace detail

}  // namespace amite::mp
