#include "amite/expansion.hpp"
#include "amite/parallel.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace amite::expansion {

using mp::kGuardDigits;
using mp::Rational;

namespace {

Real to_real(const Rational& q, int digits) {
    Real out(digits);
    mpfr_set_q(out.get(), q.get_mpq_t(), MPFR_RNDN);
    return out;
}

double log10_abs(const Real& x) {
    if (x.is_zero()) return -std::numeric_limits<double>::infinity();
    long exponent = 0;
    const double mantissa = mpfr_get_d_2exp(&exponent, x.get(), MPFR_RNDN);
    return std::log10(std::abs(mantissa)) + static_cast<double>(exponent) * std::log10(2.0);
}

void check_arguments(int terms, const Real& vmax, int digits) {
    if (terms < 0) throw std::invalid_argument("number of terms must be nonnegative");
    if (!(vmax > 0.0)) throw std::invalid_argument("domain half-width V must be positive");
    if (digits < 1) throw std::invalid_argument("digits must be positive");
}

std::vector<double> round_all(const std::vector<Real>& values) {
    std::vector<double> out;
    out.reserve(values.size());
    for (const Real& v : values) out.push_back(v.to_double());
    return out;
}

}  // namespace

KernelBounds kernel_bounds(int terms, const Real& vmax) {
    if (terms < 0) throw std::invalid_argument("number of terms must be nonnegative");
    if (!(vmax > 0.0)) throw std::invalid_argument("domain half-width V must be positive");
    const int digits = vmax.digits();
    return KernelBounds{mp::factorial_root(static_cast<unsigned>(2 * terms + 2), digits) / vmax,
                        mp::factorial_root(static_cast<unsigned>(2 * terms + 3), digits) / vmax};
}

Real lambda_integral(unsigned j, const Real& xi, const Real& a) {
    if (!(xi > 0.0) || !(a > 0.0)) throw std::invalid_argument("lambda_integral requires xi > 0 and a > 0");
    const int digits = std::max(xi.digits(), a.digits());
    const int work = digits + kGuardDigits;
    const Real xw = xi.with_digits(work);
    const Real aw = a.with_digits(work);
    const Real z = exp(-aw * xw);
    const Real j_factorial = mp::factorial(j, work);
    Real sum(work);
    for (unsigned k = 0; k <= j; ++k) {
        sum += j_factorial * pow(xw, static_cast<long>(j - k)) * mp::legendre_chi(static_cast<int>(k) + 1, z) /
               (pow(aw, static_cast<long>(k)) * mp::factorial(j - k, work));
    }
    Real result = -sum * 2L / aw;
    return result.set_digits(digits);
}

Real lambda_integral_at_zero(unsigned j, const Real& a) {
    if (j == 0) throw std::domain_error("the antiderivative of csch diverges at 0");
    const int digits = a.digits();
    const int work = digits + kGuardDigits;
    const Real aw = a.with_digits(work);
    const Real lambda = (Real(1L, work) - ldexp(Real(1L, work), -static_cast<long>(j) - 1)) * mp::zeta(j + 1, work);
    Real result = -mp::factorial(j, work) * lambda * 2L / pow(aw, static_cast<long>(j) + 1);
    return result.set_digits(digits);
}

std::vector<double> AmiteExpansion::power_coefficients() const {
    std::vector<double> dense(static_cast<std::size_t>(degree()) + 1, 0.0);
    for (std::size_t m = 0; m < rounded.size(); ++m) {
        const std::size_t power = kind == Activation::tanh ? 2 * m + 1 : 2 * m;
        dense[power] = rounded[m];
    }
    if (kind == Activation::relu) {
        if (dense.size() < 2) dense.resize(2, 0.0);
        dense[1] += 0.5;
    }
    return dense;
}

std::vector<Real> AmiteExpansion::power_coefficients(int eval_digits) const {
    std::vector<Real> dense(static_cast<std::size_t>(std::max(degree(), 1)) + 1, Real(eval_digits));
    for (std::size_t m = 0; m < coefficients.size(); ++m) {
        const std::size_t power = kind == Activation::tanh ? 2 * m + 1 : 2 * m;
        dense[power] = coefficients[m].with_digits(eval_digits);
    }
    if (kind == Activation::relu) dense[1] += Real(0.5, eval_digits);
    return dense;
}

AmiteExpansion tanh_coefficients(int terms, const Real& vmax, int digits) {
    check_arguments(terms, vmax, digits);
    const int work = digits + kGuardDigits;
    const Real v_work = vmax.with_digits(work);
    const Real tau = kernel_bounds(terms, v_work).tau;
    const Real pi_w = mp::pi(work);
    const Real z = exp(-pi_w * tau / 2L);

    const int top = 2 * terms + 1;
    std::vector<Real> chi(static_cast<std::size_t>(top) + 1, Real(work));
    parallel_for(chi.size(), [&](std::size_t k) { chi[k] = mp::legendre_chi(static_cast<int>(k) + 1, z); });

    std::vector<Real> coefficients(static_cast<std::size_t>(terms) + 1, Real(digits));
    std::vector<double> cancellation(coefficients.size(), 0.0);
    parallel_for(coefficients.size(), [&](std::size_t mi) {
        const long m = static_cast<long>(mi);
        const long j = 2 * m + 1;
        // Maclaurin part: 2^(2m+1) (4^(m+1) - 1) B_(2m+2) / ((m+1) (2m+1)!)
        mpz_class four_pow;
        mpz_ui_pow_ui(four_pow.get_mpz_t(), 4, static_cast<unsigned long>(m + 1));
        mpz_class two_pow;
        mpz_ui_pow_ui(two_pow.get_mpz_t(), 2, static_cast<unsigned long>(j));
        mpz_class fact;
        mpz_fac_ui(fact.get_mpz_t(), static_cast<unsigned long>(j));
        Rational maclaurin = Rational(two_pow * (four_pow - 1)) * mp::bernoulli(static_cast<unsigned>(2 * m + 2)) /
                             Rational(fact * (m + 1));
        maclaurin.canonicalize();
        const Real series_part = to_real(maclaurin, work);

        // Tail correction from the truncated kernel integral.
        Real sum(work);
        for (long k = 0; k <= j; ++k) {
            sum += ldexp(pow(tau, j - k), k) * chi[static_cast<std::size_t>(k)] /
                   (pow(pi_w, k) * mp::factorial(static_cast<unsigned long>(j - k), work));
        }
        Real tail = sum * 4L / pi_w;
        if ((m + 1) % 2 != 0) tail = -tail;

        Real value = series_part + tail;
        const double lost = std::max(log10_abs(series_part), log10_abs(tail)) - log10_abs(value);
        cancellation[mi] = std::max(0.0, lost);
        coefficients[mi] = value.set_digits(digits);
    });

    const double worst = *std::max_element(cancellation.begin(), cancellation.end());
    if (digits - worst < kMinSurvivingDigits) {
        std::ostringstream msg;
        msg << "tanh coefficients (M=" << terms << ", V=" << vmax.to_string(17) << ") cancel " << std::ceil(worst)
            << " digits; " << digits << " digits leave fewer than " << kMinSurvivingDigits
            << " significant digits. Increase the precision.";
        throw PrecisionExhausted(msg.str());
    }

    AmiteExpansion out;
    out.kind = Activation::tanh;
    out.terms = terms;
    out.vmax = vmax.with_digits(digits);
    out.digits = digits;
    out.kernel_bound = tau.with_digits(digits);
    out.coefficients = std::move(coefficients);
    out.rounded = round_all(out.coefficients);
    out.cancellation_digits = worst;
    return out;
}

AmiteExpansion relu_coefficients(int terms, const Real& vmax, int digits) {
    check_arguments(terms, vmax, digits);
    const int work = digits + kGuardDigits;
    const Real sigma = kernel_bounds(terms, vmax.with_digits(work)).sigma;
    const Real pi_w = mp::pi(work);

    std::vector<Real> coefficients(static_cast<std::size_t>(terms) + 1, Real(digits));
    for (long m = 0; m <= terms; ++m) {
        // (-1)^(m+1) sigma^(2m-1) / (pi (2m)! (2m-1))
        Real value = pow(sigma, 2 * m - 1) / (pi_w * mp::factorial(static_cast<unsigned long>(2 * m), work) * (2 * m - 1));
        if ((m + 1) % 2 != 0) value = -value;
        coefficients[static_cast<std::size_t>(m)] = value.set_digits(digits);
    }

    AmiteExpansion out;
    out.kind = Activation::relu;
    out.terms = terms;
    out.vmax = vmax.with_digits(digits);
    out.digits = digits;
    out.kernel_bound = sigma.with_digits(digits);
    out.coefficients = std::move(coefficients);
    out.rounded = round_all(out.coefficients);
    return out;
}

AmiteExpansion make_expansion(Activation kind, int terms, const Real& vmax, int digits) {
    switch (kind) {
        case Activation::tanh: return tanh_coefficients(terms, vmax, digits);
        case Activation::relu: return relu_coefficients(terms, vmax, digits);
        case Activation::linear: break;
    }
    throw std::invalid_argument("no expansion exists for the linear activation");
}

std::vector<Rational> taylor_coefficients_tanh(int terms) {
    if (terms < 1) throw std::invalid_argument("taylor_coefficients_tanh requires at least one term");
    std::vector<Rational> out;
    for (unsigned long m = 1; m <= static_cast<unsigned long>(terms); ++m) {
        mpz_class four_pow;
        mpz_ui_pow_ui(four_pow.get_mpz_t(), 4, m);
        mpz_class fact;
        mpz_fac_ui(fact.get_mpz_t(), 2 * m);
        Rational c = Rational(four_pow * (four_pow - 1)) * mp::bernoulli(static_cast<unsigned>(2 * m)) / Rational(fact);
        c.canonicalize();
        out.push_back(c);
    }
    return out;
}

double evaluate_expansion(const AmiteExpansion& expansion, double v) {
    const double v2 = v * v;
    double acc = 0.0;
    for (auto it = expansion.rounded.rbegin(); it != expansion.rounded.rend(); ++it) acc = acc * v2 + *it;
    if (expansion.kind == Activation::tanh) return acc * v;
    return acc + 0.5 * v;
}

Real evaluate_expansion(const AmiteExpansion& expansion, const Real& v) {
    const int digits = v.digits();
    const Real v2 = v * v;
    Real acc(digits);
    for (auto it = expansion.coefficients.rbegin(); it != expansion.coefficients.rend(); ++it) {
        acc = acc * v2 + it->with_digits(digits);
    }
    if (expansion.kind == Activation::tanh) return acc * v;
    return acc + v / 2L;
}

Real activation_value(Activation kind, const Real& v) {
    switch (kind) {
        case Activation::tanh: return tanh(v);
        case Activation::relu: return v.sign() > 0 ? v : Real(v.digits());
        case Activation::linear: return v;
    }
    return v;
}

}  // namespace amite::expansion
