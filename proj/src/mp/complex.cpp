#include "amite/mp/complex.hpp"

#include "amite/mp/special.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace amite::mp {

Complex expi(const Real& theta) { return {cos(theta), sin(theta)}; }

Complex hypergeometric(std::span<const Complex> a, std::span<const Complex> b, const Real& z) {
    const std::size_t p = a.size();
    const std::size_t q = b.size();
    const bool supported = (p == 1 && q == 2) || (p == 2 && q == 1) || (p == 2 && q == 3);
    if (!supported) {
        throw ParameterError("unsupported hypergeometric signature " + std::to_string(p) + "F" + std::to_string(q));
    }
    for (const Complex& bj : b) {
        if (bj.im.is_zero() && bj.re.sign() <= 0 && mpfr_integer_p(bj.re.get()) != 0) {
            throw ParameterError("hypergeometric denominator parameter is a nonpositive integer");
        }
    }
    if (p == 2 && q == 1 && !(abs(z) < Real(1L, z.digits()))) {
        throw DivergenceError("2F1 series requires |z| < 1, got " + z.to_string(17));
    }
    const int digits = z.digits();
    if (z.is_zero()) return {Real(1L, digits), Real(digits)};

    // Guard digits from the modulus-only peak estimate.
    std::vector<double> ad;
    std::vector<double> bd;
    for (const Complex& ai : a) ad.push_back(std::hypot(ai.re.to_double(), ai.im.to_double()));
    for (const Complex& bj : b) bd.push_back(std::hypot(bj.re.to_double(), bj.im.to_double()));
    const double peak = detail::log10_peak_term(ad, bd, z.to_double());
    const int work = digits + kGuardDigits + static_cast<int>(std::ceil(std::max(0.0, peak)));
    const Real zw = z.with_digits(work);

    detail::SeriesSum sum_re(work);
    detail::SeriesSum sum_im(work);
    Complex term{Real(1L, work), Real(work)};
    for (long k = 0;; ++k) {
        // Converged when both parts are quiet; the modulus governs the stopping rule.
        const bool done_re = sum_re.add(term.re);
        const bool done_im = sum_im.add(term.im);
        if (done_re && done_im) break;
        for (const Complex& ai : a) term = term * Complex{ai.re + k, ai.im};
        for (const Complex& bj : b) term = term / Complex{bj.re + k, bj.im};
        term = term * zw;
        term = term / Real(k + 1, work);
    }
    Real re = sum_re.value();
    Real im = sum_im.value();
    return {re.set_digits(digits), im.set_digits(digits)};
}

}  // namespace amite::mp
