#include "amite/mp/quadrature.hpp"

namespace amite::mp {

TanhSinh::TanhSinh(int digits) : digits_(digits) {}

const TanhSinh::Level& TanhSinh::level(int k) const {
    std::lock_guard lock(mutex_);
    while (static_cast<int>(levels_.size()) <= k) {
        const int current = static_cast<int>(levels_.size());
        auto lv = std::make_unique<Level>();
        const Real half_pi = pi(digits_) / 2L;
        Real cutoff(10L, digits_);
        mpfr_pow_si(cutoff.get(), cutoff.get(), -(digits_ + 20), MPFR_RNDN);
        const Real h = ldexp(Real(1L, digits_), -current);
        if (current == 0) lv->nodes.push_back(Node{Real(1L, digits_), half_pi});
        const long stride = current == 0 ? 1 : 2;
        for (long j = 1;; j += stride) {
            const Real t = h * j;
            const Real u = half_pi * sinh(t);
            const Real cu = cosh(u);
            Real weight = half_pi * cosh(t) / (cu * cu);
            if (weight < cutoff) break;
            Real complement = Real(1L, digits_) / (exp(u) * cu);
            lv->nodes.push_back(Node{std::move(complement), std::move(weight)});
        }
        levels_.push_back(std::move(lv));
    }
    return *levels_[k];
}

bool TanhSinh::converged(const std::vector<Real>& estimates, const Real& scale) const {
    const std::size_t n = estimates.size();
    const Real diff1 = abs(estimates[n - 1] - estimates[n - 2]);
    if (diff1.is_zero()) return true;
    if (scale.is_zero()) return false;
    const Real diff2 = abs(estimates[n - 1] - estimates[n - 3]);
    const double d1 = mpfr_get_d(log(diff1 / scale).get(), MPFR_RNDN) / std::log(10.0);
    const double d2 = diff2.is_zero() ? d1 : mpfr_get_d(log(diff2 / scale).get(), MPFR_RNDN) / std::log(10.0);
    // Quadratic convergence: the next error is roughly the square of the last step.
    double predicted = 2.0 * d1;
    if (d2 < 0.0) predicted = std::max(predicted, d1 * d1 / d2);
    return predicted < -(digits_ - 3);
}

}  // namespace amite::mp
