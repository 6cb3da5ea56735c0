#pragma once

#include "amite/mp/real.hpp"

#include <atomic>
#include <cmath>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace amite::mp {

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Identifies one abscissa of the rule so callers can memoize integrand factors
/// that do not change between integrations over the same interval.
struct NodeId {
    int level;
    int index;
    int side;  // -1 near the left endpoint, +1 near the right, 0 for the centre
};

/// Tanh-sinh (double exponential) quadrature on finite intervals at arbitrary
/// precision. Abscissas are stored as distances from the endpoints so integrands
/// are never evaluated at a cancelled 1 - x.
class TanhSinh {
public:
    static constexpr int kMaxLevel = 14;

    explicit TanhSinh(int digits);

    int digits() const { return digits_; }

    /// Integrates f over [a, b]. `f` takes (const Real&) or (const Real&, NodeId).
    template <typename F>
    Real integrate(F&& f, const Real& a, const Real& b) const;

    /// Splits [a, b] into `pieces` equal panels (for oscillatory integrands).
    template <typename F>
    Real integrate_panels(F&& f, const Real& a, const Real& b, int pieces) const;

    /// Level reached by the most recent converged integration.
    int last_level() const { return last_level_.load(); }

private:
    struct Node {
        Real complement;  // 1 - |x| on [-1, 1]
        Real weight;
    };
    struct Level {
        std::vector<Node> nodes;  // t > 0 only; level 0 also stores t = 0 as the first entry
    };

    const Level& level(int k) const;
    bool converged(const std::vector<Real>& estimates, const Real& scale) const;

    int digits_;
    mutable std::mutex mutex_;
    mutable std::vector<std::unique_ptr<Level>> levels_;
    mutable std::atomic<int> last_level_{0};
};

template <typename F>
Real TanhSinh::integrate(F&& f, const Real& a, const Real& b) const {
    const Real half_width = (b - a) / 2L;
    Real total(digits_);
    Real total_abs(digits_);
    std::vector<Real> estimates;
    auto call = [&](const Real& x, NodeId id) {
        if constexpr (std::is_invocable_v<F, const Real&, NodeId>) {
            return f(x, id);
        } else {
            return f(x);
        }
    };
    for (int k = 0; k <= kMaxLevel; ++k) {
        const Level& lv = level(k);
        for (std::size_t i = 0; i < lv.nodes.size(); ++i) {
            const Node& node = lv.nodes[i];
            const int idx = static_cast<int>(i);
            if (k == 0 && i == 0) {
                Real fx = call((a + b) / 2L, NodeId{0, 0, 0});
                total += node.weight * fx;
                total_abs += node.weight * abs(fx);
                continue;
            }
            const Real offset = half_width * node.complement;
            Real fl = call(a + offset, NodeId{k, idx, -1});
            Real fr = call(b - offset, NodeId{k, idx, +1});
            total += node.weight * (fl + fr);
            total_abs += node.weight * (abs(fl) + abs(fr));
        }
        const Real h = ldexp(Real(1L, digits_), -k);
        estimates.push_back(total * h * half_width);
        if (k >= 2 && converged(estimates, total_abs * h * abs(half_width))) {
            last_level_.store(k);
            return estimates.back();
        }
    }
    throw QuadratureError("tanh-sinh quadrature did not converge");
}

template <typename F>
Real TanhSinh::integrate_panels(F&& f, const Real& a, const Real& b, int pieces) const {
    Real sum(digits_);
    const Real step = (b - a) / static_cast<long>(pieces);
    for (int p = 0; p < pieces; ++p) {
        const Real lo = a + step * static_cast<long>(p);
        const Real hi = (p + 1 == pieces) ? b : a + step * static_cast<long>(p + 1);
        sum += integrate([&](const Real& x) { return f(x); }, lo, hi);
    }
    return sum;
}

}  // namespace amite::mp
