#include "amite/parallel.hpp"
#include "amite/taylor_model.hpp"

#include <boost/math/tools/minima.hpp>

#include <atomic>
#include <cmath>
#include <mutex>

namespace amite::tm {

using mp::Real;

namespace {

struct Extremes {
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
    double argmin = 0.0;
    double argmax = 0.0;

    void add(double v, double value) {
        if (value < min) {
            min = value;
            argmin = v;
        }
        if (value > max) {
            max = value;
            argmax = v;
        }
    }
};

// The error is odd (tanh) or even (relu) in v, so [0, V] determines the whole range.
ErrorFit mirror(const Extremes& half, Activation kind, double tol) {
    ErrorFit fit;
    double lo = half.min;
    double hi = half.max;
    fit.argmin = half.argmin;
    fit.argmax = half.argmax;
    if (kind == Activation::tanh) {
        if (-half.max < lo) {
            lo = -half.max;
            fit.argmin = -half.argmax;
        }
        if (-half.min > hi) {
            hi = -half.min;
            fit.argmax = -half.argmin;
        }
    }
    fit.interval = Interval(ivl::down(lo - tol), ivl::up(hi + tol));
    return fit;
}

}  // namespace

ErrorFit fit_error_interval(const expansion::ErrorModel& model, const FitOptions& options) {
    if (!(options.opt_tol > 0.0)) throw std::invalid_argument("optimizer tolerance must be positive");
    const Activation kind = model.expansion().kind;
    const double vmax = model.expansion().vmax.to_double();
    const double period = model.period();
    const double half_period = 0.5 * period;

    std::atomic<std::size_t> calls{0};
    auto exact = [&](double v) {
        ++calls;
        const double h = model.exact(v).to_double();
        if (!std::isfinite(h)) throw OptimizerFailure("exact error is not finite at v = " + std::to_string(v));
        return h;
    };

    const auto per_period = static_cast<std::size_t>(std::ceil(options.points_per_period * vmax / period));
    const std::size_t n = std::max<std::size_t>(static_cast<std::size_t>(options.min_grid_points), per_period + 1);
    std::vector<double> grid(n);
    std::vector<double> approx(n);
    for (std::size_t i = 0; i < n; ++i) grid[i] = vmax * static_cast<double>(i) / static_cast<double>(n - 1);
    parallel_for(n, [&](std::size_t i) { approx[i] = model.approximate(grid[i]).to_double(); });

    // Searches: (centre, +1 to maximize / -1 to minimize). Endpoints serve both.
    std::vector<std::pair<double, int>> searches;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (approx[i] >= approx[i - 1] && approx[i] > approx[i + 1]) searches.emplace_back(grid[i], 1);
        if (approx[i] <= approx[i - 1] && approx[i] < approx[i + 1]) searches.emplace_back(grid[i], -1);
    }
    for (double end : {0.0, vmax}) {
        searches.emplace_back(end, 1);
        searches.emplace_back(end, -1);
    }

    Extremes found;
    std::mutex found_mutex;
    ErrorFit fit;
    try {
        found.add(0.0, exact(0.0));
        found.add(vmax, exact(vmax));
        parallel_for(searches.size(), [&](std::size_t s) {
            const auto [centre, sign] = searches[s];
            const double a = std::max(0.0, centre - half_period);
            const double b = std::min(vmax, centre + half_period);
            std::uintmax_t iterations = 200;
            const auto best = boost::math::tools::brent_find_minima([&](double v) { return -sign * exact(v); }, a, b,
                                                                    std::numeric_limits<double>::digits / 2, iterations);
            if (iterations >= 200) throw OptimizerFailure("Brent search did not converge");
            const double value = -sign * best.second;
            std::lock_guard lock(found_mutex);
            found.add(best.first, value);
        });
        fit = mirror(found, kind, options.opt_tol);
    } catch (const std::exception&) {
        // Dense fallback over the exact error, widened by the largest magnitude seen.
        const std::size_t dense = 4 * n;
        std::vector<double> values(dense);
        parallel_for(dense, [&](std::size_t i) {
            values[i] = model.exact(vmax * static_cast<double>(i) / static_cast<double>(dense - 1)).to_double();
        });
        Extremes seen;
        for (std::size_t i = 0; i < dense; ++i) seen.add(vmax * static_cast<double>(i) / static_cast<double>(dense - 1), values[i]);
        if (!std::isfinite(seen.min) || !std::isfinite(seen.max)) throw OptimizerFailure("exact error is not finite");
        const double widen = std::max(std::abs(seen.min), std::abs(seen.max));
        seen.min -= widen;
        seen.max += widen;
        fit = mirror(seen, kind, options.opt_tol);
        fit.fallback = true;
    }
    fit.exact_evaluations = calls.load();
    return fit;
}

Interval fit_error_interval(Activation kind, int terms, double vmax, int digits, double opt_tol) {
    const auto expansion = expansion::make_expansion(kind, terms, Real(vmax, digits), digits);
    const expansion::ErrorModel model(expansion, FitOptions{}.eval_digits);
    FitOptions options;
    options.opt_tol = opt_tol;
    return fit_error_interval(model, options).interval;
}

ActivationModel make_activation_model(const expansion::AmiteExpansion& expansion, const ErrorFit& fit) {
    ActivationModel m;
    m.kind = expansion.kind;
    m.coeffs = expansion.power_coefficients();
    const std::vector<Real> exact = expansion.power_coefficients(expansion.digits);

    // sum |c_k - fl(c_k)| V^k: the gap between the exact and the stored polynomial.
    Real gap(0L, expansion.digits);
    Real power(1L, expansion.digits);
    for (std::size_t k = 0; k < exact.size(); ++k) {
        gap += mp::abs(exact[k] - Real(m.coeffs[k], expansion.digits)) * power;
        power *= expansion.vmax;
    }
    const double rounding = ivl::up(gap.to_double());
    m.error = rounding > 0.0 ? fit.interval + Interval::symmetric(rounding) : fit.interval;
    const double vmax = expansion.vmax.to_double();
    m.vmax = Real(vmax, expansion.digits) > expansion.vmax ? ivl::down(vmax) : vmax;
    return m;
}

ActivationModel make_activation_model(const expansion::AmiteExpansion& expansion, const FitOptions& options) {
    const expansion::ErrorModel model(expansion, options.eval_digits);
    return make_activation_model(expansion, fit_error_interval(model, options));
}

}  // namespace amite::tm
