#include "amite/expansion.hpp"
#include "amite/mp/complex.hpp"
#include "amite/parallel.hpp"

#include <cmath>
#include <numbers>

namespace amite::expansion {

namespace {

constexpr int kWorkGuard = 10;

long long node_key(mp::NodeId id) {
    return (static_cast<long long>(id.level) * 100000000LL + id.index) * 4 + (id.side + 1);
}

}  // namespace

ErrorModel::ErrorModel(const AmiteExpansion& expansion, int eval_digits)
    : expansion_(expansion),
      eval_digits_(eval_digits),
      work_digits_(eval_digits + kWorkGuard),
      power_coefficients_(expansion.power_coefficients(eval_digits + kWorkGuard)),
      kernel_bound_(expansion.kernel_bound.with_digits(eval_digits + kWorkGuard)),
      quadrature_(eval_digits + 5) {
    if (eval_digits < 5) throw std::invalid_argument("eval_digits must be at least 5");
    if (expansion.kind == Activation::linear) throw std::invalid_argument("no error model for the linear activation");
    if (expansion.digits < eval_digits) {
        // The kernel bound and coefficients only carry expansion.digits; recompute the bound.
        const KernelBounds b = kernel_bounds(expansion.terms, expansion.vmax.with_digits(work_digits_));
        kernel_bound_ = expansion.kind == Activation::tanh ? b.tau : b.sigma;
    }
}

double ErrorModel::period() const { return 2.0 * std::numbers::pi / kernel_bound_.to_double(); }

Real ErrorModel::measured(const Real& v) const {
    const Real vw = v.with_digits(work_digits_);
    Real poly(work_digits_);
    for (auto it = power_coefficients_.rbegin(); it != power_coefficients_.rend(); ++it) poly = poly * vw + *it;
    Real result = activation_value(expansion_.kind, vw) - poly;
    return result.set_digits(eval_digits_);
}

Real ErrorModel::exact(const Real& v) const {
    const Real vw = v.with_digits(work_digits_);
    Real result = expansion_.kind == Activation::tanh ? tanh_oscillating(vw) + tanh_tail_integral(vw)
                                                      : relu_oscillating(vw) + relu_tail_series(vw);
    return result.set_digits(eval_digits_);
}

Real ErrorModel::oscillating(const Real& v) const {
    const Real vw = v.with_digits(work_digits_);
    Real result = expansion_.kind == Activation::tanh ? tanh_oscillating(vw) : relu_oscillating(vw);
    return result.set_digits(eval_digits_);
}

Real ErrorModel::approximate(const Real& v) const {
    const Real vw = v.with_digits(work_digits_);
    if (expansion_.kind == Activation::relu) return relu_oscillating(vw).set_digits(eval_digits_);
    // 4 e^(pi tau/2) (pi sin(tau v) + 2 v cos(tau v)) / ((e^(pi tau) - 1)(4 v^2 + pi^2))
    const Real& tau = kernel_bound_;
    const Real pi_w = mp::pi(work_digits_);
    const Real numerator = exp(pi_w * tau / 2L) * 4L * (pi_w * sin(tau * vw) + vw * 2L * cos(tau * vw));
    const Real denominator = expm1(pi_w * tau) * (vw * vw * 4L + pi_w * pi_w);
    Real result = numerator / denominator;
    return result.set_digits(eval_digits_);
}

// P (U F + conj(U) conj(F)) with P = e^(pi tau/2)/(e^(pi tau) - 1),
// U = e^(-i tau v)/(v - i pi/2), F = 2F1(1, 1; 3/2 + i v/pi; 1/(1 - e^(pi tau))).
// F and its conjugate partner are summed independently; the imaginary parts must cancel.
Real ErrorModel::tanh_oscillating(const Real& v) const {
    const int d = work_digits_;
    const Real& tau = kernel_bound_;
    const Real pi_w = mp::pi(d);
    const Real e = exp(pi_w * tau);
    const Real prefactor = exp(pi_w * tau / 2L) / (e - 1L);
    const Real z = Real(1L, d) / (1L - e);

    const Real half_pi = pi_w / 2L;
    const Real three_halves(1.5, d);
    const mp::Complex one(Real(1L, d), Real(d));
    const mp::Complex numer[2] = {one, one};
    const mp::Complex c_plus[1] = {mp::Complex(three_halves, v / pi_w)};
    const mp::Complex c_minus[1] = {mp::Complex(three_halves, -v / pi_w)};
    const mp::Complex f_plus = mp::hypergeometric(numer, c_plus, z);
    const mp::Complex f_minus = mp::hypergeometric(numer, c_minus, z);

    const mp::Complex u_plus = mp::expi(-tau * v) / mp::Complex(v, -half_pi);
    const mp::Complex u_minus = mp::expi(tau * v) / mp::Complex(v, half_pi);
    const mp::Complex first = u_plus * f_plus;
    const mp::Complex sum = first + u_minus * f_minus;

    const Real scale = max(Real(1L, d), abs(first.re) + abs(first.im));
    const Real allowed = pow(Real(10L, d), static_cast<long>(5 - eval_digits_)) * scale;
    if (abs(sum.im) > allowed) {
        throw std::runtime_error("oscillating tanh error: imaginary residue " + sum.im.to_string(6) +
                                 " exceeds tolerance at v = " + v.to_string(17));
    }
    return prefactor * sum.re;
}

const Real& ErrorModel::kernel_sample(const Real& xi, mp::NodeId id) const {
    const long long key = node_key(id);
    {
        std::shared_lock lock(cache_mutex_);
        auto it = kernel_cache_.find(key);
        if (it != kernel_cache_.end()) return *it->second;
    }
    const int d = work_digits_;
    const long power = 2L * expansion_.terms + 3;
    const Real xw = xi.with_digits(d);
    auto value = std::make_unique<Real>(pow(xw, power) / sinh(mp::pi(d) * xw / 2L));
    std::unique_lock lock(cache_mutex_);
    auto [it, inserted] = kernel_cache_.emplace(key, std::move(value));
    return *it->second;
}

// ((-1)^(M+1) v^L / L!) int_0^tau xi^L csch(pi xi/2) 1F2(1; M+2, M+5/2; -v^2 xi^2/4) dxi, L = 2M+3.
Real ErrorModel::tanh_tail_integral(const Real& v) const {
    const int d = work_digits_;
    const long m = expansion_.terms;
    const long power = 2 * m + 3;
    if (v.is_zero()) return Real(d);
    const Real a[1] = {Real(1L, d)};
    const Real b[2] = {Real(m + 2, d), Real(static_cast<double>(m) + 2.5, d)};
    const Real quarter_v2 = v * v / 4L;
    auto integrand = [&](const Real& xi, mp::NodeId id) {
        const Real xw = xi.with_digits(d);
        return kernel_sample(xw, id) * mp::hypergeometric(a, b, -quarter_v2 * xw * xw);
    };
    const Real integral = quadrature_.integrate(integrand, Real(d), kernel_bound_);
    Real result = pow(v, power) / mp::factorial(static_cast<unsigned long>(power), d) * integral.with_digits(d);
    return (m + 1) % 2 == 0 ? result : -result;
}

// |v|/2 - v Si(sigma v)/pi - cos(sigma v)/(pi sigma).
Real ErrorModel::relu_oscillating(const Real& v) const {
    const int d = work_digits_;
    const Real& sigma = kernel_bound_;
    const Real pi_w = mp::pi(d);
    return abs(v) / 2L - v * mp::sine_integral(sigma * v) / pi_w - cos(sigma * v) / (pi_w * sigma);
}

// (-1)^M sigma^(2M+1) v^(2M+2) / (pi (2M+2)! (2M+1))
//   * 2F3(1, M+1/2; M+3/2, M+3/2, M+2; -sigma^2 v^2/4).
Real ErrorModel::relu_tail_series(const Real& v) const {
    const int d = work_digits_;
    const long m = expansion_.terms;
    if (v.is_zero()) return Real(d);
    const Real& sigma = kernel_bound_;
    const Real a[2] = {Real(1L, d), Real(static_cast<double>(m) + 0.5, d)};
    const Real b[3] = {Real(static_cast<double>(m) + 1.5, d), Real(static_cast<double>(m) + 1.5, d), Real(m + 2, d)};
    const Real series = mp::hypergeometric(a, b, -(sigma * v) * (sigma * v) / 4L);
    Real result = pow(sigma, 2 * m + 1) * pow(v, 2 * m + 2) * series /
                  (mp::pi(d) * mp::factorial(static_cast<unsigned long>(2 * m + 2), d) * (2 * m + 1));
    return m % 2 == 0 ? result : -result;
}

namespace {

void require_kind(const AmiteExpansion& expansion, Activation kind) {
    if (expansion.kind != kind) {
        throw std::invalid_argument("expected a " + std::string(to_string(kind)) + " expansion, got " + std::string(to_string(expansion.kind)));
    }
}

}  // namespace

Real tanh_error_exact(const AmiteExpansion& expansion, const Real& v) {
    require_kind(expansion, Activation::tanh);
    return ErrorModel(expansion, v.digits()).exact(v);
}

Real tanh_error_oscillating_exact(const AmiteExpansion& expansion, const Real& v) {
    require_kind(expansion, Activation::tanh);
    return ErrorModel(expansion, v.digits()).oscillating(v);
}

Real tanh_error_approx(const AmiteExpansion& expansion, const Real& v) {
    require_kind(expansion, Activation::tanh);
    return ErrorModel(expansion, v.digits()).approximate(v);
}

Real relu_error_exact(const AmiteExpansion& expansion, const Real& v) {
    require_kind(expansion, Activation::relu);
    return ErrorModel(expansion, v.digits()).exact(v);
}

Real relu_error_oscillating(const AmiteExpansion& expansion, const Real& v) {
    require_kind(expansion, Activation::relu);
    return ErrorModel(expansion, v.digits()).oscillating(v);
}

ErrorReport error_report(const ErrorModel& model, const std::vector<double>& grid) {
    const std::size_t n = grid.size();
    const int d = model.eval_digits();
    ErrorReport report;
    report.grid = grid;
    report.phi.resize(n);
    report.phi_approx.resize(n);
    report.measured.assign(n, Real(d));
    report.exact.assign(n, Real(d));
    report.approximate.assign(n, Real(d));
    const Activation kind = model.expansion().kind;
    parallel_for(n, [&](std::size_t i) {
        const double v = grid[i];
        report.phi[i] = apply(kind, v);
        report.phi_approx[i] = evaluate_expansion(model.expansion(), v);
        report.measured[i] = model.measured(v);
        report.exact[i] = model.exact(v);
        report.approximate[i] = model.approximate(v);
    });
    return report;
}

std::vector<double> symmetric_grid(double vmax, double span, int points) {
    if (points < 2) throw std::invalid_argument("a grid needs at least two points");
    const double half = vmax + span;
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = half * (2 * i - (points - 1)) / (points - 1);
    return grid;
}

}  // namespace amite::expansion
