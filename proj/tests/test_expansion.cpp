#include "amite/expansion.hpp"
#include "amite/mp/quadrature.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

using namespace amite;
using namespace amite::expansion;
using amite::mp::Rational;
using amite::mp::TanhSinh;

namespace {

bool agree(const Real& a, const Real& b, int digits) {
    const int d = std::max(a.digits(), b.digits());
    Real tol(10L, d);
    mpfr_pow_si(tol.get(), tol.get(), -digits, MPFR_RNDN);
    return abs(a - b) <= tol * max(abs(a), abs(b));
}

Real ten_to(long exponent, int digits) { return pow(Real(10L, digits), exponent); }

// ((-1)^m / (2m+1)!) int_0^tau xi^(2m+1) csch(pi xi / 2) dxi
Real tanh_coefficient_by_quadrature(const TanhSinh& rule, long m, const Real& tau) {
    const int d = rule.digits();
    const Real half_pi = mp::pi(d) / 2L;
    const Real integral = rule.integrate(
        [&](const Real& xi) { return pow(xi, 2 * m + 1) / sinh(half_pi * xi); }, Real(d), tau.with_digits(d));
    Real value = integral / mp::factorial(static_cast<unsigned long>(2 * m + 1), d);
    return m % 2 == 0 ? value : -value;
}

}  // namespace

TEST_CASE("kernel bounds") {
    const KernelBounds unit = kernel_bounds(0, Real(1L, 40));
    CHECK(agree(unit.sigma, sqrt(Real(2L, 40)), 35));
    CHECK(agree(unit.tau, pow(Real(6L, 40), Real(1L, 40) / 3L), 35));

    const KernelBounds a = kernel_bounds(7, Real(3L, 40));
    const KernelBounds b = kernel_bounds(7, Real(6L, 40));
    CHECK(agree(a.sigma, b.sigma * 2L, 35));
    CHECK(agree(a.tau, b.tau * 2L, 35));

    const KernelBounds fig = kernel_bounds(25, Real(20L, 40));
    CHECK(fig.sigma.to_double() == doctest::Approx(1.01127).epsilon(1e-4));
    CHECK(fig.tau > fig.sigma.to_double());
    CHECK(fig.tau.to_double() == doctest::Approx(1.0298193).epsilon(1e-6));

    CHECK_THROWS_AS(kernel_bounds(-1, Real(1L, 20)), std::invalid_argument);
    CHECK_THROWS_AS(kernel_bounds(3, Real(0L, 20)), std::invalid_argument);
}

TEST_CASE("lambda antiderivative") {
    const int d = 50;
    const Real a = mp::pi(d) / 2L;
    const TanhSinh rule(d);

    SUBCASE("central difference recovers the integrand") {
        const Real h = ten_to(-12, 80);
        for (unsigned j : {0u, 1u, 4u, 9u}) {
            const Real xi(0.7, 80);
            const Real a80 = mp::pi(80) / 2L;
            const Real slope = (lambda_integral(j, xi + h, a80) - lambda_integral(j, xi - h, a80)) / (h * 2L);
            const Real integrand = pow(xi, static_cast<long>(j)) / sinh(a80 * xi);
            CHECK(agree(slope, integrand, 20));
        }
    }

    SUBCASE("definite integrals against quadrature") {
        struct Case {
            unsigned j;
            double upper;
        };
        for (const Case c : {Case{1, 1.0}, Case{3, 2.0}, Case{6, 0.4}}) {
            const Real upper(c.upper, d);
            const Real closed = lambda_integral(c.j, upper, a) - lambda_integral_at_zero(c.j, a);
            const Real numeric = rule.integrate(
                [&](const Real& xi) { return pow(xi, static_cast<long>(c.j)) / sinh(a * xi); }, Real(d), upper);
            CHECK(agree(closed, numeric, 45));
        }
    }

    CHECK_THROWS(lambda_integral_at_zero(0, a));
    CHECK_THROWS_AS(lambda_integral(2, Real(0L, d), a), std::invalid_argument);
}

TEST_CASE("tanh coefficients match the kernel integral") {
    const TanhSinh rule(50);
    for (int terms : {3, 8}) {
        for (long vmax : {2L, 20L}) {
            const AmiteExpansion ex = tanh_coefficients(terms, Real(vmax, 60), 60);
            REQUIRE(ex.coefficients.size() == static_cast<std::size_t>(terms) + 1);
            for (long m = 0; m <= terms; ++m) {
                const Real oracle = tanh_coefficient_by_quadrature(rule, m, ex.kernel_bound);
                CHECK_MESSAGE(agree(ex.coefficients[static_cast<std::size_t>(m)], oracle, 30),
                              "M=" << terms << " V=" << vmax << " m=" << m);
            }
        }
    }
}

TEST_CASE("tanh coefficient properties") {
    // Small V pushes tau out; the linear coefficient tends to tanh'(0) = 1.
    const AmiteExpansion wide = tanh_coefficients(30, Real(0.5, 120), 120);
    CHECK(std::abs(wide.rounded[0] - 1.0) < 1e-12);
    CHECK(evaluate_expansion(wide, 0.0) == 0.0);
    CHECK(wide.parity() == Parity::odd);
    CHECK(wide.degree() == 61);

    const AmiteExpansion fig = tanh_coefficients(25, Real(20L, 450), 450);
    CHECK(fig.cancellation_digits > 50.0);
    CHECK(fig.cancellation_digits < 65.0);
    double largest = 0.0;
    for (std::size_t m = 0; m < fig.rounded.size(); ++m) {
        largest = std::max(largest, std::abs(fig.rounded[m]) * std::pow(20.0, 2.0 * m + 1));
    }
    CHECK(largest < 2e6);
    CHECK(largest > 1e6);

    CHECK_THROWS_AS(tanh_coefficients(25, Real(20L, 60), 60), PrecisionExhausted);
    CHECK_THROWS_AS(make_expansion(Activation::linear, 3, Real(1L, 30), 30), std::invalid_argument);
}

TEST_CASE("relu coefficients") {
    const AmiteExpansion ex = relu_coefficients(10, Real(5L, 60), 60);
    const Real pi = mp::pi(60);
    const Real& sigma = ex.kernel_bound;
    CHECK(agree(ex.coefficients[0], Real(1L, 60) / (pi * sigma), 50));
    CHECK(agree(ex.coefficients[1], sigma / (pi * 2L), 50));
    CHECK(evaluate_expansion(ex, 0.0) == doctest::Approx(ex.coefficients[0].to_double()).epsilon(1e-15));
    CHECK(ex.parity() == Parity::even_plus_half_v);

    const AmiteExpansion doubled = relu_coefficients(10, Real(10L, 60), 60);
    for (long m = 0; m <= 10; ++m) {
        const Real scaled = ex.coefficients[static_cast<std::size_t>(m)] * ldexp(Real(1L, 60), 1 - 2 * m);
        CHECK(agree(doubled.coefficients[static_cast<std::size_t>(m)], scaled, 50));
    }

    const std::vector<double> dense = ex.power_coefficients();
    REQUIRE(dense.size() == 21);
    CHECK(dense[1] == 0.5);
    CHECK(dense[3] == 0.0);
    CHECK(dense[4] == ex.rounded[2]);
}

TEST_CASE("conventional tanh series") {
    const std::vector<Rational> c = taylor_coefficients_tanh(4);
    CHECK(c[0] == Rational(1));
    CHECK(c[1] == Rational(-1, 3));
    CHECK(c[2] == Rational(2, 15));
    CHECK(c[3] == Rational(-17, 315));
    CHECK_THROWS(taylor_coefficients_tanh(0));
}

TEST_CASE("error formulas reproduce the measured error") {
    std::mt19937_64 rng(11);
    const int d = 32;
    const Real tol = ten_to(5 - d, d + 10);
    for (Activation kind : {Activation::tanh, Activation::relu}) {
        const AmiteExpansion ex = make_expansion(kind, 12, Real(6L, 130), 130);
        const ErrorModel model(ex, d);
        std::uniform_real_distribution<double> dist(-1.1 * 6.0, 1.1 * 6.0);
        for (int i = 0; i < 12; ++i) {
            const double v = dist(rng);
            const Real e = model.measured(v);
            const Real h = model.exact(v);
            CHECK_MESSAGE(abs(e - h) <= tol * max(Real(1L, d), abs(e)), to_string(kind) << " v=" << v);
        }
        CHECK(model.exact(0.0).is_zero() == (kind == Activation::tanh));
    }
}

TEST_CASE("parity of the error functions") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(0.1, 9.0);
    const ErrorModel tanh_model(tanh_coefficients(10, Real(8L, 100), 100), 30);
    const ErrorModel relu_model(relu_coefficients(10, Real(8L, 100), 100), 30);
    for (int i = 0; i < 6; ++i) {
        const double v = dist(rng);
        CHECK(agree(tanh_model.exact(v), -tanh_model.exact(-v), 25));
        CHECK(agree(tanh_model.approximate(v), -tanh_model.approximate(-v), 25));
        CHECK(agree(relu_model.exact(v), relu_model.exact(-v), 25));
        CHECK(agree(relu_model.oscillating(v), relu_model.oscillating(-v), 25));
        CHECK(evaluate_expansion(tanh_model.expansion(), v) == -evaluate_expansion(tanh_model.expansion(), -v));
    }
}

TEST_CASE("oscillating tanh error against the semi-infinite integral") {
    const int d = 30;
    const AmiteExpansion ex = tanh_coefficients(8, Real(4L, 80), 80);
    const ErrorModel model(ex, d);
    const TanhSinh rule(d);
    const Real half_pi = mp::pi(d) / 2L;
    const Real tau = ex.kernel_bound.with_digits(d);
    // csch(pi xi/2) < 2 e^(-pi xi/2) falls below 10^(-d-10) past this point.
    const Real cutoff(2.0 * (d + 10) * std::log(10.0) / std::numbers::pi, d);
    for (double v : {0.3, 2.5, -5.0}) {
        const Real vv(v, d);
        const int panels = 8 + static_cast<int>(std::abs(v) * cutoff.to_double() / 3.0);
        const Real oracle = rule.integrate_panels(
            [&](const Real& xi) { return sin(xi * vv) / sinh(half_pi * xi); }, tau, cutoff, panels);
        CHECK(agree(model.oscillating(v), oracle, 24));
    }
    CHECK(model.oscillating(0.0).is_zero());
}

TEST_CASE("approximate tanh error tracks the exact oscillating part") {
    const AmiteExpansion ex = tanh_coefficients(25, Real(20L, 450), 450);
    const ErrorModel model(ex, 32);
    const double exact = model.oscillating(10.0).to_double();
    const double approx = model.approximate(10.0).to_double();
    CHECK(std::abs(approx - exact) <= 0.05 * std::abs(exact));
    CHECK(model.approximate(0.0).is_zero());
    CHECK(model.period() == doctest::Approx(2.0 * std::numbers::pi / ex.kernel_bound.to_double()));

    // Magnitude shrinks as M grows at fixed V and v.
    const ErrorModel fewer(tanh_coefficients(5, Real(20L, 120), 120), 32);
    CHECK(abs(model.oscillating(3.0)) < abs(fewer.oscillating(3.0)));
}

TEST_CASE("relu oscillating part against its cosine integral") {
    const int d = 30;
    const AmiteExpansion ex = relu_coefficients(6, Real(3L, 60), 60);
    const ErrorModel model(ex, d);
    const TanhSinh rule(d);
    const Real sigma = ex.kernel_bound.with_digits(d);
    const Real pi = mp::pi(d);
    CHECK(agree(model.oscillating(0.0), -Real(1L, d) / (pi * sigma), 25));
    CHECK(agree(model.measured(0.0), -ex.coefficients[0].with_digits(d), 25));

    for (double v : {1.5, 3.0}) {
        const Real vv(v, d);
        // Truncate at a multiple of the period and add the asymptotic tail of int cos(xi v)/xi^2.
        const double period = 2.0 * std::numbers::pi / v;
        const Real upper(std::ceil(200.0 / period) * period, d);
        const int panels = static_cast<int>((upper - sigma).to_double() / period) * 2 + 2;
        const Real head = rule.integrate_panels([&](const Real& xi) { return cos(xi * vv) / (xi * xi); }, sigma, upper,
                                                panels);
        const Real x = upper * vv;
        const Real tail = -sin(x) / (vv * upper * upper) + cos(x) * 2L / (vv * vv * pow(upper, 3)) +
                          sin(x) * 6L / (pow(vv, 3) * pow(upper, 4)) - cos(x) * 24L / (pow(vv, 4) * pow(upper, 5));
        const Real oracle = -(head + tail) / pi;
        CHECK_MESSAGE(abs(model.oscillating(v) - oracle) < Real(1e-10, d),
                      model.oscillating(v).to_string(15) << " vs " << oracle.to_string(15));
    }
    const ErrorModel tight(relu_coefficients(40, Real(1L, 60), 60), d);
    CHECK(abs(tight.oscillating(0.8)) < abs(model.oscillating(0.8)));
}

TEST_CASE("error shrinks with more terms") {
    const std::vector<double> grid = symmetric_grid(20.0, 0.0, 201);
    double previous = std::numeric_limits<double>::infinity();
    for (int terms : {5, 10, 15, 20, 25}) {
        const ErrorModel model(tanh_coefficients(terms, Real(20L, 140), 140), 25);
        double worst = 0.0;
        for (double v : grid) worst = std::max(worst, std::abs(model.measured(v).to_double()));
        CHECK_MESSAGE(worst <= 2.0 * previous, "M=" << terms);
        previous = worst;
    }
}

TEST_CASE("grids") {
    const std::vector<double> g = symmetric_grid(20.0, 0.5, 2001);
    REQUIRE(g.size() == 2001);
    CHECK(g.front() == -20.5);
    CHECK(g.back() == 20.5);
    CHECK(g[1000] == 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == -g[g.size() - 1 - i]);
    CHECK_THROWS(symmetric_grid(1.0, 0.0, 1));
}

TEST_CASE("error report") {
    const ErrorModel model(relu_coefficients(6, Real(3L, 60), 60), 25);
    const ErrorReport r = error_report(model, symmetric_grid(3.0, 0.5, 21));
    REQUIRE(r.measured.size() == 21);
    CHECK(r.exact.size() == 21);
    CHECK(r.approximate.size() == 21);
    CHECK(r.phi[20] == 3.5);
    CHECK(std::abs(r.measured[7].to_double() - (r.phi[7] - r.phi_approx[7])) < 1e-14);
}

TEST_CASE("expansion files round trip") {
    const AmiteExpansion ex = tanh_coefficients(6, Real(2.5, 70), 70);
    const AmiteExpansion back = expansion_from_json(expansion_to_json(ex));
    CHECK(back.kind == ex.kind);
    CHECK(back.terms == ex.terms);
    CHECK(back.digits == ex.digits);
    CHECK(back.vmax == ex.vmax);
    CHECK(back.kernel_bound == ex.kernel_bound);
    REQUIRE(back.coefficients.size() == ex.coefficients.size());
    for (std::size_t m = 0; m < ex.coefficients.size(); ++m) {
        CHECK(back.coefficients[m] == ex.coefficients[m]);
        CHECK(back.rounded[m] == ex.rounded[m]);
    }

    CHECK_THROWS_AS(expansion_from_json("{"), FormatError);
    CHECK_THROWS_AS(expansion_from_json(R"({"format":"other"})"), FormatError);
    std::string text = expansion_to_json(ex);
    const std::string bound = ex.kernel_bound.to_string();
    text.replace(text.find(bound), 3, "9.9");
    CHECK_THROWS_AS(expansion_from_json(text), FormatError);
}
