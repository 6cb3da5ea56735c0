// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments select
// criteria by number; the exit status is nonzero if any selected criterion fails.

#include "amite/equivtest.hpp"
#include "amite/expansion.hpp"
#include "amite/mp/quadrature.hpp"
#include "amite/poly.hpp"
#include "amite/random.hpp"
#include "amite/rangebound.hpp"
#include "amite/taylor_model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace amite;
using amite::mp::Real;
using amite::mp::TanhSinh;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

Real ten_to(long exponent, int digits) { return pow(Real(10L, digits), exponent); }

bool agree(const Real& a, const Real& b, int digits) {
    const int d = std::max(a.digits(), b.digits());
    return abs(a - b) <= ten_to(-digits, d) * max(abs(a), abs(b));
}

double relative_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

// ---------------------------------------------------------------- criterion 1

Outcome coefficient_oracles() {
    const int qd = 50;
    const TanhSinh rule(qd);
    const Real zero(0L, qd);
    const Real pi = mp::pi(qd);
    int checked = 0;
    int failed = 0;
    for (int terms : {3, 6, 12}) {
        for (long vmax : {2L, 20L}) {
            const auto th = expansion::tanh_coefficients(terms, Real(vmax, 120), 120);
            const Real tau = th.kernel_bound.with_digits(qd);
            const Real half_pi = pi / 2L;
            for (long m = 0; m <= terms; ++m) {
                // ((-1)^m / (2m+1)!) int_0^tau xi^(2m+1) csch(pi xi / 2) dxi
                Real q = rule.integrate([&](const Real& xi) { return pow(xi, 2 * m + 1) / sinh(half_pi * xi); }, zero,
                                        tau) /
                         mp::factorial(static_cast<unsigned long>(2 * m + 1), qd);
                if (m % 2 == 1) q = -q;
                ++checked;
                failed += !agree(th.coefficients[static_cast<std::size_t>(m)], q, 30);
            }

            const auto re = expansion::relu_coefficients(terms, Real(vmax, 120), 120);
            const Real sigma = re.kernel_bound.with_digits(qd);
            // m = 0: (1/pi) int_sigma^inf xi^-2 dxi, mapped to u = 1/xi on [0, 1/sigma].
            const Real r0 = rule.integrate([](const Real& u) { return Real(1L, u.digits()); }, zero,
                                           Real(1L, qd) / sigma) /
                            pi;
            ++checked;
            failed += !agree(re.coefficients[0], r0, 30);
            for (long m = 1; m <= terms; ++m) {
                // (-1)^(m+1) / (pi (2m)!) int_0^sigma xi^(2m-2) dxi
                Real q = rule.integrate([&](const Real& xi) { return pow(xi, 2 * m - 2); }, zero, sigma) /
                         (pi * mp::factorial(static_cast<unsigned long>(2 * m), qd));
                if (m % 2 == 0) q = -q;
                ++checked;
                failed += !agree(re.coefficients[static_cast<std::size_t>(m)], q, 30);
            }
        }
    }
    return {failed == 0, fmt("%d/%d coefficients agree to 30 digits", checked - failed, checked)};
}

// ------------------------------------------------------------ criteria 2 and 3

Outcome figure_configuration(Activation kind) {
    const auto ex = expansion::make_expansion(kind, 25, Real(20L, 450), 450);
    const expansion::ErrorModel model(ex, 32);
    const auto grid = expansion::symmetric_grid(20.0, 0.5, 2001);
    const auto r = expansion::error_report(model, grid);

    double e_h = 0.0;
    double ed_h = 0.0;
    std::vector<double> e(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        e_h = std::max(e_h, std::abs((r.measured[i] - r.exact[i]).to_double()));
        ed_h = std::max(ed_h, std::abs((r.phi[i] - r.phi_approx[i]) - r.exact[i].to_double()));
        e[i] = r.measured[i].to_double();
    }

    double gap = 0.0;
    double scale = 0.0;
    bool identity = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::abs(grid[i]) > 20.0) continue;
        const double approx = r.approximate[i].to_double();
        if (kind == Activation::tanh) {
            const double osc = model.oscillating(grid[i]).to_double();
            gap = std::max(gap, std::abs(osc - approx));
            scale = std::max(scale, std::abs(osc));
        } else {
            // The relu oscillating part is already exact; compare it with the full remainder.
            gap = std::max(gap, std::abs(r.exact[i].to_double() - approx));
            scale = std::max(scale, std::abs(approx));
            identity = identity && model.oscillating(grid[i]) == r.approximate[i];
        }
    }

    // Consecutive sign changes are half a period apart.
    std::vector<double> crossings;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (std::abs(grid[i]) < 20.0 && std::abs(grid[i + 1]) < 20.0 && e[i] * e[i + 1] < 0.0) {
            crossings.push_back(grid[i] - e[i] * (grid[i + 1] - grid[i]) / (e[i + 1] - e[i]));
        }
    }
    double period = 0.0;
    if (crossings.size() >= 2) {
        period = 2.0 * (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
    }
    const double period_error = std::abs(period - model.period()) / model.period();

    const bool pass = e_h <= 1e-10 && ed_h <= 1e-8 && gap <= 0.05 * scale && identity && period_error <= 0.10;
    return {pass, fmt("max|E-H| %.2e, max|E_double-H| %.2e, oscillating gap %.2f%%%s, period %.4f vs %.4f (%.1f%%)",
                      e_h, ed_h, 100.0 * gap / scale, kind == Activation::relu ? (identity ? ", I identity" : ", I differs") : "",
                      period, model.period(), 100.0 * period_error)};
}

// ---------------------------------------------------------------- criterion 4

Outcome taylor_baseline() {
    const int d = 200;
    const auto series = expansion::taylor_coefficients_tanh(10);
    const mp::Rational expected[] = {mp::Rational(1), mp::Rational(-1, 3), mp::Rational(2, 15), mp::Rational(-17, 315)};
    bool exact = true;
    for (std::size_t i = 0; i < 4; ++i) exact = exact && series[i] == expected[i];

    // n-th central difference of tanh at 0 with step h, divided by n! h^n.
    const Real h = ten_to(-12, d);
    double worst = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const long n = 2 * static_cast<long>(i) + 1;
        Real sum(0L, d);
        Real binom(1L, d);
        for (long k = 0; k <= n; ++k) {
            const Real x = h * (Real(n, d) / 2L - Real(k, d));
            const Real term = binom * tanh(x);
            sum = k % 2 == 0 ? sum + term : sum - term;
            binom = binom * Real(n - k, d) / Real(k + 1, d);
        }
        const Real oracle = sum / (pow(h, n) * mp::factorial(static_cast<unsigned long>(n), d));
        Real c(0L, d);
        mpfr_set_q(c.get(), series[i].get_mpq_t(), MPFR_RNDN);
        worst = std::max(worst, (abs(c - oracle) / abs(oracle)).to_double());
    }

    auto partial_error = [&](double v) {
        const Real x(v, d);
        Real s(0L, d);
        for (std::size_t i = 0; i < series.size(); ++i) {
            Real c(0L, d);
            mpfr_set_q(c.get(), series[i].get_mpq_t(), MPFR_RNDN);
            s += c * pow(x, static_cast<long>(2 * i + 1));
        }
        return abs(tanh(x) - s).to_double();
    };
    const double inside = partial_error(1.0);
    const double outside = partial_error(2.0);
    const bool pass = exact && worst <= 1e-9 && outside > 1.0 && inside < 1e-2;
    return {pass, fmt("leading coefficients %s, finite-difference relative error %.1e, M=10 error %.1e at v=1 and "
                      "%.1e at v=2",
                      exact ? "exact" : "wrong", worst, inside, outside)};
}

// ---------------------------------------------------------------- criterion 5

Outcome equivalence_campaign() {
    const auto ex = expansion::make_expansion(Activation::tanh, 6, Real(4.0, 65), 65);
    int clean_ok = 0;
    int noisy_ok = 0;
    int noisy_runs = 0;
    for (int i = 0; i < 12; ++i) {
        const int inputs = 1 + i % 2;
        const int hidden = (i / 2) % 2 == 0 ? 5 : 10;
        const bool perturbed = i >= 6;
        const auto net = nn::random_network({inputs, hidden, 1}, Activation::tanh, 100 + static_cast<std::uint64_t>(i));
        const auto under_test = perturbed ? nn::perturb_weights(net, 0.05, 500 + static_cast<std::uint64_t>(i)) : net;
        const Box box(static_cast<std::size_t>(inputs), Interval(-1.0, 1.0));
        auto correct = [&](const equiv::EquivVerdict& v) {
            return v.verdict == (perturbed ? equiv::Verdict::not_equivalent : equiv::Verdict::equivalent);
        };

        equiv::EquivOptions o;
        o.threshold = 0.01;
        o.seed = static_cast<std::uint64_t>(i);
        clean_ok += correct(equiv::equivalence_test(net, equiv::evaluator_for(under_test), box, ex, o));
        for (int s = 0; s < 3; ++s) {
            o.snr_db = 20.0;
            o.seed = 1000 + static_cast<std::uint64_t>(s * 17 + i);
            noisy_ok += correct(equiv::equivalence_test(net, equiv::evaluator_for(under_test), box, ex, o));
            ++noisy_runs;
        }
    }
    const double noisy = static_cast<double>(noisy_ok) / noisy_runs;
    return {clean_ok == 12 && noisy >= 0.9,
            fmt("noiseless %d/12, 20 dB %d/%d (%.0f%%)", clean_ok, noisy_ok, noisy_runs, 100.0 * noisy)};
}

// ---------------------------------------------------------------- criterion 6

Outcome range_campaign() {
    const auto population = range::generate_population(range::PopulationSpec{});
    std::map<std::string, const nn::Network*> by_id;
    for (const auto& m : population) by_id[m.id] = &m.net;

    range::ModelCache cache;
    range::CampaignOptions o;
    o.cache = &cache;
    const auto rows = range::bound_campaign(population, {0.1, 1.0, 2.0}, o);

    int amite_rows = 0;
    int violations = 0;
    std::map<std::string, double> amite_over;
    for (const auto& row : rows) {
        if (row.result.method != range::Method::amite) continue;
        ++amite_rows;
        const auto& r = row.result;
        bool sound = !r.diverged && r.bound.contains(r.numeric_estimate);
        const Box box = centered_box(by_id.at(row.net_id)->num_inputs, row.width);
        for (const auto& y : nn::respond(*by_id.at(row.net_id), nn::fuzz_inputs(1000, box, mix_seed(o.seed, 1000)))) {
            sound = sound && r.bound.contains(Interval(y[0]));
        }
        violations += !sound;
        if (row.width == 2.0) amite_over[row.net_id] = r.overestimation;
    }

    int separated = 0;
    int nets = 0;
    for (const auto& row : rows) {
        if (row.result.method != range::Method::taylor || row.width != 2.0) continue;
        ++nets;
        separated += row.result.diverged || row.result.overestimation >= 10.0 * amite_over.at(row.net_id);
    }
    const bool pass = population.size() == 12 && violations == 0 && 2 * separated >= nets && nets == 12;
    return {pass, fmt("%zu nets, %d AMITE bounds with %d violations, baseline separated on %d/%d nets at width 2",
                      population.size(), amite_rows, violations, separated, nets)};
}

// ---------------------------------------------------------------- criterion 7

Outcome wide_relu() {
    const auto net = nn::random_network({2, 1200, 1}, Activation::relu, 7);
    const Box box = centered_box(2, 0.5);

    range::ModelCache cache;
    range::AmiteOptions o;
    o.cache = &cache;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = range::range_bound_amite(net, box, o);
    const double bound_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    range::ModelCache fresh;
    const auto t1 = std::chrono::steady_clock::now();
    fresh.get(Activation::relu, r.terms, r.vmax, r.digits, o.opt_tol);
    const double generation_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();

    const bool pass = !r.diverged && r.bound.contains(r.numeric_estimate) && generation_s <= 60.0 && bound_s <= 600.0;
    return {pass, fmt("M=%d digits=%d V=%.3g, %s, generation %.2f s, bounding %.2f s", r.terms, r.digits, r.vmax,
                      r.diverged ? "diverged" : "bounded", generation_s, bound_s)};
}

// ---------------------------------------------------------------- criterion 8

constexpr int kExactDigits = 80;

Interval random_interval(Rng& rng) {
    auto endpoint = [&rng] {
        if (rng.uniform() < 0.05) return 0.0;
        const double scale = std::pow(10.0, std::floor(rng.uniform(-6.0, 6.0)));
        return rng.uniform(-1.0, 1.0) * scale;
    };
    const double a = endpoint();
    const double b = rng.uniform() < 0.05 ? a : endpoint();
    return Interval(std::min(a, b), std::max(a, b));
}

double inside(Rng& rng, const Interval& x) {
    const double u = rng.uniform();
    if (u < 0.1) return x.lo;
    if (u < 0.2) return x.hi;
    return std::clamp(x.lo + (x.hi - x.lo) * rng.uniform(), x.lo, x.hi);
}

bool encloses(const Interval& box, const Real& exact) { return !(exact < box.lo) && !(exact > box.hi); }

bool model_encloses(const tm::TaylorModel& m, std::span<const double> x, const Real& truth) {
    Real y(0L, kExactDigits);
    for (std::size_t e = 0; e < m.coefficients().size(); ++e) {
        const double c = m.coefficients()[e];
        if (c == 0.0) continue;
        Real term(c, kExactDigits);
        const poly::MultiIndex& k = m.space().basis().monomial(e);
        for (std::size_t v = 0; v < k.size(); ++v) term *= mp::pow(Real(x[v], kExactDigits), static_cast<long>(k[v]));
        y += term;
    }
    const Real gap = truth - y;
    return !(gap < m.remainder().lo) && !(gap > m.remainder().hi);
}

Outcome property_suite() {
    Rng rng(8);
    std::size_t interval_violations = 0;
    constexpr int kIntervalTrials = 1000000;
    for (int t = 0; t < kIntervalTrials; ++t) {
        const Interval xs = random_interval(rng);
        const Interval ys = random_interval(rng);
        const Real rx(inside(rng, xs), kExactDigits);
        const Real ry(inside(rng, ys), kExactDigits);
        switch (t % 4) {
            case 0: interval_violations += !encloses(xs + ys, rx + ry); break;
            case 1: interval_violations += !encloses(xs - ys, rx - ry); break;
            case 2: interval_violations += !encloses(xs * ys, rx * ry); break;
            default: {
                const unsigned n = static_cast<unsigned>(rng.next() % 8);
                interval_violations += !encloses(pow(xs, n), mp::pow(rx, static_cast<long>(n)));
            }
        }
    }

    // Half the trials on truncated polynomial arithmetic, half through two activation layers.
    constexpr int kModelTrials = 10000;
    std::size_t model_violations = 0;
    const Box box{Interval(-1, 1), Interval(-0.5, 2)};
    {
        const auto space = tm::TmSpace::create(box, 3);
        const auto x = tm::TaylorModel::variable(space, 0);
        const auto y = tm::TaylorModel::variable(space, 1);
        const auto s = tm::tm_add_constant(tm::tm_axpy(x, 0.3, y), -0.1);
        const auto s2 = tm::tm_mul(s, s);
        const auto f = tm::tm_add_constant(tm::tm_axpy(tm::tm_mul(s2, s2), -2.5, tm::tm_mul(x, tm::tm_mul(y, y))),
                                           1.0 / 3.0);
        for (int i = 0; i < kModelTrials / 2; ++i) {
            const double xs[] = {inside(rng, box[0]), inside(rng, box[1])};
            const Real rx(xs[0], kExactDigits);
            const Real ry(xs[1], kExactDigits);
            const Real sv = rx + Real(0.3, kExactDigits) * ry - Real(0.1, kExactDigits);
            const Real truth =
                mp::pow(sv, 4L) - Real(2.5, kExactDigits) * rx * ry * ry + Real(1.0 / 3.0, kExactDigits);
            model_violations += !model_encloses(f, xs, truth);
        }
    }
    {
        const auto ex = expansion::make_expansion(Activation::tanh, 6, Real(4L, 65), 65);
        const auto wide = expansion::make_expansion(Activation::tanh, 6, Real(8L, 65), 65);
        const auto space = tm::TmSpace::create(box, ex.degree());
        const auto x = tm::TaylorModel::variable(space, 0);
        const auto y = tm::TaylorModel::variable(space, 1);
        const auto act = tm::make_activation_model(ex);
        const auto h1 = tm::tm_from_activation(act, tm::tm_add_constant(tm::tm_axpy(tm::tm_scale(x, 0.8), -0.6, y), 0.1));
        const auto h2 =
            tm::tm_from_activation(act, tm::tm_add_constant(tm::tm_axpy(tm::tm_scale(x, -0.4), 0.9, y), -0.2));
        const auto out = tm::tm_from_activation(tm::make_activation_model(wide),
                                                tm::tm_add_constant(tm::tm_axpy(tm::tm_scale(h1, 1.1), -0.7, h2), 0.05));
        for (int i = 0; i < kModelTrials / 2; ++i) {
            const double xs[] = {inside(rng, box[0]), inside(rng, box[1])};
            const Real rx(xs[0], kExactDigits);
            const Real ry(xs[1], kExactDigits);
            const Real a1 = mp::tanh(Real(0.8, kExactDigits) * rx - Real(0.6, kExactDigits) * ry + Real(0.1, kExactDigits));
            const Real a2 =
                mp::tanh(Real(-0.4, kExactDigits) * rx + Real(0.9, kExactDigits) * ry - Real(0.2, kExactDigits));
            const Real truth =
                mp::tanh(Real(1.1, kExactDigits) * a1 - Real(0.7, kExactDigits) * a2 + Real(0.05, kExactDigits));
            model_violations += !model_encloses(out, xs, truth);
        }
    }

    // Central difference of the antiderivative against x^j csch(a x). Points keep
    // |Lambda| / (h |integrand|) well under 10^30 so 50 digits resolve the difference.
    const int d = 50;
    const Real a = mp::pi(d) / 2L;
    const Real h = ten_to(-12, d);
    double worst = 0.0;
    for (unsigned j : {0u, 1u, 2u, 5u, 9u, 14u}) {
        for (double xv : {0.3, 0.7, 2.5, 6.0}) {
            const Real x(xv, d);
            const Real slope =
                (expansion::lambda_integral(j, x + h, a) - expansion::lambda_integral(j, x - h, a)) / (h * 2L);
            const Real integrand = pow(x, static_cast<long>(j)) / sinh(a * x);
            worst = std::max(worst, (abs(slope - integrand) / abs(integrand)).to_double());
        }
    }

    const bool pass = interval_violations == 0 && model_violations == 0 && worst <= 1e-20;
    return {pass, fmt("%d interval trials with %zu violations, %d model trials with %zu violations, "
                      "antiderivative relative error %.1e",
                      kIntervalTrials, interval_violations, kModelTrials, model_violations, worst)};
}

// ---------------------------------------------------------------- criterion 9

Outcome layer_expansion() {
    Rng rng(9);
    double worst = 0.0;
    std::string shapes;
    for (int n = 0; n < 10; ++n) {
        // The last net takes the largest allowed shape.
        const bool largest = n == 9;
        const int inputs = largest ? 3 : 1 + static_cast<int>(rng.next() % 3);
        const int hidden = largest ? 75 : 1 + static_cast<int>(rng.next() % 75);
        const int terms = largest ? 12 : 1 + static_cast<int>(rng.next() % 12);
        const Activation kind = n % 2 == 0 ? Activation::tanh : Activation::relu;
        const auto net = nn::random_network({inputs, hidden, 1}, kind, 900 + static_cast<std::uint64_t>(n));
        const auto ex = expansion::make_expansion(kind, terms, Real(4L, 100), 100);
        const auto p = poly::expand_layer(net, ex, 0, &poly::default_multinomial_cache());
        const Box box(static_cast<std::size_t>(inputs), Interval(-1.0, 1.0));
        for (const auto& x : nn::fuzz_inputs(100, box, mix_seed(9, static_cast<std::uint64_t>(n)))) {
            worst = std::max(worst, relative_error(poly::eval_poly(p, x), poly::polynomial_network(net, ex, x)));
        }
        shapes += fmt("%s%d-%d/M%d", n == 0 ? "" : " ", inputs, hidden, terms);
    }
    const auto& cache = poly::default_multinomial_cache();
    return {worst <= 1e-9 && cache.hits() > 0,
            fmt("worst relative error %.1e over nets %s, multinomial cache %zu hits %zu misses", worst, shapes.c_str(),
                cache.hits(), cache.misses())};
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int number;
        double limit_s;  // 0: no runtime limit
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, 300.0, coefficient_oracles},
        {2, 600.0, [] { return figure_configuration(Activation::tanh); }},
        {3, 600.0, [] { return figure_configuration(Activation::relu); }},
        {4, 0.0, taylor_baseline},
        {5, 900.0, equivalence_campaign},
        {6, 1800.0, range_campaign},
        {7, 0.0, wide_relu},
        {8, 0.0, property_suite},
        {9, 0.0, layer_expansion},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

    int failures = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.contains(c.number)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = c.limit_s == 0.0 || elapsed <= c.limit_s;
        const bool pass = o.pass && in_time;
        failures += !pass;
        std::printf("criterion %d: %s  %s; %.1f s%s\n", c.number, pass ? "PASS" : "FAIL", o.detail.c_str(), elapsed,
                    in_time ? "" : fmt(" (limit %.0f s)", c.limit_s).c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
