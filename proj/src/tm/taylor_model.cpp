#include "amite/taylor_model.hpp"

#include "amite/format.hpp"

#include <nlohmann/json.hpp>

#include <cfloat>
#include <cmath>

namespace amite::tm {

namespace {

// Exact error of a + b, i.e. (a + b) - fl(a + b).
inline double two_sum_error(double a, double b, double s) {
    const double bb = s - a;
    return (a - (s - bb)) + (b - bb);
}

// Running sum of nonnegative error terms, widened for its own rounding when read back.
class Slack {
public:
    void add(double x) {
        if (x == 0.0) return;
        sum_ += x;
        ++count_;
    }
    void add(double x, double scale) { add(x * scale); }
    Interval interval() const {
        if (count_ == 0) return Interval(0.0);
        const double widened = ivl::up(sum_ * (1.0 + static_cast<double>(count_ + 4) * DBL_EPSILON));
        return Interval::symmetric(widened);
    }

private:
    double sum_ = 0.0;
    std::size_t count_ = 0;
};

bool is_zero(const Interval& x) { return x.lo == 0.0 && x.hi == 0.0; }

Interval scaled(const Interval& r, double f) { return is_zero(r) ? r : r * Interval(f); }

void check_same(const TaylorModel& a, const TaylorModel& b) {
    if (a.space_ptr() == b.space_ptr()) return;
    if (a.space().domain() != b.space().domain() || a.space().order_cap() != b.space().order_cap()) {
        throw DomainMismatch("Taylor models live on different domains");
    }
}

}  // namespace

DomainExceeded::DomainExceeded(Interval b, double v)
    : std::runtime_error("pre-activation bound [" + format_double(b.lo) + ", " + format_double(b.hi) +
                         "] exceeds the activation domain [-" + format_double(v) + ", " + format_double(v) + "]"),
      bound(b),
      vmax(v) {}

TmSpace::TmSpace(Box domain, int order_cap)
    : domain_(std::move(domain)), order_cap_(order_cap), basis_(static_cast<int>(domain_.size()), 2 * order_cap) {
    if (order_cap < 0) throw std::invalid_argument("order cap must be nonnegative");
    if (domain_.empty()) throw std::invalid_argument("Taylor model domain needs at least one input");
    for (const Interval& d : domain_) {
        if (d.is_empty() || !d.is_finite()) throw std::invalid_argument("Taylor model domain must be finite and nonempty");
    }
    stored_ = basis_.degree_offset(order_cap + 1);

    const std::size_t n = basis_.size();
    ranges_.resize(n);
    magnitudes_.resize(n);
    ranges_[0] = Interval(1.0);
    magnitudes_[0] = 1.0;
    // Each monomial's range is the product of per-variable interval powers.
    for (std::size_t e = 1; e < n; ++e) {
        const poly::MultiIndex& m = basis_.monomial(e);
        Interval r(1.0);
        for (std::size_t v = 0; v < m.size(); ++v) {
            if (m[v] > 0) r = r * pow(domain_[v], static_cast<unsigned>(m[v]));
        }
        ranges_[e] = r;
        magnitudes_[e] = r.magnitude();
    }
}

std::shared_ptr<const TmSpace> TmSpace::create(Box domain, int order_cap) {
    return std::shared_ptr<const TmSpace>(new TmSpace(std::move(domain), order_cap));
}

std::size_t TmSpace::product(std::size_t i, std::size_t j) const {
    std::size_t idx = i;
    const poly::MultiIndex& m = basis_.monomial(j);
    for (int v = 0; v < vars(); ++v) {
        for (int k = 0; k < m[static_cast<std::size_t>(v)]; ++k) idx = static_cast<std::size_t>(basis_.times_variable(idx, v));
    }
    return idx;
}

TaylorModel::TaylorModel(SpacePtr space) : space_(std::move(space)), coeffs_(space_->size(), 0.0) {}

TaylorModel TaylorModel::constant(SpacePtr space, double value) {
    TaylorModel m(std::move(space));
    m.coeffs_[0] = value;
    return m;
}

TaylorModel TaylorModel::variable(SpacePtr space, int var) {
    if (var < 0 || var >= space->vars()) throw std::invalid_argument("variable index out of range");
    TaylorModel m(std::move(space));
    if (m.space().order_cap() >= 1) {
        m.coeffs_[1 + static_cast<std::size_t>(var)] = 1.0;
    } else {
        m.remainder_ = m.space().domain()[static_cast<std::size_t>(var)];
    }
    return m;
}

int TaylorModel::degree() const {
    for (std::size_t e = coeffs_.size(); e-- > 0;) {
        if (coeffs_[e] != 0.0) return space_->basis().degree_of(e);
    }
    return 0;
}

std::size_t TaylorModel::nonzeros() const {
    return static_cast<std::size_t>(std::count_if(coeffs_.begin(), coeffs_.end(), [](double c) { return c != 0.0; }));
}

poly::MultivariatePolynomial TaylorModel::polynomial() const {
    poly::MultivariatePolynomial p(space_->vars());
    for (std::size_t e = 0; e < coeffs_.size(); ++e) {
        if (coeffs_[e] != 0.0) p.add_term(space_->basis().monomial(e), coeffs_[e]);
    }
    return p;
}

double TaylorModel::eval(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(space_->vars())) throw std::invalid_argument("input dimension mismatch");
    double y = 0.0;
    for (std::size_t e = 0; e < coeffs_.size(); ++e) {
        if (coeffs_[e] == 0.0) continue;
        const poly::MultiIndex& m = space_->basis().monomial(e);
        double term = coeffs_[e];
        for (std::size_t v = 0; v < m.size(); ++v) term *= std::pow(x[v], m[v]);
        y += term;
    }
    return y;
}

TaylorModel tm_axpy(const TaylorModel& a, double factor, const TaylorModel& b) {
    check_same(a, b);
    const TmSpace& space = a.space();
    TaylorModel out(a.space_ptr());
    Slack slack;
    const auto& ca = a.coefficients();
    const auto& cb = b.coefficients();
    auto& c = out.coefficients();
    for (std::size_t e = 0; e < c.size(); ++e) {
        if (cb[e] == 0.0) {
            c[e] = ca[e];
            continue;
        }
        const double p = factor * cb[e];
        const double perr = std::fma(factor, cb[e], -p);
        const double s = ca[e] + p;
        c[e] = s;
        slack.add(std::abs(two_sum_error(ca[e], p, s)) + std::abs(perr), space.magnitude(e));
    }
    const Interval rem = a.remainder() + scaled(b.remainder(), factor);
    out.set_remainder(rem + slack.interval());
    return out;
}

TaylorModel tm_add(const TaylorModel& a, const TaylorModel& b) { return tm_axpy(a, 1.0, b); }

TaylorModel tm_sub(const TaylorModel& a, const TaylorModel& b) { return tm_axpy(a, -1.0, b); }

TaylorModel tm_scale(const TaylorModel& a, double factor) {
    const TmSpace& space = a.space();
    TaylorModel out(a.space_ptr());
    Slack slack;
    auto& c = out.coefficients();
    for (std::size_t e = 0; e < c.size(); ++e) {
        const double x = a.coefficients()[e];
        if (x == 0.0) continue;
        c[e] = factor * x;
        slack.add(std::abs(std::fma(factor, x, -c[e])), space.magnitude(e));
    }
    out.set_remainder(scaled(a.remainder(), factor) + slack.interval());
    return out;
}

TaylorModel tm_add_constant(const TaylorModel& a, double value) {
    TaylorModel out = a;
    const double old = a.coefficients()[0];
    const double s = old + value;
    out.coefficients()[0] = s;
    const double err = std::abs(two_sum_error(old, value, s));
    if (err != 0.0) out.set_remainder(a.remainder() + Interval::symmetric(ivl::up(err)));
    return out;
}

Interval poly_bound(const TaylorModel& a) {
    const TmSpace& space = a.space();
    Interval total(0.0);
    for (std::size_t e = 0; e < a.coefficients().size(); ++e) {
        const double c = a.coefficients()[e];
        if (c == 0.0) continue;
        total = total + scaled(space.range(e), c);
    }
    return total;
}

Interval tm_bound(const TaylorModel& a) { return poly_bound(a) + a.remainder(); }

TaylorModel tm_mul(const TaylorModel& a, const TaylorModel& b, int order_cap) {
    check_same(a, b);
    const TmSpace& space = a.space();
    const int cap = order_cap < 0 ? space.order_cap() : std::min(order_cap, space.order_cap());
    const poly::MonomialBasis& basis = space.basis();

    std::vector<std::size_t> nza;
    std::vector<std::size_t> nzb;
    for (std::size_t e = 0; e < space.size(); ++e) {
        if (a.coefficients()[e] != 0.0) nza.push_back(e);
        if (b.coefficients()[e] != 0.0) nzb.push_back(e);
    }

    // Products land anywhere up to degree 2 * cap; sums and their exact rounding
    // errors are kept per target monomial.
    const std::size_t full = basis.size();
    std::vector<double> sum(full, 0.0);
    std::vector<double> err(full, 0.0);
    std::vector<char> touched(full, 0);
    std::vector<std::size_t> targets;

    for (std::size_t j : nzb) {
        const double bj = b.coefficients()[j];
        const poly::MultiIndex& mj = basis.monomial(j);
        for (std::size_t i : nza) {
            std::size_t k = i;
            for (int v = 0; v < space.vars(); ++v) {
                for (int r = 0; r < mj[static_cast<std::size_t>(v)]; ++r) k = static_cast<std::size_t>(basis.times_variable(k, v));
            }
            const double ai = a.coefficients()[i];
            const double p = ai * bj;
            const double s = sum[k] + p;
            err[k] += std::abs(std::fma(ai, bj, -p)) + std::abs(two_sum_error(sum[k], p, s));
            sum[k] = s;
            if (!touched[k]) {
                touched[k] = 1;
                targets.push_back(k);
            }
        }
    }

    TaylorModel out(a.space_ptr());
    Slack slack;
    Interval truncated(0.0);
    // err[k] is itself a rounded sum of at most |nzb| pairs of terms.
    const double err_widen = 1.0 + static_cast<double>(2 * nzb.size() + 2) * DBL_EPSILON;
    for (std::size_t k : targets) {
        slack.add(err[k] * err_widen, space.magnitude(k));
        if (basis.degree_of(k) <= cap) {
            out.coefficients()[k] = sum[k];
        } else {
            truncated = truncated + scaled(space.range(k), sum[k]);
        }
    }

    Interval rem = truncated + slack.interval();
    if (!is_zero(b.remainder())) rem = rem + poly_bound(a) * b.remainder();
    if (!is_zero(a.remainder())) rem = rem + poly_bound(b) * a.remainder();
    if (!is_zero(a.remainder()) && !is_zero(b.remainder())) rem = rem + a.remainder() * b.remainder();
    out.set_remainder(rem);
    return out;
}

ActivationModel identity_model() {
    ActivationModel m;
    m.kind = Activation::linear;
    m.coeffs = {0.0, 1.0};
    return m;
}

TaylorModel tm_from_activation(const ActivationModel& model, const TaylorModel& preact, int order_cap) {
    const Interval b = tm_bound(preact);
    if (!b.is_finite() || b.lo < -model.vmax || b.hi > model.vmax) throw DomainExceeded(b, model.vmax);

    std::size_t top = model.coeffs.size();
    while (top > 0 && model.coeffs[top - 1] == 0.0) --top;
    if (top == 0) {
        TaylorModel zero(preact.space_ptr());
        zero.set_remainder(model.error);
        return zero;
    }
    TaylorModel r = TaylorModel::constant(preact.space_ptr(), model.coeffs[top - 1]);
    for (std::size_t k = top - 1; k-- > 0;) {
        r = tm_mul(r, preact, order_cap);
        if (model.coeffs[k] != 0.0) r = tm_add_constant(r, model.coeffs[k]);
    }
    r.set_remainder(r.remainder() + model.error);
    return r;
}

std::string taylor_model_to_json(const TaylorModel& model) {
    nlohmann::ordered_json j;
    j["format"] = "amite-taylor-model";
    j["version"] = 1;
    j["order_cap"] = model.space().order_cap();
    auto domain = nlohmann::ordered_json::array();
    for (const Interval& d : model.space().domain()) domain.push_back({format_double(d.lo), format_double(d.hi)});
    j["domain"] = domain;
    j["polynomial"] = nlohmann::ordered_json::parse(poly::polynomial_to_json(model.polynomial()));
    j["remainder"] = {format_double(model.remainder().lo), format_double(model.remainder().hi)};
    return j.dump(2) + "\n";
}

}  // namespace amite::tm
