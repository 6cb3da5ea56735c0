#include "amite/rangebound.hpp"

#include "amite/format.hpp"
#include "amite/parallel.hpp"
#include "amite/random.hpp"

#include <boost/math/tools/minima.hpp>

#include <chrono>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

namespace amite::range {

using tm::TaylorModel;

namespace {

// Smallest V handed to the expansion; keeps degenerate (all-zero) pre-activations usable.
constexpr double kMinVmax = 0.125;

class NonFinite : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TaylorDiverged : public std::runtime_error {
public:
    explicit TaylorDiverged(double r)
        : std::runtime_error("pre-activation bound " + format_double(r) + " leaves the Maclaurin disc |v| < pi/2"),
          radius(r) {}
    double radius;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

void check_inputs(const nn::Network& net, const Box& box, int output) {
    net.validate();
    if (box.size() != static_cast<std::size_t>(net.num_inputs)) throw std::invalid_argument("box dimension mismatch");
    for (const Interval& side : box) {
        if (side.is_empty() || !side.is_finite()) throw std::invalid_argument("input box must be finite and non-empty");
    }
    if (output < 0 || output >= net.num_outputs()) throw std::invalid_argument("output index out of range");
}

// Propagates Taylor models through the network and returns the model of one output.
// `model_for(layer, preacts)` supplies the activation model of a nonlinear layer.
template <typename ModelFor>
TaylorModel propagate(const nn::Network& net, const Box& box, int order_cap, int output, ModelFor&& model_for) {
    const auto space = tm::TmSpace::create(box, order_cap);
    std::vector<TaylorModel> current;
    for (int i = 0; i < net.num_inputs; ++i) current.push_back(TaylorModel::variable(space, i));

    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const nn::Layer& layer = net.layers[l];
        const bool last = l + 1 == net.layers.size();
        const std::size_t first = last ? static_cast<std::size_t>(output) : 0;
        const std::size_t count = last ? 1 : layer.outputs();
        std::vector<TaylorModel> pre(count, TaylorModel(space));
        parallel_for(count, [&](std::size_t j) {
            TaylorModel acc = TaylorModel::constant(space, layer.bias[first + j]);
            for (std::size_t i = 0; i < current.size(); ++i) {
                const double w = layer.weights[first + j][i];
                if (w != 0.0) acc = tm::tm_axpy(acc, w, current[i]);
            }
            pre[j] = std::move(acc);
        });
        if (layer.activation == Activation::linear) {
            current = std::move(pre);
        } else {
            const tm::ActivationModel model = model_for(l, pre);
            std::vector<TaylorModel> next(count, TaylorModel(space));
            parallel_for(count, [&](std::size_t j) { next[j] = tm::tm_from_activation(model, pre[j], order_cap); });
            current = std::move(next);
        }
        for (const TaylorModel& m : current) {
            if (m.diverged() || !tm::tm_bound(m).is_finite()) {
                throw NonFinite("non-finite Taylor model in layer " + std::to_string(l));
            }
        }
    }
    return std::move(current.front());
}

void finish(RangeResult& r, Clock::time_point start) {
    if (r.diverged) {
        r.bound = Interval::entire();
        r.overestimation = std::numeric_limits<double>::infinity();
    } else {
        r.overestimation = r.bound.width() - r.numeric_estimate.width();
    }
    r.runtime_s = seconds_since(start);
}

int expansion_degree(Activation kind, int terms) { return kind == Activation::tanh ? 2 * terms + 1 : 2 * terms; }

}  // namespace

std::string_view to_string(Method m) { return m == Method::amite ? "amite" : "taylor"; }

double estimate_V(const nn::Network& net, const Box& box, std::size_t samples, double safety, std::uint64_t seed) {
    if (!(safety > 1.0)) throw std::invalid_argument("safety factor must exceed 1");
    if (samples == 0) throw std::invalid_argument("estimate_V needs at least one sample");
    net.validate();
    const nn::Samples inputs = nn::fuzz_inputs(samples, box, seed);
    double peak = 0.0;
    for (const auto& x : inputs) {
        for (const auto& layer : nn::preactivations(net, x)) {
            for (double v : layer) peak = std::max(peak, std::abs(v));
        }
    }
    return safety * peak;
}

Schedule default_schedule(int max_hidden) {
    if (max_hidden <= 10) return {6, 65};
    if (max_hidden <= 25) return {12, 130};
    if (max_hidden <= 50) return {25, 260};
    return {25, 450};
}

int max_hidden_width(const nn::Network& net) {
    int w = 0;
    for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) w = std::max(w, static_cast<int>(net.layers[l].outputs()));
    return w;
}

std::shared_ptr<const tm::ActivationModel> ModelCache::get(Activation kind, int terms, double vmax, int digits,
                                                            double opt_tol) {
    const Key key{kind, terms, vmax, digits, opt_tol};
    {
        std::lock_guard lock(mutex_);
        if (auto it = models_.find(key); it != models_.end()) {
            ++hits_;
            return it->second;
        }
        ++misses_;
    }
    const auto ex = expansion::make_expansion(kind, terms, mp::Real(vmax, digits), digits);
    tm::FitOptions fit;
    fit.opt_tol = opt_tol;
    auto model = std::make_shared<const tm::ActivationModel>(tm::make_activation_model(ex, fit));
    std::lock_guard lock(mutex_);
    return models_.try_emplace(key, std::move(model)).first->second;
}

std::size_t ModelCache::hits() const {
    std::lock_guard lock(mutex_);
    return hits_;
}

std::size_t ModelCache::misses() const {
    std::lock_guard lock(mutex_);
    return misses_;
}

RangeResult range_bound_amite(const nn::Network& net, const Box& box, const AmiteOptions& options) {
    const auto start = Clock::now();
    check_inputs(net, box, options.output);
    if (!(options.s_init > 1.0)) throw std::invalid_argument("safety factor must exceed 1");

    const Schedule schedule = default_schedule(max_hidden_width(net));
    RangeResult r;
    r.method = Method::amite;
    r.terms = options.terms > 0 ? options.terms : schedule.terms;
    r.digits = options.digits > 0 ? options.digits : schedule.digits;
    r.numeric_estimate =
        nn::numeric_range(net, box, options.numeric_samples, mix_seed(options.seed, 1), options.output);

    int cap = options.order_cap;
    if (cap < 0) {
        cap = 1;
        for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) {
            if (net.layers[l].activation != Activation::linear) {
                cap = std::max(cap, expansion_degree(net.layers[l].activation, r.terms));
            }
        }
    }

    ModelCache local;
    ModelCache& cache = options.cache ? *options.cache : local;
    const double base_v = options.vmax > 0.0
                              ? options.vmax
                              : estimate_V(net, box, options.v_samples, options.s_init, mix_seed(options.seed, 2));

    std::ostringstream diag;
    for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
        const double scale = std::ldexp(1.0, attempt);
        const double vmax = std::max(kMinVmax, base_v * scale);
        r.safety_factor = options.s_init * scale;
        r.vmax = vmax;
        r.retries = attempt;
        try {
            const TaylorModel out = propagate(net, box, cap, options.output, [&](std::size_t l, const auto&) {
                return *cache.get(net.layers[l].activation, r.terms, vmax, r.digits, options.opt_tol);
            });
            r.bound = tm::tm_bound(out);
            r.diverged = false;
            r.diagnostics = diag.str();
            finish(r, start);
            return r;
        } catch (const tm::DomainExceeded& e) {
            diag << "attempt " << attempt << ": V=" << format_double(vmax) << ": " << e.what() << "; ";
        } catch (const NonFinite& e) {
            diag << "attempt " << attempt << ": V=" << format_double(vmax) << ": " << e.what() << "; ";
        }
    }
    r.diverged = true;
    r.diagnostics = diag.str() + "retry cap reached";
    finish(r, start);
    return r;
}

Interval taylor_error_interval(int terms, double r, int digits) {
    if (terms < 1) throw std::invalid_argument("need at least one Maclaurin term");
    if (!(r >= 0.0) || r >= std::numbers::pi / 2) throw std::invalid_argument("radius must lie in [0, pi/2)");
    if (r == 0.0) return Interval(0.0);
    std::vector<mp::Real> coeffs;
    for (const auto& q : expansion::taylor_coefficients_tanh(terms)) {
        mp::Real c(digits);
        mpfr_set_q(c.get(), q.get_mpq_t(), MPFR_RNDN);
        coeffs.push_back(std::move(c));
    }
    auto error = [&](double v) {
        const mp::Real x(v, digits);
        const mp::Real x2 = x * x;
        mp::Real sum(0L, digits);
        for (std::size_t k = coeffs.size(); k-- > 0;) sum = sum * x2 + coeffs[k];
        return (mp::tanh(x) - sum * x).to_double();
    };

    constexpr std::size_t n = 257;
    std::vector<double> grid(n);
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = r * static_cast<double>(i) / static_cast<double>(n - 1);
        values[i] = error(grid[i]);
    }
    double lo = std::min(values.front(), values.back());
    double hi = std::max(values.front(), values.back());
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const bool peak = values[i] >= values[i - 1] && values[i] > values[i + 1];
        const bool dip = values[i] <= values[i - 1] && values[i] < values[i + 1];
        if (!peak && !dip) continue;
        const double sign = peak ? 1.0 : -1.0;
        std::uintmax_t iterations = 200;
        const auto best = boost::math::tools::brent_find_minima([&](double v) { return -sign * error(v); }, grid[i - 1],
                                                                grid[i + 1], std::numeric_limits<double>::digits / 2,
                                                                iterations);
        const double value = -sign * best.second;
        lo = std::min(lo, value);
        hi = std::max(hi, value);
    }
    // The error is odd in v.
    const double radius = std::max(std::abs(lo), std::abs(hi));
    return Interval(ivl::down(-radius - 1e-12), ivl::up(radius + 1e-12));
}

RangeResult range_bound_taylor(const nn::Network& net, const Box& box, const TaylorOptions& options) {
    const auto start = Clock::now();
    check_inputs(net, box, options.output);
    if (options.terms < 1) throw std::invalid_argument("need at least one Maclaurin term");
    for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) {
        const Activation a = net.layers[l].activation;
        if (a != Activation::tanh && a != Activation::linear) {
            throw std::invalid_argument("the Maclaurin baseline needs tanh activations");
        }
    }

    RangeResult r;
    r.method = Method::taylor;
    r.terms = options.terms;
    r.digits = options.digits;
    r.numeric_estimate =
        nn::numeric_range(net, box, options.numeric_samples, mix_seed(options.seed, 1), options.output);
    const int degree = 2 * options.terms - 1;
    const int cap = options.order_cap > 0 ? options.order_cap : degree;

    // Power-basis doubles and the rounding gap sum |t_k - fl(t_k)| r^k (kept as exact per-term gaps).
    const auto exact = expansion::taylor_coefficients_tanh(options.terms);
    std::vector<double> coeffs(static_cast<std::size_t>(degree) + 1, 0.0);
    std::vector<double> gaps(coeffs.size(), 0.0);
    for (std::size_t m = 0; m < exact.size(); ++m) {
        mp::Real c(options.digits);
        mpfr_set_q(c.get(), exact[m].get_mpq_t(), MPFR_RNDN);
        const double d = c.to_double();
        coeffs[2 * m + 1] = d;
        gaps[2 * m + 1] = ivl::up(mp::abs(c - mp::Real(d, options.digits)).to_double());
    }

    try {
        const TaylorModel out =
            propagate(net, box, cap, options.output, [&](std::size_t, const std::vector<TaylorModel>& pre) {
                double radius = 0.0;
                for (const TaylorModel& p : pre) radius = std::max(radius, tm::tm_bound(p).magnitude());
                if (!(radius < std::numbers::pi / 2)) throw TaylorDiverged(radius);
                tm::ActivationModel model;
                model.kind = Activation::tanh;
                model.coeffs = coeffs;
                model.vmax = radius;
                Interval rounding(0.0);
                Interval power(1.0);
                for (double g : gaps) {
                    if (g > 0.0) rounding = rounding + Interval(g) * power;
                    power = power * Interval(radius);
                }
                model.error = taylor_error_interval(options.terms, radius, options.digits) +
                              Interval(-rounding.hi, rounding.hi);
                return model;
            });
        r.bound = tm::tm_bound(out);
        r.diverged = false;
    } catch (const TaylorDiverged& e) {
        r.diverged = true;
        r.diagnostics = e.what();
    } catch (const NonFinite& e) {
        r.diverged = true;
        r.diagnostics = e.what();
    }
    finish(r, start);
    return r;
}

std::vector<Member> generate_population(const PopulationSpec& spec) {
    std::vector<Member> out;
    std::uint64_t index = 0;
    for (int layers : spec.hidden_layers) {
        for (int width : spec.hidden_widths) {
            for (int k = 0; k < spec.per_shape; ++k, ++index) {
                std::vector<int> sizes{spec.inputs};
                sizes.insert(sizes.end(), static_cast<std::size_t>(layers), width);
                sizes.push_back(1);
                Member m;
                m.id = "L" + std::to_string(layers) + "-H" + std::to_string(width) + "-" + std::to_string(k);
                m.net = nn::random_network(sizes, spec.activation, mix_seed(spec.seed, index));
                out.push_back(std::move(m));
            }
        }
    }
    return out;
}

std::vector<CampaignRow> bound_campaign(const std::vector<Member>& population, const std::vector<double>& widths,
                                        const CampaignOptions& options) {
    ModelCache local;
    ModelCache& cache = options.cache ? *options.cache : local;
    std::vector<CampaignRow> rows;
    std::uint64_t pair = 0;
    for (const Member& m : population) {
        const Schedule schedule = default_schedule(max_hidden_width(m.net));
        const int terms = options.terms > 0 ? options.terms : schedule.terms;
        const int digits = options.digits > 0 ? options.digits : schedule.digits;
        for (double width : widths) {
            const Box box = centered_box(m.net.num_inputs, width);
            const std::uint64_t seed = mix_seed(options.seed, pair++);
            CampaignRow row;
            row.net_id = m.id;
            row.layers = m.net.hidden_layers();
            row.hidden = max_hidden_width(m.net);
            row.width = width;
            if (options.amite) {
                AmiteOptions a;
                a.terms = terms;
                a.digits = digits;
                a.s_init = options.s_init;
                a.seed = seed;
                a.numeric_samples = options.numeric_samples;
                a.cache = &cache;
                row.result = range_bound_amite(m.net, box, a);
                rows.push_back(row);
            }
            if (options.taylor) {
                TaylorOptions t;
                t.terms = terms;
                t.seed = seed;
                t.numeric_samples = options.numeric_samples;
                row.result = range_bound_taylor(m.net, box, t);
                rows.push_back(row);
            }
        }
    }
    return rows;
}

void write_campaign_csv(std::ostream& os, const std::vector<CampaignRow>& rows) {
    os << "net-id,layers,hidden,method,width,bound_lo,bound_hi,numeric_lo,numeric_hi,overestimation,runtime_s,diverged,M,"
          "digits,S\n";
    for (const CampaignRow& row : rows) {
        const RangeResult& r = row.result;
        os << row.net_id << ',' << row.layers << ',' << row.hidden << ',' << to_string(r.method) << ','
           << format_double(row.width) << ',' << format_double(r.bound.lo) << ',' << format_double(r.bound.hi) << ','
           << format_double(r.numeric_estimate.lo) << ',' << format_double(r.numeric_estimate.hi) << ','
           << format_double(r.overestimation) << ',' << format_double(r.runtime_s) << ',' << (r.diverged ? 1 : 0) << ','
           << r.terms << ',' << r.digits << ',' << format_double(r.safety_factor) << '\n';
    }
}

}  // namespace amite::range
