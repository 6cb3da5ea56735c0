#include "amite/equivtest.hpp"

#include "amite/random.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <set>

namespace amite::equiv {

namespace {

double derivative(Activation kind, double v, double h) {
    switch (kind) {
        case Activation::tanh: return 1.0 - h * h;
        case Activation::relu: return v > 0.0 ? 1.0 : 0.0;
        case Activation::linear: return 1.0;
    }
    return 1.0;
}

void require_single_hidden(const nn::Network& net) {
    net.validate();
    if (net.layers.size() != 2) {
        throw std::invalid_argument("replication needs a single-hidden-layer network, got " +
                                    std::to_string(net.hidden_layers()) + " hidden layers");
    }
}

// One SGD step on a single sample.
void sgd_step(nn::Network& net, std::span<const double> x, std::span<const double> target, double lr, double decay,
              std::vector<double>& v, std::vector<double>& h, std::vector<double>& dy, std::vector<double>& dh) {
    nn::Layer& hidden = net.layers[0];
    nn::Layer& out = net.layers[1];
    const std::size_t nh = hidden.outputs();
    const std::size_t no = out.outputs();
    for (std::size_t j = 0; j < nh; ++j) {
        double s = hidden.bias[j];
        for (std::size_t i = 0; i < x.size(); ++i) s += hidden.weights[j][i] * x[i];
        v[j] = s;
        h[j] = apply(hidden.activation, s);
    }
    for (std::size_t k = 0; k < no; ++k) {
        double y = out.bias[k];
        for (std::size_t j = 0; j < nh; ++j) y += out.weights[k][j] * h[j];
        dy[k] = 2.0 * (y - target[k]) / static_cast<double>(no);
    }
    for (std::size_t j = 0; j < nh; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < no; ++k) s += out.weights[k][j] * dy[k];
        dh[j] = s * derivative(hidden.activation, v[j], h[j]);
    }
    for (std::size_t k = 0; k < no; ++k) {
        for (std::size_t j = 0; j < nh; ++j) out.weights[k][j] -= lr * (dy[k] * h[j] + decay * out.weights[k][j]);
        out.bias[k] -= lr * (dy[k] + decay * out.bias[k]);
    }
    for (std::size_t j = 0; j < nh; ++j) {
        for (std::size_t i = 0; i < x.size(); ++i) hidden.weights[j][i] -= lr * (dh[j] * x[i] + decay * hidden.weights[j][i]);
        hidden.bias[j] -= lr * (dh[j] + decay * hidden.bias[j]);
    }
}

}  // namespace

Evaluator evaluator_for(const nn::Network& net) {
    return [net](std::span<const double> x) { return nn::forward(net, x); };
}

double stimulus_loss(const nn::Network& net, const nn::StimulusSet& stimulus) {
    if (stimulus.inputs.size() != stimulus.responses.size()) throw std::invalid_argument("stimulus lists differ in length");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < stimulus.inputs.size(); ++t) {
        const std::vector<double> y = nn::forward(net, stimulus.inputs[t]);
        for (std::size_t k = 0; k < y.size(); ++k) {
            const double r = y[k] - stimulus.responses[t][k];
            sum += r * r;
            ++count;
        }
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double estimated_noise_power(const nn::StimulusSet& stimulus) {
    if (!stimulus.snr_db || std::isinf(*stimulus.snr_db)) return 0.0;
    // Measured power is signal plus noise, with signal / noise = 10^(snr/10).
    return nn::signal_power(stimulus.responses) / (1.0 + std::pow(10.0, *stimulus.snr_db / 10.0));
}

Replication replicate(const nn::Network& expected, const nn::StimulusSet& stimulus, const ReplicateOptions& options) {
    require_single_hidden(expected);
    if (stimulus.inputs.empty()) throw std::invalid_argument("replication needs at least one stimulus");
    if (stimulus.inputs.size() != stimulus.responses.size()) throw std::invalid_argument("stimulus lists differ in length");

    Replication rep;
    rep.network = expected;
    rep.noise_power = estimated_noise_power(stimulus);
    rep.target_loss = options.stop_factor * rep.noise_power;
    const double accept = std::max(rep.target_loss, options.residual_floor * nn::signal_power(stimulus.responses));

    double loss = stimulus_loss(rep.network, stimulus);
    rep.loss_trace.push_back(loss);
    nn::Network best = rep.network;
    double best_loss = loss;
    double reference = loss;
    int stalled = 0;
    double lr = options.learning_rate;

    const std::size_t n = stimulus.inputs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(options.seed, 0x5eed));
    const std::size_t nh = expected.layers[0].outputs();
    const std::size_t no = expected.layers[1].outputs();
    std::vector<double> v(nh), h(nh), dy(no), dh(nh);

    // The decay acts on the summed loss over the stimulus, so each sample step carries 1/n of it.
    const double decay = options.weight_decay / static_cast<double>(n);
    for (int epoch = 0; epoch < options.max_epochs && loss > rep.target_loss && lr > 0.0; ++epoch) {
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.next() % i]);
        for (std::size_t t : order) sgd_step(rep.network, stimulus.inputs[t], stimulus.responses[t], lr, decay, v, h, dy, dh);
        loss = stimulus_loss(rep.network, stimulus);
        rep.loss_trace.push_back(loss);
        if (!std::isfinite(loss)) break;
        if (loss < best_loss) {
            best_loss = loss;
            best = rep.network;
        }
        if (loss < reference * (1.0 - options.min_improvement)) {
            reference = loss;
            stalled = 0;
        } else if (++stalled >= options.patience) {
            lr *= 0.5;
            stalled = 0;
            reference = std::min(reference, loss);
        }
        if (lr < options.learning_rate * 1e-9) break;
    }
    rep.network = best;
    rep.converged = best_loss <= accept;
    return rep;
}

double coefficient_distance(const poly::MultivariatePolynomial& a, const poly::MultivariatePolynomial& b, double eps_log) {
    if (a.num_inputs() != b.num_inputs()) throw std::invalid_argument("polynomials have different input counts");
    if (!(eps_log > 0.0)) throw std::invalid_argument("eps_log must be positive");
    std::set<poly::MultiIndex, poly::GradedLex> keys;
    for (const auto& [k, c] : a.terms()) keys.insert(k);
    for (const auto& [k, c] : b.terms()) keys.insert(k);
    if (keys.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& k : keys) {
        sum += std::abs(std::log(eps_log + std::abs(a.coefficient(k))) - std::log(eps_log + std::abs(b.coefficient(k))));
    }
    return sum / static_cast<double>(keys.size());
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::equivalent: return "equivalent";
        case Verdict::not_equivalent: return "not-equivalent";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

EquivVerdict equivalence_test(const nn::Network& original, const Evaluator& under_test, const Box& box,
                              const expansion::AmiteExpansion& expansion, const EquivOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    require_single_hidden(original);
    if (box.size() != static_cast<std::size_t>(original.num_inputs)) throw std::invalid_argument("box dimension mismatch");

    nn::StimulusSet stimulus;
    stimulus.inputs = nn::fuzz_inputs(static_cast<std::size_t>(options.stimuli), box, mix_seed(options.seed, 1));
    nn::Samples clean;
    clean.reserve(stimulus.inputs.size());
    for (const auto& x : stimulus.inputs) clean.push_back(under_test(x));
    stimulus.responses = nn::add_noise(clean, options.snr_db, mix_seed(options.seed, 2));
    stimulus.snr_db = options.snr_db;

    ReplicateOptions fit = options.replicate;
    fit.seed = mix_seed(options.seed, 3);
    Replication rep = replicate(original, stimulus, fit);

    EquivVerdict out;
    out.threshold = options.threshold;
    for (int o = 0; o < original.num_outputs(); ++o) {
        const auto psi_o = poly::expand_layer(original, expansion, o);
        const auto psi_r = poly::expand_layer(rep.network, expansion, o);
        out.eta_per_output.push_back(coefficient_distance(psi_o, psi_r, options.eps_log));
    }
    out.eta = std::accumulate(out.eta_per_output.begin(), out.eta_per_output.end(), 0.0) /
              static_cast<double>(out.eta_per_output.size());
    out.equivalent = out.eta <= options.threshold;
    out.verdict = !rep.converged ? Verdict::inconclusive : out.equivalent ? Verdict::equivalent : Verdict::not_equivalent;
    out.replicated = std::move(rep.network);
    out.fit_loss_trace = std::move(rep.loss_trace);
    out.noise_power = rep.noise_power;
    out.target_loss = rep.target_loss;
    out.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

EquivVerdict equivalence_test(const nn::Network& original, const Evaluator& under_test, const Box& box,
                              std::optional<double> snr_db, std::uint64_t seed, int terms, double vmax, int digits,
                              double threshold) {
    const auto expansion =
        expansion::make_expansion(original.layers.front().activation, terms, mp::Real(vmax, digits), digits);
    EquivOptions options;
    options.snr_db = snr_db;
    options.seed = seed;
    options.threshold = threshold;
    return equivalence_test(original, under_test, box, expansion, options);
}

}  // namespace amite::equiv
