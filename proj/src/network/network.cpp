#include "amite/network.hpp"
#include "amite/format.hpp"
#include "amite/parallel.hpp"
#include "amite/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace amite::nn {

void Network::validate() const {
    if (num_inputs < 1) throw NetworkError("network needs at least one input");
    if (layers.empty()) throw NetworkError("network has no layers");
    std::size_t width = static_cast<std::size_t>(num_inputs);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const Layer& layer = layers[l];
        const std::string where = "layer " + std::to_string(l);
        if (layer.weights.empty()) throw NetworkError(where + " has no neurons");
        if (layer.bias.size() != layer.weights.size()) throw NetworkError(where + ": bias length differs from neuron count");
        for (std::size_t n = 0; n < layer.weights.size(); ++n) {
            if (layer.weights[n].size() != width) {
                throw NetworkError(where + ", neuron " + std::to_string(n) + ": expected " + std::to_string(width) +
                                   " weights, found " + std::to_string(layer.weights[n].size()));
            }
        }
        width = layer.weights.size();
    }
    if (layers.back().activation != Activation::linear) throw NetworkError("the output layer must be linear");
}

namespace {

std::vector<double> affine(const Layer& layer, std::span<const double> x) {
    std::vector<double> v(layer.outputs());
    for (std::size_t n = 0; n < v.size(); ++n) {
        double acc = layer.bias[n];
        const std::vector<double>& w = layer.weights[n];
        for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * x[i];
        v[n] = acc;
    }
    return v;
}

}  // namespace

std::vector<double> forward(const Network& net, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(net.num_inputs)) {
        throw NetworkError("input has " + std::to_string(x.size()) + " entries, network expects " +
                           std::to_string(net.num_inputs));
    }
    std::vector<double> current(x.begin(), x.end());
    for (const Layer& layer : net.layers) {
        std::vector<double> v = affine(layer, current);
        for (double& value : v) value = apply(layer.activation, value);
        current = std::move(v);
    }
    return current;
}

std::vector<std::vector<double>> preactivations(const Network& net, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(net.num_inputs)) throw NetworkError("input dimension mismatch");
    std::vector<std::vector<double>> out;
    std::vector<double> current(x.begin(), x.end());
    for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) {
        std::vector<double> v = affine(net.layers[l], current);
        out.push_back(v);
        for (double& value : v) value = apply(net.layers[l].activation, value);
        current = std::move(v);
    }
    return out;
}

Network random_network(const std::vector<int>& sizes, Activation hidden, std::uint64_t seed) {
    if (sizes.size() < 2) throw std::invalid_argument("need at least input and output sizes");
    Rng rng(seed);
    Network net;
    net.num_inputs = sizes.front();
    for (std::size_t l = 1; l < sizes.size(); ++l) {
        Layer layer;
        const int fan_in = sizes[l - 1];
        const double scale = std::sqrt(3.0 / fan_in);
        layer.weights.assign(static_cast<std::size_t>(sizes[l]), std::vector<double>(static_cast<std::size_t>(fan_in)));
        layer.bias.resize(static_cast<std::size_t>(sizes[l]));
        for (auto& row : layer.weights) {
            for (double& w : row) w = rng.uniform(-scale, scale);
        }
        for (double& b : layer.bias) b = rng.uniform(-0.5, 0.5);
        layer.activation = (l + 1 == sizes.size()) ? Activation::linear : hidden;
        net.layers.push_back(std::move(layer));
    }
    net.validate();
    return net;
}

Samples fuzz_inputs(std::size_t count, const Box& box, std::uint64_t seed) {
    for (const Interval& side : box) {
        if (side.is_empty() || !side.is_finite()) throw std::invalid_argument("fuzz box must be finite and non-empty");
    }
    Rng rng(seed);
    Samples out(count, std::vector<double>(box.size()));
    for (auto& x : out) {
        for (std::size_t i = 0; i < box.size(); ++i) x[i] = rng.uniform(box[i].lo, box[i].hi);
    }
    return out;
}

Samples respond(const Network& net, const Samples& inputs) {
    Samples out(inputs.size());
    parallel_for(inputs.size(), [&](std::size_t i) { out[i] = forward(net, inputs[i]); });
    return out;
}

double signal_power(const Samples& responses) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& y : responses) {
        for (double value : y) {
            sum += value * value;
            ++count;
        }
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

Samples add_noise(const Samples& responses, std::optional<double> snr_db, std::uint64_t seed) {
    if (!snr_db || std::isinf(*snr_db)) return responses;
    const double noise_power = signal_power(responses) / std::pow(10.0, *snr_db / 10.0);
    const double sigma = std::sqrt(noise_power);
    Rng rng(seed);
    Samples out = responses;
    for (auto& y : out) {
        for (double& value : y) value += sigma * rng.normal();
    }
    return out;
}

Network perturb_weights(const Network& net, double rel_magnitude, std::uint64_t seed) {
    if (rel_magnitude < 0.0) throw std::invalid_argument("perturbation magnitude must be nonnegative");
    Network out = net;
    if (rel_magnitude == 0.0) return out;
    Rng rng(seed);
    for (Layer& layer : out.layers) {
        for (auto& row : layer.weights) {
            for (double& w : row) w *= 1.0 + rng.uniform(-rel_magnitude, rel_magnitude);
        }
        for (double& b : layer.bias) b *= 1.0 + rng.uniform(-rel_magnitude, rel_magnitude);
    }
    return out;
}

Interval numeric_range(const Network& net, const Box& box, std::size_t samples, std::uint64_t seed, int output) {
    if (output < 0 || output >= net.num_outputs()) throw std::invalid_argument("output index out of range");
    if (samples == 0) throw std::invalid_argument("numeric_range needs at least one sample");
    const Samples y = respond(net, fuzz_inputs(samples, box, seed));
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& r : y) {
        lo = std::min(lo, r[static_cast<std::size_t>(output)]);
        hi = std::max(hi, r[static_cast<std::size_t>(output)]);
    }
    return Interval(lo, hi);
}

void write_stimulus_csv(std::ostream& os, const StimulusSet& stimulus) {
    if (stimulus.inputs.size() != stimulus.responses.size()) throw std::invalid_argument("stimulus lists differ in length");
    const std::size_t nx = stimulus.inputs.empty() ? 0 : stimulus.inputs.front().size();
    const std::size_t ny = stimulus.responses.empty() ? 0 : stimulus.responses.front().size();
    os << "sample";
    for (std::size_t i = 1; i <= nx; ++i) os << ",x_" << i;
    for (std::size_t i = 1; i <= ny; ++i) os << ",y_" << i;
    os << '\n';
    for (std::size_t s = 0; s < stimulus.inputs.size(); ++s) {
        os << s;
        for (double v : stimulus.inputs[s]) os << ',' << format_double(v);
        for (double v : stimulus.responses[s]) os << ',' << format_double(v);
        os << '\n';
    }
}

}  // namespace amite::nn
