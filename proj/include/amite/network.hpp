#pragma once

// Fully connected feed-forward networks: data model, JSON files, evaluation,
// stimulation with fuzz vectors, noise and weight perturbation.

#include "amite/activation.hpp"
#include "amite/interval.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace amite::nn {

class NetworkError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Layer {
    std::vector<std::vector<double>> weights;  // weights[neuron][input]
    std::vector<double> bias;
    Activation activation = Activation::linear;

    std::size_t inputs() const { return weights.empty() ? 0 : weights.front().size(); }
    std::size_t outputs() const { return weights.size(); }
};

struct Network {
    int num_inputs = 0;
    std::vector<Layer> layers;

    int num_outputs() const { return layers.empty() ? num_inputs : static_cast<int>(layers.back().outputs()); }
    int hidden_layers() const { return static_cast<int>(layers.size()) - 1; }
    /// Throws NetworkError unless dimensions chain and the last layer is linear.
    void validate() const;
};

std::vector<double> forward(const Network& net, std::span<const double> x);
/// Pre-activation values of every hidden neuron, layer by layer.
std::vector<std::vector<double>> preactivations(const Network& net, std::span<const double> x);

std::string network_to_json(const Network& net);
Network network_from_json(const std::string& text);
void save_network(const Network& net, const std::filesystem::path& path);
Network load_network(const std::filesystem::path& path);

/// Layer sizes [N_I, N_H..., N_O] with the hidden activation; weights scaled
/// by 1/sqrt(fan_in), biases uniform in [-0.5, 0.5].
Network random_network(const std::vector<int>& sizes, Activation hidden, std::uint64_t seed);

using Samples = std::vector<std::vector<double>>;

struct StimulusSet {
    Samples inputs;
    Samples responses;
    std::optional<double> snr_db;
};

Samples fuzz_inputs(std::size_t count, const Box& box, std::uint64_t seed);
Samples respond(const Network& net, const Samples& inputs);
/// Additive white Gaussian noise at the given SNR (dB); empty or infinite SNR leaves
/// the responses unchanged.
Samples add_noise(const Samples& responses, std::optional<double> snr_db, std::uint64_t seed);
/// Mean square of all response entries.
double signal_power(const Samples& responses);
Network perturb_weights(const Network& net, double rel_magnitude, std::uint64_t seed);
/// [min, max] of output `output` over fuzz samples; usually an under-estimate.
Interval numeric_range(const Network& net, const Box& box, std::size_t samples, std::uint64_t seed, int output = 0);

/// Columns: sample, x_1..x_N, y_1..y_M.
void write_stimulus_csv(std::ostream& os, const StimulusSet& stimulus);

}  // namespace amite::nn
