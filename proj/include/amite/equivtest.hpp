#pragma once

// Black-box equivalence testing of single-hidden-layer networks: replicate the
// weights of the network under test from noisy stimulus/response pairs,
// expand both layers into multivariate polynomials and compare coefficient
// magnitudes on a log scale.

#include "amite/expansion.hpp"
#include "amite/network.hpp"
#include "amite/poly.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace amite::equiv {

using Evaluator = std::function<std::vector<double>(std::span<const double>)>;

Evaluator evaluator_for(const nn::Network& net);

struct ReplicateOptions {
    double learning_rate = 1e-3;
    double weight_decay = 0.01;
    int max_epochs = 2000;
    /// Halve the rate after this many epochs without `min_improvement` relative gain.
    int patience = 10;
    double min_improvement = 1e-3;
    /// Stop once the loss is within this factor of the estimated noise power.
    double stop_factor = 1.05;
    /// Residual power, relative to the response power, accepted as a fit when there is no noise.
    double residual_floor = 1e-4;
    std::uint64_t seed = 0;
};

struct Replication {
    nn::Network network;
    std::vector<double> loss_trace;  // entry 0 is the loss at the starting weights
    double noise_power = 0.0;
    double target_loss = 0.0;
    bool converged = false;
};

/// Mean squared output error of `net` on the stimulus.
double stimulus_loss(const nn::Network& net, const nn::StimulusSet& stimulus);

/// Noise power implied by the response power and the stimulus SNR (0 without noise).
double estimated_noise_power(const nn::StimulusSet& stimulus);

/// Per-sample SGD, weight decay on the summed loss, no momentum, started
/// from `expected`. Gradients are the closed-form backprop
/// of the one-hidden-layer network.
Replication replicate(const nn::Network& expected, const nn::StimulusSet& stimulus, const ReplicateOptions& options = {});

/// Mean over the union of multi-indices of |log(eps + |a|) - log(eps + |b|)|.
double coefficient_distance(const poly::MultivariatePolynomial& a, const poly::MultivariatePolynomial& b,
                            double eps_log = 1e-12);

enum class Verdict { equivalent, not_equivalent, inconclusive };

std::string_view to_string(Verdict v);

struct EquivVerdict {
    Verdict verdict = Verdict::inconclusive;
    double eta = 0.0;
    double threshold = 0.01;
    bool equivalent = false;
    nn::Network replicated;
    std::vector<double> fit_loss_trace;
    double noise_power = 0.0;
    double target_loss = 0.0;
    std::vector<double> eta_per_output;
    double runtime_s = 0.0;
};

struct EquivOptions {
    int stimuli = 250;
    std::optional<double> snr_db;
    std::uint64_t seed = 0;
    double threshold = 0.01;
    double eps_log = 1e-12;
    ReplicateOptions replicate;
};

/// fuzz -> respond -> add noise -> replicate -> expand both -> eta -> threshold.
EquivVerdict equivalence_test(const nn::Network& original, const Evaluator& under_test, const Box& box,
                              const expansion::AmiteExpansion& expansion, const EquivOptions& options = {});
EquivVerdict equivalence_test(const nn::Network& original, const Evaluator& under_test, const Box& box,
                              std::optional<double> snr_db, std::uint64_t seed, int terms, double vmax, int digits,
                              double threshold = 0.01);

}  // namespace amite::equiv
