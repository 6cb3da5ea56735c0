#include "amite/network.hpp"

#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace amite;
using namespace amite::nn;

namespace {

Network single_neuron(Activation kind) {
    Network net;
    net.num_inputs = 1;
    net.layers.push_back(Layer{{{1.0}}, {0.0}, kind});
    net.layers.push_back(Layer{{{1.0}}, {0.0}, Activation::linear});
    return net;
}

// Straight-line evaluation written independently of forward().
double reference_output(const Network& net, const std::vector<double>& x) {
    std::vector<double> a = x;
    for (const Layer& layer : net.layers) {
        std::vector<double> next;
        for (std::size_t n = 0; n < layer.weights.size(); ++n) {
            double s = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) s += layer.weights[n][i] * a[i];
            s += layer.bias[n];
            if (layer.activation == Activation::tanh) s = std::tanh(s);
            if (layer.activation == Activation::relu) s = std::max(0.0, s);
            next.push_back(s);
        }
        a = next;
    }
    return a[0];
}

}  // namespace

TEST_CASE("forward pass") {
    Network zero = random_network({3, 4, 1}, Activation::tanh, 1);
    for (auto& layer : zero.layers) {
        for (auto& row : layer.weights) std::fill(row.begin(), row.end(), 0.0);
        std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
    }
    CHECK(forward(zero, std::vector<double>{0.3, -1.0, 2.0})[0] == 0.0);

    const Network one = single_neuron(Activation::tanh);
    CHECK(forward(one, std::vector<double>{0.7})[0] == doctest::Approx(std::tanh(0.7)).epsilon(1e-15));

    const Network deep = random_network({2, 6, 5, 4, 1}, Activation::relu, 9);
    const Samples xs = fuzz_inputs(50, centered_box(2, 3.0), 4);
    for (const auto& x : xs) CHECK(forward(deep, x)[0] == doctest::Approx(reference_output(deep, x)).epsilon(1e-14));

    CHECK_THROWS_AS(forward(deep, std::vector<double>{1.0}), NetworkError);
}

TEST_CASE("linear networks are affine") {
    const Network net = random_network({3, 5, 2}, Activation::linear, 3);
    const std::vector<double> a{0.2, -0.4, 1.0};
    const std::vector<double> b{-1.1, 0.3, 0.5};
    const std::vector<double> zero{0.0, 0.0, 0.0};
    std::vector<double> sum(3);
    for (int i = 0; i < 3; ++i) sum[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] + b[static_cast<std::size_t>(i)];
    const auto fa = forward(net, a);
    const auto fb = forward(net, b);
    const auto fs = forward(net, sum);
    const auto f0 = forward(net, zero);
    for (std::size_t k = 0; k < 2; ++k) CHECK(fs[k] == doctest::Approx(fa[k] + fb[k] - f0[k]).epsilon(1e-12));
}

TEST_CASE("network files") {
    const Network net = random_network({2, 7, 3, 1}, Activation::tanh, 21);
    const Network back = network_from_json(network_to_json(net));
    REQUIRE(back.layers.size() == net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        CHECK(back.layers[l].weights == net.layers[l].weights);
        CHECK(back.layers[l].bias == net.layers[l].bias);
        CHECK(back.layers[l].activation == net.layers[l].activation);
    }

    const auto path = std::filesystem::temp_directory_path() / "amite_test_network.json";
    save_network(net, path);
    CHECK(load_network(path).layers[1].weights == net.layers[1].weights);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(network_from_json(R"({"inputs": 2, "layers": [
        {"activation": "tanh", "weights": [["1", "2"]], "bias": ["0"]},
        {"activation": "linear", "weights": [["1", "2"]], "bias": ["0"]}]})"),
                    NetworkError);
    CHECK_THROWS_AS(network_from_json(R"({"inputs": 1, "layers": [
        {"activation": "sigmoid", "weights": [["1"]], "bias": ["0"]},
        {"activation": "linear", "weights": [["1"]], "bias": ["0"]}]})"),
                    NetworkError);
    CHECK_THROWS_AS(network_from_json(R"({"inputs": 1, "layers": [{"activation": "tanh", "weights": [["1"]], "bias": ["0"]}]})"),
                    NetworkError);
    CHECK_THROWS_AS(network_from_json(R"({"inputs": 1, "layers": [{"activation": "linear", "weights": [["x"]], "bias": ["0"]}]})"),
                    NetworkError);
}

TEST_CASE("fuzz inputs") {
    const Box box{Interval(-1.0, 3.0), Interval(0.5, 0.75)};
    const Samples a = fuzz_inputs(100000, box, 17);
    const Samples b = fuzz_inputs(100000, box, 17);
    CHECK(a == b);
    double mean0 = 0.0;
    double mean1 = 0.0;
    for (const auto& x : a) {
        CHECK_FALSE((x[0] < -1.0 || x[0] > 3.0 || x[1] < 0.5 || x[1] > 0.75));
        mean0 += x[0];
        mean1 += x[1];
    }
    mean0 /= static_cast<double>(a.size());
    mean1 /= static_cast<double>(a.size());
    CHECK(std::abs(mean0 - 1.0) < 0.01 * 4.0);
    CHECK(std::abs(mean1 - 0.625) < 0.01 * 0.625);
    CHECK(fuzz_inputs(5, box, 18) != fuzz_inputs(5, box, 17));
}

TEST_CASE("noise") {
    const Network net = random_network({2, 8, 1}, Activation::tanh, 5);
    const Samples y = respond(net, fuzz_inputs(10000, centered_box(2, 2.0), 6));
    CHECK(add_noise(y, std::nullopt, 1) == y);
    CHECK(add_noise(y, std::numeric_limits<double>::infinity(), 1) == y);
    for (double snr : {-10.0, 0.0, 20.0}) {
        const Samples noisy = add_noise(y, snr, 2);
        double noise = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) noise += std::pow(noisy[i][0] - y[i][0], 2);
        noise /= static_cast<double>(y.size());
        const double measured = 10.0 * std::log10(signal_power(y) / noise);
        CHECK(std::abs(measured - snr) < 0.5);
        CHECK(add_noise(y, snr, 2) == noisy);
    }
}

TEST_CASE("weight perturbation") {
    const Network net = random_network({2, 10, 1}, Activation::tanh, 8);
    const Network same = perturb_weights(net, 0.0, 3);
    CHECK(same.layers[0].weights == net.layers[0].weights);

    const Network moved = perturb_weights(net, 0.05, 3);
    double worst = 0.0;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        for (std::size_t n = 0; n < net.layers[l].weights.size(); ++n) {
            for (std::size_t i = 0; i < net.layers[l].weights[n].size(); ++i) {
                const double w = net.layers[l].weights[n][i];
                worst = std::max(worst, std::abs(moved.layers[l].weights[n][i] - w) / std::abs(w));
            }
            const double b = net.layers[l].bias[n];
            worst = std::max(worst, std::abs(moved.layers[l].bias[n] - b) / std::abs(b));
        }
    }
    CHECK(worst <= 0.05 + 1e-15);
    CHECK(worst > 0.01);

    bool differs = false;
    for (const auto& x : fuzz_inputs(20, centered_box(2, 2.0), 1)) differs = differs || forward(net, x) != forward(moved, x);
    CHECK(differs);
}

TEST_CASE("numeric range") {
    Network constant = random_network({2, 3, 1}, Activation::tanh, 2);
    for (auto& row : constant.layers[0].weights) std::fill(row.begin(), row.end(), 0.0);
    const Interval r = numeric_range(constant, centered_box(2, 1.0), 50, 1);
    CHECK(r.lo == r.hi);

    // Monotone single-input net: samples approach the endpoint values.
    const Network mono = single_neuron(Activation::tanh);
    const Interval m = numeric_range(mono, Box{Interval(-1.0, 2.0)}, 20000, 3);
    CHECK(m.lo == doctest::Approx(std::tanh(-1.0)).epsilon(1e-3));
    CHECK(m.hi == doctest::Approx(std::tanh(2.0)).epsilon(1e-3));
    CHECK(m.lo >= std::tanh(-1.0));
}

TEST_CASE("stimulus csv") {
    StimulusSet s;
    s.inputs = {{0.5, -1.0}, {0.25, 2.0}};
    s.responses = {{1.0}, {0.1}};
    std::ostringstream os;
    write_stimulus_csv(os, s);
    CHECK(os.str() == "sample,x_1,x_2,y_1\n0,0.5,-1,1\n1,0.25,2,0.10000000000000001\n");
}
