#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace amite {

enum class Activation { tanh, relu, linear };

inline std::string_view to_string(Activation kind) {
    switch (kind) {
        case Activation::tanh: return "tanh";
        case Activation::relu: return "relu";
        case Activation::linear: return "linear";
    }
    return "?";
}

inline Activation parse_activation(std::string_view name) {
    if (name == "tanh") return Activation::tanh;
    if (name == "relu") return Activation::relu;
    if (name == "linear") return Activation::linear;
    throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

inline double apply(Activation kind, double v) {
    switch (kind) {
        case Activation::tanh: return std::tanh(v);
        case Activation::relu: return v > 0.0 ? v : 0.0;
        case Activation::linear: return v;
    }
    return v;
}

}  // namespace amite
