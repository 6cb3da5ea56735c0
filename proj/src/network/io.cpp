#include "amite/format.hpp"
#include "amite/network.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace amite::nn {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "amite-network";
constexpr int kVersion = 1;

double read_number(const json& node, const std::string& where) {
    if (node.is_string()) {
        try {
            return parse_double(node.get<std::string>());
        } catch (const std::invalid_argument&) {
            throw NetworkError(where + ": cannot parse '" + node.get<std::string>() + "'");
        }
    }
    if (node.is_number()) return node.get<double>();
    throw NetworkError(where + ": expected a decimal string");
}

const json& field(const json& node, const char* key, const std::string& where) {
    if (!node.is_object() || !node.contains(key)) throw NetworkError(where + ": missing field '" + key + "'");
    return node.at(key);
}

}  // namespace

std::string network_to_json(const Network& net) {
    net.validate();
    json out;
    out["format"] = kFormat;
    out["version"] = kVersion;
    out["inputs"] = net.num_inputs;
    json layers = json::array();
    for (const Layer& layer : net.layers) {
        json weights = json::array();
        for (const auto& row : layer.weights) {
            json r = json::array();
            for (double w : row) r.push_back(format_double(w));
            weights.push_back(std::move(r));
        }
        json bias = json::array();
        for (double b : layer.bias) bias.push_back(format_double(b));
        layers.push_back({{"activation", std::string(to_string(layer.activation))},
                          {"weights", std::move(weights)},
                          {"bias", std::move(bias)}});
    }
    out["layers"] = std::move(layers);
    return out.dump(1);
}

Network network_from_json(const std::string& text) {
    json in;
    try {
        in = json::parse(text);
    } catch (const json::parse_error& e) {
        throw NetworkError(std::string("invalid JSON: ") + e.what());
    }
    if (in.contains("format") && in.at("format") != kFormat) throw NetworkError("not a network file");
    if (in.contains("version") && in.at("version") != kVersion) throw NetworkError("unsupported network file version");

    Network net;
    const json& inputs = field(in, "inputs", "network");
    if (!inputs.is_number_integer()) throw NetworkError("network: 'inputs' must be an integer");
    net.num_inputs = inputs.get<int>();
    const json& layers = field(in, "layers", "network");
    if (!layers.is_array()) throw NetworkError("network: 'layers' must be a list");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string where = "layers[" + std::to_string(l) + "]";
        const json& node = layers[l];
        Layer layer;
        const json& act = field(node, "activation", where);
        try {
            layer.activation = parse_activation(act.get<std::string>());
        } catch (const std::exception& e) {
            throw NetworkError(where + ".activation: " + e.what());
        }
        const json& weights = field(node, "weights", where);
        if (!weights.is_array()) throw NetworkError(where + ".weights must be a list of rows");
        for (std::size_t n = 0; n < weights.size(); ++n) {
            const std::string row_where = where + ".weights[" + std::to_string(n) + "]";
            if (!weights[n].is_array()) throw NetworkError(row_where + " must be a list");
            std::vector<double> row;
            for (std::size_t i = 0; i < weights[n].size(); ++i) {
                row.push_back(read_number(weights[n][i], row_where + "[" + std::to_string(i) + "]"));
            }
            layer.weights.push_back(std::move(row));
        }
        const json& bias = field(node, "bias", where);
        if (!bias.is_array()) throw NetworkError(where + ".bias must be a list");
        for (std::size_t n = 0; n < bias.size(); ++n) {
            layer.bias.push_back(read_number(bias[n], where + ".bias[" + std::to_string(n) + "]"));
        }
        net.layers.push_back(std::move(layer));
    }
    net.validate();
    return net;
}

void save_network(const Network& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << network_to_json(net) << '\n';
}

Network load_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return network_from_json(buffer.str());
    } catch (const NetworkError& e) {
        throw NetworkError(path.string() + ": " + e.what());
    }
}

}  // namespace amite::nn
