#include "amite/expansion.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace amite::expansion {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "amite-expansion";
constexpr int kVersion = 1;

Real parse_number(const json& node, const char* what, int digits) {
    if (!node.is_string()) throw FormatError(std::string(what) + " must be a decimal string");
    try {
        return Real::parse(node.get<std::string>(), digits);
    } catch (const std::invalid_argument&) {
        throw FormatError(std::string("cannot parse ") + what + ": '" + node.get<std::string>() + "'");
    }
}

}  // namespace

std::string expansion_to_json(const AmiteExpansion& expansion) {
    json out;
    out["format"] = kFormat;
    out["version"] = kVersion;
    out["activation"] = std::string(to_string(expansion.kind));
    out["terms"] = expansion.terms;
    out["digits"] = expansion.digits;
    out["vmax"] = expansion.vmax.to_string();
    out["kernel_bound"] = expansion.kernel_bound.to_string();
    out["cancellation_digits"] = expansion.cancellation_digits;
    out["powers"] = expansion.kind == Activation::tanh ? "odd" : "even";
    json coefficients = json::array();
    for (const Real& c : expansion.coefficients) coefficients.push_back(c.to_string());
    out["coefficients"] = std::move(coefficients);
    return out.dump(2);
}

AmiteExpansion expansion_from_json(const std::string& text) {
    json in;
    try {
        in = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("invalid JSON: ") + e.what());
    }
    try {
        if (in.value("format", "") != kFormat) throw FormatError("not an expansion file");
        if (in.value("version", 0) != kVersion) throw FormatError("unsupported expansion file version");

        AmiteExpansion out;
        out.kind = parse_activation(in.at("activation").get<std::string>());
        if (out.kind == Activation::linear) throw FormatError("linear activation has no expansion");
        out.terms = in.at("terms").get<int>();
        out.digits = in.at("digits").get<int>();
        if (out.terms < 0 || out.digits < 1) throw FormatError("terms and digits must be positive");
        out.vmax = parse_number(in.at("vmax"), "vmax", out.digits);
        out.kernel_bound = parse_number(in.at("kernel_bound"), "kernel_bound", out.digits);
        out.cancellation_digits = in.value("cancellation_digits", 0.0);
        const json& coefficients = in.at("coefficients");
        if (!coefficients.is_array() || coefficients.size() != static_cast<std::size_t>(out.terms) + 1) {
            throw FormatError("coefficient count does not match terms + 1");
        }
        for (const json& c : coefficients) out.coefficients.push_back(parse_number(c, "coefficient", out.digits));
        for (const Real& c : out.coefficients) out.rounded.push_back(c.to_double());

        const KernelBounds bounds = kernel_bounds(out.terms, out.vmax);
        const Real& expected = out.kind == Activation::tanh ? bounds.tau : bounds.sigma;
        if (mp::relative_difference(expected, out.kernel_bound) > Real(1e-12, out.digits)) {
            throw FormatError("kernel_bound is inconsistent with terms and vmax");
        }
        return out;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed expansion file: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("malformed expansion file: ") + e.what());
    }
}

void save_expansion(const AmiteExpansion& expansion, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << expansion_to_json(expansion) << '\n';
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

AmiteExpansion load_expansion(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return expansion_from_json(buffer.str());
}

}  // namespace amite::expansion
