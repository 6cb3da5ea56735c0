#include "amite/format.hpp"
#include "amite/poly.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace amite::poly {

int total_degree(const MultiIndex& kappa) { return std::accumulate(kappa.begin(), kappa.end(), 0); }

bool GradedLex::operator()(const MultiIndex& a, const MultiIndex& b) const {
    const int da = total_degree(a);
    const int db = total_degree(b);
    if (da != db) return da < db;
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

namespace {

// All exponent vectors of exactly degree d, leading exponents descending.
void enumerate_degree(int vars, int d, MultiIndex& current, int position, std::vector<MultiIndex>& out) {
    if (position == vars - 1) {
        current[static_cast<std::size_t>(position)] = d;
        out.push_back(current);
        return;
    }
    for (int e = d; e >= 0; --e) {
        current[static_cast<std::size_t>(position)] = e;
        enumerate_degree(vars, d - e, current, position + 1, out);
    }
}

}  // namespace

MonomialBasis::MonomialBasis(int vars, int degree) : vars_(vars), degree_(degree) {
    if (vars < 1) throw std::invalid_argument("a monomial basis needs at least one variable");
    if (degree < 0) throw std::invalid_argument("basis degree must be nonnegative");
    MultiIndex current(static_cast<std::size_t>(vars), 0);
    for (int d = 0; d <= degree; ++d) enumerate_degree(vars, d, current, 0, monomials_);
    for (std::size_t i = 0; i < monomials_.size(); ++i) {
        degrees_.push_back(total_degree(monomials_[i]));
        lookup_.emplace(monomials_[i], static_cast<int>(i));
    }
    shift_.assign(monomials_.size() * static_cast<std::size_t>(vars), -1);
    for (std::size_t i = 0; i < monomials_.size(); ++i) {
        if (degrees_[i] == degree) continue;
        MultiIndex next = monomials_[i];
        for (int v = 0; v < vars; ++v) {
            ++next[static_cast<std::size_t>(v)];
            shift_[i * static_cast<std::size_t>(vars) + static_cast<std::size_t>(v)] = lookup_.at(next);
            --next[static_cast<std::size_t>(v)];
        }
    }
}

int MonomialBasis::index_of(const MultiIndex& kappa) const {
    auto it = lookup_.find(kappa);
    return it == lookup_.end() ? -1 : it->second;
}

std::size_t MonomialBasis::degree_offset(int d) const {
    return static_cast<std::size_t>(std::lower_bound(degrees_.begin(), degrees_.end(), d) - degrees_.begin());
}

int MultivariatePolynomial::degree() const { return terms_.empty() ? 0 : total_degree(terms_.rbegin()->first); }

void MultivariatePolynomial::add_term(const MultiIndex& kappa, double value) {
    if (kappa.size() != static_cast<std::size_t>(num_inputs_)) {
        throw std::invalid_argument("multi-index length differs from the number of inputs");
    }
    if (std::any_of(kappa.begin(), kappa.end(), [](int e) { return e < 0; })) {
        throw std::invalid_argument("exponents must be nonnegative");
    }
    if (value == 0.0) return;
    auto [it, inserted] = terms_.emplace(kappa, value);
    if (!inserted) {
        it->second += value;
        if (it->second == 0.0) terms_.erase(it);
    }
}

double MultivariatePolynomial::coefficient(const MultiIndex& kappa) const {
    auto it = terms_.find(kappa);
    return it == terms_.end() ? 0.0 : it->second;
}

double eval_poly(const MultivariatePolynomial& poly, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(poly.num_inputs())) {
        throw std::invalid_argument("point has " + std::to_string(x.size()) + " coordinates, polynomial has " +
                                    std::to_string(poly.num_inputs()) + " inputs");
    }
    if (poly.empty()) return 0.0;
    const int top = poly.degree();
    std::vector<std::vector<double>> powers(x.size(), std::vector<double>(static_cast<std::size_t>(top) + 1, 1.0));
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (int k = 1; k <= top; ++k) powers[i][static_cast<std::size_t>(k)] = powers[i][static_cast<std::size_t>(k - 1)] * x[i];
    }
    double sum = 0.0;
    for (const auto& [kappa, coef] : poly.terms()) {
        double term = coef;
        for (std::size_t i = 0; i < kappa.size(); ++i) term *= powers[i][static_cast<std::size_t>(kappa[i])];
        sum += term;
    }
    return sum;
}

using nlohmann::json;

std::string polynomial_to_json(const MultivariatePolynomial& poly) {
    std::ostringstream out;
    out << "{\n \"format\": \"amite-polynomial\",\n \"version\": 1,\n \"num_inputs\": " << poly.num_inputs()
        << ",\n \"terms\": [";
    bool first = true;
    for (const auto& [kappa, coef] : poly.terms()) {
        out << (first ? "\n  " : ",\n  ");
        first = false;
        json entry = {{"kappa", kappa}, {"coef", format_double(coef)}};
        out << entry.dump();
    }
    out << (first ? "]\n}\n" : "\n ]\n}\n");
    return out.str();
}

MultivariatePolynomial polynomial_from_json(const std::string& text) {
    try {
        const json in = json::parse(text);
        if (in.value("format", "") != "amite-polynomial") throw std::runtime_error("not a polynomial file");
        MultivariatePolynomial poly(in.at("num_inputs").get<int>());
        for (const json& entry : in.at("terms")) {
            poly.add_term(entry.at("kappa").get<MultiIndex>(), parse_double(entry.at("coef").get<std::string>()));
        }
        return poly;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed polynomial file: ") + e.what());
    }
}

void save_polynomial(const MultivariatePolynomial& poly, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << polynomial_to_json(poly);
}

MultivariatePolynomial load_polynomial(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return polynomial_from_json(buffer.str());
}

}  // namespace amite::poly
