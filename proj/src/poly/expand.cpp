#include "amite/parallel.hpp"
#include "amite/poly.hpp"

namespace amite::poly {

using mp::Real;

namespace {

const nn::Layer& single_hidden_layer(const nn::Network& net, Activation kind) {
    net.validate();
    if (net.layers.size() != 2) {
        throw StructureError("layer expansion needs exactly one hidden layer, network has " +
                             std::to_string(net.hidden_layers()));
    }
    const nn::Layer& hidden = net.layers.front();
    if (hidden.activation != kind) {
        throw StructureError("hidden activation " + std::string(to_string(hidden.activation)) +
                             " does not match the " + std::string(to_string(kind)) + " expansion");
    }
    return hidden;
}

}  // namespace

MultivariatePolynomial expand_layer(const nn::Network& net, const expansion::AmiteExpansion& expansion, int output,
                                    MultinomialCache* cache, int accumulate_digits) {
    const nn::Layer& hidden = single_hidden_layer(net, expansion.kind);
    const nn::Layer& out_layer = net.layers.back();
    if (output < 0 || output >= net.num_outputs()) throw std::invalid_argument("output index out of range");
    if (cache == nullptr) cache = &default_multinomial_cache();

    const int d = accumulate_digits;
    const int vars = net.num_inputs;
    const std::vector<double> alpha = expansion.power_coefficients();
    const int top = static_cast<int>(alpha.size()) - 1;
    const MonomialBasis basis(vars, top);

    // multinomial[j][e] = j! / ((j - |e|)! e_1! ... e_N!), the bias slot carrying j - |e|.
    std::vector<std::vector<Real>> multinomial(static_cast<std::size_t>(top) + 1);
    std::vector<int> kappa(static_cast<std::size_t>(vars) + 1);
    for (int j = 0; j <= top; ++j) {
        if (alpha[static_cast<std::size_t>(j)] == 0.0) continue;
        const std::size_t count = basis.degree_offset(j + 1);
        auto& row = multinomial[static_cast<std::size_t>(j)];
        row.reserve(count);
        for (std::size_t e = 0; e < count; ++e) {
            const MultiIndex& m = basis.monomial(e);
            kappa[0] = j - basis.degree_of(e);
            std::copy(m.begin(), m.end(), kappa.begin() + 1);
            const mpz_class value = cache->get(static_cast<unsigned>(j), kappa);
            Real r(d);
            mpfr_set_z(r.get(), value.get_mpz_t(), MPFR_RNDN);
            row.push_back(std::move(r));
        }
    }

    const std::size_t neurons = hidden.outputs();
    const unsigned workers = worker_count(neurons);
    std::vector<std::vector<Real>> partial(workers, std::vector<Real>(basis.size(), Real(d)));
    parallel_for(workers, [&](std::size_t w) {
        std::vector<Real>& acc = partial[w];
        std::vector<Real> weight_power(basis.size(), Real(d));
        std::vector<char> ready(basis.size());
        std::vector<Real> bias_power(static_cast<std::size_t>(top) + 1, Real(d));
        for (std::size_t n = w; n < neurons; n += workers) {
            const double w_out = out_layer.weights[static_cast<std::size_t>(output)][n];
            if (w_out == 0.0) continue;
            const std::vector<double>& w_in = hidden.weights[n];

            // prod_i w_i^(e_i) for every monomial, each from one parent by one multiplication.
            std::fill(ready.begin(), ready.end(), 0);
            weight_power[0] = Real(1L, d);
            ready[0] = 1;
            for (std::size_t e = 0; e < basis.size(); ++e) {
                for (int v = 0; v < vars; ++v) {
                    const int child = basis.times_variable(e, v);
                    if (child < 0 || ready[static_cast<std::size_t>(child)]) continue;
                    weight_power[static_cast<std::size_t>(child)] = weight_power[e] * Real(w_in[static_cast<std::size_t>(v)], d);
                    ready[static_cast<std::size_t>(child)] = 1;
                }
            }
            bias_power[0] = Real(1L, d);
            const Real b(hidden.bias[n], d);
            for (int k = 1; k <= top; ++k) bias_power[static_cast<std::size_t>(k)] = bias_power[static_cast<std::size_t>(k - 1)] * b;

            for (int j = 0; j <= top; ++j) {
                if (alpha[static_cast<std::size_t>(j)] == 0.0) continue;
                const Real scale = Real(alpha[static_cast<std::size_t>(j)], d) * Real(w_out, d);
                const auto& row = multinomial[static_cast<std::size_t>(j)];
                for (std::size_t e = 0; e < row.size(); ++e) {
                    acc[e] += scale * row[e] * bias_power[static_cast<std::size_t>(j - basis.degree_of(e))] * weight_power[e];
                }
            }
        }
    });

    std::vector<Real>& total = partial.front();
    for (std::size_t w = 1; w < partial.size(); ++w) {
        for (std::size_t e = 0; e < basis.size(); ++e) total[e] += partial[w][e];
    }
    total[0] += Real(out_layer.bias[static_cast<std::size_t>(output)], d);

    MultivariatePolynomial poly(vars);
    for (std::size_t e = 0; e < basis.size(); ++e) poly.add_term(basis.monomial(e), total[e].to_double());
    return poly;
}

double polynomial_network(const nn::Network& net, const expansion::AmiteExpansion& expansion, std::span<const double> x,
                          int output) {
    const nn::Layer& hidden = single_hidden_layer(net, expansion.kind);
    const nn::Layer& out_layer = net.layers.back();
    if (x.size() != static_cast<std::size_t>(net.num_inputs)) throw std::invalid_argument("input dimension mismatch");
    double y = out_layer.bias[static_cast<std::size_t>(output)];
    for (std::size_t n = 0; n < hidden.outputs(); ++n) {
        double v = hidden.bias[n];
        for (std::size_t i = 0; i < x.size(); ++i) v += hidden.weights[n][i] * x[i];
        y += out_layer.weights[static_cast<std::size_t>(output)][n] * expansion::evaluate_expansion(expansion, v);
    }
    return y;
}

}  // namespace amite::poly
