#pragma once

// Multivariate polynomials in the network inputs and the single-hidden-layer
// expansion y = b_out + sum_n w_n p(b_n + w_n . x) written out monomial by
// monomial through multinomial coefficients.

#include "amite/expansion.hpp"
#include "amite/network.hpp"

#include <gmpxx.h>

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace amite::poly {

/// Exponents of the inputs x_1..x_N (the bias slot is folded away before
/// indices reach a polynomial).
using MultiIndex = std::vector<int>;

int total_degree(const MultiIndex& kappa);

/// Graded lexicographic order: lower total degree first, then larger leading
/// exponents first (x1^2, x1 x2, x2^2 within degree 2).
struct GradedLex {
    bool operator()(const MultiIndex& a, const MultiIndex& b) const;
};

/// All monomials of total degree <= `degree` in `vars` variables, enumerated in
/// graded-lex order, with O(1) multiplication-by-variable lookups.
class MonomialBasis {
public:
    MonomialBasis(int vars, int degree);

    int vars() const { return vars_; }
    int degree() const { return degree_; }
    std::size_t size() const { return monomials_.size(); }
    const MultiIndex& monomial(std::size_t index) const { return monomials_[index]; }
    int degree_of(std::size_t index) const { return degrees_[index]; }
    /// Index of monomial(index) * x_var, or -1 when that exceeds the basis degree.
    int times_variable(std::size_t index, int var) const { return shift_[index * vars_ + var]; }
    /// Index of an arbitrary multi-index, -1 if outside the basis.
    int index_of(const MultiIndex& kappa) const;
    /// Number of monomials of degree < d.
    std::size_t degree_offset(int d) const;

private:
    int vars_;
    int degree_;
    std::vector<MultiIndex> monomials_;
    std::vector<int> degrees_;
    std::vector<int> shift_;
    std::map<MultiIndex, int, GradedLex> lookup_;
};

class MultivariatePolynomial {
public:
    using Terms = std::map<MultiIndex, double, GradedLex>;

    explicit MultivariatePolynomial(int num_inputs = 0) : num_inputs_(num_inputs) {}

    int num_inputs() const { return num_inputs_; }
    const Terms& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }
    int degree() const;

    /// Adds `value` to the coefficient of `kappa`; entries that become zero are dropped.
    void add_term(const MultiIndex& kappa, double value);
    double coefficient(const MultiIndex& kappa) const;

private:
    int num_inputs_;
    Terms terms_;
};

/// sum_kappa Psi_kappa x^kappa, each power of each variable computed once.
double eval_poly(const MultivariatePolynomial& poly, std::span<const double> x);

std::string polynomial_to_json(const MultivariatePolynomial& poly);
MultivariatePolynomial polynomial_from_json(const std::string& text);
void save_polynomial(const MultivariatePolynomial& poly, const std::filesystem::path& path);
MultivariatePolynomial load_polynomial(const std::filesystem::path& path);

/// Memoized multinomial coefficients j! / (k_1! ... k_n!), keyed by (j, sorted
/// nonzero parts). With a file path the table persists across runs: one chunk
/// per j behind an index header, each chunk read from disk only when first needed.
class MultinomialCache {
public:
    MultinomialCache() = default;
    explicit MultinomialCache(std::filesystem::path file);
    ~MultinomialCache();
    MultinomialCache(const MultinomialCache&) = delete;
    MultinomialCache& operator=(const MultinomialCache&) = delete;

    mpz_class get(unsigned j, std::span<const int> kappa);
    /// Writes every chunk (loaded or not) back to the file; no-op without a file.
    void flush();

    std::size_t hits() const { return hits_; }
    std::size_t misses() const { return misses_; }
    std::size_t chunks_loaded() const { return chunks_loaded_; }

private:
    using Chunk = std::map<std::vector<int>, mpz_class>;
    struct IndexEntry {
        std::uint64_t offset;
        std::uint64_t length;
    };

    void read_index();
    Chunk read_chunk(unsigned j) const;
    Chunk& chunk_locked(unsigned j);

    std::filesystem::path file_;
    std::map<unsigned, IndexEntry> index_;
    std::unordered_map<unsigned, Chunk> chunks_;
    bool dirty_ = false;
    mutable std::shared_mutex mutex_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
    std::size_t chunks_loaded_ = 0;
};

/// Process-wide cache; persisted at $AMITE_MULTINOMIAL_CACHE when that is set.
MultinomialCache& default_multinomial_cache();

/// Throws std::invalid_argument unless sum(kappa) == j.
mpz_class multinomial_coefficient(unsigned j, std::span<const int> kappa);

class StructureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Expands output `output` of a one-hidden-layer network whose hidden activation
/// is replaced by the polynomial `expansion` (double-rounded coefficients).
/// Accumulation runs at `accumulate_digits` and is rounded once at the end.
MultivariatePolynomial expand_layer(const nn::Network& net, const expansion::AmiteExpansion& expansion, int output = 0,
                                    MultinomialCache* cache = nullptr, int accumulate_digits = 40);

/// The network with its hidden activation replaced by the expansion, evaluated directly.
double polynomial_network(const nn::Network& net, const expansion::AmiteExpansion& expansion, std::span<const double> x,
                          int output = 0);

}  // namespace amite::poly
