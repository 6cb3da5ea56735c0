#pragma once

// Taylor models over a box: a dense double polynomial in the inputs plus an
// interval remainder. Every floating-point step folds a bound on its own
// rounding error into the remainder, so for all x in the box the modelled
// function lies in poly(x) + remainder.

#include "amite/expansion.hpp"
#include "amite/interval.hpp"
#include "amite/poly.hpp"

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace amite::tm {

class DomainMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A pre-activation bound left the validity domain of the activation model.
class DomainExceeded : public std::runtime_error {
public:
    DomainExceeded(Interval bound, double vmax);
    Interval bound;
    double vmax;
};

/// Tables shared by every model on one box: the monomial basis up to the order
/// cap (extended to twice the cap for product bookkeeping) and the range of
/// each monomial over the box.
class TmSpace {
public:
    static std::shared_ptr<const TmSpace> create(Box domain, int order_cap);

    const Box& domain() const { return domain_; }
    int vars() const { return static_cast<int>(domain_.size()); }
    int order_cap() const { return order_cap_; }
    /// Number of stored coefficients (monomials of degree <= cap).
    std::size_t size() const { return stored_; }
    const poly::MonomialBasis& basis() const { return basis_; }
    /// Range of monomial e over the box, for every e of degree <= 2 * cap.
    const Interval& range(std::size_t e) const { return ranges_[e]; }
    double magnitude(std::size_t e) const { return magnitudes_[e]; }
    /// Index of monomial(i) * monomial(j).
    std::size_t product(std::size_t i, std::size_t j) const;

private:
    TmSpace(Box domain, int order_cap);

    Box domain_;
    int order_cap_;
    poly::MonomialBasis basis_;
    std::size_t stored_;
    std::vector<Interval> ranges_;
    std::vector<double> magnitudes_;
};

using SpacePtr = std::shared_ptr<const TmSpace>;

class TaylorModel {
public:
    explicit TaylorModel(SpacePtr space);  // the zero model

    static TaylorModel constant(SpacePtr space, double value);
    /// x_var on the box, exact.
    static TaylorModel variable(SpacePtr space, int var);

    const SpacePtr& space_ptr() const { return space_; }
    const TmSpace& space() const { return *space_; }
    const std::vector<double>& coefficients() const { return coeffs_; }
    std::vector<double>& coefficients() { return coeffs_; }
    const Interval& remainder() const { return remainder_; }
    void set_remainder(Interval remainder) { remainder_ = remainder; }
    bool diverged() const { return !remainder_.is_finite(); }

    int degree() const;
    std::size_t nonzeros() const;
    poly::MultivariatePolynomial polynomial() const;
    /// Double evaluation of the polynomial part (not rigorous).
    double eval(std::span<const double> x) const;

private:
    SpacePtr space_;
    std::vector<double> coeffs_;
    Interval remainder_{0.0};
};

TaylorModel tm_add(const TaylorModel& a, const TaylorModel& b);
TaylorModel tm_sub(const TaylorModel& a, const TaylorModel& b);
TaylorModel tm_scale(const TaylorModel& a, double factor);
TaylorModel tm_add_constant(const TaylorModel& a, double value);
/// a + factor * b
TaylorModel tm_axpy(const TaylorModel& a, double factor, const TaylorModel& b);
/// Product truncated at total degree min(order_cap, space cap); order_cap < 0 means the space cap.
TaylorModel tm_mul(const TaylorModel& a, const TaylorModel& b, int order_cap = -1);
/// Interval evaluation of the polynomial over the box plus the remainder.
Interval tm_bound(const TaylorModel& a);
/// Range of the polynomial part alone.
Interval poly_bound(const TaylorModel& a);

/// A univariate polynomial stand-in for an activation: for |v| <= vmax,
/// activation(v) - sum coeffs[k] v^k lies in `error`.
struct ActivationModel {
    Activation kind = Activation::linear;
    std::vector<double> coeffs;
    Interval error{0.0};
    double vmax = std::numeric_limits<double>::infinity();
};

ActivationModel identity_model();

struct FitOptions {
    double opt_tol = 1e-12;
    int eval_digits = 32;
    int points_per_period = 8;
    int min_grid_points = 512;
};

struct ErrorFit {
    Interval interval;
    double argmin = 0.0;
    double argmax = 0.0;
    std::size_t exact_evaluations = 0;
    bool fallback = false;
};

class OptimizerFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Encloses the exact error H over [-V, V]: a coarse grid over the cheap
/// approximation seeds bounded Brent searches over H, one half period either
/// side of every extremum. Falls back to a dense H grid (4x points, widened by
/// the largest observed magnitude) if a search fails.
ErrorFit fit_error_interval(const expansion::ErrorModel& model, const FitOptions& options = {});
Interval fit_error_interval(Activation kind, int terms, double vmax, int digits, double opt_tol = 1e-12);

/// Activation model from an expansion: the fitted error interval plus the
/// bound sum |c_k - fl(c_k)| V^k on coefficient rounding.
ActivationModel make_activation_model(const expansion::AmiteExpansion& expansion, const FitOptions& options = {});
ActivationModel make_activation_model(const expansion::AmiteExpansion& expansion, const ErrorFit& fit);

/// Composes the activation polynomial with `preact` by Horner steps, then adds
/// the activation error interval. Throws DomainExceeded when the bound of
/// `preact` is not inside [-vmax, vmax].
TaylorModel tm_from_activation(const ActivationModel& model, const TaylorModel& preact, int order_cap = -1);

std::string taylor_model_to_json(const TaylorModel& model);

}  // namespace amite::tm
