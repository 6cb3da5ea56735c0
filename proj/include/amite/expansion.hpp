#pragma once

// Polynomial expansions of tanh and ReLU on a tunable domain |v| < V, built by
// truncating the Fourier-kernel integral of each activation at the point where
// the kernel's partial sum stops converging. Coefficients are exact closed
// forms evaluated at arbitrary precision; the remainders have exact and cheap
// approximate closed forms.

#include "amite/activation.hpp"
#include "amite/mp/quadrature.hpp"
#include "amite/mp/real.hpp"
#include "amite/mp/special.hpp"

#include <filesystem>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace amite::expansion {

using mp::Real;

/// The cancellation between the two closed-form terms of a tanh coefficient
/// left fewer than `kMinSurvivingDigits` significant digits.
class PrecisionExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kMinSurvivingDigits = 20;

struct KernelBounds {
    Real sigma;  // limit for cosine-kernel integrals, ((2M+2)!)^(1/(2M+2)) / V
    Real tau;    // limit for sine-kernel integrals,   ((2M+3)!)^(1/(2M+3)) / V
};

/// Integration limits keeping the truncated kernel inside its region of
/// validity. Precision follows `vmax`.
KernelBounds kernel_bounds(int terms, const Real& vmax);

/// Antiderivative of xi^j csch(a xi):
///   -(2/a) sum_k j! xi^(j-k) chi_(k+1)(e^(-a xi)) / (a^k (j-k)!).
Real lambda_integral(unsigned j, const Real& xi, const Real& a);

/// lim_(xi -> 0+) of lambda_integral; finite for j >= 1 (only the k = j term
/// survives, giving -(2/a^(j+1)) j! (1 - 2^(-j-1)) zeta(j+1)).
Real lambda_integral_at_zero(unsigned j, const Real& a);

enum class Parity { odd, even_plus_half_v };

struct AmiteExpansion {
    Activation kind = Activation::tanh;
    int terms = 0;  // M
    Real vmax;      // V
    int digits = 0;
    Real kernel_bound;               // tau for tanh, sigma for relu
    std::vector<Real> coefficients;  // index m -> coefficient of v^(2m+1) (tanh) or v^(2m) (relu)
    std::vector<double> rounded;     // coefficients rounded to double once
    double cancellation_digits = 0;  // worst cancellation seen while forming coefficients

    Parity parity() const { return kind == Activation::tanh ? Parity::odd : Parity::even_plus_half_v; }
    /// Highest power of v present.
    int degree() const { return kind == Activation::tanh ? 2 * terms + 1 : 2 * terms; }
    /// Dense power-basis coefficients c_0..c_degree (relu includes the v/2 term).
    std::vector<double> power_coefficients() const;
    std::vector<Real> power_coefficients(int digits) const;
};

AmiteExpansion tanh_coefficients(int terms, const Real& vmax, int digits);
AmiteExpansion relu_coefficients(int terms, const Real& vmax, int digits);
AmiteExpansion make_expansion(Activation kind, int terms, const Real& vmax, int digits);

/// Conventional Maclaurin coefficients of tanh: entry m-1 is the exact
/// coefficient of v^(2m-1), m = 1..terms.
std::vector<mp::Rational> taylor_coefficients_tanh(int terms);

/// Horner evaluation in double with the once-rounded coefficients.
double evaluate_expansion(const AmiteExpansion& expansion, double v);
/// Evaluation at the precision of `v`.
Real evaluate_expansion(const AmiteExpansion& expansion, const Real& v);

/// Exact activation value at the precision of `v`.
Real activation_value(Activation kind, const Real& v);

/// Error formulas for one expansion. Holds the quadrature rule and cached
/// kernel samples used by the exact tanh remainder; safe for concurrent use.
class ErrorModel {
public:
    ErrorModel(const AmiteExpansion& expansion, int eval_digits);

    const AmiteExpansion& expansion() const { return expansion_; }
    int eval_digits() const { return eval_digits_; }

    /// E(v): activation minus polynomial, in high precision.
    Real measured(const Real& v) const;
    /// H(v): the exact remainder formula.
    Real exact(const Real& v) const;
    /// The exact oscillating component (tanh: 2F1 closed form; relu: first three terms).
    Real oscillating(const Real& v) const;
    /// The cheap approximation used for grid searches (tanh: elementary closed form;
    /// relu: identical to oscillating()).
    Real approximate(const Real& v) const;

    Real measured(double v) const { return measured(Real(v, eval_digits_)); }
    Real exact(double v) const { return exact(Real(v, eval_digits_)); }
    Real oscillating(double v) const { return oscillating(Real(v, eval_digits_)); }
    Real approximate(double v) const { return approximate(Real(v, eval_digits_)); }

    /// Approximate period of the oscillating error, 2 pi / kernel_bound.
    double period() const;

private:
    Real tanh_oscillating(const Real& v) const;
    Real tanh_tail_integral(const Real& v) const;
    Real relu_oscillating(const Real& v) const;
    Real relu_tail_series(const Real& v) const;
    const Real& kernel_sample(const Real& xi, mp::NodeId id) const;

    AmiteExpansion expansion_;
    int eval_digits_;
    int work_digits_;
    std::vector<Real> power_coefficients_;
    Real kernel_bound_;
    mp::TanhSinh quadrature_;
    mutable std::shared_mutex cache_mutex_;
    mutable std::unordered_map<long long, std::unique_ptr<Real>> kernel_cache_;
};

Real tanh_error_exact(const AmiteExpansion& expansion, const Real& v);
Real tanh_error_oscillating_exact(const AmiteExpansion& expansion, const Real& v);
Real tanh_error_approx(const AmiteExpansion& expansion, const Real& v);
Real relu_error_exact(const AmiteExpansion& expansion, const Real& v);
Real relu_error_oscillating(const AmiteExpansion& expansion, const Real& v);

struct ErrorReport {
    std::vector<double> grid;
    std::vector<double> phi;
    std::vector<double> phi_approx;  // double-precision polynomial
    std::vector<Real> measured;      // E, high precision
    std::vector<Real> exact;         // H
    std::vector<Real> approximate;   // I
};

/// Evaluates E, H and I on `grid`; parallel over grid points.
ErrorReport error_report(const ErrorModel& model, const std::vector<double>& grid);

/// Symmetric grid of `points` values spanning [-(V + span), V + span].
std::vector<double> symmetric_grid(double vmax, double span, int points);

/// Text export with every number as a full-precision decimal string.
void save_expansion(const AmiteExpansion& expansion, const std::filesystem::path& path);
AmiteExpansion load_expansion(const std::filesystem::path& path);
std::string expansion_to_json(const AmiteExpansion& expansion);
AmiteExpansion expansion_from_json(const std::string& text);

}  // namespace amite::expansion
