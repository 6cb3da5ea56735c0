#pragma once

// Rigorous output ranges of feed-forward networks over an input box, by
// propagating Taylor models layer by layer. The AMITE method composes each
// activation with its domain-tuned expansion; the baseline uses the Maclaurin
// series of tanh, which is only valid inside |v| < pi/2.

#include "amite/network.hpp"
#include "amite/taylor_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

namespace amite::range {

enum class Method { amite, taylor };

std::string_view to_string(Method m);

struct RangeResult {
    Interval bound = Interval::entire();
    Method method = Method::amite;
    int terms = 0;
    int digits = 0;
    double safety_factor = 0.0;  // S of the successful attempt (0 for the baseline)
    double vmax = 0.0;
    int retries = 0;
    Interval numeric_estimate;
    /// width(bound) - width(numeric_estimate); infinite when diverged.
    double overestimation = 0.0;
    double runtime_s = 0.0;
    bool diverged = false;
    std::string diagnostics;
};

/// S times the largest |pre-activation| of any hidden neuron over `samples`
/// fuzz vectors from `box`.
double estimate_V(const nn::Network& net, const Box& box, std::size_t samples, double safety, std::uint64_t seed);

struct Schedule {
    int terms;
    int digits;
};

/// Expansion size for a network whose widest hidden layer has `max_hidden` neurons.
Schedule default_schedule(int max_hidden);
int max_hidden_width(const nn::Network& net);

/// Activation models keyed by (kind, M, V, digits); safe for concurrent use.
class ModelCache {
public:
    std::shared_ptr<const tm::ActivationModel> get(Activation kind, int terms, double vmax, int digits, double opt_tol);
    std::size_t hits() const;
    std::size_t misses() const;

private:
    using Key = std::tuple<Activation, int, double, int, double>;
    mutable std::mutex mutex_;
    std::map<Key, std::shared_ptr<const tm::ActivationModel>> models_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

struct AmiteOptions {
    int terms = -1;   // -1: from default_schedule
    int digits = -1;  // -1: from default_schedule
    double s_init = 1.25;
    double opt_tol = 1e-12;
    int order_cap = -1;  // -1: the expansion degree
    int max_retries = 6;
    /// Fixed V instead of estimating it (the safety factor is then unused).
    double vmax = 0.0;
    std::size_t v_samples = 100;
    std::size_t numeric_samples = 100;
    std::uint64_t seed = 0;
    int output = 0;
    ModelCache* cache = nullptr;
};

RangeResult range_bound_amite(const nn::Network& net, const Box& box, const AmiteOptions& options = {});

struct TaylorOptions {
    int terms = 6;  // number of nonzero Maclaurin terms, degree 2M-1
    int digits = 50;
    int order_cap = -1;  // -1: the series degree
    std::size_t numeric_samples = 100;
    std::uint64_t seed = 0;
    int output = 0;
};

RangeResult range_bound_taylor(const nn::Network& net, const Box& box, const TaylorOptions& options = {});

/// Encloses tanh(v) - sum_(m<=M) t_m v^(2m-1) over |v| <= r, for r < pi/2.
Interval taylor_error_interval(int terms, double r, int digits = 50);

struct PopulationSpec {
    int inputs = 2;
    std::vector<int> hidden_layers{3, 5};
    std::vector<int> hidden_widths{5, 10};
    int per_shape = 3;
    Activation activation = Activation::tanh;
    std::uint64_t seed = 0;
};

struct Member {
    std::string id;
    nn::Network net;
};

std::vector<Member> generate_population(const PopulationSpec& spec);

struct CampaignOptions {
    bool amite = true;
    bool taylor = true;
    int terms = -1;
    int digits = -1;
    double s_init = 1.25;
    std::uint64_t seed = 0;
    std::size_t numeric_samples = 100;
    ModelCache* cache = nullptr;
};

struct CampaignRow {
    std::string net_id;
    int layers = 0;
    int hidden = 0;
    double width = 0.0;
    RangeResult result;
};

/// Every member at every width (a box centred on zero), AMITE row before baseline row.
std::vector<CampaignRow> bound_campaign(const std::vector<Member>& population, const std::vector<double>& widths,
                                        const CampaignOptions& options = {});

void write_campaign_csv(std::ostream& os, const std::vector<CampaignRow>& rows);

}  // namespace amite::range
