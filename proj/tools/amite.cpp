// Command-line front end: expansions, error tables, equivalence tests and range bounds.

#include "amite/equivtest.hpp"
#include "amite/expansion.hpp"
#include "amite/format.hpp"
#include "amite/network.hpp"
#include "amite/parallel.hpp"
#include "amite/rangebound.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace amite;
using nlohmann::ordered_json;

namespace {

constexpr int kManifestVersion = 1;

// Exit code for failures other than usage errors.
constexpr int kRuntimeFailure = 3;

struct Output {
    std::string path = "-";
    std::string manifest;

    std::ostream& stream() {
        if (path == "-") return std::cout;
        file_.open(path, std::ios::binary);
        if (!file_) throw std::runtime_error("cannot write " + path);
        return file_;
    }

private:
    std::ofstream file_;
};

void write_manifest(const std::string& subcommand, const ordered_json& config, const Output& out) {
    ordered_json m;
    m["schema"] = "amite-run-manifest";
    m["schema_version"] = kManifestVersion;
    m["subcommand"] = subcommand;
    m["threads"] = thread_limit().load();
    m["config"] = config;
    m["output"] = out.path;
    const std::string text = m.dump(2) + "\n";
    std::string path = out.manifest;
    if (path.empty() && out.path != "-") path = out.path + ".manifest.json";
    if (path.empty()) {
        std::cerr << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

// "lo,hi" -> Interval; throws CLI::ValidationError on malformed input.
Interval parse_side(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos || text.find(',', comma + 1) != std::string::npos) {
        throw CLI::ValidationError("--box", "expected lo,hi but got '" + text + "'");
    }
    try {
        const double lo = parse_double(text.substr(0, comma));
        const double hi = parse_double(text.substr(comma + 1));
        if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) throw std::invalid_argument("bad interval");
        return Interval(lo, hi);
    } catch (const std::invalid_argument&) {
        throw CLI::ValidationError("--box", "expected finite lo,hi with lo <= hi but got '" + text + "'");
    }
}

// One side per input; a single side is applied to every input.
Box parse_box(const std::vector<std::string>& sides, int inputs) {
    Box box;
    for (const auto& s : sides) box.push_back(parse_side(s));
    if (box.size() == 1 && inputs > 1) box.assign(static_cast<std::size_t>(inputs), box.front());
    if (box.size() != static_cast<std::size_t>(inputs)) {
        throw CLI::ValidationError("--box", "network has " + std::to_string(inputs) + " inputs but " +
                                                std::to_string(box.size()) + " box sides were given");
    }
    return box;
}

ordered_json box_json(const Box& box) {
    auto a = ordered_json::array();
    for (const Interval& s : box) a.push_back({format_double(s.lo), format_double(s.hi)});
    return a;
}

const std::map<std::string, Activation> kNonlinear{{"tanh", Activation::tanh}, {"relu", Activation::relu}};

struct ExpandArgs {
    std::string fn;
    int terms = 0;
    std::string vmax;
    int digits = 450;
    Output out;
};

int run_expand(ExpandArgs& a) {
    Output& out = a.out;
    const auto ex = expansion::make_expansion(kNonlinear.at(a.fn), a.terms, mp::Real::parse(a.vmax, a.digits), a.digits);
    out.stream() << expansion::expansion_to_json(ex);
    write_manifest("expand", {{"fn", a.fn}, {"terms", a.terms}, {"vmax", a.vmax}, {"digits", a.digits}}, out);
    return 0;
}

struct ErrorsArgs {
    std::string fn;
    int terms = 0;
    std::string vmax;
    int digits = 450;
    int eval_digits = 32;
    int grid = 2001;
    double span = 0.5;
    Output out;
};

int run_errors(ErrorsArgs& a) {
    Output& out = a.out;
    const auto ex = expansion::make_expansion(kNonlinear.at(a.fn), a.terms, mp::Real::parse(a.vmax, a.digits), a.digits);
    const expansion::ErrorModel model(ex, a.eval_digits);
    const auto grid = expansion::symmetric_grid(ex.vmax.to_double(), a.span, a.grid);
    const auto report = expansion::error_report(model, grid);
    std::ostream& os = out.stream();
    os << "v,phi,phi_a,E,H,I,abs_E_minus_H,abs_E_minus_I\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        os << format_double(grid[i]) << ',' << format_double(report.phi[i]) << ',' << format_double(report.phi_approx[i])
           << ',' << report.measured[i].to_string() << ',' << report.exact[i].to_string() << ','
           << report.approximate[i].to_string() << ',' << mp::abs(report.measured[i] - report.exact[i]).to_string()
           << ',' << mp::abs(report.measured[i] - report.approximate[i]).to_string() << '\n';
    }
    write_manifest("errors",
                   {{"fn", a.fn},
                    {"terms", a.terms},
                    {"vmax", a.vmax},
                    {"digits", a.digits},
                    {"eval_digits", a.eval_digits},
                    {"grid", a.grid},
                    {"span", format_double(a.span)}},
                   out);
    return 0;
}

struct EquivArgs {
    std::string original;
    std::string under_test;
    std::optional<double> snr;
    std::uint64_t seed = 0;
    double threshold = 0.01;
    int terms = 6;
    std::string vmax = "4";
    int digits = 65;
    int stimuli = 250;
    std::vector<std::string> box;
    Output out;
};

int run_equiv(EquivArgs& a) {
    Output& out = a.out;
    const auto original = nn::load_network(a.original);
    const auto under_test = nn::load_network(a.under_test);
    const Box box = a.box.empty() ? Box(static_cast<std::size_t>(original.num_inputs), Interval(-1.0, 1.0))
                                  : parse_box(a.box, original.num_inputs);
    const auto ex = expansion::make_expansion(original.layers.front().activation, a.terms,
                                              mp::Real::parse(a.vmax, a.digits), a.digits);
    equiv::EquivOptions o;
    o.stimuli = a.stimuli;
    o.snr_db = a.snr;
    o.seed = a.seed;
    o.threshold = a.threshold;
    const auto v = equiv::equivalence_test(original, equiv::evaluator_for(under_test), box, ex, o);

    ordered_json report;
    report["verdict"] = std::string(equiv::to_string(v.verdict));
    report["eta"] = format_double(v.eta);
    report["threshold"] = format_double(v.threshold);
    report["equivalent"] = v.equivalent;
    auto per_output = ordered_json::array();
    for (double e : v.eta_per_output) per_output.push_back(format_double(e));
    report["eta_per_output"] = per_output;
    report["noise_power"] = format_double(v.noise_power);
    report["target_loss"] = format_double(v.target_loss);
    auto trace = ordered_json::array();
    for (double l : v.fit_loss_trace) trace.push_back(format_double(l));
    report["fit_loss_trace"] = trace;
    report["seed"] = a.seed;
    report["runtime_s"] = format_double(v.runtime_s);
    report["replicated"] = ordered_json::parse(nn::network_to_json(v.replicated));
    out.stream() << report.dump(2) << "\n";

    ordered_json config{{"original", a.original},
                        {"under_test", a.under_test},
                        {"snr_db", a.snr ? ordered_json(format_double(*a.snr)) : ordered_json(nullptr)},
                        {"seed", a.seed},
                        {"threshold", format_double(a.threshold)},
                        {"terms", a.terms},
                        {"vmax", a.vmax},
                        {"digits", a.digits},
                        {"stimuli", a.stimuli},
                        {"box", box_json(box)}};
    write_manifest("equiv", config, out);
    switch (v.verdict) {
        case equiv::Verdict::equivalent: return 0;
        case equiv::Verdict::not_equivalent: return 1;
        case equiv::Verdict::inconclusive: return 2;
    }
    return 2;
}

struct RangeArgs {
    std::string network;
    std::vector<std::string> box;
    std::string method = "both";
    int terms = -1;
    int digits = -1;
    std::uint64_t seed = 0;
    double s_init = 1.25;
    int output = 0;
    std::size_t samples = 100;
    bool no_timing = false;
    Output out;
};

int run_rangebound(RangeArgs& a) {
    Output& out = a.out;
    const auto net = nn::load_network(a.network);
    const Box box = parse_box(a.box, net.num_inputs);
    const auto schedule = range::default_schedule(range::max_hidden_width(net));
    const int terms = a.terms > 0 ? a.terms : schedule.terms;

    range::CampaignRow base;
    base.net_id = std::filesystem::path(a.network).stem().string();
    base.layers = net.hidden_layers();
    base.hidden = range::max_hidden_width(net);
    for (const Interval& s : box) base.width = std::max(base.width, s.width());

    std::vector<range::CampaignRow> rows;
    if (a.method != "taylor") {
        range::AmiteOptions o;
        o.terms = terms;
        o.digits = a.digits;
        o.s_init = a.s_init;
        o.seed = a.seed;
        o.output = a.output;
        o.numeric_samples = a.samples;
        rows.push_back(base);
        rows.back().result = range::range_bound_amite(net, box, o);
    }
    if (a.method != "amite") {
        range::TaylorOptions o;
        o.terms = terms;
        if (a.digits > 0) o.digits = a.digits;
        o.seed = a.seed;
        o.output = a.output;
        o.numeric_samples = a.samples;
        rows.push_back(base);
        rows.back().result = range::range_bound_taylor(net, box, o);
    }
    if (a.no_timing) {
        for (auto& r : rows) r.result.runtime_s = 0.0;
    }
    range::write_campaign_csv(out.stream(), rows);
    for (const auto& r : rows) {
        if (!r.result.diagnostics.empty()) std::cerr << to_string(r.result.method) << ": " << r.result.diagnostics << "\n";
    }
    write_manifest("rangebound",
                   {{"network", a.network},
                    {"box", box_json(box)},
                    {"method", a.method},
                    {"terms", terms},
                    {"digits", a.digits},
                    {"seed", a.seed},
                    {"s_init", format_double(a.s_init)},
                    {"output", a.output},
                    {"samples", a.samples},
                    {"no_timing", a.no_timing}},
                   out);
    return 0;
}

struct NetArgs {
    std::vector<int> sizes;
    std::string activation = "tanh";
    std::uint64_t seed = 0;
    double perturb = 0.0;
    std::uint64_t perturb_seed = 1;
    Output out;
};

int run_network(NetArgs& a) {
    Output& out = a.out;
    auto net = nn::random_network(a.sizes, parse_activation(a.activation), a.seed);
    if (a.perturb > 0.0) net = nn::perturb_weights(net, a.perturb, a.perturb_seed);
    out.stream() << nn::network_to_json(net);
    auto sizes = ordered_json::array();
    for (int s : a.sizes) sizes.push_back(s);
    write_manifest("network",
                   {{"sizes", sizes},
                    {"activation", a.activation},
                    {"seed", a.seed},
                    {"perturb", format_double(a.perturb)},
                    {"perturb_seed", a.perturb_seed}},
                   out);
    return 0;
}

void add_output(CLI::App* cmd, Output& out, const std::string& what) {
    cmd->add_option("--out", out.path, what + " ('-' for stdout)")->capture_default_str();
    cmd->add_option("--manifest", out.manifest, "manifest path (default: <out>.manifest.json, stderr for stdout)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AMITE expansions, equivalence testing and range bounding"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker cap (0 = all cores)");

    ExpandArgs expand;
    auto* c_expand = app.add_subcommand("expand", "write an expansion file");
    c_expand->add_option("--fn", expand.fn, "activation")->required()->check(CLI::IsMember({"tanh", "relu"}));
    c_expand->add_option("--terms", expand.terms, "M")->required()->check(CLI::PositiveNumber);
    c_expand->add_option("--vmax", expand.vmax, "domain half-width V (decimal)")->required();
    c_expand->add_option("--digits", expand.digits, "working precision")->capture_default_str()->check(CLI::Range(20, 100000));
    add_output(c_expand, expand.out, "expansion file");

    ErrorsArgs errors;
    auto* c_errors = app.add_subcommand("errors", "tabulate E, H and I on a grid");
    c_errors->add_option("--fn", errors.fn, "activation")->required()->check(CLI::IsMember({"tanh", "relu"}));
    c_errors->add_option("--terms", errors.terms, "M")->required()->check(CLI::PositiveNumber);
    c_errors->add_option("--vmax", errors.vmax, "domain half-width V (decimal)")->required();
    c_errors->add_option("--digits", errors.digits, "coefficient precision")->capture_default_str()->check(CLI::Range(20, 100000));
    c_errors->add_option("--eval-digits", errors.eval_digits, "precision of E, H and I")->capture_default_str()->check(CLI::Range(16, 100000));
    c_errors->add_option("--grid", errors.grid, "grid points")->capture_default_str()->check(CLI::Range(2, 100000000));
    c_errors->add_option("--span", errors.span, "grid extends this far past V")->capture_default_str()->check(CLI::NonNegativeNumber);
    add_output(c_errors, errors.out, "CSV");

    EquivArgs eq;
    auto* c_equiv = app.add_subcommand("equiv", "black-box equivalence test (exit 0 equivalent, 1 not, 2 inconclusive)");
    c_equiv->add_option("--original", eq.original, "original network")->required()->check(CLI::ExistingFile);
    c_equiv->add_option("--under-test", eq.under_test, "network under test")->required()->check(CLI::ExistingFile);
    c_equiv->add_option("--snr", eq.snr, "response SNR in dB (omit for no noise)");
    c_equiv->add_option("--seed", eq.seed, "seed")->capture_default_str();
    c_equiv->add_option("--threshold", eq.threshold, "eta threshold")->capture_default_str()->check(CLI::NonNegativeNumber);
    c_equiv->add_option("--terms", eq.terms, "M")->capture_default_str()->check(CLI::PositiveNumber);
    c_equiv->add_option("--vmax", eq.vmax, "V (decimal)")->capture_default_str();
    c_equiv->add_option("--digits", eq.digits, "precision")->capture_default_str()->check(CLI::Range(20, 100000));
    c_equiv->add_option("--stimuli", eq.stimuli, "fuzz vectors")->capture_default_str()->check(CLI::PositiveNumber);
    c_equiv->add_option("--box", eq.box, "lo,hi per input (default -1,1)");
    add_output(c_equiv, eq.out, "report");

    RangeArgs rb;
    auto* c_range = app.add_subcommand("rangebound", "rigorous output range over a box");
    c_range->add_option("--network", rb.network, "network file")->required()->check(CLI::ExistingFile);
    c_range->add_option("--box", rb.box, "lo,hi per input (one side applies to all)")->required();
    c_range->add_option("--method", rb.method, "amite, taylor or both")->capture_default_str()->check(CLI::IsMember({"amite", "taylor", "both"}));
    c_range->add_option("--terms", rb.terms, "M (default from the hidden width)");
    c_range->add_option("--digits", rb.digits, "precision (default from the hidden width)");
    c_range->add_option("--seed", rb.seed, "seed")->capture_default_str();
    c_range->add_option("--s-init", rb.s_init, "initial safety factor")->capture_default_str();
    c_range->add_option("--output-index", rb.output, "network output to bound")->capture_default_str();
    c_range->add_option("--samples", rb.samples, "samples for the numeric estimate")->capture_default_str();
    c_range->add_flag("--no-timing", rb.no_timing, "write 0 in the runtime column");
    add_output(c_range, rb.out, "CSV");

    NetArgs na;
    auto* c_net = app.add_subcommand("network", "write a random network (optionally perturbed)");
    c_net->add_option("--sizes", na.sizes, "layer sizes, inputs first")->required()->delimiter(',');
    c_net->add_option("--activation", na.activation, "hidden activation")->capture_default_str()->check(CLI::IsMember({"tanh", "relu", "linear"}));
    c_net->add_option("--seed", na.seed, "seed")->capture_default_str();
    c_net->add_option("--perturb", na.perturb, "relative weight perturbation")->capture_default_str()->check(CLI::NonNegativeNumber);
    c_net->add_option("--perturb-seed", na.perturb_seed, "perturbation seed")->capture_default_str();
    add_output(c_net, na.out, "network file");

    try {
        app.parse(argc, argv);
        thread_limit() = threads;
        if (*c_expand) return run_expand(expand);
        if (*c_errors) return run_errors(errors);
        if (*c_equiv) return run_equiv(eq);
        if (*c_range) return run_rangebound(rb);
        if (*c_net) return run_network(na);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeFailure;
    }
    return 0;
}
