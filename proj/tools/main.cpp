// Command-line front end. Every subcommand follows the same shape: parse
// flags, load inputs, call one library entry point, serialize the result.
// No numerical logic lives here, so CLI output byte-matches what the
// library writers produce, and two runs on the same inputs produce
// identical files.
//
// Exit codes: 0 success, 1 validation errors, 2 numerical failures
// (non-convergence, singular systems, nonphysical intermediates), 3 I/O.

#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "stablecf/density.hpp"
#include "stablecf/flow.hpp"
#include "stablecf/jacobi.hpp"
#include "stablecf/model_io.hpp"
#include "stablecf/oracles.hpp"
#include "stablecf/tree.hpp"

namespace {

using nlohmann::ordered_json;
using namespace stablecf;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIo = 3;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Payloads go to --out when given, to stdout otherwise; progress and
// summaries go to stderr so stdout stays machine-clean.
void emit(const std::string& payload, const std::string& out_path) {
    if (out_path.empty()) {
        std::fwrite(payload.data(), 1, payload.size(), stdout);
        return;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + out_path + " for writing");
    out << payload;
    out.flush();
    if (!out) throw IoError("write failure on " + out_path);
}

std::vector<FlowParamRecord> to_records(const std::vector<std::string>& labels,
                                        const std::vector<StableParams>& params) {
    std::vector<FlowParamRecord> records(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) records[i] = {labels[i], params[i]};
    return records;
}

ordered_json params_json(double alpha, const std::vector<std::string>& labels,
                         const std::vector<StableParams>& params) {
    ordered_json doc;
    doc["alpha"] = alpha;
    doc["params"] = ordered_json::array();
    for (std::size_t i = 0; i < params.size(); ++i) {
        doc["params"].push_back({{"node", labels[i]},
                                 {"beta", params[i].beta},
                                 {"gamma", params[i].gamma},
                                 {"delta", params[i].delta}});
    }
    return doc;
}

std::string dump(const ordered_json& doc) { return doc.dump(2) + "\n"; }

// Options shared by every subcommand. The thread count is accepted for
// interface compatibility only: runs are single threaded either way, so
// results never depend on it.
struct CommonOpts {
    std::string out;
    std::string format = "json";
    int threads = 1;
};

void add_common(CLI::App* sub, CommonOpts& o, const char* default_format = "json") {
    o.format = default_format;
    sub->add_option("--out", o.out, "write the payload here instead of stdout");
    sub->add_option("--format", o.format, "payload format")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--threads", o.threads, "hint only; results are independent of it")
        ->check(CLI::PositiveNumber);
}

std::string params_payload(const CommonOpts& o, double alpha,
                           const std::vector<std::string>& labels,
                           const std::vector<StableParams>& params,
                           ordered_json extra = ordered_json::object()) {
    if (o.format == "csv") return flow_params_to_csv(to_records(labels, params));
    ordered_json doc = params_json(alpha, labels, params);
    for (auto& [key, value] : extra.items()) doc[key] = value;
    return dump(doc);
}

int run_forward(const CommonOpts& o, const std::string& model_path) {
    LinearStableModel m = load_model(model_path);
    const std::vector<StableParams> y = forward_params(m);
    if (o.format == "csv") {
        emit(flow_params_to_csv(to_records(m.labels, y)), o.out);
    } else {
        // the JSON payload is a complete observation-side model, directly
        // usable as --model for the posterior and jacobi subcommands
        LinearStableModel observed = m;
        observed.side = Side::y;
        observed.params = y;
        observed.noise.reset();
        emit(model_to_json(observed), o.out);
    }
    std::fprintf(stderr, "forward map of %d sources done\n", static_cast<int>(m.n()));
    return kExitOk;
}

int run_posterior(const CommonOpts& o, const std::string& model_path) {
    LinearStableModel m = load_model(model_path);
    const PosteriorResult post = posterior_params(m);
    static const char* kSystems[] = {"scale", "skew", "shift"};
    ordered_json stats = ordered_json::array();
    for (int s = 0; s < 3; ++s) {
        stats.push_back({{"system", kSystems[s]},
                         {"min_pivot", post.solver_stats[s].min_pivot},
                         {"residual_inf", post.solver_stats[s].residual_inf}});
    }
    emit(params_payload(o, m.alpha, m.labels, post.x_given_y, {{"solver_stats", stats}}),
         o.out);
    double worst = 0.0;
    for (int s = 0; s < 3; ++s) worst = std::max(worst, post.solver_stats[s].residual_inf);
    std::fprintf(stderr, "posterior solved for %d sources, worst residual %.6g\n",
                 static_cast<int>(m.n()), worst);
    return kExitOk;
}

struct JacobiCliOpts {
    std::string model;
    std::string trace;
    double tol = 1e-8;
    int max_iter = 10000;
    double damping = 0.0;
};

int run_jacobi(const CommonOpts& o, const JacobiCliOpts& jo) {
    LinearStableModel m = load_model(jo.model);
    JacobiOptions opts;
    opts.tol = jo.tol;
    opts.max_iter = jo.max_iter;
    opts.damping = jo.damping;
    std::pair<PosteriorResult, JacobiTrace> run;
    try {
        run = jacobi_run(m, opts);
    } catch (const JacobiNotConverged& e) {
        // the partial trace is still worth keeping for diagnosis
        if (!jo.trace.empty()) emit(trace_to_csv(e.trace()), jo.trace);
        throw;
    }
    const JacobiTrace& trace = run.second;
    if (!jo.trace.empty()) emit(trace_to_csv(trace), jo.trace);
    const double final_residual = trace.residual_at(trace.residuals.size() - 1);
    emit(params_payload(o, m.alpha, m.labels, run.first.x_given_y,
                        {{"iterations", trace.final_iterations},
                         {"converged", trace.converged},
                         {"final_residual", final_residual},
                         {"matvecs_per_sweep", trace.matvecs_per_sweep},
                         {"total_matvecs", trace.total_matvecs}}),
         o.out);
    std::fprintf(stderr, "converged in %d sweeps, residual %.6g\n",
                 trace.final_iterations, final_residual);
    return kExitOk;
}

int run_tree(const CommonOpts& o, const std::string& model_path, int root) {
    LinearStableModel m = load_model(model_path);
    if (root < 0 || root >= m.n())
        throw InvalidParams("root " + std::to_string(root) + " outside nodes [0, " +
                            std::to_string(m.n()) + ")");
    const TreeResult result = csp_run(make_tree_model(m, root));
    if (o.format == "csv") {
        emit(flow_params_to_csv(to_records(m.labels, result.marginals)), o.out);
    } else {
        ordered_json doc = params_json(m.alpha, m.labels, result.marginals);
        doc["root"] = root;
        doc["messages"] = ordered_json::array();
        for (const Message& msg : result.messages) {
            doc["messages"].push_back({{"from", m.labels[static_cast<std::size_t>(msg.from)]},
                                       {"to", m.labels[static_cast<std::size_t>(msg.to)]},
                                       {"beta", msg.payload.beta},
                                       {"gamma", msg.payload.gamma},
                                       {"delta", msg.payload.delta}});
        }
        emit(dump(doc), o.out);
    }
    std::fprintf(stderr, "tree pass done, %d marginals from %d messages\n",
                 static_cast<int>(result.marginals.size()),
                 static_cast<int>(result.messages.size()));
    return kExitOk;
}

int run_check(const CommonOpts& o, const std::string& model_path, double tol) {
    LinearStableModel m = load_model(model_path);
    const ConvergenceReport rep = check_convergence_conditions(m, tol);
    if (o.format == "csv") {
        std::string payload = "metric,value\n";
        payload += "rho_R," + fmt17(rep.rho_R) + "\n";
        payload += "rho_absR," + fmt17(rep.rho_absR) + "\n";
        payload += "rho_absR_alpha," + fmt17(rep.rho_absR_alpha) + "\n";
        payload += std::string("condition1_holds,") + (rep.condition1_holds ? "1" : "0") + "\n";
        payload += std::string("condition2_holds,") + (rep.condition2_holds ? "1" : "0") + "\n";
        payload += std::string("normalized,") + (rep.normalized ? "1" : "0") + "\n";
        payload += std::string("ok,") + (rep.ok() ? "1" : "0") + "\n";
        emit(payload, o.out);
    } else {
        ordered_json doc;
        doc["rho_R"] = rep.rho_R;
        doc["rho_absR"] = rep.rho_absR;
        doc["rho_absR_alpha"] = rep.rho_absR_alpha;
        doc["condition1_holds"] = rep.condition1_holds;
        doc["condition2_holds"] = rep.condition2_holds;
        doc["normalized"] = rep.normalized;
        doc["ok"] = rep.ok();
        emit(dump(doc), o.out);
    }
    std::fprintf(stderr, "rho(|R|) = %.6g, rho(|R|^%.6g) = %.6g, rho(R) = %.6g\n",
                 rep.rho_absR, m.alpha, rep.rho_absR_alpha, rep.rho_R);
    std::fprintf(stderr, "scale and skew sweeps contract: %s; shift sweep contracts: %s\n",
                 rep.condition1_holds ? "yes" : "no", rep.condition2_holds ? "yes" : "no");
    if (rep.normalized)
        std::fprintf(stderr, "input was rescaled to unit diagonal before the check\n");
    return kExitOk;
}

struct PdfOpts {
    double alpha = 2.0;
    double beta = 0.0;
    double gamma = 1.0;
    double delta = 0.0;
    std::vector<double> range = {-8.0, 8.0};
    std::size_t n = 1024;
};

int run_pdf(const CommonOpts& o, const PdfOpts& po) {
    const StableParams p{po.alpha, po.beta, po.gamma, po.delta};
    const DensityGrid grid = pdf_from_cf(p, po.range[0], po.range[1], po.n);
    if (o.format == "json") {
        ordered_json doc;
        doc["x0"] = grid.x0;
        doc["dx"] = grid.dx;
        doc["values"] = grid.values;
        emit(dump(doc), o.out);
    } else {
        emit(density_to_csv(grid), o.out);
    }
    std::fprintf(stderr, "density on [%.6g, %.6g), %d points, step %.6g\n", grid.x0,
                 po.range[1], static_cast<int>(grid.values.size()), grid.dx);
    return kExitOk;
}

struct OracleCase {
    std::string name;
    OracleReport report;
};

int run_oracle(const CommonOpts& o, std::uint64_t seed, int reps) {
    std::vector<OracleCase> cases;
    auto conv = [&cases](const std::string& name, StableParams p1, StableParams p2) {
        cases.push_back({name, convolution_oracle(p1, p2)});
    };
    conv("convolution symmetric alpha 2", {2.0, 0.0, 1.0, 0.4}, {2.0, 0.0, 0.7, -0.4});
    conv("convolution skewed alpha 1.7", {1.7, 0.6, 1.2, 0.5}, {1.7, -0.3, 0.8, -1.0});
    conv("convolution log branch alpha 1", {1.0, 1.0, 1.0, 0.0}, {1.0, 1.0, 1.0, 0.0});
    conv("convolution one sided alpha 0.5", {0.5, 1.0, 0.9, 0.2}, {0.5, 1.0, 1.3, 0.0});

    auto slice = [&cases](const std::string& name, double alpha, double a01, double a10,
                          StableParams x1, StableParams x2) {
        Matrix a(2, 2);
        a << 1.0, a01, a10, 1.0;
        cases.push_back({name, slicing_oracle_2var(alpha, a, {x1, x2})});
    };
    slice("slicing gaussian 2x2", 2.0, 0.4, -0.3, {2.0, 0.0, 1.0, 0.5}, {2.0, 0.0, 0.8, -0.2});
    slice("slicing skewed alpha 1.5", 1.5, 0.35, 0.25, {1.5, 0.5, 1.0, 0.0},
          {1.5, -0.4, 0.7, 1.0});
    slice("slicing log branch alpha 1", 1.0, 0.3, -0.2, {1.0, 0.3, 1.0, 0.4},
          {1.0, 0.6, 1.1, -0.5});

    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> skew(-1.0, 1.0);
    std::uniform_real_distribution<double> scale(0.3, 2.0);
    std::uniform_real_distribution<double> shift(-2.0, 2.0);
    static const double kAlphas[] = {0.6, 1.0, 1.3, 1.7, 2.0};
    for (int k = 0; k < reps; ++k) {
        const double alpha = kAlphas[k % 5];
        const StableParams p1{alpha, skew(gen), scale(gen), shift(gen)};
        const StableParams p2{alpha, skew(gen), scale(gen), shift(gen)};
        conv("convolution seeded " + std::to_string(k), p1, p2);
    }

    if (o.format == "csv") {
        std::string payload = "case,max_abs_err,argmax_t_or_x,grid\n";
        for (const OracleCase& c : cases) {
            payload += c.name + "," + fmt17(c.report.max_abs_err) + "," +
                       fmt17(c.report.argmax_t_or_x) + ",\"" + c.report.grid_spec + "\"\n";
        }
        emit(payload, o.out);
    } else {
        ordered_json doc = ordered_json::array();
        for (const OracleCase& c : cases) {
            doc.push_back({{"case", c.name},
                           {"max_abs_err", c.report.max_abs_err},
                           {"argmax_t_or_x", c.report.argmax_t_or_x},
                           {"grid", c.report.grid_spec}});
        }
        emit(dump(doc), o.out);
    }
    double worst = 0.0;
    for (const OracleCase& c : cases) {
        std::fprintf(stderr, "%s: max err %.6g at %.6g\n", c.name.c_str(),
                     c.report.max_abs_err, c.report.argmax_t_or_x);
        worst = std::max(worst, c.report.max_abs_err);
    }
    std::fprintf(stderr, "%d oracle cases, worst deviation %.6g\n",
                 static_cast<int>(cases.size()), worst);
    return kExitOk;
}

struct SynthOpts {
    int n = 376;
    double rho = 0.02;
    std::uint64_t seed = 1;
    std::string prefix;
};

int run_synth(const CommonOpts& o, const SynthOpts& so) {
    const SurrogateInstance sur = synth_planetlab_surrogate(so.n, so.rho, so.seed);
    const std::string flows_path = so.prefix + "flows.csv";
    const std::string topology_path = so.prefix + "topology.csv";
    emit(flow_params_to_csv(sur.records), flows_path);
    emit(topology_to_csv(sur.topology), topology_path);
    // assembling the model right away validates the instance end to end and
    // reports the spectral radii the weights were scaled to hit
    const ObservationModel om = build_observation_model(sur.records, sur.topology,
                                                        sur.partition);
    if (o.format == "csv") {
        std::string payload = "metric,value\n";
        payload += "flows," + flows_path + "\n";
        payload += "topology," + topology_path + "\n";
        payload += "nodes," + std::to_string(so.n) + "\n";
        payload += "target_rho," + fmt17(so.rho) + "\n";
        payload += "seed," + std::to_string(so.seed) + "\n";
        payload += "rho_R," + fmt17(om.conditions.rho_R) + "\n";
        payload += "rho_absR_alpha," + fmt17(om.conditions.rho_absR_alpha) + "\n";
        payload += std::string("conditions_ok,") + (om.conditions.ok() ? "1" : "0") + "\n";
        emit(payload, o.out);
    } else {
        ordered_json doc;
        doc["flows"] = flows_path;
        doc["topology"] = topology_path;
        doc["nodes"] = so.n;
        doc["target_rho"] = so.rho;
        doc["seed"] = so.seed;
        doc["rho_R"] = om.conditions.rho_R;
        doc["rho_absR_alpha"] = om.conditions.rho_absR_alpha;
        doc["conditions_ok"] = om.conditions.ok();
        emit(dump(doc), o.out);
    }
    std::fprintf(stderr, "wrote %s and %s, rho(R) = %.6g\n", flows_path.c_str(),
                 topology_path.c_str(), om.conditions.rho_R);
    return kExitOk;
}

struct FlowReportOpts {
    std::string flows;
    std::string topology;
    std::string solver = "exact";
    double tol = 1e-8;
    int max_iter = 10000;
};

int run_flow_report(const CommonOpts& o, const FlowReportOpts& fo) {
    const std::vector<FlowParamRecord> records = ingest_flow_params(fo.flows);
    const std::vector<FlowEdge> edges = ingest_topology(fo.topology);

    // the records are the observed fits; every other endpoint in the
    // topology is a hidden node to recover
    std::set<std::string> observed;
    for (const FlowParamRecord& r : records) observed.insert(r.node_id);
    std::set<std::string> hidden;
    for (const FlowEdge& e : edges) {
        if (!observed.count(e.src)) hidden.insert(e.src);
        if (!observed.count(e.dst)) hidden.insert(e.dst);
    }
    ObservationPartition partition;
    partition.observed.assign(observed.begin(), observed.end());
    partition.hidden.assign(hidden.begin(), hidden.end());

    const ObservationModel om = build_observation_model(records, edges, partition);
    PosteriorResult post;
    if (fo.solver == "jacobi") {
        JacobiOptions opts;
        opts.tol = fo.tol;
        opts.max_iter = fo.max_iter;
        std::pair<PosteriorResult, JacobiTrace> run = jacobi_run(om.model, opts);
        post = std::move(run.first);
        std::fprintf(stderr, "jacobi converged in %d sweeps\n",
                     run.second.final_iterations);
    } else {
        post = posterior_params(om.model);
    }
    const FlowReport rep = report(post, om);
    emit(o.format == "csv" ? report_tsv(rep) : report_json(rep), o.out);
    int flagged = 0;
    for (const FlowReportRow& row : rep.rows) flagged += row.flagged ? 1 : 0;
    std::fprintf(stderr, "%d hidden nodes recovered, %d flagged\n",
                 static_cast<int>(rep.rows.size()), flagged);
    return kExitOk;
}

// When --format json is anywhere on the command line, errors also go to
// stderr as one machine-readable JSON line. Scanned from raw argv so the
// promise holds even when parsing itself is what failed.
bool wants_json_errors(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--format=json") == 0) return true;
        if (std::strcmp(argv[i], "--format") == 0 && i + 1 < argc &&
            std::strcmp(argv[i + 1], "json") == 0)
            return true;
    }
    return false;
}

int fail(bool json_errors, int code, const std::string& message) {
    std::fprintf(stderr, "stablecf: %s\n", message.c_str());
    if (json_errors) {
        static const char* kCategories[] = {"", "validation", "numerical", "io"};
        const ordered_json err = {
            {"error", {{"category", kCategories[code]}, {"exit", code}, {"message", message}}}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    const bool json_errors = wants_json_errors(argc, argv);

    CLI::App app{"exact and iterative inference for linear models with stable sources"};
    app.require_subcommand(1);

    std::string model_path;
    CommonOpts forward_o;
    CLI::App* forward_cmd =
        app.add_subcommand("forward", "map source parameters to observation parameters");
    forward_cmd->add_option("--model", model_path, "source-side model JSON")->required();
    add_common(forward_cmd, forward_o);

    std::string posterior_model;
    CommonOpts posterior_o;
    CLI::App* posterior_cmd =
        app.add_subcommand("posterior", "recover source parameters by direct elimination");
    posterior_cmd->add_option("--model", posterior_model, "observation-side model JSON")
        ->required();
    add_common(posterior_cmd, posterior_o);

    JacobiCliOpts jacobi_o;
    CommonOpts jacobi_common;
    CLI::App* jacobi_cmd =
        app.add_subcommand("jacobi", "recover source parameters by fixed-point sweeps");
    jacobi_cmd->add_option("--model", jacobi_o.model, "observation-side model JSON")
        ->required();
    jacobi_cmd->add_option("--tol", jacobi_o.tol, "residual tolerance")
        ->check(CLI::PositiveNumber);
    jacobi_cmd->add_option("--max-iter", jacobi_o.max_iter, "sweep budget")
        ->check(CLI::PositiveNumber);
    jacobi_cmd->add_option("--damping", jacobi_o.damping, "fraction of the previous state kept")
        ->check(CLI::Range(0.0, 1.0));
    jacobi_cmd->add_option("--trace", jacobi_o.trace, "write per-sweep residuals here as CSV");
    add_common(jacobi_cmd, jacobi_common);

    std::string tree_model;
    int tree_root = 0;
    CommonOpts tree_o;
    CLI::App* tree_cmd =
        app.add_subcommand("tree", "exact marginals on acyclic models by message passing");
    tree_cmd->add_option("--model", tree_model, "observation-side model JSON")->required();
    tree_cmd->add_option("--root", tree_root, "node the schedule is rooted at");
    add_common(tree_cmd, tree_o);

    std::string check_model;
    double check_tol = 1e-6;
    CommonOpts check_o;
    CLI::App* check_cmd =
        app.add_subcommand("check", "spectral radii and sweep convergence conditions");
    check_cmd->add_option("--model", check_model, "model JSON")->required();
    check_cmd->add_option("--tol", check_tol, "spectral estimate tolerance")
        ->check(CLI::PositiveNumber);
    add_common(check_cmd, check_o);

    PdfOpts pdf_o;
    CommonOpts pdf_common;
    CLI::App* pdf_cmd = app.add_subcommand("pdf", "density grid by numeric inversion");
    pdf_cmd->add_option("--alpha", pdf_o.alpha, "tail exponent")->required();
    pdf_cmd->add_option("--beta", pdf_o.beta, "skew");
    pdf_cmd->add_option("--gamma", pdf_o.gamma, "scale");
    pdf_cmd->add_option("--delta", pdf_o.delta, "shift");
    pdf_cmd->add_option("--range", pdf_o.range, "grid range, right endpoint excluded")
        ->expected(2);
    pdf_cmd->add_option("--n", pdf_o.n, "grid points, a power of two in [64, 4096]");
    add_common(pdf_cmd, pdf_common, "csv");

    std::uint64_t oracle_seed = 0;
    int oracle_reps = 0;
    CommonOpts oracle_o;
    CLI::App* oracle_cmd =
        app.add_subcommand("oracle", "cross-check the parameter algebra against cf arithmetic");
    oracle_cmd->add_option("--seed", oracle_seed, "seed for extra randomized cases");
    oracle_cmd->add_option("--reps", oracle_reps, "number of extra randomized cases")
        ->check(CLI::NonNegativeNumber);
    add_common(oracle_cmd, oracle_o);

    SynthOpts synth_o;
    CommonOpts synth_common;
    CLI::App* synth_cmd =
        app.add_subcommand("synth", "generate a synthetic aggregation instance as CSV");
    synth_cmd->add_option("--n", synth_o.n, "hidden and observed nodes per side");
    synth_cmd->add_option("--rho", synth_o.rho, "target spectral radius in (0, 1)");
    synth_cmd->add_option("--seed", synth_o.seed, "instance seed");
    synth_cmd->add_option("--prefix", synth_o.prefix, "output path prefix for the two CSVs")
        ->required();
    add_common(synth_cmd, synth_common);

    FlowReportOpts flow_o;
    CommonOpts flow_common;
    CLI::App* flow_cmd =
        app.add_subcommand("flow-report", "recover per-node parameters from flow CSVs");
    flow_cmd->add_option("--flows", flow_o.flows, "observed parameter records CSV")
        ->required();
    flow_cmd->add_option("--topology", flow_o.topology, "weighted edges CSV")->required();
    flow_cmd->add_option("--solver", flow_o.solver, "inference route")
        ->check(CLI::IsMember({"exact", "jacobi"}));
    flow_cmd->add_option("--tol", flow_o.tol, "jacobi residual tolerance")
        ->check(CLI::PositiveNumber);
    flow_cmd->add_option("--max-iter", flow_o.max_iter, "jacobi sweep budget")
        ->check(CLI::PositiveNumber);
    add_common(flow_cmd, flow_common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        if (rc == 0) return kExitOk;
        if (json_errors) {
            const ordered_json err = {{"error",
                                       {{"category", "validation"},
                                        {"exit", kExitValidation},
                                        {"message", e.what()}}}};
            std::fprintf(stderr, "%s\n", err.dump().c_str());
        }
        return kExitValidation;
    }

    try {
        if (*forward_cmd) return run_forward(forward_o, model_path);
        if (*posterior_cmd) return run_posterior(posterior_o, posterior_model);
        if (*jacobi_cmd) return run_jacobi(jacobi_common, jacobi_o);
        if (*tree_cmd) return run_tree(tree_o, tree_model, tree_root);
        if (*check_cmd) return run_check(check_o, check_model, check_tol);
        if (*pdf_cmd) return run_pdf(pdf_common, pdf_o);
        if (*oracle_cmd) return run_oracle(oracle_o, oracle_seed, oracle_reps);
        if (*synth_cmd) return run_synth(synth_common, synth_o);
        if (*flow_cmd) return run_flow_report(flow_common, flow_o);
        return fail(json_errors, kExitValidation, "no subcommand selected");
    } catch (const ValidationError& e) {
        return fail(json_errors, kExitValidation, e.what());
    } catch (const NumericalError& e) {
        return fail(json_errors, kExitNumerical, e.what());
    } catch (const IoError& e) {
        return fail(json_errors, kExitIo, e.what());
    } catch (const std::exception& e) {
        return fail(json_errors, kExitNumerical, std::string("unexpected failure: ") + e.what());
    }
}
