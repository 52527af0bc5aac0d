#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stablecf/algebra.hpp"
#include "stablecf/errors.hpp"
#include "stablecf/exact.hpp"
#include "stablecf/matrix.hpp"
#include "stablecf/model.hpp"
#include "stablecf/params.hpp"
#include "stablecf/spectral.hpp"

// Flow-measurement plumbing: read per-node fitted stable parameters and a
// weighted topology, assemble the observed/hidden linear model, and render
// recovered marginals as a per-node table. Fitting raw samples to stable
// parameters happens upstream; this layer starts at the fitted numbers.

namespace stablecf {

struct FlowParamRecord {
    std::string node_id;
    StableParams params;
};

struct FlowEdge {
    std::string src;  // hidden source node
    std::string dst;  // observed aggregate it feeds
    double weight = 0.0;
};

struct ObservationPartition {
    std::vector<std::string> observed;
    std::vector<std::string> hidden;
};

namespace detail {

inline std::string csv_trim(const std::string& s) {
    std::size_t lo = s.find_first_not_of(" \t\r");
    if (lo == std::string::npos) return "";
    std::size_t hi = s.find_last_not_of(" \t\r");
    return s.substr(lo, hi - lo + 1);
}

inline std::vector<std::string> csv_fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(csv_trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline double csv_number(const std::string& field, const std::string& where) {
    if (field.empty()) throw ParseError(where + ": empty numeric field");
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size())
        throw ParseError(where + ": '" + field + "' is not a number");
    return v;
}

}  // namespace detail

inline std::vector<FlowParamRecord> ingest_flow_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || detail::csv_trim(line) != "node_id,alpha,beta,gamma,delta")
        throw ParseError(path + ": header must be node_id,alpha,beta,gamma,delta");

    std::vector<FlowParamRecord> records;
    std::vector<int> lines;                 // source line per record, for diagnostics
    std::map<std::string, int> seen;
    for (int lineno = 2; std::getline(in, line); ++lineno) {
        if (detail::csv_trim(line).empty()) continue;
        const std::string where = path + " line " + std::to_string(lineno);
        const auto fields = detail::csv_fields(line);
        if (fields.size() != 5)
            throw ParseError(where + ": expected 5 fields, got " +
                             std::to_string(fields.size()));
        FlowParamRecord rec;
        rec.node_id = fields[0];
        if (rec.node_id.empty()) throw ParseError(where + ": empty node_id");
        rec.params.alpha = detail::csv_number(fields[1], where);
        rec.params.beta = detail::csv_number(fields[2], where);
        rec.params.gamma = detail::csv_number(fields[3], where);
        rec.params.delta = detail::csv_number(fields[4], where);
        try {
            validate(rec.params);
        } catch (const InvalidParams& e) {
            throw InvalidParams(where + ": " + e.what());
        }
        const auto dup = seen.find(rec.node_id);
        if (dup != seen.end())
            throw ParseError(where + ": node " + rec.node_id + " already defined on line " +
                             std::to_string(dup->second));
        seen.emplace(rec.node_id, lineno);
        records.push_back(std::move(rec));
        lines.push_back(lineno);
    }
    if (records.empty()) throw InvalidParams(path + ": no flow records");

    const double alpha = records.front().params.alpha;
    std::string offenders;
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].params.alpha != alpha) {
            offenders += (offenders.empty() ? "" : ", ") + std::string("line ") +
                         std::to_string(lines[i]) + " (alpha " +
                         std::to_string(records[i].params.alpha) + ")";
        }
    }
    if (!offenders.empty())
        throw AlphaMismatch(path + ": records must share one alpha; line " +
                            std::to_string(lines.front()) + " has " + std::to_string(alpha) +
                            " but " + offenders + " disagree");
    return records;
}

inline std::vector<FlowEdge> ingest_topology(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || detail::csv_trim(line) != "src_id,dst_id,weight")
        throw ParseError(path + ": header must be src_id,dst_id,weight");
    std::vector<FlowEdge> edges;
    for (int lineno = 2; std::getline(in, line); ++lineno) {
        if (detail::csv_trim(line).empty()) continue;
        const std::string where = path + " line " + std::to_string(lineno);
        const auto fields = detail::csv_fields(line);
        if (fields.size() != 3)
            throw ParseError(where + ": expected 3 fields, got " +
                             std::to_string(fields.size()));
        if (fields[0].empty() || fields[1].empty())
            throw ParseError(where + ": empty node id");
        edges.push_back({fields[0], fields[1], detail::csv_number(fields[2], where)});
    }
    return edges;
}

// Emitters matching the two ingest formats byte for byte after a round trip
// (full-precision %.17g on every number).
inline std::string flow_params_to_csv(const std::vector<FlowParamRecord>& records) {
    std::string out = "node_id,alpha,beta,gamma,delta\n";
    char buf[160];
    for (const FlowParamRecord& r : records) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%.17g\n", r.params.alpha,
                      r.params.beta, r.params.gamma, r.params.delta);
        out += r.node_id;
        out += buf;
    }
    return out;
}

inline std::string topology_to_csv(const std::vector<FlowEdge>& edges) {
    std::string out = "src_id,dst_id,weight\n";
    char buf[48];
    for (const FlowEdge& e : edges) {
        std::snprintf(buf, sizeof buf, ",%.17g\n", e.weight);
        out += e.src;
        out += ',';
        out += e.dst;
        out += buf;
    }
    return out;
}

// The assembled system in normalized coordinates: model.A has unit diagonal
// and model.params are the observed records rescaled accordingly. Recovered
// marginals unmap through x_i = scale_shift(x_norm_i, d_i^{-1/2}, 0).
struct ObservationModel {
    LinearStableModel model;
    Vector d;
    std::vector<std::string> observed_ids;  // row order
    std::vector<std::string> hidden_ids;    // column order
    ConvergenceReport conditions;
};

inline ObservationModel build_observation_model(const std::vector<FlowParamRecord>& records,
                                                const std::vector<FlowEdge>& topology,
                                                const ObservationPartition& partition) {
    ObservationModel om;
    om.observed_ids = partition.observed;
    om.hidden_ids = partition.hidden;
    std::sort(om.observed_ids.begin(), om.observed_ids.end());
    std::sort(om.hidden_ids.begin(), om.hidden_ids.end());
    auto dedup = [](std::vector<std::string>& ids, const char* which) {
        if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
            throw InvalidParams(std::string(which) + " set lists a node twice");
    };
    dedup(om.observed_ids, "observed");
    dedup(om.hidden_ids, "hidden");
    if (om.hidden_ids.empty()) throw InvalidParams("hidden set is empty; nothing to infer");
    if (om.observed_ids.empty()) throw InvalidParams("observed set is empty; nothing to condition on");
    for (const std::string& id : om.observed_ids) {
        if (std::binary_search(om.hidden_ids.begin(), om.hidden_ids.end(), id))
            throw InvalidParams("node " + id + " is both observed and hidden");
    }
    if (om.observed_ids.size() != om.hidden_ids.size())
        throw ModelShapeError("need equally many observed and hidden nodes for a square system; got " +
                              std::to_string(om.observed_ids.size()) + " observed, " +
                              std::to_string(om.hidden_ids.size()) + " hidden");

    std::map<std::string, int> obs_index, hid_index;
    for (std::size_t i = 0; i < om.observed_ids.size(); ++i)
        obs_index[om.observed_ids[i]] = static_cast<int>(i);
    for (std::size_t i = 0; i < om.hidden_ids.size(); ++i)
        hid_index[om.hidden_ids[i]] = static_cast<int>(i);

    std::map<std::string, const StableParams*> fitted;
    for (const FlowParamRecord& rec : records) {
        if (!obs_index.count(rec.node_id) && !hid_index.count(rec.node_id))
            throw InvalidParams("record for node " + rec.node_id + " outside the partition");
        if (!fitted.emplace(rec.node_id, &rec.params).second)
            throw InvalidParams("duplicate record for node " + rec.node_id);
    }

    const int n = static_cast<int>(om.observed_ids.size());
    Matrix a = Matrix::Zero(n, n);
    for (const FlowEdge& e : topology) {
        const auto dst = obs_index.find(e.dst);
        const auto src = hid_index.find(e.src);
        if (dst == obs_index.end() || src == hid_index.end())
            throw ModelShapeError("edge " + e.src + " -> " + e.dst +
                                  " does not map a hidden source to an observed aggregate");
        if (!std::isfinite(e.weight))
            throw InvalidParams("edge " + e.src + " -> " + e.dst + " has a non-finite weight");
        if (a(dst->second, src->second) != 0.0)
            throw ModelShapeError("duplicate edge " + e.src + " -> " + e.dst);
        a(dst->second, src->second) = e.weight;
    }

    auto normalized = normalize_unit_diagonal(a);
    om.d = std::move(normalized.second);

    om.model.A = std::move(normalized.first);
    om.model.side = Side::y;
    om.model.labels = om.observed_ids;
    for (int i = 0; i < n; ++i) {
        const auto rec = fitted.find(om.observed_ids[static_cast<std::size_t>(i)]);
        if (rec == fitted.end())
            throw InvalidParams("no fitted parameters for observed node " +
                                om.observed_ids[static_cast<std::size_t>(i)]);
        if (i == 0) om.model.alpha = rec->second->alpha;
        om.model.params.push_back(scale_shift(*rec->second, 1.0 / std::sqrt(om.d(i)), 0.0));
    }
    validate_model(om.model);
    om.conditions = check_convergence_conditions(om.model.A, om.model.alpha);
    return om;
}

struct SurrogateInstance {
    std::vector<FlowParamRecord> records;
    std::vector<FlowEdge> topology;
    ObservationPartition partition;
};

// Synthetic instance shaped like the measured deployments: one-sided
// alpha = 1/2 observations with scales around 1e-4 and shifts around 1, a
// sparse aggregation topology, and the off-diagonal weights rescaled so the
// normalized system's spectral radius lands on target_rho. Deterministic
// for a given seed; single-threaded by construction.
inline SurrogateInstance synth_planetlab_surrogate(int n, double target_rho,
                                                   std::uint64_t seed) {
    if (n < 2) throw InvalidParams("a surrogate needs at least 2 nodes");
    if (!(target_rho > 0.0 && target_rho < 1.0))
        throw InvalidParams("target spectral radius must sit in (0, 1)");

    std::mt19937_64 g(seed);
    auto uniform = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(g);
    };

    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) a(i, i) = uniform(1.0, 4.0);
    const int fanin = std::min(3, n - 1);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < fanin; ++k) {
            int j;
            do {
                j = static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(g));
            } while (j == i || a(i, j) != 0.0);
            a(i, j) = uniform(0.5, 1.5);
        }
    }

    // every row has off-diagonal mass and every node out-degree >= 1, so the
    // normalized residual has a cycle and a strictly positive radius; scaling
    // the off-diagonal scales that radius linearly
    const Matrix r =
        Matrix::Identity(n, n) - normalize_unit_diagonal(a).first;
    const double rho0 = spectral_radius(r, 1e-8);
    if (!(rho0 > 0.0))
        throw NumericalError("surrogate structure degenerated to zero spectral radius");
    const double scale = target_rho / rho0;

    int width = 1;
    for (int v = n - 1; v >= 10; v /= 10) ++width;
    auto name = [&](char prefix, int i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%c%0*d", prefix, width, i);
        return std::string(buf);
    };

    SurrogateInstance inst;
    for (int i = 0; i < n; ++i) {
        inst.partition.hidden.push_back(name('h', i));
        inst.partition.observed.push_back(name('o', i));
        StableParams p{0.5, 1.0, uniform(0.5e-4, 2e-4), uniform(0.5, 1.5)};
        inst.records.push_back({name('o', i), p});
    }
    for (int i = 0; i < n; ++i) {
        inst.topology.push_back({name('h', i), name('o', i), a(i, i)});
        for (int j = 0; j < n; ++j) {
            if (j != i && a(i, j) != 0.0)
                inst.topology.push_back({name('h', j), name('o', i), scale * a(i, j)});
        }
    }
    return inst;
}

struct FlowReportRow {
    std::string node_id;
    double beta = 0.0;
    double gamma = 0.0;
    double delta = 0.0;
    bool flagged = false;
    std::string note;
};

struct FlowReport {
    std::vector<FlowReportRow> rows;
    std::string storage_note;
};

// Per-node table of recovered marginals, unmapped to the original
// coordinates and flagged where the recovered law degenerates or puts flow
// mass below zero.
inline FlowReport report(const PosteriorResult& results, const ObservationModel& om) {
    if (results.x_given_y.size() != om.hidden_ids.size())
        throw ModelShapeError("result has " + std::to_string(results.x_given_y.size()) +
                              " marginals for " + std::to_string(om.hidden_ids.size()) +
                              " hidden nodes");
    FlowReport rep;
    rep.storage_note =
        "each node stores 4 fitted parameters; an equivalent histogram summary "
        "needs about 40 bin values, roughly 10x the space";
    for (std::size_t i = 0; i < om.hidden_ids.size(); ++i) {
        const StableParams p = scale_shift(results.x_given_y[i],
                                           1.0 / std::sqrt(om.d(static_cast<int>(i))), 0.0);
        FlowReportRow row;
        row.node_id = om.hidden_ids[i];
        row.beta = p.beta;
        row.gamma = p.gamma;
        row.delta = p.delta;
        if (p.gamma == 0.0) {
            row.flagged = true;
            row.note = "scale collapsed to a point mass";
        } else if (p.alpha == 0.5 && p.beta == 1.0 && p.delta - p.gamma < 0.0) {
            row.flagged = true;
            row.note = "support crosses zero";
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

inline std::string report_tsv(const FlowReport& rep) {
    std::string out = "node_id\tbeta\tgamma\tdelta\tflagged\tnote\n";
    char buf[96];
    for (const FlowReportRow& row : rep.rows) {
        out += row.node_id;
        std::snprintf(buf, sizeof buf, "\t%.17g\t%.17g\t%.17g\t%d\t", row.beta, row.gamma,
                      row.delta, row.flagged ? 1 : 0);
        out += buf;
        out += row.note;
        out += '\n';
    }
    return out;
}

inline std::string report_json(const FlowReport& rep) {
    nlohmann::json rows = nlohmann::json::array();
    for (const FlowReportRow& row : rep.rows) {
        rows.push_back({{"node_id", row.node_id},
                        {"beta", row.beta},
                        {"gamma", row.gamma},
                        {"delta", row.delta},
                        {"flagged", row.flagged},
                        {"note", row.note}});
    }
    return nlohmann::json{{"rows", rows}, {"storage_note", rep.storage_note}}.dump(2) + "\n";
}

}  // namespace stablecf
