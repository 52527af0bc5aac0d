#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stablecf/errors.hpp"
#include "stablecf/model.hpp"

// Model files are JSON: {"alpha", "labels", "A" (row-major nested arrays),
// "side": "x"|"y", "params": [[beta,gamma,delta], ...], "noise": optional}.
// Parameter rows may carry a leading alpha ([alpha,beta,gamma,delta]), which
// must then agree with the header. The writer emits 17 significant digits so
// a round trip reproduces every double bit for bit.

namespace stablecf {

namespace detail {

inline double json_number(const nlohmann::json& j, const std::string& where) {
    if (!j.is_number()) throw ParseError(where + ": expected a number");
    return j.get<double>();
}

inline StableParams parse_param_row(const nlohmann::json& row, double model_alpha,
                                    const std::string& where) {
    if (!row.is_array() || (row.size() != 3 && row.size() != 4))
        throw ParseError(where + ": expected [beta,gamma,delta] or [alpha,beta,gamma,delta]");
    StableParams p;
    std::size_t k = 0;
    if (row.size() == 4) {
        p.alpha = json_number(row[k], where);
        ++k;
        if (p.alpha != model_alpha)
            throw AlphaMismatch(where + ": row alpha " + std::to_string(p.alpha) +
                                " disagrees with header alpha " + std::to_string(model_alpha));
    } else {
        p.alpha = model_alpha;
    }
    p.beta = json_number(row[k++], where);
    p.gamma = json_number(row[k++], where);
    p.delta = json_number(row[k], where);
    return p;
}

inline std::vector<StableParams> parse_param_block(const nlohmann::json& block,
                                                   double model_alpha, Eigen::Index n,
                                                   const std::string& name) {
    if (!block.is_array()) throw ParseError(name + ": expected an array of parameter rows");
    if (static_cast<Eigen::Index>(block.size()) != n)
        throw ParseError(name + ": expected " + std::to_string(n) + " rows, got " +
                         std::to_string(block.size()) +
                         (static_cast<Eigen::Index>(block.size()) < n
                              ? " (row " + std::to_string(block.size()) + " missing)"
                              : ""));
    std::vector<StableParams> out;
    out.reserve(block.size());
    for (std::size_t i = 0; i < block.size(); ++i)
        out.push_back(parse_param_row(block[i], model_alpha, name + " row " + std::to_string(i)));
    return out;
}

inline void write_number(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

inline void write_param_row(std::string& out, const StableParams& p) {
    out += '[';
    write_number(out, p.beta);
    out += ',';
    write_number(out, p.gamma);
    out += ',';
    write_number(out, p.delta);
    out += ']';
}

}  // namespace detail

inline LinearStableModel parse_model_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("model file must be a JSON object");
    for (const char* field : {"alpha", "labels", "A", "side", "params"}) {
        if (!j.contains(field)) throw ParseError(std::string("missing field \"") + field + "\"");
    }

    LinearStableModel m;
    m.alpha = detail::json_number(j["alpha"], "alpha");

    const auto& side = j["side"];
    if (!side.is_string() || (side != "x" && side != "y"))
        throw ParseError("side must be \"x\" or \"y\"");
    m.side = side == "x" ? Side::x : Side::y;

    const auto& rows = j["A"];
    if (!rows.is_array() || rows.empty()) throw ParseError("A: expected a non-empty array of rows");
    const auto n = static_cast<Eigen::Index>(rows.size());
    m.A.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
            throw ParseError("A row " + std::to_string(i) + ": expected " + std::to_string(n) +
                             " entries");
        for (Eigen::Index k = 0; k < n; ++k)
            m.A(i, k) = detail::json_number(row[static_cast<std::size_t>(k)],
                                            "A[" + std::to_string(i) + "][" + std::to_string(k) +
                                                "]");
    }

    const auto& labels = j["labels"];
    if (!labels.is_array()) throw ParseError("labels: expected an array of strings");
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!labels[i].is_string())
            throw ParseError("labels[" + std::to_string(i) + "]: expected a string");
        m.labels.push_back(labels[i].get<std::string>());
    }

    m.params = detail::parse_param_block(j["params"], m.alpha, n, "params");
    if (j.contains("noise"))
        m.noise = detail::parse_param_block(j["noise"], m.alpha, n, "noise");

    validate_model(m);
    return m;
}

inline LinearStableModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failure on " + path);
    try {
        return parse_model_json(buf.str());
    } catch (ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline std::string model_to_json(const LinearStableModel& m) {
    validate_model(m);
    std::string out;
    out += "{\n  \"alpha\": ";
    detail::write_number(out, m.alpha);
    out += ",\n  \"labels\": [";
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        if (i) out += ", ";
        out += nlohmann::json(m.labels[i]).dump();  // quoting and escaping
    }
    out += "],\n  \"A\": [\n";
    for (Eigen::Index i = 0; i < m.n(); ++i) {
        out += "    [";
        for (Eigen::Index k = 0; k < m.n(); ++k) {
            if (k) out += ", ";
            detail::write_number(out, m.A(i, k));
        }
        out += i + 1 < m.n() ? "],\n" : "]\n";
    }
    out += "  ],\n  \"side\": \"";
    out += side_name(m.side);
    out += "\",\n  \"params\": [\n";
    for (std::size_t i = 0; i < m.params.size(); ++i) {
        out += "    ";
        detail::write_param_row(out, m.params[i]);
        out += i + 1 < m.params.size() ? ",\n" : "\n";
    }
    out += "  ]";
    if (m.noise) {
        out += ",\n  \"noise\": [\n";
        for (std::size_t i = 0; i < m.noise->size(); ++i) {
            out += "    ";
            detail::write_param_row(out, (*m.noise)[i]);
            out += i + 1 < m.noise->size() ? ",\n" : "\n";
        }
        out += "  ]";
    }
    out += "\n}\n";
    return out;
}

inline void save_model(const LinearStableModel& m, const std::string& path) {
    const std::string text = model_to_json(m);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write failure on " + path);
}

}  // namespace stablecf
