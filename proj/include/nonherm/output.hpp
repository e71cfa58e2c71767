// output.hpp - trajectory tables, CSV and JSON emission.

#pragma once

#include "nonherm/config.hpp"
#include "nonherm/scenarios.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace nonherm {

struct OutputTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw Error(ErrorCode::invalid_argument, "OutputTable::column", "no column '" + name + "'");
    }
};

namespace output_detail {

inline constexpr double absent = std::numeric_limits<double>::quiet_NaN();

inline double finite_or_absent(double x) { return std::isfinite(x) ? x : absent; }

inline std::vector<double> full_row(const ScenarioResult& r, std::size_t k) {
    const BasisSample& sample = r.phases.track.node(k);
    const EigenFrame& f = sample.frame;
    const PopulationRecord& rec = r.records[k];
    const AdiabaticCriterion& crit = r.criteria[k];
    const Conventions& conv = r.config.conventions;
    const bool has_e = conv.e && rec.e.has_value();
    return {
        rec.s,
        f.p.w.real(),
        f.p.w.imag(),
        f.p.z.real(),
        f.p.z.imag(),
        f.energy[0].real(),
        f.energy[0].imag(),
        f.energy[1].real(),
        f.energy[1].imag(),
        conv.c ? std::abs(rec.c[0]) : absent,
        conv.c ? std::abs(rec.c[1]) : absent,
        conv.d ? std::abs(rec.d[0]) : absent,
        conv.d ? std::abs(rec.d[1]) : absent,
        has_e ? std::abs((*rec.e)[0]) : absent,
        has_e ? std::abs((*rec.e)[1]) : absent,
        rec.alpha,
        rec.norm_sq,
        conv.c ? finite_or_absent(ratio(rec.c[1], rec.c[0])) : absent,
        conv.d ? finite_or_absent(ratio(rec.d[1], rec.d[0])) : absent,
        crit.crit_12,
        crit.crit_21,
    };
}

}  // namespace output_detail

inline OutputTable make_output_table(const ScenarioResult& r) {
    const auto& all = output_column_names();
    std::vector<std::size_t> pick;
    if (r.config.output_columns.empty()) {
        for (std::size_t i = 0; i < all.size(); ++i) pick.push_back(i);
    } else {
        for (const auto& name : r.config.output_columns) {
            auto it = std::find(all.begin(), all.end(), name);
            if (it == all.end()) {
                throw Error(ErrorCode::config_error, "make_output_table", "unknown output column '" + name + "'");
            }
            pick.push_back(static_cast<std::size_t>(it - all.begin()));
        }
    }
    OutputTable t;
    for (auto i : pick) t.header.push_back(all[i]);
    t.rows.reserve(r.records.size());
    for (std::size_t k = 0; k < r.records.size(); ++k) {
        const auto full = output_detail::full_row(r, k);
        std::vector<double> row;
        row.reserve(pick.size());
        for (auto i : pick) row.push_back(full[i]);
        t.rows.push_back(std::move(row));
    }
    return t;
}

// 17 significant digits; NaN prints as "nan".
inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_csv(std::ostream& out, const OutputTable& t) {
    for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
        out << '\n';
    }
}

inline OutputTable read_csv(std::istream& in) {
    OutputTable t;
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::invalid_argument, "read_csv", "missing header row");
    }
    t.header = config_detail::split_list(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            const std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            if (cell == "nan") {
                row.push_back(output_detail::absent);
            } else {
                char* end = nullptr;
                const double v = std::strtod(cell.c_str(), &end);
                if (cell.empty() || end != cell.c_str() + cell.size()) {
                    throw Error(ErrorCode::invalid_argument, "read_csv", "bad cell '" + cell + "'");
                }
                row.push_back(v);
            }
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (row.size() != t.header.size()) {
            throw Error(ErrorCode::invalid_argument, "read_csv", "row width differs from header");
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------- JSON ------------------------------------

inline nlohmann::json json_number(double x) {
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

inline nlohmann::json summary_json(const ScenarioResult& r) {
    nlohmann::json j;
    j["initial_branch"] = r.initial_branch + 1;
    j["false_inversion"] = r.artifacts.false_inversion;
    j["false_adiabaticity"] = r.artifacts.false_adiabaticity;
    j["max_ratio_c21"] = json_number(r.artifacts.max_ratio_c21);
    j["max_ratio_d21"] = json_number(r.artifacts.max_ratio_d21);
    j["max_ratio_c12"] = json_number(r.artifacts.max_ratio_c12);
    j["final_ratio_d12"] = json_number(r.artifacts.final_ratio_d12);
    j["e_available"] = r.e_available;
    j["hat_scale"] = json_number(r.hat_scale);
    if (r.flip) j["flip"] = to_string(*r.flip);
    if (r.holonomy) {
        nlohmann::json h;
        h["exchanged"] = r.holonomy->exchanged;
        for (std::size_t a = 0; a < branch_count; ++a) {
            h["factor"].push_back({json_number(r.holonomy->factor[a].real()), json_number(r.holonomy->factor[a].imag())});
            h["matched"].push_back(r.holonomy->matched[a] + 1);
            h["overlap"].push_back(json_number(r.holonomy->overlap[a]));
        }
        j["holonomy"] = h;
    }
    return j;
}

inline nlohmann::json to_json(const ScenarioResult& r, const OutputTable& t) {
    nlohmann::json j;
    j["scenario"] = r.config.name;
    j["columns"] = t.header;
    auto& rows = j["rows"] = nlohmann::json::array();
    for (const auto& row : t.rows) {
        nlohmann::json jr = nlohmann::json::array();
        for (double x : row) jr.push_back(json_number(x));
        rows.push_back(std::move(jr));
    }
    j["summary"] = summary_json(r);
    j["diagnostics"] = r.diagnostics;
    return j;
}

inline nlohmann::json scenario_json(const ScenarioConfig& c) {
    nlohmann::json j;
    j["name"] = c.name;
    j["description"] = c.description;
    j["path_kind"] = to_string(c.path_kind);
    j["initial_state"] = to_string(c.initial);
    j["steps"] = c.steps;
    j["parameters"] = c.parameters;
    return j;
}

inline nlohmann::json sweep_json(const std::string& scenario, const std::string& parameter,
                                 const std::vector<SweepSummary>& rows) {
    nlohmann::json j;
    j["scenario"] = scenario;
    j["parameter"] = parameter;
    auto& out = j["results"] = nlohmann::json::array();
    for (const auto& s : rows) {
        nlohmann::json r;
        r["value"] = s.value;
        r["ok"] = s.ok;
        if (!s.ok) {
            r["error"] = s.error;
        } else {
            r["false_inversion"] = s.false_inversion;
            r["false_adiabaticity"] = s.false_adiabaticity;
            r["final_ratio_c21"] = json_number(s.final_ratio_c21);
            r["final_ratio_d21"] = json_number(s.final_ratio_d21);
            r["final_norm_sq"] = json_number(s.final_norm_sq);
            if (s.flip) r["flip"] = to_string(*s.flip);
            if (s.holonomy) r["exchanged"] = s.holonomy->exchanged;
        }
        out.push_back(std::move(r));
    }
    return j;
}

}  // namespace nonherm
