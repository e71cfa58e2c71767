// config.hpp - scenario configuration files.
//
// Flat `key = value` lines grouped in [scenario], [path], [numerics] and
// [output] sections; `#` and `;` start comments. A [scenario] `base` key
// starts from a builtin scenario and the remaining keys override it.
//
//   [scenario]
//   name = loop_slow
//   base = fig5
//   initial_state = branch1        # branch1 | branch2 | explicit
//   initial_vector = 1, 0, 0, 0    # re0, im0, re1, im1 (explicit only)
//   [path]
//   kind = ep_loop                 # gaussian_pulse | ep_loop | custom_table
//   gamma = 0.5
//   phi = pi/4
//   T = 400
//   table = path.csv               # custom_table: s,re_w,im_w,re_z,im_z
//   [numerics]
//   steps = 20000
//   [output]
//   conventions = c, d, e
//   columns = s, abs_d1, abs_d2

#pragma once

#include "nonherm/scenarios.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace nonherm {

namespace config_detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

[[noreturn]] inline void fail(int line, const std::string& msg) {
    std::string where = line > 0 ? "line " + std::to_string(line) + ": " : "";
    throw Error(ErrorCode::config_error, "parse_config", where + msg);
}

inline bool parse_plain_number(const std::string& text, double& out) {
    if (text.empty()) return false;
    char* end = nullptr;
    out = std::strtod(text.c_str(), &end);
    return end == text.c_str() + text.size();
}

}  // namespace config_detail

// Accepts plain numbers and the forms `pi`, `pi/N`, `N*pi`.
inline double parse_number(const std::string& raw, int line = 0) {
    using namespace config_detail;
    const std::string text = trim(raw);
    double value = 0.0;
    if (parse_plain_number(text, value)) return value;
    if (text == "pi") return pi;
    if (text.rfind("pi/", 0) == 0 && parse_plain_number(trim(text.substr(3)), value) && value != 0.0) {
        return pi / value;
    }
    if (text.size() > 3 && text.compare(text.size() - 3, 3, "*pi") == 0 &&
        parse_plain_number(trim(text.substr(0, text.size() - 3)), value)) {
        return value * pi;
    }
    fail(line, "not a number: '" + text + "'");
}

inline const std::vector<std::string>& output_column_names() {
    static const std::vector<std::string> names{
        "s",      "re_w",   "im_w",   "re_z",   "im_z",   "re_E1",  "im_E1",  "re_E2",
        "im_E2",  "abs_c1", "abs_c2", "abs_d1", "abs_d2", "abs_e1", "abs_e2", "alpha",
        "norm_sq", "ratio_c21", "ratio_d21", "crit_12", "crit_21"};
    return names;
}

inline std::vector<TableRow> read_path_table(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) config_detail::fail(0, "cannot open path table '" + file.string() + "'");
    std::vector<TableRow> rows;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        const std::string t = config_detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto cells = config_detail::split_list(t);
        double first = 0.0;
        if (n == 1 && !config_detail::parse_plain_number(cells.empty() ? "" : cells[0], first)) continue;  // header
        if (cells.size() != 5) config_detail::fail(n, "path table rows need 5 columns: s,re_w,im_w,re_z,im_z");
        double v[5];
        for (int i = 0; i < 5; ++i) v[i] = parse_number(cells[static_cast<std::size_t>(i)], n);
        rows.push_back({v[0], {v[1], v[2]}, {v[3], v[4]}});
    }
    return rows;
}

// Parses configuration text; relative table paths resolve against base_dir.
inline ScenarioConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".") {
    using namespace config_detail;
    static const std::map<std::string, std::set<std::string>> allowed{
        {"scenario", {"name", "base", "description", "initial_state", "initial_vector"}},
        {"path", {"kind", "w0", "delta0", "sigma", "gamma", "phi", "T", "windings", "table"}},
        {"numerics", {"steps"}},
        {"output", {"conventions", "columns"}},
    };

    std::vector<std::tuple<std::string, std::string, std::string, int>> entries;  // section, key, value, line
    std::string section;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto cut = line.find_first_of("#;");
        const std::string t = trim(cut == std::string::npos ? line : line.substr(0, cut));
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') fail(n, "malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            if (!allowed.count(section)) fail(n, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) fail(n, "expected key = value");
        if (section.empty()) fail(n, "key outside of a section");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (!allowed.at(section).count(key)) fail(n, "unknown key '" + key + "' in [" + section + "]");
        if (value.empty()) fail(n, "empty value for '" + key + "'");
        entries.emplace_back(section, key, value, n);
    }

    ScenarioConfig cfg;
    cfg.name = "custom";
    for (const auto& [sec, key, value, ln] : entries) {
        if (sec == "scenario" && key == "base") {
            auto b = find_builtin(value);
            if (!b) fail(ln, "unknown base scenario '" + value + "'");
            cfg = *b;
        }
    }

    for (const auto& [sec, key, value, ln] : entries) {
        if (sec == "scenario") {
            if (key == "name") cfg.name = value;
            else if (key == "description") cfg.description = value;
            else if (key == "initial_state") {
                if (value == "branch1") cfg.initial = InitialKind::branch1;
                else if (value == "branch2") cfg.initial = InitialKind::branch2;
                else if (value == "explicit") cfg.initial = InitialKind::explicit_vector;
                else fail(ln, "initial_state must be branch1, branch2 or explicit");
            } else if (key == "initial_vector") {
                const auto parts = split_list(value);
                if (parts.size() != 4) fail(ln, "initial_vector needs 4 numbers: re0, im0, re1, im1");
                cfg.initial_vector << cplx{parse_number(parts[0], ln), parse_number(parts[1], ln)},
                    cplx{parse_number(parts[2], ln), parse_number(parts[3], ln)};
                cfg.initial = InitialKind::explicit_vector;
            }
        } else if (sec == "path") {
            if (key == "kind") {
                if (value == "gaussian_pulse") cfg.path_kind = PathKind::gaussian_pulse;
                else if (value == "ep_loop") cfg.path_kind = PathKind::ep_loop;
                else if (value == "custom_table") cfg.path_kind = PathKind::custom_table;
                else fail(ln, "unknown path kind '" + value + "'");
            } else if (key == "table") {
                std::filesystem::path file = value;
                if (file.is_relative()) file = base_dir / file;
                cfg.table = read_path_table(file);
            } else {
                cfg.parameters[key] = parse_number(value, ln);
            }
        } else if (sec == "numerics") {
            const double steps = parse_number(value, ln);
            if (!(steps >= 1.0) || steps != std::floor(steps)) fail(ln, "steps must be a positive integer");
            cfg.steps = static_cast<std::size_t>(steps);
        } else if (sec == "output") {
            const auto items = split_list(value);
            if (key == "conventions") {
                cfg.conventions = {false, false, false};
                for (const auto& c : items) {
                    if (c == "c") cfg.conventions.c = true;
                    else if (c == "d") cfg.conventions.d = true;
                    else if (c == "e") cfg.conventions.e = true;
                    else fail(ln, "unknown convention '" + c + "'");
                }
            } else {
                const auto& known = output_column_names();
                for (const auto& c : items) {
                    if (std::find(known.begin(), known.end(), c) == known.end()) {
                        fail(ln, "unknown output column '" + c + "'");
                    }
                }
                cfg.output_columns = items;
            }
        }
    }
    validate(cfg);
    return cfg;
}

inline ScenarioConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = ".") {
    std::istringstream in(text);
    return parse_config(in, base_dir);
}

inline ScenarioConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) config_detail::fail(0, "cannot open config '" + file.string() + "'");
    return parse_config(in, file.parent_path().empty() ? std::filesystem::path(".") : file.parent_path());
}

}  // namespace nonherm
