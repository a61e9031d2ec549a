#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "analytic_map.hpp"

namespace siegel {

using json = nlohmann::json;

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx cplx_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("complex value must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Write to a sibling temp file, then rename over the target.
inline void write_atomic(const std::filesystem::path& p, const std::string& text) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    auto tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, p);
}

inline json map_to_json(const AnalyticMap& f) {
    json j;
    j["rho"] = f.rho;
    j["theta_frac"] = theta;
    json cs = json::array();
    for (cplx z : f.c) cs.push_back(to_json(z));
    j["coeffs"] = cs;
    return j;
}

inline AnalyticMap map_from_json(const json& j) {
    AnalyticMap f;
    f.rho = j.value("rho", default_rho);
    if (!(f.rho > 0.0)) throw std::invalid_argument("rho must be positive");
    if (j.contains("theta_frac") && std::abs(j["theta_frac"].get<double>() - theta) > 1e-9)
        throw std::invalid_argument("only the golden mean rotation number is supported");
    if (j.contains("c0") && cplx_from_json(j["c0"]) != 0.0)
        throw std::invalid_argument("map must fix the origin (nonzero c0)");
    for (const auto& z : j.at("coeffs")) f.c.push_back(cplx_from_json(z));
    if (f.c.empty()) throw std::invalid_argument("empty coefficient list");
    return f;
}

inline AnalyticMap read_map(const std::filesystem::path& p) { return map_from_json(json::parse(read_file(p))); }

inline void write_map(const std::filesystem::path& p, const AnalyticMap& f) {
    write_atomic(p, map_to_json(f).dump(2) + "\n");
}

}  // namespace siegel
