#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bcmd/ensemble.hpp"
#include "bcmd/init.hpp"

namespace bcmd {

inline VelocityDistribution parse_case_label(const std::string& s) {
    if (s == "1" || s == "case1") return VelocityDistribution::case1();
    if (s == "2" || s == "case2") return VelocityDistribution::case2();
    if (s == "3" || s == "case3") return VelocityDistribution::case3();
    const std::string prefix = "maxwell-beta=";
    if (s.rfind(prefix, 0) == 0) {
        return VelocityDistribution::maxwell(parse_double(s.substr(prefix.size())));
    }
    throw std::invalid_argument("unknown case '" + s + "' (expected 1|2|3|maxwell-beta=<b>)");
}

inline nlohmann::json spec_to_json(const ExperimentSpec& spec) {
    nlohmann::json j;
    j["case"] = spec.dist.label();
    j["runs"] = spec.runs;
    j["t_end"] = spec.t_end;
    j["sample_times"] = spec.sample_times;
    j["master_seed"] = spec.master_seed;
    j["out_dir"] = spec.out_dir;
    j["log_collisions"] = spec.log_collisions;
    j["moments"] = spec.compute_moments;
    j["cells"] = spec.use_cells;
    j["threads"] = spec.threads;
    return j;
}

/// Fields absent from the JSON keep their current values in `spec`.
inline void spec_from_json(const nlohmann::json& j, ExperimentSpec& spec) {
    if (j.contains("case")) spec.dist = parse_case_label(j.at("case").get<std::string>());
    if (j.contains("runs")) {
        spec.runs = j.at("runs").get<std::vector<std::pair<int, int>>>();
    }
    if (j.contains("t_end")) spec.t_end = j.at("t_end").get<double>();
    if (j.contains("sample_times")) {
        spec.sample_times = j.at("sample_times").get<std::vector<double>>();
    }
    if (j.contains("master_seed")) spec.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("out_dir")) spec.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("log_collisions")) spec.log_collisions = j.at("log_collisions").get<bool>();
    if (j.contains("moments")) spec.compute_moments = j.at("moments").get<bool>();
    if (j.contains("cells")) spec.use_cells = j.at("cells").get<bool>();
    if (j.contains("threads")) spec.threads = j.at("threads").get<int>();
}

inline ExperimentSpec load_spec_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open config file " + path);
    nlohmann::json j;
    is >> j;
    ExperimentSpec spec;
    spec_from_json(j, spec);
    return spec;
}

/**
 * JSON summary embedding the full spec (master seed included) next to the
 * aggregates, enough to reproduce the experiment exactly.
 */
inline std::string emit_summary_json(const EnsembleResult& r, const ExperimentSpec& spec) {
    namespace fs = std::filesystem;
    if (spec.out_dir.empty()) throw std::invalid_argument("emit_summary_json: out_dir not set");
    std::error_code ec;
    fs::create_directories(spec.out_dir, ec);

    nlohmann::json j;
    j["spec"] = spec_to_json(spec);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"case", row.case_label},
                        {"N", row.n},
                        {"M", row.m},
                        {"t", row.t},
                        {"meanK", row.mean_k},
                        {"stderr", row.stderr_k},
                        {"rate", row.rate},
                        {"rate_stderr", row.rate_stderr},
                        {"rate_mean_of_rho", row.rate_mean_of_rho},
                        {"K0", row.k0},
                        {"K2", row.k2},
                        {"tau_hat", row.tau_hat ? nlohmann::json(*row.tau_hat)
                                                : nlohmann::json(nullptr)}});
    }
    j["rows"] = rows;
    nlohmann::json per_run = nlohmann::json::object();
    for (const auto& [n, runs] : r.per_run) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& run : runs) {
            arr.push_back({{"meanK", run.mean_k},
                           {"m_c", run.m_c},
                           {"realized_energy", run.realized_energy},
                           {"wall_bounces", run.wall_bounces}});
        }
        per_run[std::to_string(n)] = std::move(arr);
    }
    j["per_run"] = per_run;

    const auto path = fs::path(spec.out_dir) / "summary.json";
    std::ofstream os(path);
    if (!os) throw std::runtime_error("emit_summary_json: cannot open " + path.string());
    os << j.dump(2) << '\n';
    return path.string();
}

/// All file outputs of an experiment: stats CSV, histogram CSV, JSON summary.
inline std::vector<std::string> emit(const EnsembleResult& r, const ExperimentSpec& spec) {
    auto written = emit_csv(r, spec);
    written.push_back(emit_summary_json(r, spec));
    return written;
}

}  // namespace bcmd
