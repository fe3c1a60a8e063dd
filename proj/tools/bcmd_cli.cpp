// Command-line front end: ensemble simulations, the growth-rate table, the
// small-time case comparison and the Maxwell-model self-check.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bcmd/bcmd.hpp"
#include "bcmd/experiment_json.hpp"

namespace {

std::vector<double> parse_time_list(const std::string& csv) {
    std::vector<double> out;
    for (const auto& field : bcmd::split_csv_line(csv)) {
        out.push_back(bcmd::parse_double(field));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    for (const auto& field : bcmd::split_csv_line(csv)) {
        out.push_back(static_cast<int>(bcmd::parse_int(field)));
    }
    return out;
}

int run_simulate(const std::string& config_path, const std::string& case_label, int n,
                 int ensembles, double t_end, const std::string& sample_times,
                 std::uint64_t seed, const std::string& out_dir, bool log_collisions,
                 bool moments, bool cells, int threads, const CLI::App* cmd) {
    bcmd::ExperimentSpec spec;
    if (!config_path.empty()) spec = bcmd::load_spec_file(config_path);

    // explicit flags override config-file values
    if (cmd->count("--case")) spec.dist = bcmd::parse_case_label(case_label);
    if (cmd->count("--n") || spec.runs.empty()) spec.runs = {{n, ensembles}};
    if (cmd->count("--ensembles")) {
        for (auto& [rn, rm] : spec.runs) rm = ensembles;
    }
    if (cmd->count("--t-end")) spec.t_end = t_end;
    if (cmd->count("--sample-times") || spec.sample_times.empty()) {
        spec.sample_times = parse_time_list(sample_times);
    }
    if (cmd->count("--seed")) spec.master_seed = seed;
    if (cmd->count("--out")) spec.out_dir = out_dir;
    if (cmd->count("--log-collisions")) spec.log_collisions = log_collisions;
    if (cmd->count("--moments")) spec.compute_moments = moments;
    if (cmd->count("--cells")) spec.use_cells = cells;
    if (cmd->count("--threads")) spec.threads = threads;

    spec.validate();
    const bcmd::EnsembleResult result = bcmd::run_experiment(spec);
    bcmd::write_ensemble_stats_csv(std::cout, result);
    if (!spec.out_dir.empty()) {
        for (const auto& path : bcmd::emit(result, spec)) {
            std::cerr << "wrote " << path << '\n';
        }
    }
    return 0;
}

int run_table1(const std::string& cases_csv, const std::string& tiers_csv, int ensembles,
               std::uint64_t seed, const std::string& out_dir, bool cells, int threads,
               const CLI::App* cmd) {
    bcmd::Table1Options opt;
    opt.cases = parse_int_list(cases_csv);
    opt.n_tiers = parse_int_list(tiers_csv);
    if (cmd->count("--ensembles")) {
        for (int n : opt.n_tiers) opt.ensembles_override[n] = ensembles;
    }
    opt.master_seed = seed;
    opt.use_cells = cells;
    opt.threads = threads;

    const bcmd::Table1Result table = bcmd::reproduce_table1(opt);
    std::cout << table.format();
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        for (const auto& [c, res] : table.details) {
            bcmd::ExperimentSpec spec;
            spec.dist = bcmd::VelocityDistribution::numbered(c);
            spec.out_dir = (std::filesystem::path(out_dir) / ("case" + std::to_string(c)))
                               .string();
            for (const auto& path : bcmd::emit_csv(res, spec)) {
                std::cerr << "wrote " << path << '\n';
            }
        }
    }
    return 0;
}

int run_fig2(int n, int ensembles, const std::string& grid_csv, std::uint64_t seed,
             const std::string& out_dir, bool cells, int threads) {
    const auto grid = parse_time_list(grid_csv);
    const auto res = bcmd::small_time_comparison(n, ensembles, grid, seed, cells, threads);
    std::cout << res.format();
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        const auto path = std::filesystem::path(out_dir) / "small_time.csv";
        std::ofstream os(path);
        os << res.format();
        std::cerr << "wrote " << path.string() << '\n';
    }
    return 0;
}

int run_maxwell_check(const std::string& t_csv, long samples, std::uint64_t seed) {
    const auto ts = parse_time_list(t_csv);
    std::cout << "t,analytic_meanK,mc_meanK,mc_se,analytic_P0,mc_P0\n";
    for (double t : ts) {
        bcmd::Rng rng = bcmd::Rng::stream(seed, 0x79756c65u ^ static_cast<std::uint64_t>(t * 1e6));
        double sum = 0.0, sum2 = 0.0;
        long zeros = 0;
        for (long i = 0; i < samples; ++i) {
            const auto k = static_cast<double>(bcmd::yule_sample_K(t, rng));
            sum += k;
            sum2 += k * k;
            if (k == 0.0) ++zeros;
        }
        const double mean = sum / static_cast<double>(samples);
        const double var = sum2 / static_cast<double>(samples) - mean * mean;
        const double se = std::sqrt(var / static_cast<double>(samples));
        std::cout << bcmd::format_double(t) << ',' << bcmd::format_double(bcmd::maxwell_mean_K(t))
                  << ',' << bcmd::format_double(mean) << ',' << bcmd::format_double(se) << ','
                  << bcmd::format_double(std::exp(-t)) << ','
                  << bcmd::format_double(static_cast<double>(zeros) /
                                         static_cast<double>(samples))
                  << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hard-sphere gas simulator with backward-cluster statistics"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "run an (N, M) ensemble and aggregate stats");
    std::string config_path, case_label = "1", sample_times = "0.4,0.8,1.2,1.6,2.0", out_dir;
    int n = 1802, ensembles = 1, threads = 0;
    double t_end = 2.0;
    std::uint64_t seed = 0;
    bool log_collisions = false, moments = true, cells = false;
    sim->add_option("--config", config_path, "JSON config mirroring the experiment spec");
    sim->add_option("--case", case_label, "velocity case: 1|2|3|maxwell-beta=<b>");
    sim->add_option("--n", n, "number of spheres (diameter N^{-1/2})");
    sim->add_option("--ensembles", ensembles, "independent runs M");
    sim->add_option("--t-end", t_end, "final time");
    sim->add_option("--sample-times", sample_times, "comma list of sample times");
    sim->add_option("--seed", seed, "master seed");
    sim->add_option("--out", out_dir, "output directory");
    sim->add_flag("--log-collisions,!--no-log-collisions", log_collisions,
                  "export per-run collision logs");
    sim->add_flag("--moments,!--no-moments", moments, "compute K0/K2 moments");
    sim->add_flag("--cells,!--no-cells", cells, "cell-list acceleration");
    sim->add_option("--threads", threads, "worker threads (0 = auto)");

    // table1
    auto* t1 = app.add_subcommand("table1", "growth-rate grid over t = 0.4..2.0");
    std::string t1_cases = "1,2", t1_tiers = "1802", t1_out;
    int t1_ensembles = 0, t1_threads = 0;
    std::uint64_t t1_seed = 0;
    bool t1_cells = true;
    t1->add_option("--cases", t1_cases, "comma list of velocity cases");
    t1->add_option("--n-tiers", t1_tiers, "comma list of N tiers");
    t1->add_option("--ensembles", t1_ensembles, "override M for every tier");
    t1->add_option("--seed", t1_seed, "master seed");
    t1->add_option("--out", t1_out, "output directory");
    t1->add_flag("--cells,!--no-cells", t1_cells, "cell-list acceleration (default on)");
    t1->add_option("--threads", t1_threads, "worker threads (0 = auto)");

    // fig2
    auto* f2 = app.add_subcommand("fig2", "case 1 vs case 2 rates below one mean free time");
    std::string f2_grid = "0.02,0.04,0.06,0.08,0.1,0.12,0.14,0.16,0.18,0.2", f2_out;
    int f2_n = 1802, f2_ensembles = 720, f2_threads = 0;
    std::uint64_t f2_seed = 0;
    bool f2_cells = true;
    f2->add_option("--n", f2_n, "number of spheres");
    f2->add_option("--ensembles", f2_ensembles, "independent runs M");
    f2->add_option("--t-grid", f2_grid, "comma list of times in (0, 0.244]");
    f2->add_option("--seed", f2_seed, "master seed");
    f2->add_option("--out", f2_out, "output directory");
    f2->add_flag("--cells,!--no-cells", f2_cells, "cell-list acceleration (default on)");
    f2->add_option("--threads", f2_threads, "worker threads (0 = auto)");

    // maxwell-check
    auto* mx = app.add_subcommand("maxwell-check",
                                  "pure-birth sampler vs the closed-form cluster law");
    std::string mx_t = "0.5,1,2";
    long mx_samples = 100000;
    std::uint64_t mx_seed = 0;
    mx->add_option("--t", mx_t, "comma list of times");
    mx->add_option("--samples", mx_samples, "samples per time");
    mx->add_option("--seed", mx_seed, "master seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            return run_simulate(config_path, case_label, n, ensembles, t_end, sample_times,
                                seed, out_dir, log_collisions, moments, cells, threads, sim);
        }
        if (t1->parsed()) {
            return run_table1(t1_cases, t1_tiers, t1_ensembles, t1_seed, t1_out, t1_cells,
                              t1_threads, t1);
        }
        if (f2->parsed()) {
            return run_fig2(f2_n, f2_ensembles, f2_grid, f2_seed, f2_out, f2_cells, f2_threads);
        }
        if (mx->parsed()) return run_maxwell_check(mx_t, mx_samples, mx_seed);
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
