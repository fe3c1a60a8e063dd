#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "bcmd/clusters.hpp"
#include "bcmd/config.hpp"
#include "bcmd/engine.hpp"
#include "bcmd/format.hpp"
#include "bcmd/init.hpp"
#include "bcmd/rng.hpp"

namespace bcmd {

/**
 * Batch experiment plan: one velocity case over a ladder of (N, ensemble
 * count) pairs with a common time grid. Each run resamples positions and
 * velocities from its own stream derived from (master_seed, N, case, run
 * index), so results do not depend on scheduling order.
 */
struct ExperimentSpec {
    VelocityDistribution dist = VelocityDistribution::case1();
    std::vector<std::pair<int, int>> runs;  // (N, M)
    double t_end = 0.0;
    std::vector<double> sample_times;
    std::uint64_t master_seed = 0;
    std::string out_dir;  // empty: no files
    bool log_collisions = false;
    bool compute_moments = true;
    bool use_cells = false;
    int threads = 0;  // 0: hardware concurrency

    void validate() const {
        if (runs.empty()) throw std::invalid_argument("ExperimentSpec: no (N, M) pairs");
        for (const auto& [n, m] : runs) {
            if (n < 2) throw std::invalid_argument("ExperimentSpec: N must be >= 2");
            if (m < 1) throw std::invalid_argument("ExperimentSpec: M must be >= 1");
        }
        if (!(t_end > 0.0)) throw std::invalid_argument("ExperimentSpec: t_end must be positive");
        if (sample_times.empty()) {
            throw std::invalid_argument("ExperimentSpec: sample_times must be nonempty");
        }
        double prev = 0.0;
        for (double t : sample_times) {
            if (!(t > prev) || t > t_end) {
                throw std::invalid_argument(
                    "ExperimentSpec: sample_times must be strictly increasing within (0, t_end]");
            }
            prev = t;
        }
        if (log_collisions && out_dir.empty()) {
            throw std::invalid_argument("ExperimentSpec: log_collisions requires out_dir");
        }
    }
};

/** Per-run observables kept for aggregation checks and diagnostics. */
struct RunData {
    std::vector<double> mean_k;          // per sample time
    std::vector<double> k2;              // per sample time (0 if moments off)
    std::vector<std::int64_t> m_c;       // collisions with t_m < t, per sample time
    std::vector<std::map<std::uint32_t, std::int64_t>> hist;  // per sample time
    double realized_energy = 0.0;
    std::uint64_t wall_bounces = 0;
};

struct TierTimeStats {
    std::string case_label;
    int n = 0;
    int m = 0;
    double t = 0.0;
    double mean_k = 0.0;
    double stderr_k = 0.0;          // ensemble standard error of mean_k
    double rate = 0.0;              // rho of the ensemble mean
    double rate_stderr = 0.0;       // delta-method propagation of stderr_k
    double rate_mean_of_rho = 0.0;  // diagnostic alternative: mean of per-run rho
    double k0 = 0.0;
    double k2 = 0.0;
    std::optional<double> tau_hat;  // pooled N t M / (2 sum m_c)
};

struct EnsembleResult {
    std::vector<TierTimeStats> rows;                 // tier-major, time-minor
    std::map<int, std::vector<RunData>> per_run;     // keyed by N
    std::map<int, std::vector<ClusterHistogram>> histograms;  // pooled, keyed by N, per time
};

inline void parallel_for(int jobs, int threads, const std::function<void(int)>& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    if (threads > jobs) threads = jobs;
    if (threads <= 1) {
        for (int j = 0; j < jobs; ++j) fn(j);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        while (true) {
            const int j = next.fetch_add(1);
            if (j >= jobs) return;
            try {
                fn(j);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline std::uint64_t run_stream_id(std::uint64_t n, std::uint64_t case_tag, std::uint64_t k) {
    std::uint64_t h = mix64(n);
    h = mix64(h ^ case_tag);
    h = mix64(h ^ k);
    return h;
}

namespace detail {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

inline MeanSe mean_and_se(const std::vector<double>& xs) {
    MeanSe out;
    const double m = static_cast<double>(xs.size());
    for (double x : xs) out.mean += x;
    out.mean /= m;
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.se = std::sqrt(ss / (m - 1.0) / m);
    }
    return out;
}

}  // namespace detail

/** One simulation of the plan: sample, run, analyze clusters at each time. */
inline RunData execute_single_run(const ExperimentSpec& spec, int n, int run_index) {
    Rng rng = Rng::stream(spec.master_seed,
                          run_stream_id(static_cast<std::uint64_t>(n), spec.dist.stream_tag(),
                                        static_cast<std::uint64_t>(run_index)));
    const double eps = 1.0 / std::sqrt(static_cast<double>(n));
    InitialCondition ic = make_initial(spec.dist, n, eps, 1.0, rng);

    SimConfig cfg;
    cfg.n_particles = n;
    cfg.epsilon = eps;
    cfg.box_side = 1.0;
    cfg.t_end = spec.t_end;
    cfg.sample_times = spec.sample_times;
    cfg.seed = spec.master_seed;
    cfg.use_cell_list = spec.use_cells;
    SimulationResult sim = run_simulation(cfg, ic.states);

    RunData out;
    out.realized_energy = ic.realized_energy;
    out.wall_bounces = sim.wall_bounces;
    const std::size_t nt = spec.sample_times.size();
    out.mean_k.resize(nt);
    out.k2.resize(nt);
    out.m_c.resize(nt);
    out.hist.resize(nt);
    for (std::size_t ti = 0; ti < nt; ++ti) {
        const double t = spec.sample_times[ti];
        const auto ks = all_clusters(sim.log, static_cast<std::size_t>(n), t);
        out.mean_k[ti] = mean_of(ks);
        out.m_c[ti] = static_cast<std::int64_t>(sim.log.cutoff(t));
        auto& counts = out.hist[ti];
        for (const auto k : ks) ++counts[k];
        if (spec.compute_moments) {
            std::vector<Vec3> vels;
            vels.reserve(ks.size());
            for (const auto& s : sim.snapshots[ti].states) vels.push_back(s.velocity);
            out.k2[ti] = cluster_moments(ks, vels).second;
        }
    }

    if (spec.log_collisions) {
        namespace fs = std::filesystem;
        fs::create_directories(spec.out_dir);
        const std::string stem = "collisions_N" + std::to_string(n) + "_run" +
                                 std::to_string(run_index);
        std::ofstream csv(fs::path(spec.out_dir) / (stem + ".csv"));
        sim.log.write_csv(csv);
        std::ofstream bin(fs::path(spec.out_dir) / (stem + ".bin"), std::ios::binary);
        sim.log.write_binary(bin);
    }
    return out;
}

/**
 * Run the whole plan: M independent seeded simulations per tier, ensemble
 * averaging of <K>_t with standard errors, growth-rate statistic of the
 * ensemble mean, pooled mean-free-time estimate. A failed run aborts the
 * experiment with the run index attached.
 */
inline EnsembleResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    EnsembleResult result;

    for (const auto& [n, m] : spec.runs) {
        std::vector<RunData> runs(m);
        parallel_for(m, spec.threads, [&](int k) {
            try {
                runs[static_cast<std::size_t>(k)] = execute_single_run(spec, n, k);
            } catch (const std::exception& e) {
                throw std::runtime_error("run N=" + std::to_string(n) + " k=" +
                                         std::to_string(k) + ": " + e.what());
            }
        });

        const std::size_t nt = spec.sample_times.size();
        auto& pooled_hists = result.histograms[n];
        pooled_hists.resize(nt);
        for (std::size_t ti = 0; ti < nt; ++ti) {
            const double t = spec.sample_times[ti];
            std::vector<double> means, k2s, rhos;
            means.reserve(runs.size());
            std::int64_t pooled_mc = 0;
            for (const auto& r : runs) {
                means.push_back(r.mean_k[ti]);
                k2s.push_back(r.k2[ti]);
                rhos.push_back(rate_statistic(r.mean_k[ti], t));
                pooled_mc += r.m_c[ti];
            }
            const auto agg = detail::mean_and_se(means);
            TierTimeStats row;
            row.case_label = spec.dist.label();
            row.n = n;
            row.m = m;
            row.t = t;
            row.mean_k = agg.mean;
            row.stderr_k = agg.se;
            row.rate = rate_statistic(agg.mean, t);
            row.rate_stderr = agg.se / ((1.0 + agg.mean) * t);
            row.rate_mean_of_rho = detail::mean_and_se(rhos).mean;
            row.k0 = agg.mean;
            row.k2 = detail::mean_and_se(k2s).mean;
            if (pooled_mc > 0) {
                row.tau_hat = static_cast<double>(n) * t * static_cast<double>(m) /
                              (2.0 * static_cast<double>(pooled_mc));
            }
            result.rows.push_back(std::move(row));

            auto& h = pooled_hists[ti];
            h.t = t;
            h.n_particles = static_cast<std::int64_t>(n) * m;
            for (const auto& r : runs) {
                for (const auto& [k, c] : r.hist[ti]) h.counts[k] += c;
            }
        }
        result.per_run[n] = std::move(runs);
    }
    return result;
}

/// Ensemble stats CSV, schema: case,N,M,t,meanK,stderr,rate,K0,K2,tau_hat
inline void write_ensemble_stats_csv(std::ostream& os, const EnsembleResult& r) {
    os << "case,N,M,t,meanK,stderr,rate,K0,K2,tau_hat\n";
    for (const auto& row : r.rows) {
        os << row.case_label << ',' << row.n << ',' << row.m << ',' << format_double(row.t)
           << ',' << format_double(row.mean_k) << ',' << format_double(row.stderr_k) << ','
           << format_double(row.rate) << ',' << format_double(row.k0) << ','
           << format_double(row.k2) << ','
           << (row.tau_hat ? format_double(*row.tau_hat) : "") << '\n';
    }
}

/// Pooled histogram CSV, schema: case,N,t,K,g
inline void write_ensemble_histogram_csv(std::ostream& os, const EnsembleResult& r,
                                         const std::string& case_label) {
    os << "case,N,t,K,g\n";
    for (const auto& [n, hists] : r.histograms) {
        for (const auto& h : hists) {
            for (const auto& [k, c] : h.counts) {
                os << case_label << ',' << n << ',' << format_double(h.t) << ',' << k << ','
                   << format_double(static_cast<double>(c) /
                                    static_cast<double>(h.n_particles))
                   << '\n';
            }
        }
    }
}

struct StatsCsvRow {
    std::string case_label;
    std::int64_t n = 0, m = 0;
    double t = 0, mean_k = 0, stderr_k = 0, rate = 0, k0 = 0, k2 = 0;
    std::optional<double> tau_hat;
};

/// Importer for the stats CSV; values round-trip bit-identically.
inline std::vector<StatsCsvRow> read_ensemble_stats_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("case,N,M,t", 0) != 0) {
        throw std::runtime_error("stats csv: missing header");
    }
    std::vector<StatsCsvRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 10) throw std::runtime_error("stats csv: bad row");
        StatsCsvRow r;
        r.case_label = std::string(f[0]);
        r.n = parse_int(f[1]);
        r.m = parse_int(f[2]);
        r.t = parse_double(f[3]);
        r.mean_k = parse_double(f[4]);
        r.stderr_k = parse_double(f[5]);
        r.rate = parse_double(f[6]);
        r.k0 = parse_double(f[7]);
        r.k2 = parse_double(f[8]);
        if (!f[9].empty()) r.tau_hat = parse_double(f[9]);
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Write the CSV outputs under out_dir; returns the paths written.
inline std::vector<std::string> emit_csv(const EnsembleResult& r, const ExperimentSpec& spec) {
    namespace fs = std::filesystem;
    if (spec.out_dir.empty()) throw std::invalid_argument("emit_csv: out_dir not set");
    std::error_code ec;
    fs::create_directories(spec.out_dir, ec);
    std::vector<std::string> written;

    const auto stats_path = fs::path(spec.out_dir) / "stats.csv";
    {
        std::ofstream os(stats_path);
        if (!os) throw std::runtime_error("emit_csv: cannot open " + stats_path.string());
        write_ensemble_stats_csv(os, r);
    }
    written.push_back(stats_path.string());

    const auto hist_path = fs::path(spec.out_dir) / "histogram.csv";
    {
        std::ofstream os(hist_path);
        if (!os) throw std::runtime_error("emit_csv: cannot open " + hist_path.string());
        write_ensemble_histogram_csv(os, r, spec.dist.label());
    }
    written.push_back(hist_path.string());
    return written;
}

// --- reference experiment grids ------------------------------------------

/// Default (N, M) ladder for the growth-rate scan.
inline const std::vector<std::pair<int, int>>& default_ladder() {
    static const std::vector<std::pair<int, int>> ladder = {
        {1802, 72},  {2402, 54},  {3203, 40},  {4271, 30},  {5695, 23},
        {7593, 17},  {10125, 13}, {13500, 10}, {18000, 8},  {24000, 6},
        {32000, 4},  {42666, 3},  {56888, 3},  {75851, 2},  {101135, 2}};
    return ladder;
}

inline int ladder_ensembles(int n) {
    for (const auto& [ln, lm] : default_ladder()) {
        if (ln == n) return lm;
    }
    throw std::invalid_argument("N=" + std::to_string(n) +
                                " is not in the default ladder; supply M explicitly");
}

struct Table1Options {
    std::vector<int> cases = {1, 2};       // velocity cases
    std::vector<int> n_tiers = {1802};     // desk-scale default
    std::map<int, int> ensembles_override;  // N -> M
    std::uint64_t master_seed = 0;
    bool use_cells = true;
    int threads = 0;
    std::string out_dir;
};

struct Table1Result {
    std::vector<double> ts;
    std::vector<int> cases;
    std::vector<int> n_tiers;
    // rate[case][N] is the per-time column, with its standard error
    std::map<int, std::map<int, std::vector<double>>> rate;
    std::map<int, std::map<int, std::vector<double>>> rate_se;
    std::map<int, EnsembleResult> details;  // keyed by case

    std::string format() const {
        std::ostringstream os;
        os << "(1/t) log(<K>_t + 1)\n";
        os << "t";
        for (int c : cases) {
            for (int n : n_tiers) os << "\tcase" << c << "/N=" << n;
        }
        os << '\n';
        for (std::size_t ti = 0; ti < ts.size(); ++ti) {
            os << format_double(ts[ti]);
            for (int c : cases) {
                for (int n : n_tiers) {
                    char buf[64];
                    std::snprintf(buf, sizeof(buf), "\t%.3f +- %.3f", rate.at(c).at(n)[ti],
                                  rate_se.at(c).at(n)[ti]);
                    os << buf;
                }
            }
            os << '\n';
        }
        return os.str();
    }
};

/**
 * Growth-rate grid over t in {0.4, 0.8, 1.2, 1.6, 2.0} for the requested
 * cases and N tiers, ensemble counts from the default ladder unless
 * overridden.
 */
inline Table1Result reproduce_table1(const Table1Options& opt) {
    Table1Result out;
    out.ts = {0.4, 0.8, 1.2, 1.6, 2.0};
    out.cases = opt.cases;
    out.n_tiers = opt.n_tiers;
    for (int c : opt.cases) {
        ExperimentSpec spec;
        spec.dist = VelocityDistribution::numbered(c);
        for (int n : opt.n_tiers) {
            const auto it = opt.ensembles_override.find(n);
            spec.runs.push_back({n, it != opt.ensembles_override.end() ? it->second
                                                                       : ladder_ensembles(n)});
        }
        spec.t_end = 2.0;
        spec.sample_times = out.ts;
        spec.master_seed = opt.master_seed;
        spec.use_cells = opt.use_cells;
        spec.threads = opt.threads;
        EnsembleResult res = run_experiment(spec);
        for (const auto& row : res.rows) {
            out.rate[c][row.n].push_back(row.rate);
            out.rate_se[c][row.n].push_back(row.rate_stderr);
        }
        out.details[c] = std::move(res);
    }
    return out;
}

struct SmallTimeResult {
    std::vector<double> ts;
    std::vector<double> rate_case1, se_case1;
    std::vector<double> rate_case2, se_case2;

    std::string format() const {
        std::ostringstream os;
        os << "t,rate_case1,se_case1,rate_case2,se_case2\n";
        for (std::size_t i = 0; i < ts.size(); ++i) {
            os << format_double(ts[i]) << ',' << format_double(rate_case1[i]) << ','
               << format_double(se_case1[i]) << ',' << format_double(rate_case2[i]) << ','
               << format_double(se_case2[i]) << '\n';
        }
        return os.str();
    }
};

/**
 * Paired growth rates for cases 1 and 2 on a sub-mean-free-time grid
 * (every t must lie in (0, 0.244]), where the equilibrium and uniform
 * initial data should nearly coincide.
 */
inline SmallTimeResult small_time_comparison(int n, int m, const std::vector<double>& t_grid,
                                             std::uint64_t master_seed, bool use_cells = true,
                                             int threads = 0) {
    if (t_grid.empty()) throw std::invalid_argument("small_time_comparison: empty grid");
    const double tau = 0.244;
    for (double t : t_grid) {
        if (!(t > 0.0) || t > tau) {
            throw std::invalid_argument(
                "small_time_comparison: grid must lie within one mean free time (0, 0.244]");
        }
    }
    SmallTimeResult out;
    out.ts = t_grid;
    for (int c : {1, 2}) {
        ExperimentSpec spec;
        spec.dist = VelocityDistribution::numbered(c);
        spec.runs = {{n, m}};
        spec.t_end = t_grid.back();
        spec.sample_times = t_grid;
        spec.master_seed = master_seed;
        spec.use_cells = use_cells;
        spec.threads = threads;
        spec.compute_moments = false;
        const EnsembleResult res = run_experiment(spec);
        for (const auto& row : res.rows) {
            if (c == 1) {
                out.rate_case1.push_back(row.rate);
                out.se_case1.push_back(row.rate_stderr);
            } else {
                out.rate_case2.push_back(row.rate);
                out.se_case2.push_back(row.rate_stderr);
            }
        }
    }
    return out;
}

}  // namespace bcmd
