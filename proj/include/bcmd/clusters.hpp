#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcmd/collision_log.hpp"
#include "bcmd/format.hpp"
#include "bcmd/vec3.hpp"

namespace bcmd {

/**
 * Backward cluster of a tagged particle: the set of particles that entered
 * its collision history, directly or through intermediaries, before time t.
 * The tagged particle itself is not a member.
 */
struct BackwardCluster {
    std::uint32_t tagged = 0;
    std::vector<std::uint32_t> members;  // J_i, ascending
    std::size_t cardinality() const { return members.size(); }
};

/**
 * Single decreasing-time sweep over the log restricted to t_m < t: starting
 * from S = {i}, a record (p, q) with exactly one endpoint in S adds the other;
 * records with both or neither endpoint in S are skipped. Equivalent to the
 * recursive definition (a particle joins at its latest collision with a
 * current member, and its earlier collisions then propagate).
 */
inline BackwardCluster backward_cluster(const CollisionLog& log, std::uint32_t tagged,
                                        std::size_t n_particles, double t) {
    if (t < 0.0) throw std::invalid_argument("backward_cluster: t must be >= 0");
    if (tagged >= n_particles) throw std::invalid_argument("backward_cluster: index out of range");

    std::vector<char> in_set(n_particles, 0);
    in_set[tagged] = 1;
    BackwardCluster out;
    out.tagged = tagged;
    const auto& recs = log.records();
    const std::size_t hi = log.cutoff(t);
    for (std::size_t m = hi; m-- > 0;) {
        const bool has_p = in_set[recs[m].p];
        const bool has_q = in_set[recs[m].q];
        if (has_p != has_q) {
            const std::uint32_t other = has_p ? recs[m].q : recs[m].p;
            in_set[other] = 1;
            out.members.push_back(other);
        }
    }
    std::sort(out.members.begin(), out.members.end());
    return out;
}

/// Cluster cardinalities K_i for all N particles at time t.
inline std::vector<std::uint32_t> all_clusters(const CollisionLog& log, std::size_t n_particles,
                                               double t) {
    if (t < 0.0) throw std::invalid_argument("all_clusters: t must be >= 0");
    const auto& recs = log.records();
    const std::size_t hi = log.cutoff(t);
    for (std::size_t m = 0; m < hi; ++m) {
        if (recs[m].p >= n_particles || recs[m].q >= n_particles) {
            throw std::invalid_argument("all_clusters: record index out of range");
        }
    }

    std::vector<std::uint32_t> k(n_particles, 0);
    // version-stamped membership array; reset per tag is O(1)
    std::vector<std::uint32_t> version(n_particles, 0);
    std::uint32_t cur = 0;
    for (std::size_t i = 0; i < n_particles; ++i) {
        ++cur;
        version[i] = cur;
        std::uint32_t count = 0;
        for (std::size_t m = hi; m-- > 0;) {
            const bool has_p = version[recs[m].p] == cur;
            const bool has_q = version[recs[m].q] == cur;
            if (has_p != has_q) {
                version[has_p ? recs[m].q : recs[m].p] = cur;
                ++count;
            }
        }
        k[i] = count;
    }
    return k;
}

/** Empirical distribution g_N(K, t) held as exact integer counts over N. */
struct ClusterHistogram {
    double t = 0.0;
    std::int64_t n_particles = 0;
    std::map<std::uint32_t, std::int64_t> counts;

    double g(std::uint32_t k) const {
        const auto it = counts.find(k);
        return it == counts.end()
                   ? 0.0
                   : static_cast<double>(it->second) / static_cast<double>(n_particles);
    }
};

inline ClusterHistogram histogram(const std::vector<std::uint32_t>& ks) {
    if (ks.empty()) throw std::invalid_argument("histogram: empty input");
    ClusterHistogram h;
    h.n_particles = static_cast<std::int64_t>(ks.size());
    for (const auto k : ks) ++h.counts[k];
    return h;
}

/// <K>_t = sum_K K g_N(K, t).
inline double mean_cardinality(const ClusterHistogram& h) {
    if (h.n_particles <= 0) throw std::invalid_argument("mean_cardinality: empty histogram");
    double acc = 0.0;
    for (const auto& [k, c] : h.counts) {
        acc += static_cast<double>(k) * static_cast<double>(c);
    }
    return acc / static_cast<double>(h.n_particles);
}

inline double mean_of(const std::vector<std::uint32_t>& ks) {
    if (ks.empty()) throw std::invalid_argument("mean_of: empty input");
    double acc = 0.0;
    for (const auto k : ks) acc += static_cast<double>(k);
    return acc / static_cast<double>(ks.size());
}

/**
 * Empirical cluster moments: K0 = (1/N) sum K_i (equals the mean cardinality)
 * and K2 = (1/N) sum K_i |v_i(t)|^2, with velocities taken at the same time.
 */
inline std::pair<double, double> cluster_moments(const std::vector<std::uint32_t>& ks,
                                                 const std::vector<Vec3>& velocities_at_t) {
    if (ks.size() != velocities_at_t.size()) {
        throw std::invalid_argument("cluster_moments: length mismatch");
    }
    if (ks.empty()) throw std::invalid_argument("cluster_moments: empty input");
    double k0 = 0.0, k2 = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        k0 += static_cast<double>(ks[i]);
        k2 += static_cast<double>(ks[i]) * norm2(velocities_at_t[i]);
    }
    const double n = static_cast<double>(ks.size());
    return {k0 / n, k2 / n};
}

/// rho(t) = (1/t) ln(<K>_t + 1), the finite-time growth-rate statistic.
inline double rate_statistic(double mean_k, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("rate_statistic: t must be positive");
    if (mean_k < 0.0) throw std::invalid_argument("rate_statistic: mean_k must be >= 0");
    return std::log1p(mean_k) / t;
}

/// Observed mean free time N t / (2 m_c); a tagged particle collides about once per tau.
inline double mean_free_time_estimate(std::int64_t n_particles, double t, std::int64_t m_c) {
    if (!(t > 0.0)) throw std::invalid_argument("mean_free_time_estimate: t must be positive");
    if (m_c <= 0) {
        throw std::runtime_error("mean_free_time_estimate: no collisions observed (m_c = 0)");
    }
    return static_cast<double>(n_particles) * t / (2.0 * static_cast<double>(m_c));
}

/** Per-time cluster statistics of one run. */
struct ClusterStats {
    double t = 0.0;
    double mean_k = 0.0;
    double k0 = 0.0;
    double k2 = 0.0;
    double rate = 0.0;
    std::optional<double> tau_hat;
};

inline void write_histograms_csv(std::ostream& os, const std::vector<ClusterHistogram>& hs) {
    os << "t,K,g\n";
    for (const auto& h : hs) {
        for (const auto& [k, c] : h.counts) {
            os << format_double(h.t) << ',' << k << ','
               << format_double(static_cast<double>(c) / static_cast<double>(h.n_particles))
               << '\n';
        }
    }
}

inline void write_stats_csv(std::ostream& os, const std::vector<ClusterStats>& stats) {
    os << "t,meanK,K0,K2,rate,tau_hat,stderr\n";
    for (const auto& s : stats) {
        os << format_double(s.t) << ',' << format_double(s.mean_k) << ','
           << format_double(s.k0) << ',' << format_double(s.k2) << ','
           << format_double(s.rate) << ',' << (s.tau_hat ? format_double(*s.tau_hat) : "") << ','
           << "" << '\n';
    }
}

}  // namespace bcmd
