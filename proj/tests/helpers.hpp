#pragma once

// Test-only oracles and statistics utilities. These stay independent of the
// implementation paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <vector>

#include "bcmd/collision_log.hpp"
#include "bcmd/rng.hpp"
#include "bcmd/vec3.hpp"

namespace test_helpers {

inline double normal_cdf(double x, double sigma = 1.0) {
    return 0.5 * std::erfc(-x / (sigma * std::sqrt(2.0)));
}

/// One-sample Kolmogorov-Smirnov statistic against a fully specified CDF.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

/// true iff the KS test does NOT reject at significance 0.01.
inline bool ks_passes_at_1pct(const std::vector<double>& samples,
                              const std::function<double(double)>& cdf) {
    const double d = ks_statistic(samples, cdf);
    const double n = static_cast<double>(samples.size());
    const double scaled = d * (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n));
    return scaled < 1.6276;  // asymptotic 1% critical value
}

/// Wilson-Hilferty approximation of the chi-square 0.99 quantile.
inline double chi2_critical_99(int dof) {
    const double k = static_cast<double>(dof);
    const double z = 2.3263478740408408;
    const double u = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
    return k * u * u * u;
}

/**
 * Literal recursive backward-cluster definition: starting from the tagged
 * particle at time t, repeatedly scan backward from the current join time for
 * the first record pairing a member with a new particle, add it, and restart
 * the scan from that record's time.
 */
inline std::vector<std::uint32_t> oracle_backward_cluster(
    const std::vector<bcmd::CollisionRecord>& records, std::uint32_t tagged, double t) {
    std::set<std::uint32_t> members{tagged};
    double cursor = t;
    while (true) {
        // first index with t_m >= cursor; the join record itself is consumed
        auto it = std::lower_bound(records.begin(), records.end(), cursor,
                                   [](const bcmd::CollisionRecord& r, double tt) {
                                       return r.t < tt;
                                   });
        std::size_t idx = static_cast<std::size_t>(it - records.begin());
        bool joined = false;
        while (idx-- > 0) {
            const bool has_p = members.count(records[idx].p) > 0;
            const bool has_q = members.count(records[idx].q) > 0;
            if (has_p != has_q) {
                members.insert(has_p ? records[idx].q : records[idx].p);
                cursor = records[idx].t;
                joined = true;
                break;
            }
        }
        if (!joined) break;
    }
    members.erase(tagged);
    return {members.begin(), members.end()};
}

/// Random well-formed log: strictly increasing times, random distinct pairs.
inline bcmd::CollisionLog random_log(bcmd::Rng& rng, int n_particles, int max_records) {
    const int m = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(max_records + 1));
    std::vector<double> times;
    times.reserve(m);
    for (int i = 0; i < m; ++i) times.push_back(rng.uniform01());
    std::sort(times.begin(), times.end());
    bcmd::CollisionLog log;
    double last = -1.0;
    for (int i = 0; i < m; ++i) {
        if (times[i] <= last) continue;  // drop the measure-zero duplicates
        last = times[i];
        const auto p = static_cast<std::uint32_t>(rng.next_u64() %
                                                  static_cast<std::uint64_t>(n_particles));
        auto q = static_cast<std::uint32_t>(rng.next_u64() %
                                            static_cast<std::uint64_t>(n_particles - 1));
        if (q >= p) ++q;
        log.append({times[i], p, q, {1.0, 0.0, 0.0}});
    }
    return log;
}

/// Reflecting free flight: fold an unfolded coordinate back into [lo, hi].
inline double fold_coordinate(double u, double lo, double hi) {
    const double w = hi - lo;
    double m = std::fmod(u - lo, 2.0 * w);
    if (m < 0.0) m += 2.0 * w;
    return lo + (m <= w ? m : 2.0 * w - m);
}

inline bcmd::Vec3 fold_position(const bcmd::Vec3& start, const bcmd::Vec3& velocity, double dt,
                                double lo, double hi) {
    return {fold_coordinate(start.x + velocity.x * dt, lo, hi),
            fold_coordinate(start.y + velocity.y * dt, lo, hi),
            fold_coordinate(start.z + velocity.z * dt, lo, hi)};
}

}  // namespace test_helpers
