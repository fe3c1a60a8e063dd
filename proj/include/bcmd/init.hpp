#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcmd/collision.hpp"
#include "bcmd/format.hpp"
#include "bcmd/rng.hpp"
#include "bcmd/vec3.hpp"

namespace bcmd {

/**
 * Initial velocity law. The three numbered cases are the standard test set:
 * two equilibrium Maxwellians with energies 1/2 and 2 (inverse temperatures
 * beta = 3 and 3/4) and a nonequilibrium uniform cube with energy 1/2.
 * Velocities are drawn i.i.d.; no post-hoc energy or momentum normalization.
 */
struct VelocityDistribution {
    enum class Kind { case1, case2, case3, maxwell_beta, custom };

    Kind kind = Kind::case1;
    double beta = 3.0;  // meaningful for gaussian kinds
    std::function<Vec3(Rng&)> custom_sampler;

    static VelocityDistribution case1() { return {Kind::case1, 3.0, nullptr}; }
    static VelocityDistribution case2() { return {Kind::case2, 0.0, nullptr}; }
    static VelocityDistribution case3() { return {Kind::case3, 0.75, nullptr}; }
    static VelocityDistribution maxwell(double beta) {
        if (!(beta > 0.0)) throw std::invalid_argument("maxwell beta must be positive");
        return {Kind::maxwell_beta, beta, nullptr};
    }
    static VelocityDistribution custom(std::function<Vec3(Rng&)> sampler) {
        return {Kind::custom, 0.0, std::move(sampler)};
    }

    static VelocityDistribution numbered(int c) {
        switch (c) {
            case 1: return case1();
            case 2: return case2();
            case 3: return case3();
        }
        throw std::invalid_argument("velocity case must be 1, 2 or 3");
    }

    /// Nominal energy E = (1/2) int |v|^2 f0 dv of the law.
    double nominal_energy() const {
        switch (kind) {
            case Kind::case1: return 0.5;
            case Kind::case2: return 0.5;
            case Kind::case3: return 2.0;
            case Kind::maxwell_beta: return 1.5 / beta;
            case Kind::custom:
                throw std::logic_error("custom velocity law has no declared energy");
        }
        return 0.0;
    }

    std::string label() const {
        switch (kind) {
            case Kind::case1: return "1";
            case Kind::case2: return "2";
            case Kind::case3: return "3";
            case Kind::maxwell_beta: return "maxwell-beta=" + format_double(beta);
            case Kind::custom: return "custom";
        }
        return "?";
    }

    /// Stable tag mixed into per-run stream seeds.
    std::uint64_t stream_tag() const {
        switch (kind) {
            case Kind::case1: return 1;
            case Kind::case2: return 2;
            case Kind::case3: return 3;
            case Kind::maxwell_beta: {
                std::uint64_t bits;
                static_assert(sizeof(bits) == sizeof(beta));
                std::memcpy(&bits, &beta, sizeof(bits));
                return mix64(4 ^ bits);
            }
            case Kind::custom: return 5;
        }
        return 0;
    }
};

/**
 * N sphere centers i.i.d.-uniform in the cube, conditioned on pairwise
 * distance >= epsilon and at least epsilon/2 clearance from every wall.
 * Grid-bucketed rejection sampling; throws once the attempt budget
 * (1000 N trials) is exhausted.
 */
inline std::vector<Vec3> sample_positions(int n, double epsilon, double box_side, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_positions: n must be >= 1");
    if (!(epsilon > 0.0) || epsilon >= box_side) {
        throw std::invalid_argument("sample_positions: require 0 < epsilon < L");
    }
    const double packing = n * (std::numbers::pi / 6.0) * epsilon * epsilon * epsilon /
                           (box_side * box_side * box_side);
    if (packing >= 0.3) {
        throw std::invalid_argument("sample_positions: packing fraction " +
                                    format_double(packing) + " too high for rejection sampling");
    }

    const double margin = epsilon / 2.0;
    const int nb = std::max(
        1, std::min(static_cast<int>(std::floor(box_side / epsilon)),
                    static_cast<int>(std::ceil(std::cbrt(8.0 * n))) + 1));
    const double h = box_side / nb;
    std::vector<std::vector<std::uint32_t>> grid(static_cast<std::size_t>(nb) * nb * nb);
    auto coord = [&](double x) {
        const int c = static_cast<int>(std::floor(x / h));
        return std::min(std::max(c, 0), nb - 1);
    };
    auto flat = [&](int x, int y, int z) { return (z * nb + y) * nb + x; };

    std::vector<Vec3> out;
    out.reserve(n);
    const long long budget = 1000LL * n;
    long long attempts = 0;
    while (static_cast<int>(out.size()) < n) {
        if (++attempts > budget) {
            throw std::runtime_error(
                "sample_positions: attempt budget exceeded; lower the density");
        }
        const Vec3 c{rng.uniform(margin, box_side - margin),
                     rng.uniform(margin, box_side - margin),
                     rng.uniform(margin, box_side - margin)};
        const int cx = coord(c.x), cy = coord(c.y), cz = coord(c.z);
        bool ok = true;
        for (int dz = -1; dz <= 1 && ok; ++dz)
            for (int dy = -1; dy <= 1 && ok; ++dy)
                for (int dx = -1; dx <= 1 && ok; ++dx) {
                    const int x = cx + dx, y = cy + dy, z = cz + dz;
                    if (x < 0 || y < 0 || z < 0 || x >= nb || y >= nb || z >= nb) continue;
                    for (std::uint32_t j : grid[flat(x, y, z)]) {
                        if (norm(c - out[j]) < epsilon) {
                            ok = false;
                            break;
                        }
                    }
                }
        if (!ok) continue;
        grid[flat(cx, cy, cz)].push_back(static_cast<std::uint32_t>(out.size()));
        out.push_back(c);
    }
    return out;
}

/// N i.i.d. velocity draws from the given law.
inline std::vector<Vec3> sample_velocities(const VelocityDistribution& dist, int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_velocities: n must be >= 1");
    std::vector<Vec3> out;
    out.reserve(n);
    switch (dist.kind) {
        case VelocityDistribution::Kind::case2:
            for (int i = 0; i < n; ++i) {
                out.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                               rng.uniform(-1.0, 1.0)});
            }
            break;
        case VelocityDistribution::Kind::custom:
            if (!dist.custom_sampler) {
                throw std::invalid_argument("sample_velocities: missing custom sampler");
            }
            for (int i = 0; i < n; ++i) out.push_back(dist.custom_sampler(rng));
            break;
        default: {
            const double sigma = 1.0 / std::sqrt(dist.beta);  // per-component std dev
            for (int i = 0; i < n; ++i) {
                out.push_back({sigma * rng.normal(), sigma * rng.normal(),
                               sigma * rng.normal()});
            }
            break;
        }
    }
    return out;
}

struct InitialCondition {
    std::vector<ParticleState> states;
    double realized_energy = 0.0;  // per-particle mean of |v|^2 / 2
};

inline double mean_kinetic_energy(const std::vector<ParticleState>& states) {
    double e = 0.0;
    for (const auto& s : states) e += 0.5 * norm2(s.velocity);
    return states.empty() ? 0.0 : e / static_cast<double>(states.size());
}

/// Positions first, then velocities, from one stream; order is part of the contract.
inline InitialCondition make_initial(const VelocityDistribution& dist, int n, double epsilon,
                                     double box_side, Rng& rng,
                                     bool zero_total_momentum = false) {
    auto xs = sample_positions(n, epsilon, box_side, rng);
    auto vs = sample_velocities(dist, n, rng);
    if (zero_total_momentum) {
        Vec3 mean{};
        for (const auto& v : vs) mean += v;
        mean *= 1.0 / static_cast<double>(n);
        for (auto& v : vs) v -= mean;
    }
    InitialCondition ic;
    ic.states.reserve(n);
    for (int i = 0; i < n; ++i) ic.states.push_back({xs[i], vs[i]});
    ic.realized_energy = mean_kinetic_energy(ic.states);
    return ic;
}

inline void write_states_csv(std::ostream& os, const std::vector<ParticleState>& states) {
    os << "x,y,z,vx,vy,vz\n";
    for (const auto& s : states) {
        os << format_double(s.position.x) << ',' << format_double(s.position.y) << ','
           << format_double(s.position.z) << ',' << format_double(s.velocity.x) << ','
           << format_double(s.velocity.y) << ',' << format_double(s.velocity.z) << '\n';
    }
}

inline std::vector<ParticleState> read_states_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("x,y,z", 0) != 0) {
        throw std::runtime_error("read_states_csv: missing header");
    }
    std::vector<ParticleState> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 6) throw std::runtime_error("read_states_csv: bad row");
        out.push_back({{parse_double(f[0]), parse_double(f[1]), parse_double(f[2])},
                       {parse_double(f[3]), parse_double(f[4]), parse_double(f[5])}});
    }
    return out;
}

}  // namespace bcmd
