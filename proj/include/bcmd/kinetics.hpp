#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "bcmd/quadrature.hpp"
#include "bcmd/rng.hpp"
#include "bcmd/vec3.hpp"

namespace bcmd {

/**
 * Exact reference results for the cut-off Maxwellian-molecule model, where
 * the collision-count expansion sums in closed form, plus equilibrium
 * collision-rate theory for hard spheres.
 */

/// Equilibrium Maxwellian parameters; per-component velocity variance is 1/beta.
struct EquilibriumParams {
    double beta = 3.0;

    explicit EquilibriumParams(double beta_) : beta(beta_) {
        if (!(beta > 0.0)) throw std::invalid_argument("EquilibriumParams: beta must be positive");
    }
    static EquilibriumParams from_energy(double energy) {
        if (!(energy > 0.0)) {
            throw std::invalid_argument("EquilibriumParams: energy must be positive");
        }
        return EquilibriumParams(1.5 / energy);
    }
    double energy() const { return 1.5 / beta; }
    double sigma() const { return 1.0 / std::sqrt(beta); }
};

/// Mass of the n-collision class for Maxwell molecules: e^{-t} (1 - e^{-t})^n.
inline double maxwell_fn_mass(int n, double t) {
    if (n < 0) throw std::invalid_argument("maxwell_fn_mass: n must be >= 0");
    if (t < 0.0) throw std::invalid_argument("maxwell_fn_mass: t must be >= 0");
    return std::exp(-t) * std::pow(-std::expm1(-t), n);
}

/// Mean backward-cluster size for Maxwell molecules: e^t - 1 (growth rate exactly 1).
inline double maxwell_mean_K(double t) {
    if (t < 0.0) throw std::invalid_argument("maxwell_mean_K: t must be >= 0");
    return std::expm1(t);
}

/**
 * Sample a cluster size from the pure-birth (Yule) process: a population of
 * size j waits Exp(j) before growing by one; at time t the population minus
 * one is geometric with P(K = n) = e^{-t} (1 - e^{-t})^n.
 */
inline std::int64_t yule_sample_K(double t, Rng& rng) {
    if (t < 0.0) throw std::invalid_argument("yule_sample_K: t must be >= 0");
    constexpr std::int64_t cap = 1'000'000'000;
    std::int64_t size = 1;
    double elapsed = 0.0;
    while (true) {
        elapsed += rng.exponential(static_cast<double>(size));
        if (elapsed >= t) break;
        if (++size > cap) throw std::runtime_error("yule_sample_K: population overflow");
    }
    return size - 1;
}

/// Equilibrium mean free time tau = [4 (2 pi E / 3)^{1/2} N eps^2]^{-1}.
inline double equilibrium_mean_free_time(double energy, double n_eps2) {
    if (!(energy > 0.0) || !(n_eps2 > 0.0)) {
        throw std::invalid_argument("equilibrium_mean_free_time: arguments must be positive");
    }
    return 1.0 / (4.0 * std::sqrt(2.0 * std::numbers::pi * energy / 3.0) * n_eps2);
}

namespace detail {

/// Density of u = |V - v| for V Maxwellian with per-component std dev sigma, a = |v|.
inline double relative_speed_density(double u, double a, double sigma) {
    if (u <= 0.0) return 0.0;
    const double s2 = sigma * sigma;
    const double x = u * a / s2;
    if (x < 0.5) {
        // sinh form, stable for small ua/sigma^2 (including a = 0)
        const double sinhc = x < 1e-4 ? 1.0 + x * x / 6.0 : std::sinh(x) / x;
        return std::sqrt(2.0 / std::numbers::pi) * u * u / (s2 * sigma) *
               std::exp(-(u * u + a * a) / (2.0 * s2)) * sinhc;
    }
    const double e1 = std::exp(-(u - a) * (u - a) / (2.0 * s2));
    const double e2 = std::exp(-(u + a) * (u + a) / (2.0 * s2));
    return u / (a * sigma * std::sqrt(2.0 * std::numbers::pi)) * (e1 - e2);
}

}  // namespace detail

/**
 * Loss-term collision rate against a Maxwellian background,
 * R(v) = pi E|v - V| with V ~ M_beta, evaluated as a 1-D radial integral by
 * adaptive quadrature (relative accuracy ~1e-8). Depends on v only through
 * its magnitude.
 */
inline double collision_rate_maxwellian_speed(double speed, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("collision_rate_maxwellian: beta must be > 0");
    if (!(speed >= 0.0) || !std::isfinite(speed)) {
        throw std::invalid_argument("collision_rate_maxwellian: bad speed");
    }
    const double sigma = 1.0 / std::sqrt(beta);
    const double hi = speed + 14.0 * sigma;
    const double mean_rel_speed = integrate_adaptive(
        [&](double u) { return u * detail::relative_speed_density(u, speed, sigma); }, 0.0, hi,
        1e-9);
    return std::numbers::pi * mean_rel_speed;
}

inline double collision_rate_maxwellian(const Vec3& v, double beta) {
    return collision_rate_maxwellian_speed(norm(v), beta);
}

/**
 * Temperature rescaling of a mean-cluster-size curve: with
 * c = sqrt(beta_base / beta_new), the rescaled curve is t -> base(c t) and
 * the growth rate picks up the factor c.
 */
inline std::function<double(double)> scaling_map(std::function<double(double)> mean_k_base,
                                                 double c) {
    if (!(c > 0.0)) throw std::invalid_argument("scaling_map: c must be positive");
    return [base = std::move(mean_k_base), c](double t) { return base(c * t); };
}

}  // namespace bcmd
