#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>

#include "bcmd/vec3.hpp"

namespace bcmd {

/** Position and velocity of one sphere center. */
struct ParticleState {
    Vec3 position;
    Vec3 velocity;
};

enum class WallFace : int { xneg = 0, xpos = 1, yneg = 2, ypos = 3, zneg = 4, zpos = 5 };

constexpr int wall_axis(WallFace f) { return static_cast<int>(f) / 2; }
constexpr bool wall_positive(WallFace f) { return (static_cast<int>(f) & 1) != 0; }

inline const char* wall_face_name(WallFace f) {
    switch (f) {
        case WallFace::xneg: return "-x";
        case WallFace::xpos: return "+x";
        case WallFace::yneg: return "-y";
        case WallFace::ypos: return "+y";
        case WallFace::zneg: return "-z";
        case WallFace::zpos: return "+z";
    }
    return "?";
}

/**
 * Time of impact for two spheres of diameter `epsilon` on free-flight
 * trajectories, measured from the states given.
 *
 * Solves |dx + s dv| = epsilon for the smallest s and requires the pair to be
 * approaching (dx·dv < 0). Returns nullopt for receding, parallel or grazing
 * geometry (quadratic discriminant below `grazing_threshold`). The root is
 * computed in the cancellation-free form s = c / (-b + sqrt(disc)).
 */
inline std::optional<double> predict_pair_collision(const ParticleState& a,
                                                    const ParticleState& b,
                                                    double epsilon,
                                                    double overlap_tolerance = 1e-9,
                                                    double grazing_threshold = 1e-14) {
    const Vec3 dx = a.position - b.position;
    const Vec3 dv = a.velocity - b.velocity;

    const double c = norm2(dx) - epsilon * epsilon;
    const double min_sep = epsilon * (1.0 - overlap_tolerance);
    if (norm2(dx) < min_sep * min_sep) {
        throw std::invalid_argument("predict_pair_collision: spheres overlap beyond tolerance");
    }

    const double bq = dot(dx, dv);
    if (bq >= 0.0) return std::nullopt;  // not approaching

    const double a2 = norm2(dv);
    if (a2 == 0.0) return std::nullopt;

    const double disc = bq * bq - a2 * c;
    if (disc < grazing_threshold) return std::nullopt;

    double s = c / (-bq + std::sqrt(disc));
    // c may sit marginally below zero inside the overlap tolerance band;
    // clamping schedules immediate contact, which the reflection resolves.
    if (s < 0.0) s = 0.0;
    return s;
}

struct WallPrediction {
    double time = std::numeric_limits<double>::infinity();
    WallFace face = WallFace::xneg;
};

/**
 * First exit time of a point through a face of the cube [0, L]^3, measured
 * from the state given. Exact ties resolve by axis order x < y < z, negative
 * face before positive. A particle at rest returns the +inf sentinel.
 */
inline WallPrediction predict_wall_collision(const ParticleState& a, double box_side) {
    WallPrediction best;
    for (int axis = 0; axis < 3; ++axis) {
        const double v = a.velocity.comp(axis);
        const double x = a.position.comp(axis);
        double t;
        WallFace face;
        if (v < 0.0) {
            t = (0.0 - x) / v;
            face = static_cast<WallFace>(2 * axis);
        } else if (v > 0.0) {
            t = (box_side - x) / v;
            face = static_cast<WallFace>(2 * axis + 1);
        } else {
            continue;
        }
        if (t < best.time) {  // strict: earlier axis wins ties
            best.time = t;
            best.face = face;
        }
    }
    return best;
}

/**
 * Elastic reflection of a colliding pair: exchanges the velocity components
 * along the impact direction omega,
 *   v'  = v  - omega [omega·(v - v1)]
 *   v1' = v1 + omega [omega·(v - v1)].
 * Momentum is conserved by construction and kinetic energy up to rounding.
 */
inline std::pair<Vec3, Vec3> resolve_pair_collision(const Vec3& v, const Vec3& v1,
                                                    const Vec3& omega) {
    if (std::abs(norm(omega) - 1.0) > 1e-9) {
        throw std::invalid_argument("resolve_pair_collision: omega is not a unit vector");
    }
    const Vec3 impulse = omega * dot(omega, v - v1);
    return {v - impulse, v1 + impulse};
}

/// Specular bounce: the component normal to the face flips sign.
inline Vec3 resolve_wall_collision(const Vec3& v, WallFace face) {
    Vec3 out = v;
    const int axis = wall_axis(face);
    out.set_comp(axis, -out.comp(axis));
    return out;
}

}  // namespace bcmd
