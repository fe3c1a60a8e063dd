#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcmd/collision.hpp"
#include "bcmd/collision_log.hpp"
#include "bcmd/config.hpp"
#include "bcmd/vec3.hpp"

namespace bcmd {

struct Snapshot {
    double t = 0.0;
    std::vector<ParticleState> states;
    double kinetic_energy = 0.0;
};

struct SimulationResult {
    std::vector<Snapshot> snapshots;  // one per sample time, in order
    CollisionLog log;
    std::vector<double> energy_trace;  // total kinetic energy at sample times
    std::uint64_t wall_bounces = 0;
    std::uint64_t events_processed = 0;
    double max_contact_deviation = 0.0;  // max | |dx| - eps | / eps over pair events
};

namespace detail {

enum class EventKind : std::uint8_t { wall = 0, pair = 1, cell = 2 };

constexpr std::uint32_t kNoPartner = 0xffffffffu;

struct Event {
    double time = 0.0;
    std::uint32_t owner = 0;
    std::uint32_t partner = kNoPartner;
    std::uint32_t owner_stamp = 0;
    std::uint32_t partner_stamp = 0;
    EventKind kind = EventKind::wall;
    std::uint8_t aux = 0;  // wall: WallFace; cell: axis*2 + (dir > 0)
};

// Content-total order: (time, kind with wall < pair < cell, owner, partner, aux).
// Ties never depend on insertion order, so runs are reproducible.
inline bool event_before(const Event& a, const Event& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.owner != b.owner) return a.owner < b.owner;
    if (a.partner != b.partner) return a.partner < b.partner;
    return a.aux < b.aux;
}

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const { return event_before(b, a); }
};

}  // namespace detail

/**
 * Event-driven dynamics of N elastic hard spheres with specular walls.
 *
 * By default the sphere surface reflects at the walls: centers bounce on the
 * planes wall_clearance = epsilon/2 inside each face (set wall_clearance = 0
 * in the config for point-particle walls).
 *
 * The engine advances exactly from event to event; there is no timestep.
 * Particle states are anchored at their last physical event and advanced
 * lazily. Every prediction is a pure function of the two anchors involved,
 * never of the current clock, so the optional cell-list mode (which only adds
 * cell-crossing bookkeeping events and never rebases anchors) reproduces the
 * all-pairs baseline bit for bit.
 *
 * Scheduling uses one pending event per particle with lazy invalidation:
 * per-particle counters stamp each prediction, stale pops are discarded
 * (or trigger a fresh prediction when only the partner moved).
 */
class HardSphereSimulation {
public:
    HardSphereSimulation(const SimConfig& cfg, std::vector<ParticleState> initial)
        : cfg_(cfg),
          n_(cfg.n_particles),
          eps_(cfg.effective_epsilon()),
          box_(cfg.box_side),
          wall_lo_(cfg.effective_wall_clearance()),
          wall_hi_(cfg.box_side - cfg.effective_wall_clearance()) {
        cfg_.validate();
        if (static_cast<int>(initial.size()) != n_) {
            throw std::invalid_argument("HardSphereSimulation: |initial| != N");
        }
        pos_.reserve(initial.size());
        vel_.reserve(initial.size());
        for (const auto& s : initial) {
            pos_.push_back(s.position);
            vel_.push_back(s.velocity);
        }
        t0_.assign(n_, 0.0);
        stamp_.assign(n_, 0);
        validate_initial_states();
        init_cells();
    }

    SimulationResult run() {
        for (int i = 0; i < n_; ++i) schedule(i);

        const auto& samples = cfg_.sample_times;
        std::size_t si = 0;

        while (!queue_.empty()) {
            const detail::Event e = queue_.top();
            queue_.pop();
            if (stamp_[e.owner] != e.owner_stamp) continue;  // owner rescheduled meanwhile
            if (e.kind == detail::EventKind::pair && stamp_[e.partner] != e.partner_stamp) {
                schedule(e.owner);  // partner deflected; owner needs a fresh prediction
                continue;
            }
            if (e.time >= cfg_.t_end) break;
            while (si < samples.size() && samples[si] < e.time) take_snapshot(samples[si++]);
            if (e.time < clock_ - 1e-12) {
                throw std::runtime_error("HardSphereSimulation: scheduler popped event at t=" +
                                         std::to_string(e.time) + " behind clock " +
                                         std::to_string(clock_));
            }
            if (e.time > clock_) clock_ = e.time;

            switch (e.kind) {
                case detail::EventKind::wall: process_wall(e); break;
                case detail::EventKind::pair: process_pair(e); break;
                case detail::EventKind::cell: process_cell_crossing(e); break;
            }
            ++out_.events_processed;
        }
        while (si < samples.size()) take_snapshot(samples[si++]);
        return std::move(out_);
    }

private:
    Vec3 position_at(int i, double t) const { return pos_[i] + vel_[i] * (t - t0_[i]); }

    void advance(int i, double t) {
        pos_[i] = position_at(i, t);
        t0_[i] = t;
    }

    /// Time of impact for pair (i, j), computed from the two anchors alone.
    std::optional<double> pair_abs_time(int i, int j) const {
        const double tr = std::max(t0_[i], t0_[j]);
        const ParticleState a{position_at(i, tr), vel_[i]};
        const ParticleState b{position_at(j, tr), vel_[j]};
        const auto s = predict_pair_collision(a, b, eps_, cfg_.overlap_tolerance,
                                              cfg_.grazing_threshold);
        if (!s) return std::nullopt;
        return tr + *s;
    }

    template <class F>
    void for_each_candidate(int i, F&& f) const {
        if (!cells_on_) {
            for (int j = 0; j < n_; ++j) {
                if (j != i) f(j);
            }
            return;
        }
        const auto& c = cell_of_[i];
        for (int dz = -1; dz <= 1; ++dz) {
            const int z = c[2] + dz;
            if (z < 0 || z >= nc_) continue;
            for (int dy = -1; dy <= 1; ++dy) {
                const int y = c[1] + dy;
                if (y < 0 || y >= nc_) continue;
                for (int dx = -1; dx <= 1; ++dx) {
                    const int x = c[0] + dx;
                    if (x < 0 || x >= nc_) continue;
                    for (std::uint32_t j : bucket_[flat_cell(x, y, z)]) {
                        if (static_cast<int>(j) != i) f(static_cast<int>(j));
                    }
                }
            }
        }
    }

    /// Predict the single next event of particle i and push it (if any).
    void schedule(int i) {
        std::optional<detail::Event> best;
        auto consider = [&](const detail::Event& e) {
            if (!best || detail::event_before(e, *best)) best = e;
        };

        // walls sit at the clearance offset: the sphere surface reflects
        for (int axis = 0; axis < 3; ++axis) {
            const double v = vel_[i].comp(axis);
            if (v == 0.0) continue;
            const double x = pos_[i].comp(axis);
            const double t =
                t0_[i] + (v > 0.0 ? (wall_hi_ - x) / v : (wall_lo_ - x) / v);
            const auto face = static_cast<std::uint8_t>(2 * axis + (v > 0.0 ? 1 : 0));
            consider({t, static_cast<std::uint32_t>(i), detail::kNoPartner, stamp_[i], 0,
                      detail::EventKind::wall, face});
        }

        if (cells_on_) {
            for (int axis = 0; axis < 3; ++axis) {
                const double v = vel_[i].comp(axis);
                const auto& c = cell_of_[i];
                double boundary;
                std::uint8_t aux;
                if (v > 0.0 && c[axis] < nc_ - 1) {
                    boundary = cell_h_ * (c[axis] + 1);
                    aux = static_cast<std::uint8_t>(axis * 2 + 1);
                } else if (v < 0.0 && c[axis] > 0) {
                    boundary = cell_h_ * c[axis];
                    aux = static_cast<std::uint8_t>(axis * 2);
                } else {
                    continue;
                }
                double t = t0_[i] + (boundary - pos_[i].comp(axis)) / v;
                if (t < t0_[i]) t = t0_[i];  // rounding guard at the boundary
                consider({t, static_cast<std::uint32_t>(i), detail::kNoPartner, stamp_[i], 0,
                          detail::EventKind::cell, aux});
            }
        }

        for_each_candidate(i, [&](int j) {
            if (const auto t = pair_abs_time(i, j)) {
                consider({*t, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                          stamp_[i], stamp_[j], detail::EventKind::pair, 0});
            }
        });

        if (best) queue_.push(*best);
    }

    void process_wall(const detail::Event& e) {
        const int i = static_cast<int>(e.owner);
        advance(i, e.time);
        const auto face = static_cast<WallFace>(e.aux);
        // land exactly on the wall plane; kills accumulated drift in that coordinate
        pos_[i].set_comp(wall_axis(face), wall_positive(face) ? wall_hi_ : wall_lo_);
        vel_[i] = resolve_wall_collision(vel_[i], face);
        ++stamp_[i];
        ++out_.wall_bounces;
        schedule(i);
    }

    void process_pair(const detail::Event& e) {
        const int i = static_cast<int>(e.owner);
        const int j = static_cast<int>(e.partner);
        advance(i, e.time);
        advance(j, e.time);
        const int p = std::min(i, j);
        const int q = std::max(i, j);

        const Vec3 d = pos_[q] - pos_[p];
        const double dist = norm(d);
        if (dist < eps_ * (1.0 - cfg_.overlap_tolerance)) {
            throw std::runtime_error(
                "HardSphereSimulation: overlap at event resolution, pair (" + std::to_string(p) +
                "," + std::to_string(q) + ") separation " + std::to_string(dist) + " < eps " +
                std::to_string(eps_) + " at t=" + std::to_string(e.time));
        }
        const double dev = std::abs(dist - eps_) / eps_;
        if (dev > out_.max_contact_deviation) out_.max_contact_deviation = dev;
        if (dev > 1e-6) {
            throw std::runtime_error("HardSphereSimulation: pair event fired without contact");
        }

        // omega oriented so that omega·(v_p - v_q) >= 0 for the incoming pair
        const Vec3 omega = d / dist;
        if (dot(omega, vel_[p] - vel_[q]) < 0.0) {
            throw std::runtime_error("HardSphereSimulation: pair event fired while receding");
        }
        const auto [vp, vq] = resolve_pair_collision(vel_[p], vel_[q], omega);
        vel_[p] = vp;
        vel_[q] = vq;
        ++stamp_[p];
        ++stamp_[q];
        out_.log.append({e.time, static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(q),
                         omega});
        schedule(p);
        schedule(q);
    }

    void process_cell_crossing(const detail::Event& e) {
        // bookkeeping only: the anchor is untouched, so predictions are
        // unaffected and no stamp is bumped
        const int i = static_cast<int>(e.owner);
        const int axis = e.aux >> 1;
        const int dir = (e.aux & 1) ? 1 : -1;
        auto& c = cell_of_[i];
        remove_from_bucket(i);
        c[axis] += dir;
        insert_into_bucket(i);
        schedule(i);
    }

    void take_snapshot(double t) {
        Snapshot snap;
        snap.t = t;
        snap.states.reserve(n_);
        double ke = 0.0;
        for (int i = 0; i < n_; ++i) {
            snap.states.push_back({position_at(i, t), vel_[i]});
            ke += 0.5 * norm2(vel_[i]);
        }
        snap.kinetic_energy = ke;
        out_.energy_trace.push_back(ke);
        out_.snapshots.push_back(std::move(snap));
    }

    // --- cells -------------------------------------------------------------

    int flat_cell(int x, int y, int z) const { return (z * nc_ + y) * nc_ + x; }

    int cell_coord(double x) const {
        int c = static_cast<int>(std::floor(x / cell_h_));
        if (c < 0) c = 0;
        if (c >= nc_) c = nc_ - 1;
        return c;
    }

    void insert_into_bucket(int i) {
        const auto& c = cell_of_[i];
        auto& b = bucket_[flat_cell(c[0], c[1], c[2])];
        slot_[i] = static_cast<std::uint32_t>(b.size());
        b.push_back(static_cast<std::uint32_t>(i));
    }

    void remove_from_bucket(int i) {
        const auto& c = cell_of_[i];
        auto& b = bucket_[flat_cell(c[0], c[1], c[2])];
        const std::uint32_t s = slot_[i];
        b[s] = b.back();
        slot_[b[s]] = s;
        b.pop_back();
    }

    void init_cells() {
        cells_on_ = cfg_.use_cell_list;
        nc_ = cfg_.effective_cells_per_side();
        if (!cells_on_) return;
        cell_h_ = box_ / nc_;
        cell_of_.resize(n_);
        slot_.resize(n_);
        bucket_.assign(static_cast<std::size_t>(nc_) * nc_ * nc_, {});
        for (int i = 0; i < n_; ++i) {
            cell_of_[i] = {cell_coord(pos_[i].x), cell_coord(pos_[i].y), cell_coord(pos_[i].z)};
            insert_into_bucket(i);
        }
    }

    // --- initial-state checks ----------------------------------------------

    void validate_initial_states() {
        for (int i = 0; i < n_; ++i) {
            if (!pos_[i].is_finite() || !vel_[i].is_finite()) {
                throw std::invalid_argument("initial state not finite at index " +
                                            std::to_string(i));
            }
            for (int axis = 0; axis < 3; ++axis) {
                const double x = pos_[i].comp(axis);
                if (x < wall_lo_ || x > wall_hi_) {
                    throw std::invalid_argument(
                        "initial position outside the wall-bounded region at index " +
                        std::to_string(i));
                }
            }
        }
        // grid-bucketed pairwise separation check, O(N) at simulation densities
        const double min_sep = eps_ * (1.0 - cfg_.overlap_tolerance);
        const int nb = std::max(1, std::min(static_cast<int>(std::floor(box_ / eps_)), 128));
        const double h = box_ / nb;
        std::vector<std::vector<std::uint32_t>> grid(
            static_cast<std::size_t>(nb) * nb * nb);
        auto coord = [&](double x) {
            int c = static_cast<int>(std::floor(x / h));
            return std::min(std::max(c, 0), nb - 1);
        };
        auto flat = [&](int x, int y, int z) { return (z * nb + y) * nb + x; };
        for (int i = 0; i < n_; ++i) {
            const int cx = coord(pos_[i].x), cy = coord(pos_[i].y), cz = coord(pos_[i].z);
            for (int dz = -1; dz <= 1; ++dz)
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int x = cx + dx, y = cy + dy, z = cz + dz;
                        if (x < 0 || y < 0 || z < 0 || x >= nb || y >= nb || z >= nb) continue;
                        for (std::uint32_t j : grid[flat(x, y, z)]) {
                            if (norm(pos_[i] - pos_[j]) < min_sep) {
                                throw std::invalid_argument(
                                    "initial states overlap: particles " + std::to_string(j) +
                                    " and " + std::to_string(i));
                            }
                        }
                    }
            grid[flat(cx, cy, cz)].push_back(static_cast<std::uint32_t>(i));
        }
    }

    SimConfig cfg_;
    int n_;
    double eps_;
    double box_;
    double wall_lo_;
    double wall_hi_;

    std::vector<Vec3> pos_, vel_;   // anchors: state at each particle's last event
    std::vector<double> t0_;        // anchor times
    std::vector<std::uint32_t> stamp_;
    double clock_ = 0.0;

    bool cells_on_ = false;
    int nc_ = 1;
    double cell_h_ = 0.0;
    std::vector<std::array<int, 3>> cell_of_;
    std::vector<std::vector<std::uint32_t>> bucket_;
    std::vector<std::uint32_t> slot_;

    std::priority_queue<detail::Event, std::vector<detail::Event>, detail::EventAfter> queue_;

    SimulationResult out_;
};

/// Run one simulation; deterministic for fixed config and initial state.
inline SimulationResult run_simulation(const SimConfig& cfg,
                                       std::vector<ParticleState> initial) {
    HardSphereSimulation sim(cfg, std::move(initial));
    return sim.run();
}

}  // namespace bcmd
