#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace bcmd {

/**
 * Parameters of one hard-sphere run in the cube [0, L]^3.
 *
 * With epsilon left at 0 the diameter defaults to N^{-1/2}, i.e. the
 * fixed-mean-free-path convention N epsilon^2 = 1 with L = 1.
 */
struct SimConfig {
    int n_particles = 0;
    double epsilon = 0.0;  // 0 -> N^{-1/2}
    double box_side = 1.0;
    double t_end = 0.0;
    std::vector<double> sample_times;  // strictly increasing, within (0, t_end]
    std::uint64_t seed = 0;

    double overlap_tolerance = 1e-9;
    double grazing_threshold = 1e-14;

    // Distance from each face at which a center reflects. The default -1
    // resolves to epsilon/2: the sphere surface, not the center, touches the
    // wall. Set 0 to let centers reach the faces (point-particle walls).
    double wall_clearance = -1.0;

    // Cell-list acceleration. Off by default; the all-pairs baseline is the
    // correctness reference and both modes produce identical logs.
    bool use_cell_list = false;
    int cells_per_side = 0;  // 0 -> automatic

    double effective_epsilon() const {
        return epsilon > 0.0 ? epsilon : 1.0 / std::sqrt(static_cast<double>(n_particles));
    }

    double effective_wall_clearance() const {
        return wall_clearance < 0.0 ? effective_epsilon() / 2.0 : wall_clearance;
    }

    int effective_cells_per_side() const {
        if (!use_cell_list) return 1;
        const double eps = effective_epsilon();
        const int max_cells = static_cast<int>(std::floor(box_side / eps));
        int nc = cells_per_side > 0
                     ? cells_per_side
                     : static_cast<int>(std::floor(std::cbrt(static_cast<double>(n_particles))));
        if (nc > max_cells) nc = max_cells;
        if (nc < 1) nc = 1;
        return nc;
    }

    void validate() const {
        if (n_particles < 2) throw std::invalid_argument("SimConfig: n_particles must be >= 2");
        const double eps = effective_epsilon();
        if (!(eps > 0.0) || !(eps < box_side / 2.0)) {
            throw std::invalid_argument("SimConfig: require 0 < epsilon < L/2");
        }
        if (!(box_side > 0.0)) throw std::invalid_argument("SimConfig: box_side must be positive");
        if (!(t_end > 0.0)) throw std::invalid_argument("SimConfig: t_end must be positive");
        double prev = 0.0;
        for (double t : sample_times) {
            if (!(t > prev) || t > t_end) {
                throw std::invalid_argument(
                    "SimConfig: sample_times must be strictly increasing within (0, t_end]");
            }
            prev = t;
        }
        if (!(overlap_tolerance >= 0.0) || !(grazing_threshold >= 0.0)) {
            throw std::invalid_argument("SimConfig: tolerances must be nonnegative");
        }
        const double clearance = effective_wall_clearance();
        if (!(clearance >= 0.0) || box_side - 2.0 * clearance < 2.0 * eps) {
            throw std::invalid_argument("SimConfig: wall clearance leaves no room to move");
        }
        if (use_cell_list && effective_cells_per_side() * effective_epsilon() > box_side) {
            throw std::invalid_argument("SimConfig: cell size below sphere diameter");
        }
    }
};

}  // namespace bcmd
