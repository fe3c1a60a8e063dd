#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcmd/format.hpp"
#include "bcmd/vec3.hpp"

namespace bcmd {

/** One pair collision: time, the two particle indices and the unit impact direction. */
struct CollisionRecord {
    double t = 0.0;
    std::uint32_t p = 0;
    std::uint32_t q = 0;
    Vec3 omega;
};

/**
 * Time-ordered log of all pair collisions of a run. Wall bounces are never
 * logged; backward clusters are built from inter-particle collisions only.
 */
class CollisionLog {
public:
    void append(const CollisionRecord& r) {
        if (r.p == r.q) throw std::invalid_argument("CollisionLog: p == q");
        if (!records_.empty() && !(r.t > records_.back().t)) {
            throw std::invalid_argument("CollisionLog: times must be strictly increasing");
        }
        if (std::abs(norm(r.omega) - 1.0) > 1e-12) {
            throw std::invalid_argument("CollisionLog: omega is not unit norm");
        }
        records_.push_back(r);
    }

    const std::vector<CollisionRecord>& records() const { return records_; }
    std::size_t collision_count() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    void reserve(std::size_t n) { records_.reserve(n); }

    /// Number of records with t_m < t (prefix length of the cutoff at time t).
    std::size_t cutoff(double t) const {
        auto it = std::lower_bound(records_.begin(), records_.end(), t,
                                   [](const CollisionRecord& r, double tt) { return r.t < tt; });
        return static_cast<std::size_t>(it - records_.begin());
    }

    void write_csv(std::ostream& os) const {
        os << "t,p,q,wx,wy,wz\n";
        for (const auto& r : records_) {
            os << format_double(r.t) << ',' << r.p << ',' << r.q << ','
               << format_double(r.omega.x) << ',' << format_double(r.omega.y) << ','
               << format_double(r.omega.z) << '\n';
        }
    }

    static CollisionLog read_csv(std::istream& is) {
        CollisionLog log;
        std::string line;
        if (!std::getline(is, line) || line.rfind("t,p,q", 0) != 0) {
            throw std::runtime_error("CollisionLog: missing CSV header");
        }
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const auto f = split_csv_line(line);
            if (f.size() != 6) throw std::runtime_error("CollisionLog: bad CSV row");
            CollisionRecord r;
            r.t = parse_double(f[0]);
            r.p = static_cast<std::uint32_t>(parse_int(f[1]));
            r.q = static_cast<std::uint32_t>(parse_int(f[2]));
            r.omega = {parse_double(f[3]), parse_double(f[4]), parse_double(f[5])};
            log.append(r);
        }
        return log;
    }

    // Compact form: per record, float64 t, uint32 p, uint32 q, 3x float64 omega,
    // little-endian (written as-is on little-endian hosts).
    void write_binary(std::ostream& os) const {
        for (const auto& r : records_) {
            write_raw(os, r.t);
            write_raw(os, r.p);
            write_raw(os, r.q);
            write_raw(os, r.omega.x);
            write_raw(os, r.omega.y);
            write_raw(os, r.omega.z);
        }
    }

    static CollisionLog read_binary(std::istream& is) {
        CollisionLog log;
        while (true) {
            CollisionRecord r;
            if (!read_raw(is, r.t)) break;
            if (!read_raw(is, r.p) || !read_raw(is, r.q) || !read_raw(is, r.omega.x) ||
                !read_raw(is, r.omega.y) || !read_raw(is, r.omega.z)) {
                throw std::runtime_error("CollisionLog: truncated binary record");
            }
            log.append(r);
        }
        return log;
    }

private:
    template <class T>
    static void write_raw(std::ostream& os, const T& v) {
        os.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    template <class T>
    static bool read_raw(std::istream& is, T& v) {
        is.read(reinterpret_cast<char*>(&v), sizeof(T));
        return static_cast<std::size_t>(is.gcount()) == sizeof(T);
    }

    std::vector<CollisionRecord> records_;
};

}  // namespace bcmd
