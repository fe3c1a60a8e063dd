#include <catch2/catch.hpp>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "bcmd/init.hpp"
#include "helpers.hpp"

using namespace bcmd;

TEST_CASE("position sampling") {
    SECTION("single particle always succeeds") {
        Rng rng(1);
        const auto xs = sample_positions(1, 0.1, 1.0, rng);
        REQUIRE(xs.size() == 1);
        CHECK(xs[0].x >= 0.05);
        CHECK(xs[0].x <= 0.95);
    }
    SECTION("epsilon >= L is rejected") {
        Rng rng(1);
        CHECK_THROWS_AS(sample_positions(4, 1.0, 1.0, rng), std::invalid_argument);
    }
    SECTION("excessive packing is rejected") {
        Rng rng(1);
        CHECK_THROWS_AS(sample_positions(1000, 0.12, 1.0, rng), std::invalid_argument);
    }
    SECTION("production density: non-overlap and wall clearance") {
        const int n = 1802;
        const double eps = 1.0 / std::sqrt(static_cast<double>(n));
        const double packing =
            n * (std::numbers::pi / 6.0) * eps * eps * eps;  // (pi/6) N^{-1/2}
        CHECK(packing == Approx(0.01234).epsilon(1e-3));
        Rng rng(99);
        const auto xs = sample_positions(n, eps, 1.0, rng);
        REQUIRE(xs.size() == static_cast<std::size_t>(n));
        for (const auto& x : xs) {
            for (int axis = 0; axis < 3; ++axis) {
                CHECK(x.comp(axis) >= eps / 2.0);
                CHECK(x.comp(axis) <= 1.0 - eps / 2.0);
            }
        }
        // full O(N^2) re-check of the invariant
        double min_dist = 1e9;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) min_dist = std::min(min_dist, norm(xs[i] - xs[j]));
        }
        CHECK(min_dist >= eps);
    }
}

TEST_CASE("velocity sampling energies") {
    const int n = 100000;
    SECTION("case 1 has energy 1/2") {
        Rng rng(11);
        const auto vs = sample_velocities(VelocityDistribution::case1(), n, rng);
        double e = 0.0;
        for (const auto& v : vs) e += 0.5 * norm2(v);
        e /= n;
        const double se = std::sqrt(1.0 / 6.0 / n);  // var(|v|^2/2) = 1.5 sigma^4
        CHECK(std::abs(e - 0.5) < 3.0 * se);
    }
    SECTION("case 3 has energy 2") {
        Rng rng(12);
        const auto vs = sample_velocities(VelocityDistribution::case3(), n, rng);
        double e = 0.0;
        for (const auto& v : vs) e += 0.5 * norm2(v);
        e /= n;
        const double se = std::sqrt(1.5 * std::pow(4.0 / 3.0, 2) / n);
        CHECK(std::abs(e - 2.0) < 3.0 * se);
    }
    SECTION("case 2: uniform cube, per-component variance 1/3, energy 1/2") {
        Rng rng(13);
        const auto vs = sample_velocities(VelocityDistribution::case2(), n, rng);
        double var = 0.0, e = 0.0;
        for (const auto& v : vs) {
            var += v.x * v.x;
            e += 0.5 * norm2(v);
        }
        var /= n;
        e /= n;
        CHECK(var == Approx(1.0 / 3.0).epsilon(0.02));
        CHECK(e == Approx(0.5).epsilon(0.02));
        for (const auto& v : vs) {
            CHECK(std::abs(v.x) < 1.0);
            CHECK(std::abs(v.y) < 1.0);
            CHECK(std::abs(v.z) < 1.0);
        }
    }
    SECTION("maxwell-beta matches its nominal energy") {
        Rng rng(14);
        const auto dist = VelocityDistribution::maxwell(1.5);
        CHECK(dist.nominal_energy() == Approx(1.0));
        const auto vs = sample_velocities(dist, n, rng);
        double e = 0.0;
        for (const auto& v : vs) e += 0.5 * norm2(v);
        CHECK(e / n == Approx(1.0).epsilon(0.02));
    }
}

TEST_CASE("velocity components pass a KS test at 1%") {
    const int n = 100000;
    SECTION("case 1 component is N(0, 1/3)") {
        Rng rng(21);
        const auto vs = sample_velocities(VelocityDistribution::case1(), n, rng);
        std::vector<double> xs;
        xs.reserve(n);
        for (const auto& v : vs) xs.push_back(v.x);
        const double sigma = 1.0 / std::sqrt(3.0);
        CHECK(test_helpers::ks_passes_at_1pct(
            xs, [&](double x) { return test_helpers::normal_cdf(x, sigma); }));
    }
    SECTION("case 3 component is N(0, 4/3)") {
        Rng rng(22);
        const auto vs = sample_velocities(VelocityDistribution::case3(), n, rng);
        std::vector<double> xs;
        xs.reserve(n);
        for (const auto& v : vs) xs.push_back(v.z);
        const double sigma = 2.0 / std::sqrt(3.0);
        CHECK(test_helpers::ks_passes_at_1pct(
            xs, [&](double x) { return test_helpers::normal_cdf(x, sigma); }));
    }
    SECTION("case 2 component is uniform(-1, 1)") {
        Rng rng(23);
        const auto vs = sample_velocities(VelocityDistribution::case2(), n, rng);
        std::vector<double> xs;
        xs.reserve(n);
        for (const auto& v : vs) xs.push_back(v.y);
        CHECK(test_helpers::ks_passes_at_1pct(xs, [](double x) {
            return x <= -1.0 ? 0.0 : (x >= 1.0 ? 1.0 : 0.5 * (x + 1.0));
        }));
    }
}

TEST_CASE("realized energy fluctuates around the nominal value") {
    Rng rng_a(31), rng_b(32);
    const auto a = make_initial(VelocityDistribution::case1(), 500, 0.02, 1.0, rng_a);
    const auto b = make_initial(VelocityDistribution::case1(), 500, 0.02, 1.0, rng_b);
    CHECK(a.realized_energy != b.realized_energy);
    CHECK(a.realized_energy != 0.5);
    CHECK(a.realized_energy == Approx(0.5).epsilon(0.15));
}

TEST_CASE("optional zero-momentum shift") {
    Rng rng(41);
    const auto ic = make_initial(VelocityDistribution::case2(), 321, 0.02, 1.0, rng, true);
    Vec3 total{};
    for (const auto& s : ic.states) total += s.velocity;
    CHECK(std::abs(total.x) < 1e-10);
    CHECK(std::abs(total.y) < 1e-10);
    CHECK(std::abs(total.z) < 1e-10);
}

TEST_CASE("initial conditions round-trip through CSV") {
    Rng rng(51);
    const auto ic = make_initial(VelocityDistribution::case1(), 64, 0.05, 1.0, rng);
    std::stringstream ss;
    write_states_csv(ss, ic.states);
    const auto back = read_states_csv(ss);
    REQUIRE(back.size() == ic.states.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].position == ic.states[i].position);  // bitwise
        CHECK(back[i].velocity == ic.states[i].velocity);
    }
}

TEST_CASE("numbered case helpers") {
    CHECK(VelocityDistribution::numbered(1).nominal_energy() == Approx(0.5));
    CHECK(VelocityDistribution::numbered(3).beta == Approx(0.75));
    CHECK(VelocityDistribution::numbered(1).label() == "1");
    CHECK_THROWS_AS(VelocityDistribution::numbered(4), std::invalid_argument);
    CHECK_THROWS_AS(VelocityDistribution::maxwell(-2.0), std::invalid_argument);
}
