#include <catch2/catch.hpp>

#include <cmath>
#include <optional>

#include "bcmd/collision.hpp"
#include "bcmd/rng.hpp"

using namespace bcmd;

TEST_CASE("pair prediction: 1-D closing gap") {
    const ParticleState a{{0.05, 0.5, 0.5}, {1.0, 0.0, 0.0}};
    const ParticleState b{{0.95, 0.5, 0.5}, {0.0, 0.0, 0.0}};
    const auto s = predict_pair_collision(a, b, 0.1);
    REQUIRE(s.has_value());
    CHECK(*s == Approx(0.8).epsilon(1e-12));
}

TEST_CASE("pair prediction: no event cases") {
    SECTION("equal velocities") {
        const ParticleState a{{0.1, 0.2, 0.3}, {0.4, -0.2, 0.9}};
        const ParticleState b{{0.7, 0.2, 0.3}, {0.4, -0.2, 0.9}};
        CHECK_FALSE(predict_pair_collision(a, b, 0.1).has_value());
    }
    SECTION("receding pair") {
        const ParticleState a{{0.3, 0.5, 0.5}, {-1.0, 0.0, 0.0}};
        const ParticleState b{{0.7, 0.5, 0.5}, {1.0, 0.0, 0.0}};
        CHECK_FALSE(predict_pair_collision(a, b, 0.1).has_value());
    }
    SECTION("grazing geometry is a miss") {
        // impact parameter exactly the diameter: discriminant is ~0
        const ParticleState a{{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
        const ParticleState b{{0.8, 0.1, 0.0}, {0.0, 0.0, 0.0}};
        CHECK_FALSE(predict_pair_collision(a, b, 0.1).has_value());
    }
    SECTION("closing but missing") {
        const ParticleState a{{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
        const ParticleState b{{0.6, 0.3, 0.0}, {0.0, 0.0, 0.0}};
        CHECK_FALSE(predict_pair_collision(a, b, 0.1).has_value());
    }
}

TEST_CASE("pair prediction rejects overlapping input") {
    const ParticleState a{{0.50, 0.5, 0.5}, {1.0, 0.0, 0.0}};
    const ParticleState b{{0.55, 0.5, 0.5}, {0.0, 0.0, 0.0}};
    CHECK_THROWS_AS(predict_pair_collision(a, b, 0.1), std::invalid_argument);
}

TEST_CASE("pair prediction is orientation symmetric") {
    Rng rng(7);
    int hits = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const ParticleState a{{rng.uniform01(), rng.uniform01(), rng.uniform01()},
                              {rng.normal(), rng.normal(), rng.normal()}};
        ParticleState b{{rng.uniform01() + 2.0, rng.uniform01(), rng.uniform01()},
                        {rng.normal(), rng.normal(), rng.normal()}};
        if (trial % 2 == 0) {
            // aim the relative velocity at the partner so many trials actually hit
            b.velocity = a.velocity + (a.position - b.position) * rng.uniform(0.2, 2.0) +
                         Vec3{0.005 * rng.normal(), 0.005 * rng.normal(),
                              0.005 * rng.normal()};
        }
        const auto s1 = predict_pair_collision(a, b, 0.05);
        const auto s2 = predict_pair_collision(b, a, 0.05);
        REQUIRE(s1.has_value() == s2.has_value());
        if (s1) {
            CHECK(*s1 == *s2);  // bitwise
            ++hits;
        }
    }
    CHECK(hits > 50);
}

TEST_CASE("wall prediction basics") {
    SECTION("straight exit") {
        const auto w = predict_wall_collision({{0.5, 0.5, 0.5}, {2.0, 0.0, 0.0}}, 1.0);
        CHECK(w.time == Approx(0.25).epsilon(1e-15));
        CHECK(w.face == WallFace::xpos);
    }
    SECTION("at rest: +inf sentinel") {
        const auto w = predict_wall_collision({{0.5, 0.5, 0.5}, {0.0, 0.0, 0.0}}, 1.0);
        CHECK(std::isinf(w.time));
    }
    SECTION("exact tie resolves by axis order, x before y") {
        // dyadic coordinates so both exit times are exactly 0.25
        const auto w = predict_wall_collision({{0.25, 0.75, 0.5}, {-1.0, 1.0, 0.0}}, 1.0);
        CHECK(w.time == 0.25);
        CHECK(w.face == WallFace::xneg);
    }
}

TEST_CASE("pair resolution: head-on exchange") {
    const auto [v, v1] =
        resolve_pair_collision({1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0});
    CHECK(v == Vec3{0.0, 0.0, 0.0});
    CHECK(v1 == Vec3{1.0, 0.0, 0.0});
}

TEST_CASE("pair resolution: degenerate directions leave velocities unchanged") {
    SECTION("zero relative velocity") {
        const Vec3 u{0.3, -0.2, 0.9};
        const auto [v, v1] = resolve_pair_collision(u, u, {0.0, 1.0, 0.0});
        CHECK(v == u);
        CHECK(v1 == u);
    }
    SECTION("omega orthogonal to the relative velocity") {
        const auto [v, v1] =
            resolve_pair_collision({1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 1.0, 0.0});
        CHECK(v == Vec3{1.0, 0.0, 0.0});
        CHECK(v1 == Vec3{0.0, 0.0, 0.0});
    }
}

TEST_CASE("pair resolution conserves momentum and energy") {
    Rng rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const Vec3 v{rng.normal(), rng.normal(), rng.normal()};
        const Vec3 v1{rng.normal(), rng.normal(), rng.normal()};
        Vec3 omega{rng.normal(), rng.normal(), rng.normal()};
        omega = omega / norm(omega);
        const auto [w, w1] = resolve_pair_collision(v, v1, omega);
        const Vec3 dp = (w + w1) - (v + v1);
        CHECK(std::abs(dp.x) < 1e-12);
        CHECK(std::abs(dp.y) < 1e-12);
        CHECK(std::abs(dp.z) < 1e-12);
        CHECK(norm2(w) + norm2(w1) == Approx(norm2(v) + norm2(v1)).epsilon(1e-12));
        // the exchanged component flips sign: omega is incoming-oriented afterwards
        CHECK(dot(omega, w - w1) == Approx(-dot(omega, v - v1)).margin(1e-12));
    }
}

TEST_CASE("pair resolution rejects non-unit omega") {
    CHECK_THROWS_AS(resolve_pair_collision({1, 0, 0}, {0, 0, 0}, {1.0, 1.0, 0.0}),
                    std::invalid_argument);
}

TEST_CASE("wall resolution") {
    CHECK(resolve_wall_collision({1.0, 2.0, 3.0}, WallFace::xpos) == Vec3{-1.0, 2.0, 3.0});
    CHECK(resolve_wall_collision({0.0, 1.0, 0.0}, WallFace::xpos) == Vec3{0.0, 1.0, 0.0});

    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec3 v{rng.normal(), rng.normal(), rng.normal()};
        const auto face = static_cast<WallFace>(rng.next_u64() % 6);
        const Vec3 twice = resolve_wall_collision(resolve_wall_collision(v, face), face);
        CHECK(twice == v);  // involution
        CHECK(norm2(resolve_wall_collision(v, face)) == norm2(v));
    }
}
