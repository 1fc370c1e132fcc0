#include <algorithm>
#include <catch2/catch_amalgamated.hpp>

#include "honeycomb/fermi.hpp"
#include "util.hpp"

using namespace honeycomb;

TEST_CASE("closed-form points satisfy the Fermi condition") {
    for (const double eps : {0.05, 0.1, 0.2}) {
        const HoppingParams p{eps, 0.33};
        for (const auto& fp : fermi_points_closed_form(p.G())) {
            REQUIRE(std::abs(fermi_function(fp.k, p.G())) <= 1e-12);
        }
    }
}

TEST_CASE("domain of the closed form") {
    REQUIRE_THROWS_AS(fermi_points_closed_form(0.0), DomainError);
    REQUIRE_THROWS_AS(fermi_points_closed_form(2.0), DomainError);
    REQUIRE_THROWS_AS(fermi_points_closed_form(-1.0), DomainError);
}

TEST_CASE("satellites collapse onto the central point as G -> 0") {
    const auto pts = fermi_points_closed_form(1e-10);
    for (const auto& fp : pts) {
        const auto c = fermi_point_center_of(fp.omega);
        REQUIRE(torus_distance(fp.k, c) < 1e-4);
    }
}

TEST_CASE("satellite asymptotics at small G") {
    const HoppingParams p{0.1, 0.33};
    const double G = p.G();
    const auto pts = fermi_points_closed_form(G);
    const double eps4 = 50.0 * std::pow(p.epsilon, 4);
    for (const auto& fp : pts) {
        const Vec2 p0 = fermi_point_center_of(fp.omega);
        const Vec2 d = fp.k - p0;
        if (fp.j == 0) {
            REQUIRE(d.norm() < 1e-14);
        } else if (fp.j == 1) {
            REQUIRE(std::abs(d.x) < eps4);
            REQUIRE(std::abs(d.y - fp.omega * (2.0 / 3.0) * G) < eps4);
        } else {
            const double sx = fp.j == 2 ? +1.0 : -1.0;
            REQUIRE(std::abs(d.x - sx * G / std::sqrt(3.0)) < eps4);
            REQUIRE(std::abs(d.y + fp.omega * G / 3.0) < eps4);
        }
    }
}

TEST_CASE("root finder locates exactly the eight closed-form points") {
    for (const double eps : {0.05, 0.1, 0.2}) {
        const HoppingParams p{eps, 0.33};
        // tight residual tolerance: the Jacobian is O(G) at the satellites,
        // so 1e-10 position accuracy needs |D| well below 1e-12
        const auto found = fermi_points_root_find(p, 128, 1e-14);
        const auto cf = fermi_points_closed_form(p.G());
        REQUIRE(found.size() == 8);
        for (const auto& fp : cf) {
            double best = 1e9;
            for (const auto& q : found) best = std::min(best, torus_distance(q, fp.k));
            REQUIRE(best <= 1e-10);
        }
    }
}

TEST_CASE("root finder is grid-refinement stable") {
    const HoppingParams p{0.1, 0.33};
    auto a = fermi_points_root_find(p, 64, 1e-12);
    auto b = fermi_points_root_find(p, 256, 1e-12);
    REQUIRE(a.size() == b.size());
    for (const auto& q : a) {
        double best = 1e9;
        for (const auto& r : b) best = std::min(best, torus_distance(q, r));
        REQUIRE(best <= 1e-9);
    }
}

TEST_CASE("point count is eight across a log grid of G") {
    for (const double G : {1e-3, 1e-2, 1e-1, 0.5, 1.0, 1.9}) {
        const HoppingParams p{std::sqrt(G / 0.33), 0.33};
        REQUIRE(std::abs(p.G() - G) < 1e-12);
        REQUIRE(fermi_points_root_find(p, 192, 1e-12).size() == 8);
    }
}

TEST_CASE("self-energy model shapes") {
    const HoppingParams p{0.1, 0.33};
    const Momentum3 k{0.05, 2.0 * pi / 3.0 + 0.01, 0.4};
    SelfEnergyModel zero{SelfEnergyModel::Tag::Zero, 0.5};
    REQUIRE(zero.w2(-3, k, p).max_norm() == 0.0);

    SelfEnergyModel mass{SelfEnergyModel::Tag::ConstantSigma1, 1e-3};
    const CMat4 w = mass.w2(-3, k, p);
    REQUIRE(std::abs(w(0, 1) - cd(1e-3)) < 1e-18);
    REQUIRE(std::abs(w(1, 0) - cd(1e-3)) < 1e-18);
    REQUIRE(w(2, 3) == cd(0.0));

    SelfEnergyModel lin{SelfEnergyModel::Tag::Linear, 1e-3};
    const CMat4 wl = lin.w2(-3, k, p);
    REQUIRE((wl - wl.adjoint()).max_norm() > 0.0);  // has i*k0 diagonal
    REQUIRE(std::abs(wl(0, 0) - cd(0.0, -1e-3 * k.k0)) < 1e-18);
    REQUIRE(std::abs(wl(0, 1) - cd(-1e-3 * p.gamma1())) < 1e-18);

    SelfEnergyModel scoped{SelfEnergyModel::Tag::ConstantSigma1, 1e-3, -4};
    REQUIRE(scoped.w2(-4, k, p).max_norm() > 0.0);
    REQUIRE(scoped.w2(-5, k, p).max_norm() == 0.0);
}
