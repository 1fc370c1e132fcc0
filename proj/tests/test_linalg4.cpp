#include <catch2/catch_amalgamated.hpp>

#include "honeycomb/linalg4.hpp"
#include "honeycomb/model.hpp"
#include "util.hpp"

using namespace honeycomb;

static SpecialForm random_form(std::mt19937_64& rng) {
    return {testutil::random_unit_disc(rng), testutil::random_unit_disc(rng),
            testutil::random_unit_disc(rng), testutil::uniform(rng, -1.0, 1.0),
            testutil::uniform(rng, -1.0, 1.0)};
}

TEST_CASE("special determinant matches the LU oracle and is real") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 10000; ++i) {
        const SpecialForm s = random_form(rng);
        const cd dlu = det_lu(s.assemble());
        const double d = det4_special(s);
        const double scale = std::max(1e-30, std::abs(dlu));
        REQUIRE(std::abs(dlu - cd(d)) <= 1e-12 * std::max(1.0, scale));
        REQUIRE(std::abs(dlu.imag()) <= 1e-10 * std::max(1.0, scale));
    }
}

TEST_CASE("special determinant edge cases") {
    REQUIRE(det4_special({1.0, 1.0, 1.0, 0.0, 0.0}) == 0.0);
    REQUIRE(det4_special({0.0, 0.0, 0.0, 1.0, 1.0}) == 1.0);
}

TEST_CASE("special inverse inverts and matches Gauss-Jordan") {
    std::mt19937_64 rng(22);
    int kept = 0;
    while (kept < 10000) {
        const SpecialForm s = random_form(rng);
        const CMat4 a = s.assemble();
        const double nrm = op_norm(a);
        if (std::abs(det4_special(s)) < 1e-6 * nrm * nrm * nrm * nrm) continue;
        ++kept;
        const CMat4 inv = inv4_special(s);
        REQUIRE((a * inv - CMat4::identity()).max_norm() <= 1e-10);
        REQUIRE((inv - inverse_gj(a)).max_norm() <= 1e-8 * op_norm(inv));
    }
}

TEST_CASE("special inverse of i*identity") {
    const CMat4 inv = inv4_special({0.0, 0.0, 0.0, 1.0, 1.0});
    REQUIRE((inv - (-I) * CMat4::identity()).max_norm() < 1e-14);
}

TEST_CASE("special inverse rejects singular input") {
    REQUIRE_THROWS_AS(inv4_special({1.0, 1.0, 1.0, 0.0, 0.0}), SingularMatrix);
}

TEST_CASE("inverse of the propagator special form at k=0") {
    const HoppingParams p{0.1, 0.33};
    const Momentum3 k{0.1, 0.0, 0.0};
    const cd om = omega(k.spatial());
    const SpecialForm s{p.gamma1(), om, p.gamma3() * om, -k.k0, -k.k0};
    REQUIRE((inv4_special(s) - inverse_gj(inverse_propagator(k, p))).max_norm() < 1e-10);
}

TEST_CASE("det4_nokz agrees with det4_special at x=z=0") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 2000; ++i) {
        SpecialForm s = random_form(rng);
        s.x = s.z = 0.0;
        REQUIRE(std::abs(det4_nokz(s.a, s.b, s.c) - det4_special(s)) <=
                1e-12 * std::max(1.0, det4_special(s)));
    }
    REQUIRE(det4_nokz(0.0, 1.0, 0.0) == 1.0);
    const cd a{0.3, 0.1};
    const cd c{0.2, -0.4};
    const cd b = std::sqrt(a * std::conj(c));
    REQUIRE(det4_nokz(a, b, c) < 1e-28);
}

TEST_CASE("block diagonalization of the identity") {
    const auto f = block_diagonalize(CMat4::identity());
    REQUIRE((f.lower - CMat4::identity()).max_norm() < 1e-14);
    REQUIRE((f.diag - CMat4::identity()).max_norm() < 1e-14);
    REQUIRE((f.upper - CMat4::identity()).max_norm() < 1e-14);
}

TEST_CASE("block diagonalization reconstructs and exposes the Schur block") {
    std::mt19937_64 rng(24);
    int kept = 0;
    while (kept < 10000) {
        CMat4 b;
        for (std::size_t i = 0; i < 16; ++i) b.m[i] = testutil::random_unit_disc(rng);
        const CMat2 bxx = block(b, 0, 0);
        if (std::abs(det2(bxx)) < 1e-2) continue;
        if (std::abs(det_lu(b)) < 1e-2) continue;
        ++kept;
        const auto f = block_diagonalize(b);
        REQUIRE((f.lower * f.diag * f.upper - b).max_norm() <= 1e-10);
        const CMat2 schur = block(f.diag, 1, 1);
        if (std::abs(det2(schur)) < 1e-3) continue;
        const CMat4 binv = inverse_gj(b);
        REQUIRE((inverse2(schur) - block(binv, 1, 1)).max_norm() <=
                1e-10 * std::max(1.0, op_norm(binv)));
    }
}

TEST_CASE("block diagonalization rejects a singular upper-left block") {
    CMat4 b = CMat4::identity();
    b(0, 0) = 0.0;
    b(1, 1) = 0.0;
    b(0, 1) = 0.0;
    b(1, 0) = 0.0;
    REQUIRE_THROWS_AS(block_diagonalize(b), SingularBlock);
}
