#include <catch2/catch_amalgamated.hpp>

#include "honeycomb/linalg4.hpp"
#include "honeycomb/model.hpp"
#include "util.hpp"

using namespace honeycomb;

static const HoppingParams P01{0.1, 0.33};

TEST_CASE("omega at high-symmetry points") {
    REQUIRE(std::abs(omega({0.0, 0.0}) - cd(3.0)) < 1e-15);
    const Vec2 pf0{2.0 * pi / 3.0, 2.0 * pi / (3.0 * std::sqrt(3.0))};
    REQUIRE(std::abs(omega(pf0)) < 1e-14);
}

TEST_CASE("omega is periodic under the dual lattice") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const Vec2 k = testutil::random_bz(rng);
        for (const Vec2 g : {dual1(), dual2(), dual1() + dual2(), -1.0 * dual2()}) {
            REQUIRE(std::abs(omega(k + g) - omega(k)) < 1e-12);
        }
    }
}

TEST_CASE("momentum reduction is idempotent and stays in the cell") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 200; ++i) {
        Momentum3 k{0.0, testutil::uniform(rng, -20.0, 20.0), testutil::uniform(rng, -20.0, 20.0)};
        const Momentum3 r = k.reduced();
        const Momentum3 rr = r.reduced();
        REQUIRE(std::abs(r.kx - rr.kx) < 1e-12);
        REQUIRE(std::abs(r.ky - rr.ky) < 1e-12);
        const Vec2 ab = dual_coords(r.spatial());
        REQUIRE(ab.x >= -1e-12);
        REQUIRE(ab.x < 1.0 + 1e-12);
        REQUIRE(ab.y >= -1e-12);
        REQUIRE(ab.y < 1.0 + 1e-12);
        REQUIRE(std::abs(omega(r.spatial()) - omega(k.spatial())) < 1e-10);
    }
}

TEST_CASE("h0 is Hermitian with chiral-symmetric spectrum") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 200; ++i) {
        const Vec2 k = testutil::random_bz(rng);
        const CMat4 h = h0_matrix(k, P01);
        REQUIRE((h - h.adjoint()).max_norm() < 1e-14);
        const auto ev = band_eigenvalues(k, P01);
        REQUIRE(std::abs(ev[0] + ev[3]) < 1e-12);
        REQUIRE(std::abs(ev[1] + ev[2]) < 1e-12);
    }
}

TEST_CASE("spectrum at the central Fermi point is {-g1, 0, 0, g1}") {
    const Vec2 pf0{2.0 * pi / 3.0, 2.0 * pi / (3.0 * std::sqrt(3.0))};
    const auto ev = band_eigenvalues(pf0, P01);
    REQUIRE(std::abs(ev[0] + P01.gamma1()) < 1e-12);
    REQUIRE(std::abs(ev[1]) < 1e-12);
    REQUIRE(std::abs(ev[2]) < 1e-12);
    REQUIRE(std::abs(ev[3] - P01.gamma1()) < 1e-12);
}

TEST_CASE("det H0 closed form matches the LU oracle") {
    std::mt19937_64 rng(14);
    for (int i = 0; i < 2000; ++i) {
        const Vec2 k = testutil::random_bz(rng);
        const cd dlu = det_lu(h0_matrix(k, P01));
        const double dcf = det_h0_closed_form(k, P01);
        REQUIRE(std::abs(dlu - cd(dcf)) <= 1e-12 * std::max(1.0, std::abs(dcf)));
    }
}

TEST_CASE("inverse propagator assembles the special form exactly") {
    std::mt19937_64 rng(15);
    for (int i = 0; i < 500; ++i) {
        const Momentum3 k = testutil::random_momentum(rng);
        const cd om = omega(k.spatial());
        const SpecialForm s{P01.gamma1(), om, P01.gamma3() * om * std::exp(I * 3.0 * k.kx), -k.k0,
                            -k.k0};
        REQUIRE((s.assemble() - inverse_propagator(k, P01)).max_norm() < 1e-14);
    }
}

TEST_CASE("inverse propagator is singular exactly on the Fermi set") {
    const Vec2 pf0{2.0 * pi / 3.0, 2.0 * pi / (3.0 * std::sqrt(3.0))};
    REQUIRE(std::abs(det_lu(inverse_propagator({0.0, pf0.x, pf0.y}, P01))) < 1e-13);
    REQUIRE(std::abs(det_lu(inverse_propagator({0.3, pf0.x, pf0.y}, P01))) > 1e-6);
}

TEST_CASE("two central bands touch zero only at Fermi momenta along Gamma-K") {
    const Vec2 pf0{2.0 * pi / 3.0, 2.0 * pi / (3.0 * std::sqrt(3.0))};
    for (int i = 0; i <= 100; ++i) {
        const double t = i / 100.0;
        const auto ev = band_eigenvalues(t * pf0, P01);
        const double gap = std::min(std::abs(ev[1]), std::abs(ev[2]));
        if (t < 0.99) REQUIRE(gap > 1e-4);
    }
    REQUIRE(std::min(std::abs(band_eigenvalues(pf0, P01)[1]),
                     std::abs(band_eigenvalues(pf0, P01)[2])) < 1e-12);
}

TEST_CASE("all seven symmetry residuals vanish") {
    std::mt19937_64 rng(16);
    const Transform ts[] = {Transform::U1,       Transform::Rotation, Transform::Conjugation,
                            Transform::VReflect, Transform::HReflect, Transform::Parity,
                            Transform::TimeInversion};
    for (int i = 0; i < 1000; ++i) {
        const Momentum3 k = testutil::random_momentum(rng);
        for (const auto t : ts) REQUIRE(symmetry_residual(k, t, P01) <= 1e-12);
    }
}

TEST_CASE("perturbed gamma3 entry breaks the rotation symmetry") {
    std::mt19937_64 rng(17);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const Momentum3 k = testutil::random_momentum(rng);
        worst = std::max(worst, symmetry_residual(k, Transform::Rotation, P01, 1e-3));
    }
    REQUIRE(worst > 1e-6);
}

TEST_CASE("transform names round-trip") {
    REQUIRE(transform_from_name("rotation") == Transform::Rotation);
    REQUIRE_THROWS_AS(transform_from_name("bogus"), std::invalid_argument);
}
