#pragma once

// Bilayer honeycomb tight-binding model: dual lattice, structure factor
// Omega(k), Hamiltonian H0(k) in the basis (a, btilde, atilde, b), the
// inverse propagator A(k) = -i k0 - H0(k), band eigenvalues, and numeric
// residuals for the seven lattice/field symmetries.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "honeycomb/cmat4.hpp"

namespace honeycomb {

inline constexpr double pi = std::numbers::pi;

struct HoppingParams {
    double epsilon = 0.1;
    double gamma3_ratio = 0.33;

    double gamma0() const { return 1.0; }
    double gamma1() const { return epsilon; }
    double gamma3() const { return gamma3_ratio * epsilon; }
    double G() const { return gamma1() * gamma3(); }

    void validate() const {
        if (!(epsilon > 0.0)) throw std::invalid_argument("HoppingParams: epsilon must be > 0");
        if (!(G() > 0.0 && G() < 2.0))
            throw std::invalid_argument("HoppingParams: gamma1*gamma3 must lie in (0,2)");
    }
};

struct Vec2 {
    double x = 0.0, y = 0.0;
    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
    double dot(Vec2 b) const { return x * b.x + y * b.y; }
    double norm() const { return std::hypot(x, y); }
};

// nearest-neighbor lattice vectors and their duals (Gi . lj = 2 pi delta_ij)
inline Vec2 lat1() { return {1.5, std::sqrt(3.0) / 2.0}; }
inline Vec2 lat2() { return {1.5, -std::sqrt(3.0) / 2.0}; }
inline Vec2 dual1() { return {2.0 * pi / 3.0, 2.0 * pi / std::sqrt(3.0)}; }
inline Vec2 dual2() { return {2.0 * pi / 3.0, -2.0 * pi / std::sqrt(3.0)}; }

// fractional coordinates over (G1, G2)
inline Vec2 dual_coords(Vec2 k) {
    const double a = 0.5 * (k.x / (2.0 * pi / 3.0) + k.y / (2.0 * pi / std::sqrt(3.0)));
    const double b = 0.5 * (k.x / (2.0 * pi / 3.0) - k.y / (2.0 * pi / std::sqrt(3.0)));
    return {a, b};
}

// reduce to the fundamental parallelogram [0,1) x [0,1) in dual coordinates
inline Vec2 reduce_bz(Vec2 k) {
    Vec2 ab = dual_coords(k);
    ab.x -= std::floor(ab.x);
    ab.y -= std::floor(ab.y);
    return ab.x * dual1() + ab.y * dual2();
}

// distance on the momentum torus (nearest image)
inline double torus_distance(Vec2 k1, Vec2 k2) {
    Vec2 ab = dual_coords(k1 - k2);
    ab.x -= std::round(ab.x);
    ab.y -= std::round(ab.y);
    return (ab.x * dual1() + ab.y * dual2()).norm();
}

struct Momentum3 {
    double k0 = 0.0;
    double kx = 0.0;
    double ky = 0.0;

    Vec2 spatial() const { return {kx, ky}; }
    Momentum3 reduced() const {
        const Vec2 r = reduce_bz({kx, ky});
        return {k0, r.x, r.y};
    }
};

inline cd omega(Vec2 k) {
    return 1.0 + 2.0 * std::exp(-I * 1.5 * k.x) * std::cos(std::sqrt(3.0) / 2.0 * k.y);
}

// hopping matrix in the basis (a, btilde, atilde, b); H0 = -hopping
inline CMat4 hopping_matrix(Vec2 k, const HoppingParams& p) {
    const cd om = omega(k);
    const cd ph = std::exp(I * 3.0 * k.x);
    CMat4 m;
    m(0, 1) = p.gamma1();
    m(1, 0) = p.gamma1();
    m(1, 2) = om;
    m(2, 1) = std::conj(om);
    m(0, 3) = std::conj(om);
    m(3, 0) = om;
    m(2, 3) = p.gamma3() * om * ph;
    m(3, 2) = p.gamma3() * std::conj(om) * std::conj(ph);
    return m;
}

inline CMat4 h0_matrix(Vec2 k, const HoppingParams& p) { return -hopping_matrix(k, p); }

// A(k) = -i k0 - H0(k)
inline CMat4 inverse_propagator(Momentum3 k, const HoppingParams& p) {
    CMat4 a = hopping_matrix(k.spatial(), p);
    for (std::size_t i = 0; i < 4; ++i) a(i, i) -= I * k.k0;
    return a;
}

inline std::array<double, 4> band_eigenvalues(Vec2 k, const HoppingParams& p) {
    return hermitian_eigenvalues(h0_matrix(k, p));
}

// det H0(k) = |Omega^2 - gamma1 gamma3 Omega* e^{-3 i kx}|^2
inline double det_h0_closed_form(Vec2 k, const HoppingParams& p) {
    const cd om = omega(k);
    const cd w = om * om - p.G() * std::conj(om) * std::exp(-I * 3.0 * k.x);
    return std::norm(w);
}

enum class Transform { U1, Rotation, Conjugation, VReflect, HReflect, Parity, TimeInversion };

inline Transform transform_from_name(const std::string& s) {
    if (s == "U1") return Transform::U1;
    if (s == "rotation") return Transform::Rotation;
    if (s == "conjugation") return Transform::Conjugation;
    if (s == "v-reflect") return Transform::VReflect;
    if (s == "h-reflect") return Transform::HReflect;
    if (s == "parity") return Transform::Parity;
    if (s == "time-inversion") return Transform::TimeInversion;
    throw std::invalid_argument("unknown transform: " + s);
}

inline Vec2 rotate(Vec2 k, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * k.x - s * k.y, s * k.x + c * k.y};
}

// Residual of the symmetry identity on A(k); gamma3_perturb adds a
// symmetry-breaking constant to the (atilde, b) entry (negative control).
inline double symmetry_residual(Momentum3 k, Transform t, const HoppingParams& p,
                                double gamma3_perturb = 0.0) {
    const auto A = [&](Momentum3 q) {
        CMat4 a = inverse_propagator(q, p);
        a(2, 3) += gamma3_perturb;
        return a;
    };
    const CMat4 ak = A(k);
    switch (t) {
        case Transform::U1:
            return 0.0;
        case Transform::Rotation: {
            // U^dag A(T^-1 k) U = A(k), U = diag(1, 1, e^{-i l2.k}, e^{+i l2.k}),
            // T^-1 k = (k0, R^-1 kbar) with R the 2pi/3 counterclockwise rotation
            const Vec2 kr = rotate(k.spatial(), -2.0 * pi / 3.0);
            const double eta = lat2().dot(k.spatial());
            CMat4 u = CMat4::identity();
            u(2, 2) = std::exp(-I * eta);
            u(3, 3) = std::exp(I * eta);
            const CMat4 lhs = u.adjoint() * A({k.k0, kr.x, kr.y}) * u;
            return (lhs - ak).max_norm();
        }
        case Transform::Conjugation:
            return (A({-k.k0, -k.kx, -k.ky}).conj() - ak).max_norm();
        case Transform::VReflect:
            return (A({k.k0, k.kx, -k.ky}) - ak).max_norm();
        case Transform::HReflect: {
            const CMat4 s = from_blocks(sigma1(), CMat2::zero(), CMat2::zero(), sigma1());
            return (s * A({k.k0, -k.kx, k.ky}) * s - ak).max_norm();
        }
        case Transform::Parity:
            return (A({k.k0, -k.kx, -k.ky}).transpose() - ak).max_norm();
        case Transform::TimeInversion: {
            const CMat4 s3 = from_blocks(sigma3(), CMat2::zero(), CMat2::zero(), sigma3());
            return (-(s3 * A({-k.k0, k.kx, k.ky}) * s3) - ak).max_norm();
        }
    }
    return 0.0;
}

}  // namespace honeycomb
