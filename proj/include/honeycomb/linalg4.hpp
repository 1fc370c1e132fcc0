#pragma once

// Closed-form determinant and inverse for 4x4 matrices of the propagator's
// special shape, plus 2x2-block diagonalization with the Schur complement.

#include <complex>
#include <stdexcept>

#include "honeycomb/cmat4.hpp"

namespace honeycomb {

// A = [[ix, a*, 0, b*], [a, ix, b, 0], [0, b*, iz, c], [b, 0, c*, iz]]
struct SpecialForm {
    cd a{}, b{}, c{};
    double x = 0.0, z = 0.0;

    CMat4 assemble() const {
        CMat4 m;
        m(0, 0) = I * x;
        m(0, 1) = std::conj(a);
        m(0, 3) = std::conj(b);
        m(1, 0) = a;
        m(1, 1) = I * x;
        m(1, 2) = b;
        m(2, 1) = std::conj(b);
        m(2, 2) = I * z;
        m(2, 3) = c;
        m(3, 0) = b;
        m(3, 2) = std::conj(c);
        m(3, 3) = I * z;
        return m;
    }
};

inline double det4_special(const SpecialForm& s) {
    const double b2 = std::norm(s.b);
    const double zx = s.z * s.x;
    const cd cross = std::conj(s.a) * s.b * s.b * s.c;
    return (b2 + zx) * (b2 + zx) + std::norm(s.a) * s.z * s.z +
           std::norm(s.c) * (s.x * s.x + std::norm(s.a)) - 2.0 * cross.real();
}

inline double det4_nokz(cd a, cd b, cd c) { return std::norm(b * b - a * std::conj(c)); }

namespace detail {

struct Cofactors {
    cd aa, ab_t, aa_t, ab, atb, atat;
};

inline Cofactors special_cofactors(cd a, cd b, cd c, double x, double z) {
    const cd ac = std::conj(b) * std::conj(b) - std::conj(a) * c;  // (b*)^2 - a* c
    Cofactors g;
    g.aa = -I * z * std::norm(b) - I * x * (z * z + std::norm(c));
    g.ab_t = z * z * std::conj(a) - std::conj(c) * ac;
    g.aa_t = I * z * std::conj(a) * b + I * x * std::conj(b) * std::conj(c);
    g.ab = b * ac + z * x * std::conj(b);
    g.atb = -a * ac + x * x * c;
    g.atat = -I * z * std::norm(a) - I * x * (x * z + std::norm(b));
    return g;
}

}  // namespace detail

// Closed-form inverse; entries follow the cofactor pattern with the
// "plus" rule g+(a,b,c,x,z) = conj(g(a,b,c,-x,-z)).
inline CMat4 inv4_special(const SpecialForm& s) {
    const double det = det4_special(s);
    const double nrm = op_norm(s.assemble());
    if (std::abs(det) < 1e-14 * nrm * nrm * nrm * nrm)
        throw SingularMatrix("inv4_special: determinant below threshold");
    const auto g = detail::special_cofactors(s.a, s.b, s.c, s.x, s.z);
    const auto gm = detail::special_cofactors(s.a, s.b, s.c, -s.x, -s.z);
    const auto plus = [](cd v) { return std::conj(v); };
    CMat4 m;
    m(0, 0) = g.aa;
    m(0, 1) = g.ab_t;
    m(0, 2) = g.aa_t;
    m(0, 3) = g.ab;
    m(1, 0) = plus(gm.ab_t);
    m(1, 1) = g.aa;
    m(1, 2) = plus(gm.ab);
    m(1, 3) = plus(gm.aa_t);
    m(2, 0) = plus(gm.aa_t);
    m(2, 1) = g.ab;
    m(2, 2) = g.atat;
    m(2, 3) = g.atb;
    m(3, 0) = plus(gm.ab);
    m(3, 1) = g.aa_t;
    m(3, 2) = plus(gm.atb);
    m(3, 3) = g.atat;
    return m * (1.0 / det);
}

struct SingularBlock : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline cd det2(const CMat2& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

inline CMat2 inverse2(const CMat2& m) {
    const cd d = det2(m);
    const double nrm = op_norm(m);
    if (std::abs(d) <= 1e-14 * nrm * nrm) throw SingularBlock("inverse2: singular 2x2 block");
    CMat2 r;
    r(0, 0) = m(1, 1) / d;
    r(0, 1) = -m(0, 1) / d;
    r(1, 0) = -m(1, 0) / d;
    r(1, 1) = m(0, 0) / d;
    return r;
}

struct BlockFactors {
    CMat4 lower;  // unit lower block-triangular
    CMat4 diag;   // block-diagonal: (B_xx, Schur complement)
    CMat4 upper;  // unit upper block-triangular
};

// B = lower * diag * upper with diag = diag(B_xx, B_pp - B_px B_xx^-1 B_xp);
// the Schur complement's inverse is the lower-right block of B^-1.
inline BlockFactors block_diagonalize(const CMat4& b) {
    const CMat2 bxx = block(b, 0, 0);
    const CMat2 bxp = block(b, 0, 1);
    const CMat2 bpx = block(b, 1, 0);
    const CMat2 bpp = block(b, 1, 1);
    const CMat2 bxx_inv = inverse2(bxx);
    const CMat2 schur = bpp - bpx * bxx_inv * bxp;
    BlockFactors f;
    f.lower = from_blocks(CMat2::identity(), CMat2::zero(), bpx * bxx_inv, CMat2::identity());
    f.diag = from_blocks(bxx, CMat2::zero(), CMat2::zero(), schur);
    f.upper = from_blocks(CMat2::identity(), bxx_inv * bxp, CMat2::zero(), CMat2::identity());
    return f;
}

}  // namespace honeycomb
