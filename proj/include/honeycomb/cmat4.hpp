#pragma once

// Small dense complex matrices (2x2 and 4x4) with exact, dependency-free
// linear algebra: arithmetic, cyclic Jacobi Hermitian eigensolver, operator
// norm via A^dag A, partial-pivot LU determinant and Gauss-Jordan inverse.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>

namespace honeycomb {

using cd = std::complex<double>;
inline constexpr cd I{0.0, 1.0};

template <std::size_t N>
struct CMat {
    std::array<cd, N * N> m{};

    cd& operator()(std::size_t r, std::size_t c) { return m[r * N + c]; }
    const cd& operator()(std::size_t r, std::size_t c) const { return m[r * N + c]; }

    static CMat zero() { return CMat{}; }
    static CMat identity() {
        CMat a;
        for (std::size_t i = 0; i < N; ++i) a(i, i) = 1.0;
        return a;
    }

    CMat& operator+=(const CMat& o) {
        for (std::size_t i = 0; i < N * N; ++i) m[i] += o.m[i];
        return *this;
    }
    CMat& operator-=(const CMat& o) {
        for (std::size_t i = 0; i < N * N; ++i) m[i] -= o.m[i];
        return *this;
    }
    CMat& operator*=(cd s) {
        for (auto& x : m) x *= s;
        return *this;
    }

    friend CMat operator+(CMat a, const CMat& b) { return a += b; }
    friend CMat operator-(CMat a, const CMat& b) { return a -= b; }
    friend CMat operator*(CMat a, cd s) { return a *= s; }
    friend CMat operator*(cd s, CMat a) { return a *= s; }
    friend CMat operator-(CMat a) { return a *= cd(-1.0); }

    friend CMat operator*(const CMat& a, const CMat& b) {
        CMat c;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t k = 0; k < N; ++k) {
                const cd aik = a(i, k);
                if (aik == cd(0.0)) continue;
                for (std::size_t j = 0; j < N; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    CMat adjoint() const {
        CMat a;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) a(i, j) = std::conj((*this)(j, i));
        return a;
    }
    CMat transpose() const {
        CMat a;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) a(i, j) = (*this)(j, i);
        return a;
    }
    CMat conj() const {
        CMat a;
        for (std::size_t i = 0; i < N * N; ++i) a.m[i] = std::conj(m[i]);
        return a;
    }

    double max_norm() const {
        double v = 0.0;
        for (const auto& x : m) v = std::max(v, std::abs(x));
        return v;
    }
    double frobenius() const {
        double v = 0.0;
        for (const auto& x : m) v += std::norm(x);
        return std::sqrt(v);
    }
};

using CMat2 = CMat<2>;
using CMat4 = CMat<4>;

// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.
// Deterministic sweep order; converges quadratically for these sizes.
template <std::size_t N>
std::array<double, N> hermitian_eigenvalues(CMat<N> a, int max_sweeps = 60) {
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < N; ++p)
            for (std::size_t q = p + 1; q < N; ++q) off += std::norm(a(p, q));
        if (off < 1e-32 * (1.0 + a.frobenius() * a.frobenius())) break;
        for (std::size_t p = 0; p < N; ++p)
            for (std::size_t q = p + 1; q < N; ++q) {
                const cd apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double app = a(p, p).real(), aqq = a(q, q).real();
                // unitary 2x2: diag(1, e^{-i phi}) to make the pivot real,
                // then a real rotation to kill it
                const double phi = std::arg(apq);
                const double g = std::abs(apq);
                const double theta = 0.5 * std::atan2(2.0 * g, aqq - app);
                const double c = std::cos(theta), s = std::sin(theta);
                const cd e{std::cos(phi), std::sin(phi)};
                const cd ebar = std::conj(e);
                // U = diag(1, ebar) * [[c, s], [-s, c]]
                for (std::size_t r = 0; r < N; ++r) {
                    const cd arp = a(r, p), arq = a(r, q);
                    a(r, p) = c * arp - s * ebar * arq;
                    a(r, q) = s * arp + c * ebar * arq;
                }
                for (std::size_t col = 0; col < N; ++col) {
                    const cd apc = a(p, col), aqc = a(q, col);
                    a(p, col) = c * apc - s * e * aqc;
                    a(q, col) = s * apc + c * e * aqc;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
            }
    }
    std::array<double, N> ev;
    for (std::size_t i = 0; i < N; ++i) ev[i] = a(i, i).real();
    for (std::size_t i = 1; i < N; ++i)
        for (std::size_t j = i; j > 0 && ev[j - 1] > ev[j]; --j) std::swap(ev[j - 1], ev[j]);
    return ev;
}

// Operator (spectral) norm via the largest eigenvalue of A^dag A.
template <std::size_t N>
double op_norm(const CMat<N>& a) {
    auto ev = hermitian_eigenvalues(a.adjoint() * a);
    return std::sqrt(std::max(0.0, ev[N - 1]));
}

// Partial-pivot LU determinant: the generic dense oracle.
template <std::size_t N>
cd det_lu(CMat<N> a) {
    cd det = 1.0;
    for (std::size_t col = 0; col < N; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < N; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (std::abs(a(piv, col)) == 0.0) return 0.0;
        if (piv != col) {
            for (std::size_t c = 0; c < N; ++c) std::swap(a(piv, c), a(col, c));
            det = -det;
        }
        det *= a(col, col);
        for (std::size_t r = col + 1; r < N; ++r) {
            const cd f = a(r, col) / a(col, col);
            for (std::size_t c = col; c < N; ++c) a(r, c) -= f * a(col, c);
        }
    }
    return det;
}

struct SingularMatrix : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Gauss-Jordan inverse with partial pivoting: the generic dense oracle.
template <std::size_t N>
CMat<N> inverse_gj(CMat<N> a) {
    CMat<N> inv = CMat<N>::identity();
    for (std::size_t col = 0; col < N; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < N; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (std::abs(a(piv, col)) < 1e-300) throw SingularMatrix("inverse_gj: pivot vanished");
        if (piv != col)
            for (std::size_t c = 0; c < N; ++c) {
                std::swap(a(piv, c), a(col, c));
                std::swap(inv(piv, c), inv(col, c));
            }
        const cd d = a(col, col);
        for (std::size_t c = 0; c < N; ++c) {
            a(col, c) /= d;
            inv(col, c) /= d;
        }
        for (std::size_t r = 0; r < N; ++r) {
            if (r == col) continue;
            const cd f = a(r, col);
            if (f == cd(0.0)) continue;
            for (std::size_t c = 0; c < N; ++c) {
                a(r, c) -= f * a(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    return inv;
}

// 2x2 blocks of a 4x4 matrix; index (0,0) is the upper-left block.
inline CMat2 block(const CMat4& a, std::size_t bi, std::size_t bj) {
    CMat2 b;
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) b(r, c) = a(2 * bi + r, 2 * bj + c);
    return b;
}

inline void set_block(CMat4& a, std::size_t bi, std::size_t bj, const CMat2& b) {
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) a(2 * bi + r, 2 * bj + c) = b(r, c);
}

inline CMat4 from_blocks(const CMat2& a00, const CMat2& a01, const CMat2& a10, const CMat2& a11) {
    CMat4 a;
    set_block(a, 0, 0, a00);
    set_block(a, 0, 1, a01);
    set_block(a, 1, 0, a10);
    set_block(a, 1, 1, a11);
    return a;
}

inline CMat2 sigma1() {
    CMat2 s;
    s(0, 1) = 1.0;
    s(1, 0) = 1.0;
    return s;
}
inline CMat2 sigma2() {
    CMat2 s;
    s(0, 1) = -I;
    s(1, 0) = I;
    return s;
}
inline CMat2 sigma3() {
    CMat2 s;
    s(0, 0) = 1.0;
    s(1, 1) = -1.0;
    return s;
}

}  // namespace honeycomb
