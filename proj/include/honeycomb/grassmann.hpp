#pragma once

// Brute-force finite Grassmann algebra: Berezin integrals, Gaussian
// (Wick) moments, truncated expectations via a nilpotent lambda
// extension, the addition principle, Gram decompositions of propagator
// samples, the Gram-Hadamard inequality, and determinant-expansion
// (spanning-tree) bound checks.

#include <array>
#include <bit>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "honeycomb/cmat4.hpp"
#include "honeycomb/model.hpp"

namespace honeycomb {

struct SizeLimit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Element of the Grassmann algebra on up to 16 generators. A monomial is
// a generator subset (bitmask) with the canonical sign convention that
// the stored coefficient multiplies the product of its generators in
// increasing index order.
struct GrassmannPoly {
    static constexpr int max_generators = 16;

    std::map<std::uint32_t, cd> terms;

    static GrassmannPoly scalar(cd v) {
        GrassmannPoly p;
        if (v != cd(0.0)) p.terms[0] = v;
        return p;
    }

    static GrassmannPoly generator(int i) {
        if (i < 0 || i >= max_generators)
            throw SizeLimit("GrassmannPoly: generator index out of range");
        GrassmannPoly p;
        p.terms[1u << i] = 1.0;
        return p;
    }

    cd coeff(std::uint32_t mask) const {
        const auto it = terms.find(mask);
        return it == terms.end() ? cd(0.0) : it->second;
    }

    bool is_even() const {
        for (const auto& [m, c] : terms)
            if (std::popcount(m) % 2 != 0 && c != cd(0.0)) return false;
        return true;
    }

    GrassmannPoly& prune() {
        for (auto it = terms.begin(); it != terms.end();)
            it = it->second == cd(0.0) ? terms.erase(it) : std::next(it);
        return *this;
    }

    GrassmannPoly operator+(const GrassmannPoly& o) const {
        GrassmannPoly r = *this;
        for (const auto& [m, c] : o.terms) r.terms[m] += c;
        return r.prune();
    }

    GrassmannPoly operator-(const GrassmannPoly& o) const {
        GrassmannPoly r = *this;
        for (const auto& [m, c] : o.terms) r.terms[m] -= c;
        return r.prune();
    }

    GrassmannPoly operator*(cd v) const {
        GrassmannPoly r;
        if (v == cd(0.0)) return r;
        for (const auto& [m, c] : terms) r.terms[m] = c * v;
        return r;
    }

    // sign of merging two increasing generator products into one
    static int merge_sign(std::uint32_t a, std::uint32_t b) {
        int swaps = 0;
        for (std::uint32_t m = b; m; m &= m - 1)
            swaps += std::popcount(a >> (std::countr_zero(m) + 1));
        return swaps % 2 ? -1 : +1;
    }

    GrassmannPoly operator*(const GrassmannPoly& o) const {
        GrassmannPoly r;
        for (const auto& [ma, ca] : terms)
            for (const auto& [mb, cb] : o.terms) {
                if (ma & mb) continue;
                r.terms[ma | mb] += ca * cb * static_cast<double>(merge_sign(ma, mb));
            }
        return r.prune();
    }
};

// exp of a polynomial; the non-scalar part is nilpotent so the series is
// finite
inline GrassmannPoly exp_poly(const GrassmannPoly& v) {
    const cd s = v.coeff(0);
    GrassmannPoly rest = v - GrassmannPoly::scalar(s);
    GrassmannPoly out = GrassmannPoly::scalar(1.0);
    GrassmannPoly pow = GrassmannPoly::scalar(1.0);
    for (int k = 1; k <= GrassmannPoly::max_generators && !pow.terms.empty(); ++k) {
        pow = pow * rest * cd(1.0 / k);
        out = out + pow;
    }
    return out * std::exp(s);
}

// Berezin integral over n pairs (minus generators 0..n-1, plus n..2n-1):
// the linear functional that is 1 on psi-_0 psi+_0 ... psi-_{n-1} psi+_{n-1}
// and 0 on every other monomial
inline cd berezin_integral(const GrassmannPoly& f, int npairs) {
    if (2 * npairs > GrassmannPoly::max_generators)
        throw SizeLimit("berezin_integral: too many pairs");
    const std::uint32_t full = npairs == GrassmannPoly::max_generators / 2
                                   ? 0xffffu
                                   : (1u << (2 * npairs)) - 1u;
    // canonical increasing order lists all minus then all plus generators;
    // interleaving them into pair order costs n(n-1)/2 transpositions
    const int sign = (npairs * (npairs - 1) / 2) % 2 ? -1 : +1;
    return f.coeff(full) * static_cast<double>(sign);
}

namespace detail {

inline cd det_dense(std::vector<cd> m, int n) {
    cd det = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(m[static_cast<std::size_t>(r) * n + c]) >
                std::abs(m[static_cast<std::size_t>(piv) * n + c]))
                piv = r;
        if (m[static_cast<std::size_t>(piv) * n + c] == cd(0.0)) return 0.0;
        if (piv != c) {
            for (int j = 0; j < n; ++j)
                std::swap(m[static_cast<std::size_t>(piv) * n + j],
                          m[static_cast<std::size_t>(c) * n + j]);
            det = -det;
        }
        const cd p = m[static_cast<std::size_t>(c) * n + c];
        det *= p;
        for (int r = c + 1; r < n; ++r) {
            const cd f = m[static_cast<std::size_t>(r) * n + c] / p;
            for (int j = c; j < n; ++j)
                m[static_cast<std::size_t>(r) * n + j] -= f * m[static_cast<std::size_t>(c) * n + j];
        }
    }
    return det;
}

inline std::vector<cd> inverse_dense(std::vector<cd> m, int n) {
    std::vector<cd> inv(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i) * n + i] = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(m[static_cast<std::size_t>(r) * n + c]) >
                std::abs(m[static_cast<std::size_t>(piv) * n + c]))
                piv = r;
        if (m[static_cast<std::size_t>(piv) * n + c] == cd(0.0))
            throw SingularMatrix("inverse_dense: singular");
        if (piv != c)
            for (int j = 0; j < n; ++j) {
                std::swap(m[static_cast<std::size_t>(piv) * n + j],
                          m[static_cast<std::size_t>(c) * n + j]);
                std::swap(inv[static_cast<std::size_t>(piv) * n + j],
                          inv[static_cast<std::size_t>(c) * n + j]);
            }
        const cd p = m[static_cast<std::size_t>(c) * n + c];
        for (int j = 0; j < n; ++j) {
            m[static_cast<std::size_t>(c) * n + j] /= p;
            inv[static_cast<std::size_t>(c) * n + j] /= p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == c) continue;
            const cd f = m[static_cast<std::size_t>(r) * n + c];
            if (f == cd(0.0)) continue;
            for (int j = 0; j < n; ++j) {
                m[static_cast<std::size_t>(r) * n + j] -= f * m[static_cast<std::size_t>(c) * n + j];
                inv[static_cast<std::size_t>(r) * n + j] -=
                    f * inv[static_cast<std::size_t>(c) * n + j];
            }
        }
    }
    return inv;
}

// cyclic complex Jacobi for a Hermitian matrix; returns eigenvalues,
// optionally accumulating the unitary of column eigenvectors
inline std::vector<double> jacobi_hermitian(std::vector<cd> a, int n,
                                            std::vector<cd>* vecs = nullptr) {
    const auto at = [&](std::vector<cd>& m, int i, int j) -> cd& {
        return m[static_cast<std::size_t>(i) * n + j];
    };
    std::vector<cd> v;
    if (vecs) {
        v.assign(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) at(v, i, i) = 1.0;
    }
    double scale = 0.0;
    for (const cd& x : a) scale = std::max(scale, std::abs(x));
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(at(a, p, q)));
        if (off <= 1e-15 * (scale + 1e-300)) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const cd apq = at(a, p, q);
                const double mag = std::abs(apq);
                if (mag <= 1e-18 * (scale + 1e-300)) continue;
                const cd phase = apq / mag;
                const double tau = (at(a, q, q).real() - at(a, p, p).real()) / (2.0 * mag);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // columns: p' = c p - s conj(phase) q ; q' = s phase p + c q
                for (int i = 0; i < n; ++i) {
                    const cd aip = at(a, i, p), aiq = at(a, i, q);
                    at(a, i, p) = c * aip - s * std::conj(phase) * aiq;
                    at(a, i, q) = s * phase * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const cd api = at(a, p, i), aqi = at(a, q, i);
                    at(a, p, i) = c * api - s * phase * aqi;
                    at(a, q, i) = s * std::conj(phase) * api + c * aqi;
                }
                if (vecs)
                    for (int i = 0; i < n; ++i) {
                        const cd vip = at(v, i, p), viq = at(v, i, q);
                        at(v, i, p) = c * vip - s * std::conj(phase) * viq;
                        at(v, i, q) = s * phase * vip + c * viq;
                    }
            }
    }
    std::vector<double> ev(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = at(a, i, i).real();
    if (vecs) *vecs = std::move(v);
    return ev;
}

inline double op_norm_dense(const std::vector<cd>& g, int n) {
    std::vector<cd> h(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            cd s = 0.0;
            for (int k = 0; k < n; ++k)
                s += std::conj(g[static_cast<std::size_t>(k) * n + i]) *
                     g[static_cast<std::size_t>(k) * n + j];
            h[static_cast<std::size_t>(i) * n + j] = s;
        }
    double mx = 0.0;
    for (const double e : jacobi_hermitian(std::move(h), n)) mx = std::max(mx, e);
    return std::sqrt(std::max(mx, 0.0));
}

}  // namespace detail

// Gaussian pairing of n minus generators (ids 0..n-1) with n plus
// generators (ids n..2n-1): <psi-_i psi+_j> = g_ij. Generator ids >= 2n
// are external spectators.
struct GaussianSpec {
    int n = 0;
    std::vector<cd> g;  // n x n row-major

    cd gij(int i, int j) const { return g[static_cast<std::size_t>(i) * n + j]; }

    void validate() const {
        if (n < 0 || 2 * n > GrassmannPoly::max_generators)
            throw SizeLimit("GaussianSpec: too many pairs");
        if (g.size() != static_cast<std::size_t>(n) * n)
            throw std::invalid_argument("GaussianSpec: matrix shape");
    }
};

// Wick moment of an ordered monomial: the signed determinant of the
// propagator minor (minus rows / plus columns in order of appearance;
// the sign sorts the monomial into the interleaved -+-+... order whose
// moment is exactly det)
inline cd wick_moment(const GaussianSpec& spec, const std::vector<int>& mono) {
    spec.validate();
    std::uint32_t seen = 0;
    std::vector<int> minus, plus, order;
    for (const int id : mono) {
        if (id < 0 || id >= 2 * spec.n)
            throw std::invalid_argument("wick_moment: generator outside the Gaussian pairing");
        if (seen & (1u << id)) return 0.0;  // repeated generator
        seen |= 1u << id;
        if (id < spec.n) {
            order.push_back(2 * static_cast<int>(minus.size()));
            minus.push_back(id);
        } else {
            order.push_back(2 * static_cast<int>(plus.size()) + 1);
            plus.push_back(id - spec.n);
        }
    }
    if (minus.size() != plus.size()) return 0.0;
    const std::size_t p = minus.size();
    if (p == 0) return 1.0;
    int inversions = 0;
    for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t j = i + 1; j < order.size(); ++j)
            if (order[i] > order[j]) ++inversions;
    std::vector<cd> m(p * p);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b) m[a * p + b] = spec.gij(minus[a], plus[b]);
    const cd det = detail::det_dense(std::move(m), static_cast<int>(p));
    return inversions % 2 ? -det : det;
}

// Gaussian expectation, integrating the paired generators and leaving
// external ones in place. In the canonical increasing order the paired
// generators precede the external ones, so no extra sign arises.
inline GrassmannPoly gaussian_expectation(const GaussianSpec& spec, const GrassmannPoly& f) {
    spec.validate();
    const std::uint32_t internal = (1u << (2 * spec.n)) - 1u;
    GrassmannPoly out;
    for (const auto& [mask, c] : f.terms) {
        std::vector<int> mono;
        for (std::uint32_t m = mask & internal; m; m &= m - 1) mono.push_back(std::countr_zero(m));
        const cd w = wick_moment(spec, mono);
        if (w == cd(0.0)) continue;
        out.terms[mask & ~internal] += c * w;
    }
    return out.prune();
}

// Truncated expectation E^T(V_1, ..., V_N): the lambda_1...lambda_N
// coefficient of log E[exp(sum lambda_i V_i)] with each lambda_i
// nilpotent of order two, so exp(lambda_i V_i) = 1 + lambda_i V_i exactly
inline GrassmannPoly truncated_expectation(const GaussianSpec& spec,
                                           const std::vector<GrassmannPoly>& vs) {
    spec.validate();
    const int N = static_cast<int>(vs.size());
    if (N < 1 || N > 6) throw SizeLimit("truncated_expectation: need 1 <= N <= 6");
    for (const auto& v : vs)
        if (!v.is_even())
            throw std::invalid_argument("truncated_expectation: polynomials must be even");
    const std::uint32_t full = (1u << N) - 1u;
    // moments per lambda subset
    std::vector<GrassmannPoly> z(full + 1);
    for (std::uint32_t s = 0; s <= full; ++s) {
        GrassmannPoly prod = GrassmannPoly::scalar(1.0);
        for (int i = 0; i < N; ++i)
            if (s & (1u << i)) prod = prod * vs[static_cast<std::size_t>(i)];
        z[s] = gaussian_expectation(spec, prod);
    }
    z[0] = z[0] - GrassmannPoly::scalar(1.0);  // E[1] = 1 exactly
    // log(1 + X) truncated: X has no lambda-empty component
    std::vector<GrassmannPoly> acc = z, logz = z;
    for (int k = 2; k <= N; ++k) {
        std::vector<GrassmannPoly> next(full + 1);
        for (std::uint32_t s = 1; s <= full; ++s) {
            // proper submask convolution
            for (std::uint32_t t = (s - 1) & s; t; t = (t - 1) & s)
                next[s] = next[s] + acc[t] * z[s & ~t];
        }
        acc = std::move(next);
        const double w = (k % 2 ? 1.0 : -1.0) / k;
        for (std::uint32_t s = 1; s <= full; ++s) logz[s] = logz[s] + acc[s] * cd(w);
    }
    return logz[full];
}

// addition principle: the moment under g1 + g2 equals the moment of the
// two-field decomposition psi = psi_1 + psi_2 under the block measure
inline double addition_residual(const GaussianSpec& g1, const GaussianSpec& g2,
                                const std::vector<int>& mono) {
    g1.validate();
    g2.validate();
    if (g1.n != g2.n) throw std::invalid_argument("addition_residual: mismatched pair counts");
    const int n = g1.n;
    if (4 * n > GrassmannPoly::max_generators)
        throw SizeLimit("addition_residual: doubled algebra too large");
    GaussianSpec sum{n, g1.g};
    for (std::size_t i = 0; i < sum.g.size(); ++i) sum.g[i] += g2.g[i];
    const cd lhs = wick_moment(sum, mono);

    // doubled algebra: minus ids 0..n-1 (field 1) and n..2n-1 (field 2),
    // plus ids 2n.. and 3n..
    GaussianSpec both{2 * n, std::vector<cd>(static_cast<std::size_t>(4) * n * n)};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            both.g[static_cast<std::size_t>(i) * 2 * n + j] = g1.gij(i, j);
            both.g[static_cast<std::size_t>(i + n) * 2 * n + j + n] = g2.gij(i, j);
        }
    GrassmannPoly sub = GrassmannPoly::scalar(1.0);
    for (const int id : mono) {
        GrassmannPoly field;
        if (id < n)
            field = GrassmannPoly::generator(id) + GrassmannPoly::generator(n + id);
        else
            field = GrassmannPoly::generator(n + id) + GrassmannPoly::generator(2 * n + id);
        sub = sub * field;
    }
    const cd rhs = gaussian_expectation(both, sub).coeff(0);
    return std::abs(lhs - rhs);
}

// spacetime point for the Gram vectors
struct XPoint {
    double x0 = 0.0;
    Vec2 x{};
};

// Gram form of a sampled propagator: per-momentum singular value
// decompositions ghat(k) = Q diag(lam) W^dagger give vector families with
// g(x - x') = <A_alpha(x), B_alpha'(x')> and |A|^2 bounded by the averaged
// operator norm
struct GramDecomposition {
    std::vector<Momentum3> ks;
    double weight = 1.0;  // 1 / (beta |Lambda|)
    std::vector<CMat4> q, w;
    std::vector<std::array<double, 4>> lam;

    std::vector<cd> a_vector(int alpha, const XPoint& p) const {
        std::vector<cd> out(ks.size() * 4);
        const double rw = std::sqrt(weight);
        for (std::size_t ki = 0; ki < ks.size(); ++ki) {
            const Momentum3& k = ks[ki];
            const cd ph = rw * std::exp(-I * (k.k0 * p.x0 + k.kx * p.x.x + k.ky * p.x.y));
            for (std::size_t a2 = 0; a2 < 4; ++a2)
                out[ki * 4 + a2] = ph * std::conj(q[ki](static_cast<std::size_t>(alpha), a2)) *
                                   std::sqrt(lam[ki][a2]);
        }
        return out;
    }

    std::vector<cd> b_vector(int alpha, const XPoint& p) const {
        std::vector<cd> out(ks.size() * 4);
        const double rw = std::sqrt(weight);
        for (std::size_t ki = 0; ki < ks.size(); ++ki) {
            const Momentum3& k = ks[ki];
            const cd ph = rw * std::exp(-I * (k.k0 * p.x0 + k.kx * p.x.x + k.ky * p.x.y));
            for (std::size_t a2 = 0; a2 < 4; ++a2)
                out[ki * 4 + a2] = ph * std::conj(w[ki](static_cast<std::size_t>(alpha), a2)) *
                                   std::sqrt(lam[ki][a2]);
        }
        return out;
    }

    // <A_alpha(x), B_alpha'(x')> for dx = x - x'; equals the Fourier sum
    CMat4 reconstruct(const XPoint& dx) const {
        CMat4 out;
        for (std::size_t ki = 0; ki < ks.size(); ++ki) {
            const Momentum3& k = ks[ki];
            const cd ph = weight * std::exp(I * (k.k0 * dx.x0 + k.kx * dx.x.x + k.ky * dx.x.y));
            for (std::size_t a = 0; a < 4; ++a)
                for (std::size_t b = 0; b < 4; ++b) {
                    cd s = 0.0;
                    for (std::size_t c = 0; c < 4; ++c)
                        s += q[ki](a, c) * lam[ki][c] * std::conj(w[ki](b, c));
                    out(a, b) += ph * s;
                }
        }
        return out;
    }

    double a_norm2(int alpha) const {
        double s = 0.0;
        for (std::size_t ki = 0; ki < ks.size(); ++ki)
            for (std::size_t a2 = 0; a2 < 4; ++a2)
                s += std::norm(q[ki](static_cast<std::size_t>(alpha), a2)) * lam[ki][a2];
        return weight * s;
    }

    double b_norm2(int alpha) const {
        double s = 0.0;
        for (std::size_t ki = 0; ki < ks.size(); ++ki)
            for (std::size_t a2 = 0; a2 < 4; ++a2)
                s += std::norm(w[ki](static_cast<std::size_t>(alpha), a2)) * lam[ki][a2];
        return weight * s;
    }

    // averaged operator norm: the common bound on all |A|^2 and |B|^2
    double norm_bound() const {
        double s = 0.0;
        for (const auto& l : lam) s += std::max({l[0], l[1], l[2], l[3]});
        return weight * s;
    }
};

inline GramDecomposition gram_decompose(const std::vector<Momentum3>& ks,
                                        const std::vector<CMat4>& ghat, double weight) {
    if (ks.empty() || ks.size() != ghat.size())
        throw std::invalid_argument("gram_decompose: need matching non-empty samples");
    GramDecomposition d;
    d.ks = ks;
    d.weight = weight;
    d.q.resize(ks.size());
    d.w.resize(ks.size());
    d.lam.resize(ks.size());
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        const CMat4& g = ghat[ki];
        std::vector<cd> h(16);
        const CMat4 hh = g.adjoint() * g;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) h[i * 4 + j] = hh(i, j);
        std::vector<cd> vecs;
        const auto ev = detail::jacobi_hermitian(std::move(h), 4, &vecs);
        double scale = 0.0;
        for (const double e : ev) scale = std::max(scale, std::abs(e));
        for (std::size_t c = 0; c < 4; ++c) {
            const double l = std::sqrt(std::max(ev[c], 0.0));
            d.lam[ki][c] = l;
            for (std::size_t r = 0; r < 4; ++r) d.w[ki](r, c) = vecs[r * 4 + c];
            if (l * l > 1e-14 * (scale + 1e-300)) {
                for (std::size_t r = 0; r < 4; ++r) {
                    cd s = 0.0;
                    for (std::size_t j = 0; j < 4; ++j) s += g(r, j) * vecs[j * 4 + c];
                    d.q[ki](r, c) = s / l;
                }
            }
            // null directions carry zero singular weight; their q column is
            // irrelevant for reconstruction and norms and is left zero
        }
    }
    return d;
}

struct GramHadamardReport {
    double absdet = 0.0;
    double bound = 0.0;
    bool pass = false;
};

inline GramHadamardReport gram_hadamard_check(const GramDecomposition& d,
                                              const std::vector<std::pair<int, XPoint>>& rows,
                                              const std::vector<std::pair<int, XPoint>>& cols) {
    if (rows.size() != cols.size() || rows.empty())
        throw std::invalid_argument("gram_hadamard_check: need equal non-empty index sets");
    const int n = static_cast<int>(rows.size());
    std::vector<std::vector<cd>> as, bs;
    for (const auto& [alpha, x] : rows) as.push_back(d.a_vector(alpha, x));
    for (const auto& [alpha, x] : cols) bs.push_back(d.b_vector(alpha, x));
    std::vector<cd> m(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            cd s = 0.0;
            for (std::size_t t = 0; t < as[static_cast<std::size_t>(i)].size(); ++t)
                s += std::conj(as[static_cast<std::size_t>(i)][t]) *
                     bs[static_cast<std::size_t>(j)][t];
            m[static_cast<std::size_t>(i) * n + j] = s;
        }
    GramHadamardReport rep;
    rep.absdet = std::abs(detail::det_dense(std::move(m), n));
    rep.bound = 1.0;
    for (int i = 0; i < n; ++i) {
        double na = 0.0, nb = 0.0;
        for (std::size_t t = 0; t < as[static_cast<std::size_t>(i)].size(); ++t) {
            na += std::norm(as[static_cast<std::size_t>(i)][t]);
            nb += std::norm(bs[static_cast<std::size_t>(i)][t]);
        }
        rep.bound *= std::sqrt(na) * std::sqrt(nb);
    }
    rep.pass = rep.absdet <= rep.bound * (1.0 + 1e-9) + 1e-12;
    return rep;
}

struct BbfReport {
    cd truncated = 0.0;
    double tree_sum = 1.0;  // sum over spanning trees of prod |g_l|
    double gram_const = 0.0;
    double bound = 0.0;
    std::size_t trees = 0;
    bool pass = false;
};

// determinant-expansion bound: |E^T(Psi_P1, ..., Psi_Ps)| is at most the
// spanning-tree sum times the Gram bound to the power (#fields/2 - (s-1));
// for s = 1 the truncated expectation is the plain Wick determinant
inline BbfReport bbf_check(const GaussianSpec& spec, const std::vector<std::vector<int>>& ps) {
    spec.validate();
    const int s = static_cast<int>(ps.size());
    if (s < 1) throw std::invalid_argument("bbf_check: need at least one set");
    std::size_t total = 0;
    for (const auto& p : ps) {
        if (p.size() % 2 != 0) throw std::invalid_argument("bbf_check: sets must be even");
        for (const int id : p)
            if (id < 0 || id >= 2 * spec.n)
                throw std::invalid_argument("bbf_check: generator outside the pairing");
        total += p.size();
    }
    const int m = static_cast<int>(total / 2);

    std::vector<GrassmannPoly> vs;
    for (const auto& p : ps) {
        GrassmannPoly v = GrassmannPoly::scalar(1.0);
        for (const int id : p) v = v * GrassmannPoly::generator(id);
        vs.push_back(v);
    }
    BbfReport rep;
    rep.truncated = truncated_expectation(spec, vs).coeff(0);
    rep.gram_const = detail::op_norm_dense(spec.g, spec.n);

    if (s >= 2) {
        struct Line {
            int vi, vj;
            double w;
        };
        std::vector<Line> lines;
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) {
                if (i == j) continue;
                for (const int a : ps[static_cast<std::size_t>(i)])
                    for (const int b : ps[static_cast<std::size_t>(j)]) {
                        if (a >= spec.n || b < spec.n) continue;  // minus in i, plus in j
                        lines.push_back({i, j, std::abs(spec.gij(a, b - spec.n))});
                    }
            }
        rep.tree_sum = 0.0;
        std::vector<int> pick(static_cast<std::size_t>(s - 1));
        const auto is_tree = [&]() {
            std::vector<int> parent(static_cast<std::size_t>(s));
            for (int i = 0; i < s; ++i) parent[static_cast<std::size_t>(i)] = i;
            const auto find = [&](int x) {
                while (parent[static_cast<std::size_t>(x)] != x)
                    x = parent[static_cast<std::size_t>(x)];
                return x;
            };
            for (const int li : pick) {
                const int a = find(lines[static_cast<std::size_t>(li)].vi);
                const int b = find(lines[static_cast<std::size_t>(li)].vj);
                if (a == b) return false;  // cycle
                parent[static_cast<std::size_t>(a)] = b;
            }
            return true;
        };
        const auto rec = [&](auto&& self, int depth, int start) -> void {
            if (depth == s - 1) {
                if (!is_tree()) return;
                double w = 1.0;
                for (const int li : pick) w *= lines[static_cast<std::size_t>(li)].w;
                rep.tree_sum += w;
                ++rep.trees;
                return;
            }
            for (int li = start; li < static_cast<int>(lines.size()); ++li) {
                pick[static_cast<std::size_t>(depth)] = li;
                self(self, depth + 1, li + 1);
            }
        };
        rec(rec, 0, 0);
    }
    rep.bound = rep.tree_sum * std::pow(rep.gram_const, m - (s - 1));
    rep.pass = std::abs(rep.truncated) <= rep.bound * (1.0 + 1e-9) + 1e-12;
    return rep;
}

}  // namespace honeycomb
