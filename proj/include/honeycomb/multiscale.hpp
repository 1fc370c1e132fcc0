#pragma once

// Multiscale decomposition: smooth dyadic cutoffs per regime, the scale
// table, dressed single-scale propagators, x-space L1 norms via discrete
// Fourier sums, UV tadpole/kernel improvements, the two-point Schwinger
// recursion, and the Newton scheme for shifted Fermi points.

#include <array>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "honeycomb/fermi.hpp"
#include "honeycomb/linalg4.hpp"
#include "honeycomb/model.hpp"
#include "honeycomb/regimes.hpp"

namespace honeycomb {

// C-infinity bump: 1 on [0, 1/3], 0 on [2/3, inf), monotone between
inline double chi0(double rho) {
    if (rho < 0.0) throw std::invalid_argument("chi0: rho must be >= 0");
    const double t = (2.0 / 3.0 - rho) * 3.0;
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double s0 = std::exp(-1.0 / t);
    const double s1 = std::exp(-1.0 / (1.0 - t));
    return s0 / (s0 + s1);
}

namespace detail {

// floor/ceil of log2 with a tolerance snap for exact powers of two
inline int ilog2_floor(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("ilog2_floor: x must be > 0");
    const double l = std::log2(x);
    const double r = std::round(l);
    if (std::abs(l - r) < 1e-9) return static_cast<int>(r);
    return static_cast<int>(std::floor(l));
}

inline int ilog2_ceil(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("ilog2_ceil: x must be > 0");
    const double l = std::log2(x);
    const double r = std::round(l);
    if (std::abs(l - r) < 1e-9) return static_cast<int>(r);
    return static_cast<int>(std::ceil(l));
}

inline int pow2_ceil(double x) {
    int n = 1;
    while (n < x) n *= 2;
    return n;
}

}  // namespace detail

struct EmptyRegime : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LatticeSpec {
    int L = 256;
    double beta = 256.0 * pi;
    int M = 8;

    void validate() const {
        if (L < 2 || (L & (L - 1)) != 0)
            throw std::invalid_argument("LatticeSpec: L must be a power of two >= 2");
        if (!(beta > 0.0)) throw std::invalid_argument("LatticeSpec: beta must be > 0");
        if (M < 0) throw std::invalid_argument("LatticeSpec: M must be >= 0");
    }
};

// Dyadic scale thresholds. Bands: 0 = frequency-only UV (h >= h0bar),
// 1 = conical first regime, 2 = parabolic second regime, 3 = eight-point
// third regime. The scale list descends with gaps between bands; each
// band's cutoff bridges to the next band's norm at the band boundary, so
// the f_h telescope exactly. Scales below hbeta are truncated: the lowest
// listed scale keeps its whole cumulative cutoff.
struct ScaleTable {
    int M = 8;
    int h0bar = 0, h1 = 0, h1bar = 0, h2 = 0, h2bar = 0, hbeta = 0;
    double beta = 0.0;
    HoppingParams p{};
    RegimeConstants rc{};
    std::vector<FermiPoint> fps;  // shiftable centers for the IR cutoffs
    std::vector<int> scales;      // descending, gaps allowed

    bool contains(int h) const {
        for (int s : scales)
            if (s == h) return true;
        return false;
    }

    static constexpr int none = INT32_MIN;

    int next_lower(int h) const {
        for (std::size_t i = 0; i + 1 < scales.size(); ++i)
            if (scales[i] == h) return scales[i + 1];
        return none;
    }

    int band(int h) const {
        if (h >= h0bar) return 0;
        if (h >= h1) return 1;
        if (h <= h1bar && h >= h2) return 2;
        if (h <= h2bar) return 3;
        throw std::invalid_argument("ScaleTable::band: scale falls in an inter-band gap");
    }

    const FermiPoint& fp(int omega_, int j) const {
        for (const auto& f : fps)
            if (f.omega == omega_ && f.j == j) return f;
        throw std::invalid_argument("ScaleTable::fp: bad (omega, j)");
    }
};

inline double default_beta(const HoppingParams& p, const RegimeConstants& rc = {}) {
    const double e = p.epsilon;
    const int h2bar = detail::ilog2_floor(rc.k2bar * e * e * e);
    return pi * std::ldexp(1.0, 2 - h2bar);
}

inline ScaleTable scale_thresholds(const HoppingParams& p, const RegimeConstants& rc, double beta,
                                   int M) {
    p.validate();
    const double e = p.epsilon;
    ScaleTable t;
    t.M = M;
    t.beta = beta;
    t.p = p;
    t.rc = rc;
    t.h0bar = detail::ilog2_floor(rc.k0bar);
    t.h1 = detail::ilog2_ceil(rc.k1 * e);
    t.h1bar = detail::ilog2_floor(rc.k1bar * e);
    t.h2 = detail::ilog2_ceil(rc.k2 * e * e * e);
    t.h2bar = detail::ilog2_floor(rc.k2bar * e * e * e);
    t.hbeta = detail::ilog2_floor(pi / beta);
    if (!(M > t.h0bar)) throw EmptyRegime("scale_thresholds: violated M > h0bar");
    if (!(t.h0bar >= t.h1)) throw EmptyRegime("scale_thresholds: violated h0bar >= h1");
    if (!(t.h1 > t.h1bar)) throw EmptyRegime("scale_thresholds: violated h1 > h1bar");
    if (!(t.h1bar >= t.h2)) throw EmptyRegime("scale_thresholds: violated h1bar >= h2");
    if (!(t.h2 > t.h2bar)) throw EmptyRegime("scale_thresholds: violated h2 > h2bar");
    if (!(M >= t.hbeta)) throw EmptyRegime("scale_thresholds: violated M >= hbeta");
    t.fps = fermi_points_closed_form(p.G());
    const auto add_block = [&](int top, int lo) {
        lo = std::max(lo, t.hbeta);
        for (int h = top; h >= lo; --h) t.scales.push_back(h);
    };
    add_block(M, t.h0bar);
    add_block(t.h0bar - 1, t.h1);
    add_block(t.h1bar, t.h2);
    add_block(t.h2bar, t.hbeta);
    return t;
}

namespace detail {

inline double norm_first(Momentum3 k, const ScaleTable& t, int w) {
    const Vec2 kp = kprime(k.spatial(), t.fp(w, 0).shifted());
    return std::hypot(k.k0, std::abs(xi_of(kp, w)));
}

inline double norm_second(Momentum3 k, const ScaleTable& t, int w) {
    const Vec2 kp = kprime(k.spatial(), t.fp(w, 0).shifted());
    const double axi = std::abs(xi_of(kp, w));
    return std::hypot(k.k0, axi * axi / t.p.gamma1());
}

inline double norm_third(Momentum3 k, const ScaleTable& t, int w, int j) {
    Vec2 kp = kprime(k.spatial(), t.fp(w, j).shifted());
    if (j == 0) return std::hypot(k.k0, t.p.gamma3() * std::abs(xi_of(kp, w)));
    const int n = rotations_to_first_satellite(w, j);
    for (int i = 0; i < n; ++i) kp = rotate(kp, 2.0 * pi / 3.0);
    return std::hypot(k.k0, t.p.gamma3() * std::abs(x1_of(kp, w)));
}

// cumulative cutoff of one omega component at a band/scale pair
inline double omega_cumulative(int band, int h, int w, Momentum3 k, const ScaleTable& t) {
    switch (band) {
        case 1:
            return chi0(std::ldexp(norm_first(k, t, w), -h));
        case 2:
            return chi0(std::ldexp(norm_second(k, t, w), -h));
        case 3: {
            double s = 0.0;
            for (int j = 0; j < 4; ++j) s += chi0(std::ldexp(norm_third(k, t, w, j), -h));
            return s;
        }
        default:
            throw std::invalid_argument("omega_cumulative: band must be 1..3");
    }
}

}  // namespace detail

// cumulative cutoff F(h, k): everything at or below scale h
inline double cutoff_cumulative(int h, Momentum3 k, const ScaleTable& t) {
    if (h >= t.h0bar) return chi0(std::ldexp(std::abs(k.k0), -h));
    const int b = t.band(h);
    return detail::omega_cumulative(b, h, +1, k, t) + detail::omega_cumulative(b, h, -1, k, t);
}

// one additive component of a scale: omega = 0 is the frequency-only UV
// piece; below h0bar components carry omega = +-1, and in the third band
// additionally the Fermi-point index j
struct ScaleComponent {
    int omega = 0;
    int j = -1;
};

inline std::vector<ScaleComponent> scale_components(int h, const ScaleTable& t) {
    if (!t.contains(h)) throw std::invalid_argument("scale_components: scale not in list");
    if (h >= t.h0bar) return {{0, -1}};
    if (t.band(h) != 3) return {{+1, -1}, {-1, -1}};
    std::vector<ScaleComponent> out;
    for (int w : {+1, -1})
        for (int j = 0; j < 4; ++j) out.push_back({w, j});
    return out;
}

inline double component_cutoff(int h, const ScaleComponent& c, Momentum3 k, const ScaleTable& t) {
    const int lower = t.next_lower(h);
    if (c.omega == 0) {
        double f = chi0(std::ldexp(std::abs(k.k0), -h));
        if (lower != ScaleTable::none) f -= cutoff_cumulative(lower, k, t);
        return f;
    }
    const int bh = t.band(h);
    double f = bh == 3 ? chi0(std::ldexp(detail::norm_third(k, t, c.omega, c.j), -h))
                       : detail::omega_cumulative(bh, h, c.omega, k, t);
    if (lower != ScaleTable::none) {
        if (bh == 3)
            f -= chi0(std::ldexp(detail::norm_third(k, t, c.omega, c.j), -lower));
        else
            f -= detail::omega_cumulative(t.band(lower), lower, c.omega, k, t);
    }
    return f;
}

// scale-h cutoff f_h(k); 0 on the gaps between bands
inline double cutoff_f(Momentum3 k, int h, const ScaleTable& t) {
    if (h > t.M || h < t.hbeta)
        throw std::invalid_argument("cutoff_f: scale outside [hbeta, M]");
    if (!t.contains(h)) return 0.0;
    double f = 0.0;
    for (const auto& c : scale_components(h, t)) f += component_cutoff(h, c, k, t);
    return f;
}

inline double partition_residual(Momentum3 k, const ScaleTable& t) {
    double s = 0.0;
    for (int h : t.scales) s += cutoff_f(k, h, t);
    return std::abs(s - chi0(std::ldexp(std::abs(k.k0), -t.M)));
}

namespace detail {

// cumulative cutoff multiplying the self-energy kernels that dress scale h
inline double dressing_cumulative(int h, int omega_, Momentum3 k, const ScaleTable& t) {
    if (h >= t.h0bar) return chi0(std::ldexp(std::abs(k.k0), -h));
    return omega_cumulative(t.band(h), h, omega_, k, t);
}

inline SpecialForm propagator_special(Momentum3 k, const HoppingParams& p) {
    const cd om = omega(k.spatial());
    const cd ph = std::exp(I * 3.0 * k.kx);
    return SpecialForm{p.gamma1(), om, p.gamma3() * om * ph, -k.k0, -k.k0};
}

// inverse preferring the closed special form when the matrix has it; the
// closed form's determinant threshold is conservative near the Fermi
// points, where pivoted elimination still inverts a well-conditioned matrix
inline CMat4 inverse_any(const CMat4& a) {
    const cd d00 = a(0, 0);
    if (std::abs(d00.real()) < 1e-14 && std::abs(a(2, 2).real()) < 1e-14) {
        SpecialForm s{a(1, 0), a(3, 0), a(2, 3), d00.imag(), a(2, 2).imag()};
        const CMat4 re = s.assemble();
        if ((re - a).max_norm() <= 1e-12 * (1.0 + a.max_norm())) {
            try {
                return inv4_special(s);
            } catch (const SingularMatrix&) {
            }
        }
    }
    return inverse_gj(a);
}

}  // namespace detail

namespace detail {

// dressed inverse propagator matrix: A plus the own-scale kernel weighted
// by the cumulative cutoff, plus the higher-scale kernels unweighted
inline CMat4 dressed_matrix(Momentum3 k, int h, int omega_, const ScaleTable& t,
                            const SelfEnergyModel& model) {
    CMat4 a = inverse_propagator(k, t.p);
    if (model.tag == SelfEnergyModel::Tag::Zero) return a;
    if (h <= t.h0bar && model.active_at(h))
        a = a + model.w2(h, k, t.p) * cd(dressing_cumulative(h, omega_, k, t));
    for (int hp : t.scales) {
        if (hp <= h || hp > t.h0bar || !model.active_at(hp)) continue;
        a = a + model.w2(hp, k, t.p);
    }
    return a;
}

}  // namespace detail

inline CMat4 dressed_inverse_propagator(Momentum3 k, int h, int omega_, const ScaleTable& t,
                                        const SelfEnergyModel& model) {
    return detail::inverse_any(detail::dressed_matrix(k, h, omega_, t, model));
}

inline CMat4 single_scale_propagator(Momentum3 k, int h, const ScaleTable& t,
                                     const SelfEnergyModel& model = {},
                                     bool reverse_components = false) {
    auto comps = scale_components(h, t);
    if (reverse_components) std::reverse(comps.begin(), comps.end());
    CMat4 s;
    int cached_omega = INT32_MIN;
    CMat4 cached_inv;
    for (const auto& c : comps) {
        const double f = component_cutoff(h, c, k, t);
        if (f == 0.0) continue;
        if (c.omega != cached_omega) {
            cached_inv = dressed_inverse_propagator(k, h, c.omega, t, model);
            cached_omega = c.omega;
        }
        s = s + cached_inv * cd(f);
    }
    return s;
}

// Two-point Schwinger function by the scale recursion: descending through
// the scale list, each step consumes the dressed single-scale propagator,
// then applies the quadratic kernel of the next lower scale:
//   s <- s + q+ g q-,  G+- <- G+- + q+ g / g q-,
//   s <- s - G+ W G-,  q+ <- q+ - G+ W,  q- <- q- - W G-.
// With a zero model this telescopes to f_{<=M} A^{-1} exactly.
inline CMat4 schwinger_recursion(const SelfEnergyModel& model, Momentum3 k, const ScaleTable& t,
                                 bool reverse_components = false) {
    CMat4 qp = CMat4::identity(), qm = CMat4::identity();
    CMat4 gp, gm, s;
    for (std::size_t i = 0; i < t.scales.size(); ++i) {
        const CMat4 g = single_scale_propagator(k, t.scales[i], t, model, reverse_components);
        s = s + qp * g * qm;
        if (i + 1 == t.scales.size()) break;
        gp = gp + qp * g;
        gm = gm + g * qm;
        const int b = t.scales[i + 1];
        if (b > t.h0bar || !model.active_at(b) || model.tag == SelfEnergyModel::Tag::Zero)
            continue;
        const CMat4 w = model.w2(b, k, t.p);
        s = s - gp * w * gm;
        qp = qp - gp * w;
        qm = qm - w * gm;
    }
    return s;
}

struct UnresolvedScale : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline int thread_count() {
    if (const char* s = std::getenv("HONEYCOMB_RG_THREADS")) {
        const int n = std::atoi(s);
        if (n > 0) return std::min(n, 64);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? std::min<int>(static_cast<int>(hc), 8) : 1;
}

// static partition so floating-point reduction order is reproducible
template <class F>
void parallel_for(std::int64_t n, F&& body) {
    const int nt = static_cast<int>(
        std::min<std::int64_t>(thread_count(), std::max<std::int64_t>(n, 1)));
    if (nt <= 1) {
        for (std::int64_t i = 0; i < n; ++i) body(i, 0);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int tdx = 0; tdx < nt; ++tdx) {
        const std::int64_t lo = n * tdx / nt, hi = n * (tdx + 1) / nt;
        pool.emplace_back([&body, lo, hi, tdx] {
            for (std::int64_t i = lo; i < hi; ++i) body(i, tdx);
        });
    }
    for (auto& th : pool) th.join();
}

struct FftPlan {
    int n = 0, sign = +1;
    std::vector<int> rev;
    std::vector<cd> w;

    FftPlan() = default;
    FftPlan(int n_, int sign_) : n(n_), sign(sign_), rev(n_), w(n_ / 2) {
        for (int i = 1, j = 0; i < n; ++i) {
            int bit = n >> 1;
            for (; j & bit; bit >>= 1) j ^= bit;
            j ^= bit;
            rev[i] = j;
        }
        for (int i = 0; i < n / 2; ++i)
            w[i] = std::polar(1.0, sign * 2.0 * pi * i / n);
    }

    void run(cd* a) const {
        for (int i = 1; i < n; ++i)
            if (i < rev[i]) std::swap(a[i], a[rev[i]]);
        for (int len = 2; len <= n; len <<= 1) {
            const int step = n / len;
            for (int i = 0; i < n; i += len)
                for (int j = 0; j < len / 2; ++j) {
                    const cd u = a[i + j];
                    const cd v = a[i + j + len / 2] * w[static_cast<std::size_t>(j) * step];
                    a[i + j] = u + v;
                    a[i + j + len / 2] = u - v;
                }
        }
    }
};

inline void fft2d(cd* a, int d, const FftPlan& plan) {
    for (int r = 0; r < d; ++r) plan.run(a + static_cast<std::size_t>(r) * d);
    std::vector<cd> col(d);
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) col[r] = a[static_cast<std::size_t>(r) * d + c];
        plan.run(col.data());
        for (int r = 0; r < d; ++r) a[static_cast<std::size_t>(r) * d + c] = col[r];
    }
}

}  // namespace detail

// Weighted x-space L1 norm of the single-scale propagator,
// sum_x dx |x0^m0 x^mk g_h(x)|, entrywise max over the 16 components,
// computed by decimated Fourier sums on windows around the Fermi points.
// The 2pi/3 rotation and the ky-reflection act on A^{-1} by diagonal
// phases and lattice maps, so satellite windows and the omega = -1 copy
// contribute the same entrywise sums and are counted by multiplicity.
inline double xspace_l1_norm(int h, int m0, int mk, const LatticeSpec& spec,
                             const HoppingParams& p, const SelfEnergyModel& model = {},
                             const RegimeConstants& rc = {}) {
    spec.validate();
    if (m0 < 0 || mk < 0) throw std::invalid_argument("xspace_l1_norm: weights must be >= 0");
    const ScaleTable t = scale_thresholds(p, rc, spec.beta, spec.M);
    if (!t.contains(h)) throw std::invalid_argument("xspace_l1_norm: scale not in cutoff list");
    const int band = t.band(h);
    const int L = spec.L;
    const double g1n = dual1().norm();
    const double two_h = std::ldexp(1.0, h);

    // resolution: grid increments of the relevant norm and the Matsubara
    // spacing must stay below 2^h / 8
    if (2.0 * pi / spec.beta > two_h / 8.0)
        throw UnresolvedScale("xspace_l1_norm: Matsubara spacing too coarse for scale");
    double grad = 0.0;
    double target = two_h;
    switch (band) {
        case 0:
            if (h == t.h0bar && t.next_lower(h) != ScaleTable::none) {
                const int nb = t.next_lower(h);
                grad = t.band(nb) == 2 ? 3.0 * std::sqrt((2.0 / 3.0) * std::ldexp(1.0, nb) /
                                                         p.gamma1())
                                       : 1.5;
                target = std::ldexp(1.0, nb);
            }
            break;
        case 1:
            grad = 1.5;
            break;
        case 2:
            grad = 3.0 * std::sqrt((2.0 / 3.0) * two_h / p.gamma1());
            break;
        case 3:
            grad = 4.5 * p.gamma3();
            break;
    }
    if (grad * g1n / L > target / 8.0)
        throw UnresolvedScale("xspace_l1_norm: lattice too coarse for scale");

    // Matsubara frequencies covering the scale-h support
    const double k0cap = 1.05 * (2.0 / 3.0) * two_h;
    std::vector<int> ks;
    for (int n = 0;; ++n) {
        const double k0 = (2.0 * pi / spec.beta) * (n + 0.5);
        if (k0 > k0cap) break;
        ks.push_back(n);
        ks.push_back(-n - 1);
    }
    const int nk0 = static_cast<int>(ks.size());

    struct Window {
        Vec2 center{};
        int half = 0;
        ScaleComponent comp{};
        double mult = 1.0;
    };
    std::vector<Window> windows;
    double omega_factor = 2.0;
    int D = std::min(L, 256);
    if (band == 0) {
        windows.push_back({{0.0, 0.0}, L / 2, {0, -1}, 1.0});
        omega_factor = 1.0;
        D = L;
    } else {
        double kmax = 0.0;
        if (band == 1) {
            kmax = (2.0 / 3.0) * two_h / 1.5;
            D = std::min(L, 128);
        }
        if (band == 2) kmax = std::sqrt(p.gamma1() * (2.0 / 3.0) * two_h) / 1.5;
        if (band == 3) {
            kmax = (2.0 / 3.0) * two_h / (1.5 * p.gamma3());
            D = std::min(L, 128);
        }
        const int half = static_cast<int>(kmax * std::sqrt(3.0) * L / (2.0 * pi) * 1.3) + 3;
        if (band == 3) {
            windows.push_back({t.fp(+1, 0).shifted(), half, {+1, 0}, 1.0});
            windows.push_back({t.fp(+1, 1).shifted(), half, {+1, 1}, 3.0});
        } else {
            windows.push_back({t.fp(+1, 0).shifted(), half, {+1, -1}, 1.0});
        }
    }
    const int s = L / D;

    const int N0 = std::min(8192, detail::pow2_ceil(std::max(64.0, 2.0 * spec.beta * k0cap)));
    std::vector<double> wt0(N0, 1.0);
    if (m0 > 0)
        for (int m = 0; m < N0; ++m) {
            const double x0 = spec.beta * (m < N0 / 2 ? m : m - N0) / N0;
            wt0[m] = std::pow(std::abs(x0), m0);
        }
    std::vector<double> wx(static_cast<std::size_t>(D) * D, 1.0);
    if (mk > 0)
        for (int a = 0; a < D; ++a)
            for (int b = 0; b < D; ++b) {
                const int n1 = s * (a < D / 2 ? a : a - D);
                const int n2 = s * (b < D / 2 ? b : b - D);
                const Vec2 x = n1 * lat1() + n2 * lat2();
                wx[static_cast<std::size_t>(a) * D + b] = std::pow(x.norm(), mk);
            }

    const detail::FftPlan space_plan(D, +1);
    const detail::FftPlan time_plan(N0, -1);
    const std::size_t plane = static_cast<std::size_t>(D) * D;
    const int nthreads = detail::thread_count();

    std::array<double, 16> l1{};
    std::vector<cd> data(static_cast<std::size_t>(nk0) * 16 * plane);
    for (const auto& win : windows) {
        std::fill(data.begin(), data.end(), cd(0.0));
        detail::parallel_for(nk0, [&](std::int64_t ki, int) {
            const double k0 = (2.0 * pi / spec.beta) * (ks[static_cast<std::size_t>(ki)] + 0.5);
            cd* planes = data.data() + static_cast<std::size_t>(ki) * 16 * plane;
            const int lo = band == 0 ? 0 : -win.half;
            const int hi = band == 0 ? L - 1 : win.half;
            for (int d1 = lo; d1 <= hi; ++d1)
                for (int d2 = lo; d2 <= hi; ++d2) {
                    const Vec2 kk = win.center + (static_cast<double>(d1) / L) * dual1() +
                                    (static_cast<double>(d2) / L) * dual2();
                    const Momentum3 k{k0, kk.x, kk.y};
                    const double f = component_cutoff(h, win.comp, k, t);
                    if (f == 0.0) continue;
                    const CMat4 g =
                        dressed_inverse_propagator(k, h, win.comp.omega, t, model) * cd(f);
                    const std::size_t a = static_cast<std::size_t>(((d1 % D) + D) % D);
                    const std::size_t b = static_cast<std::size_t>(((d2 % D) + D) % D);
                    for (int c = 0; c < 16; ++c)
                        planes[static_cast<std::size_t>(c) * plane + a * D + b] +=
                            g(static_cast<std::size_t>(c / 4), static_cast<std::size_t>(c % 4));
                }
            for (int c = 0; c < 16; ++c)
                detail::fft2d(planes + static_cast<std::size_t>(c) * plane, D, space_plan);
        });

        // time transform per (x, component) row; rows are partitioned
        // statically so the reduction order is reproducible
        std::vector<std::array<double, 16>> acc(static_cast<std::size_t>(nthreads));
        for (auto& a : acc) a.fill(0.0);
        detail::parallel_for(static_cast<std::int64_t>(plane) * 16, [&](std::int64_t r, int tid) {
            thread_local std::vector<cd> buf;
            buf.assign(static_cast<std::size_t>(N0), cd(0.0));
            const std::size_t x = static_cast<std::size_t>(r) / 16;
            const int c = static_cast<int>(r % 16);
            for (int ki = 0; ki < nk0; ++ki) {
                const int n = ks[static_cast<std::size_t>(ki)];
                buf[static_cast<std::size_t>(((n % N0) + N0) % N0)] +=
                    data[static_cast<std::size_t>(ki) * 16 * plane +
                         static_cast<std::size_t>(c) * plane + x];
            }
            time_plan.run(buf.data());
            double sum = 0.0;
            for (int m = 0; m < N0; ++m) {
                const cd v = buf[static_cast<std::size_t>(m)];
                sum += std::sqrt(v.real() * v.real() + v.imag() * v.imag()) * wt0[m];
            }
            acc[static_cast<std::size_t>(tid)][static_cast<std::size_t>(c)] +=
                sum * wx[x] * win.mult;
        });
        for (const auto& a : acc)
            for (int c = 0; c < 16; ++c) l1[static_cast<std::size_t>(c)] += a[static_cast<std::size_t>(c)];
    }

    double best = 0.0;
    for (double v : l1) best = std::max(best, v);
    return best * omega_factor * (static_cast<double>(s) * s) /
           (static_cast<double>(N0) * L * L);
}

// pure frequency cutoff of UV scale h (independent of the scale table)
inline double uv_cutoff_f(double k0, int h) {
    return chi0(std::ldexp(std::abs(k0), -h)) - chi0(std::ldexp(std::abs(k0), -h + 1));
}

// (1/beta) sum over Matsubara k0 of f_h A^{-1}; the frequency-odd dominant
// part cancels pairwise, leaving O(2^{-h})
inline CMat4 uv_tadpole_sum(int h, Vec2 k, const LatticeSpec& spec, const HoppingParams& p) {
    spec.validate();
    CMat4 out;
    const double cap = (2.0 / 3.0) * std::ldexp(1.0, h);
    for (int n = 0;; ++n) {
        const double k0 = (2.0 * pi / spec.beta) * (n + 0.5);
        if (k0 > cap) break;
        for (const double sgn : {+1.0, -1.0}) {
            const double f = uv_cutoff_f(sgn * k0, h);
            if (f == 0.0) continue;
            out = out + inv4_special(detail::propagator_special({sgn * k0, k.x, k.y}, p)) * cd(f);
        }
    }
    return out * cd(1.0 / spec.beta);
}

// same sum with the norm taken before summing (no cancellation), for ratios
inline double uv_tadpole_abs_sum(int h, Vec2 k, const LatticeSpec& spec, const HoppingParams& p) {
    spec.validate();
    double out = 0.0;
    const double cap = (2.0 / 3.0) * std::ldexp(1.0, h);
    for (int n = 0;; ++n) {
        const double k0 = (2.0 * pi / spec.beta) * (n + 0.5);
        if (k0 > cap) break;
        for (const double sgn : {+1.0, -1.0}) {
            const double f = uv_cutoff_f(sgn * k0, h);
            if (f == 0.0) continue;
            out += f * op_norm(inv4_special(detail::propagator_special({sgn * k0, k.x, k.y}, p)));
        }
    }
    return out / spec.beta;
}

// equal-time slice g^(h')(x0 = 0, x) on the L x L torus, index n1 * L + n2
inline std::vector<CMat4> uv_propagator_field(int hp, const LatticeSpec& spec,
                                              const HoppingParams& p) {
    spec.validate();
    const int L = spec.L;
    const std::size_t plane = static_cast<std::size_t>(L) * L;
    std::vector<CMat4> sum_k(plane);
    detail::parallel_for(static_cast<std::int64_t>(plane), [&](std::int64_t idx, int) {
        const int i = static_cast<int>(idx) / L, j = static_cast<int>(idx) % L;
        const Vec2 kk = (static_cast<double>(i) / L) * dual1() +
                        (static_cast<double>(j) / L) * dual2();
        CMat4 acc;
        const double cap = (2.0 / 3.0) * std::ldexp(1.0, hp);
        for (int n = 0;; ++n) {
            const double k0 = (2.0 * pi / spec.beta) * (n + 0.5);
            if (k0 > cap) break;
            const double f = uv_cutoff_f(k0, hp);
            if (f == 0.0) continue;
            acc = acc + inv4_special(detail::propagator_special({k0, kk.x, kk.y}, p)) * cd(f);
            acc = acc + inv4_special(detail::propagator_special({-k0, kk.x, kk.y}, p)) * cd(f);
        }
        sum_k[static_cast<std::size_t>(idx)] = acc;
    });
    const detail::FftPlan plan(L, +1);
    std::vector<CMat4> out(plane);
    std::vector<cd> grid(plane);
    for (int c = 0; c < 16; ++c) {
        for (std::size_t x = 0; x < plane; ++x)
            grid[x] = sum_k[x](static_cast<std::size_t>(c / 4), static_cast<std::size_t>(c % 4));
        detail::fft2d(grid.data(), L, plan);
        for (std::size_t x = 0; x < plane; ++x)
            out[x](static_cast<std::size_t>(c / 4), static_cast<std::size_t>(c % 4)) =
                grid[x] / (spec.beta * static_cast<double>(plane));
    }
    return out;
}

// exponentially decaying density-density interaction, zero on-site
inline double interaction_v(Vec2 x) {
    const double r = x.norm();
    return r < 1e-12 ? 0.0 : std::exp(-r);
}

// in-plane orbital offsets in the basis (a, btilde, atilde, b)
inline Vec2 site_offset(int alpha) {
    switch (alpha) {
        case 0:
        case 1:
            return {0.0, 0.0};
        case 2:
            return {-1.0, 0.0};
        case 3:
            return {1.0, 0.0};
    }
    throw std::invalid_argument("site_offset: alpha must be 0..3");
}

using UvFieldCache = std::map<int, std::vector<CMat4>>;

inline UvFieldCache uv_field_cache(int hmin, const LatticeSpec& spec, const HoppingParams& p) {
    UvFieldCache cache;
    for (int hp = hmin; hp <= spec.M; ++hp) cache.emplace(hp, uv_propagator_field(hp, spec, p));
    return cache;
}

// single-branch two-field kernel: 2U sum_{h' > h} ( v g^(h') - delta * tadpole )
inline CMat4 uv_k2_kernel(int h, int n1, int n2, double U, const LatticeSpec& spec,
                          const HoppingParams& p, const UvFieldCache* fields = nullptr) {
    spec.validate();
    if (h < 0) throw std::invalid_argument("uv_k2_kernel: h must be >= 0");
    CMat4 out;
    if (U == 0.0) return out;
    const int L = spec.L;
    const int m1 = ((n1 % L) + L) % L, m2 = ((n2 % L) + L) % L;
    const int w1 = m1 < L / 2 ? m1 : m1 - L, w2 = m2 < L / 2 ? m2 : m2 - L;
    const Vec2 xvec = w1 * lat1() + w2 * lat2();
    const bool at_origin = m1 == 0 && m2 == 0;

    std::array<std::array<double, 4>, 4> V{};
    if (at_origin) {
        for (int a = 0; a < 4; ++a)
            for (int a2 = 0; a2 < 4; ++a2) {
                double sum = 0.0;
                for (int y1 = -L / 2; y1 < L / 2; ++y1)
                    for (int y2 = -L / 2; y2 < L / 2; ++y2)
                        sum += interaction_v(y1 * lat1() + y2 * lat2() + site_offset(a) -
                                             site_offset(a2));
                V[static_cast<std::size_t>(a)][static_cast<std::size_t>(a2)] = sum;
            }
    }

    UvFieldCache local;
    for (int hp = h + 1; hp <= spec.M; ++hp) {
        const std::vector<CMat4>* g = nullptr;
        if (fields) {
            const auto it = fields->find(hp);
            if (it != fields->end()) g = &it->second;
        }
        if (!g) g = &local.emplace(hp, uv_propagator_field(hp, spec, p)).first->second;
        const CMat4& gx = (*g)[static_cast<std::size_t>(m1) * L + m2];
        const CMat4& g0 = (*g)[0];
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t ap = 0; ap < 4; ++ap) {
                out(a, ap) += interaction_v(xvec + site_offset(static_cast<int>(a)) -
                                            site_offset(static_cast<int>(ap))) *
                              gx(a, ap);
                if (at_origin && a == ap) {
                    cd tad = 0.0;
                    for (std::size_t a2 = 0; a2 < 4; ++a2) tad += V[a][a2] * g0(a2, a2);
                    out(a, ap) -= tad;
                }
            }
    }
    return out * cd(2.0 * U);
}

struct JacobianTooSmall : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShiftResult {
    double delta = 0.0;
    int iterations = 0;
};

// Newton scheme for the dressed first-satellite shift along ky: solves
// Re[A(3,0)^2 - A(1,0) A(3,2)] = 0 at k0 = 0 on the kx = 2pi/3 line, with
// A the scale-h dressed inverse propagator (cutoffs at unshifted points)
inline ShiftResult fermi_shift_newton(const SelfEnergyModel& model, int h, const HoppingParams& p,
                                      double tol = 1e-12, int omega_ = +1,
                                      std::vector<double>* residuals = nullptr,
                                      const RegimeConstants& rc = {}) {
    const ScaleTable t = scale_thresholds(p, rc, default_beta(p, rc), std::max(8, h + 1));
    if (!t.contains(h) || h >= t.h0bar)
        throw std::invalid_argument("fermi_shift_newton: h must be an infrared scale in the list");
    const Vec2 base = t.fp(omega_, 1).k;
    const auto dval = [&](double delta) {
        const Momentum3 k{0.0, base.x, base.y + omega_ * delta};
        const CMat4 a = detail::dressed_matrix(k, h, omega_, t, model);
        return (a(3, 0) * a(3, 0) - a(1, 0) * a(3, 2)).real();
    };
    ShiftResult out;
    double res = dval(out.delta);
    if (residuals) residuals->push_back(std::abs(res));
    for (int it = 0; it < 50; ++it) {
        if (std::abs(res) <= tol) {
            out.iterations = it;
            return out;
        }
        const double st = std::max(1e-9, 1e-5 * std::abs(out.delta));
        const double deriv = (dval(out.delta + st) - dval(out.delta - st)) / (2.0 * st);
        if (std::abs(deriv) < 0.5 * p.G())
            throw JacobianTooSmall("fermi_shift_newton: derivative below threshold");
        double step = -res / deriv;
        double next = out.delta + step;
        double nres = dval(next);
        while (std::abs(nres) > std::abs(res) && std::abs(step) > 1e-18) {
            step *= 0.5;
            next = out.delta + step;
            nres = dval(next);
        }
        out.delta = next;
        res = nres;
        if (residuals) residuals->push_back(std::abs(res));
    }
    if (std::abs(res) > tol) throw NonConvergence("fermi_shift_newton: no convergence");
    return out;
}

}  // namespace honeycomb
