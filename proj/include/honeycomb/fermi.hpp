#pragma once

// Fermi points: closed forms, brute-force root finding on the Brillouin
// torus, and synthetic quadratic self-energy models used by the dressed
// propagator machinery.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "honeycomb/model.hpp"

namespace honeycomb {

struct FermiPoint {
    int omega = +1;  // +-1
    int j = 0;       // 0 central, 1..3 satellites
    Vec2 k{};
    double shift = 0.0;  // applied along ky, scaled by omega

    Vec2 shifted() const { return {k.x, k.y + omega * shift}; }
};

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// central Fermi point p_F,0^omega
inline Vec2 fermi_point_center_of(int w) {
    return {2.0 * pi / 3.0, w * 2.0 * pi / (3.0 * std::sqrt(3.0))};
}

// Fermi condition: Omega^2 - G Omega* e^{-3 i kx} = 0
inline cd fermi_function(Vec2 k, double G) {
    const cd om = omega(k);
    return om * om - G * std::conj(om) * std::exp(-I * 3.0 * k.x);
}

// The eight zeros for 0 < G < 2; the j=2,3 y-coordinate uses the solved
// form acos(sqrt(1+G)/2), which satisfies the Fermi condition exactly.
inline std::vector<FermiPoint> fermi_points_closed_form(double G) {
    if (!(G > 0.0 && G < 2.0)) throw DomainError("fermi_points_closed_form: need 0 < G < 2");
    const double x0 = 2.0 * pi / 3.0;
    const double y0 = 2.0 * pi / (3.0 * std::sqrt(3.0));
    const double y1 = 2.0 / std::sqrt(3.0) * std::acos(0.5 * (1.0 - G));
    const double x23 = 2.0 / 3.0 * std::acos(0.5 * std::sqrt(1.0 + G) * (2.0 - G));
    const double y23 = 2.0 / std::sqrt(3.0) * std::acos(0.5 * std::sqrt(1.0 + G));
    std::vector<FermiPoint> pts;
    for (int w : {+1, -1}) {
        pts.push_back({w, 0, {x0, w * y0}});
        pts.push_back({w, 1, {x0, w * y1}});
        pts.push_back({w, 2, {x0 + x23, w * y23}});
        pts.push_back({w, 3, {x0 - x23, w * y23}});
    }
    return pts;
}

inline FermiPoint fermi_point(const HoppingParams& p, int omega_, int j) {
    for (const auto& fp : fermi_points_closed_form(p.G()))
        if (fp.omega == omega_ && fp.j == j) return fp;
    throw DomainError("fermi_point: bad (omega, j)");
}

// momentum relative to a Fermi point, nearest torus image
inline Vec2 kprime(Vec2 k, Vec2 pf) {
    Vec2 ab = dual_coords(k - pf);
    ab.x -= std::round(ab.x);
    ab.y -= std::round(ab.y);
    return ab.x * dual1() + ab.y * dual2();
}

// linearized structure factor at p_F,0^omega: xi = (3/2)(i kx' + omega ky')
inline cd xi_of(Vec2 kp, int omega_) { return 1.5 * (I * kp.x + static_cast<double>(omega_) * kp.y); }

// linearization at the j=1 satellite: x1 = (3/2)(3 i kx' + omega ky')
inline cd x1_of(Vec2 kp, int omega_) {
    return 1.5 * (3.0 * I * kp.x + static_cast<double>(omega_) * kp.y);
}

inline int nearest_omega(Vec2 k) {
    const double x0 = 2.0 * pi / 3.0;
    const double y0 = 2.0 * pi / (3.0 * std::sqrt(3.0));
    const double dp = torus_distance(k, {x0, y0});
    const double dm = torus_distance(k, {x0, -y0});
    return dp <= dm ? +1 : -1;
}

struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// one damped Newton step for (Re F, Im F)(kx, ky) = 0
inline bool newton_polish(Vec2& k, double G, double tol, int max_iter) {
    const auto f = [&](Vec2 q) { return fermi_function(q, G); };
    double res = std::abs(f(k));
    for (int it = 0; it < max_iter; ++it) {
        if (res <= tol) return true;
        const cd d = f(k);
        const cd om = omega(k);
        const cd om_x = -1.5 * I * (om - 1.0);
        const cd om_y =
            -std::sqrt(3.0) * std::exp(-1.5 * I * k.x) * std::sin(std::sqrt(3.0) / 2.0 * k.y);
        const cd ph = std::exp(-I * 3.0 * k.x);
        const cd d_x = 2.0 * om * om_x - G * (std::conj(om_x) * ph - 3.0 * I * std::conj(om) * ph);
        const cd d_y = 2.0 * om * om_y - G * std::conj(om_y) * ph;
        const double j00 = d_x.real(), j01 = d_y.real();
        const double j10 = d_x.imag(), j11 = d_y.imag();
        const double det = j00 * j11 - j01 * j10;
        if (std::abs(det) < 1e-300) return false;
        Vec2 step{(-d.real() * j11 + d.imag() * j01) / det,
                  (d.real() * j10 - d.imag() * j00) / det};
        Vec2 next = k + step;
        double next_res = std::abs(f(next));
        while (next_res > res && step.norm() > 1e-16) {
            step = 0.5 * step;
            next = k + step;
            next_res = std::abs(f(next));
        }
        k = next;
        res = next_res;
    }
    return res <= tol;
}

}  // namespace detail

// Coarse torus grid scan, recursive local-window refinement (nearby zeros
// can cluster within one coarse cell at small G), damped Newton polish,
// dedup on the torus.
inline std::vector<Vec2> fermi_points_root_find(const HoppingParams& p, int grid_n = 128,
                                                double tol = 1e-12) {
    p.validate();
    if (grid_n < 64) throw std::invalid_argument("fermi_points_root_find: grid_n >= 64 required");
    const double G = p.G();
    const auto dedup_push = [](std::vector<Vec2>& v, Vec2 k, double radius) {
        for (const auto& q : v)
            if (torus_distance(q, k) < radius) return;
        v.push_back(k);
    };

    std::vector<double> val(static_cast<std::size_t>(grid_n) * grid_n);
    const auto at = [&](int i, int j) -> double& {
        return val[static_cast<std::size_t>((i % grid_n + grid_n) % grid_n) * grid_n +
                   static_cast<std::size_t>((j % grid_n + grid_n) % grid_n)];
    };
    for (int i = 0; i < grid_n; ++i)
        for (int j = 0; j < grid_n; ++j) {
            const Vec2 k = (static_cast<double>(i) / grid_n) * dual1() +
                           (static_cast<double>(j) / grid_n) * dual2();
            at(i, j) = std::abs(fermi_function(k, G));
        }
    std::vector<Vec2> cands;
    for (int i = 0; i < grid_n; ++i)
        for (int j = 0; j < grid_n; ++j) {
            const double v = at(i, j);
            bool is_min = true;
            for (int di = -1; di <= 1 && is_min; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    if (at(i + di, j + dj) < v) {
                        is_min = false;
                        break;
                    }
                }
            if (is_min)
                cands.push_back((static_cast<double>(i) / grid_n) * dual1() +
                                (static_cast<double>(j) / grid_n) * dual2());
        }

    double spacing = dual1().norm() / grid_n;
    while (spacing > 2e-6) {
        const double step = spacing / 8.0;
        std::vector<Vec2> next;
        for (const Vec2 c : cands) {
            // window +-2.5 * previous spacing: wide enough that a zero
            // cluster unresolved at the previous level stays covered
            constexpr int half = 20;
            double local[2 * half + 1][2 * half + 1];
            for (int i = -half; i <= half; ++i)
                for (int j = -half; j <= half; ++j)
                    local[i + half][j + half] =
                        std::abs(fermi_function({c.x + i * step, c.y + j * step}, G));
            for (int i = -half + 1; i < half; ++i)
                for (int j = -half + 1; j < half; ++j) {
                    const double v = local[i + half][j + half];
                    bool is_min = true;
                    for (int di = -1; di <= 1 && is_min; ++di)
                        for (int dj = -1; dj <= 1; ++dj) {
                            if (di == 0 && dj == 0) continue;
                            if (local[i + half + di][j + half + dj] < v) {
                                is_min = false;
                                break;
                            }
                        }
                    if (is_min) dedup_push(next, {c.x + i * step, c.y + j * step}, 0.5 * step);
                }
        }
        cands = std::move(next);
        spacing = step;
    }

    std::vector<Vec2> found;
    for (Vec2 k : cands) {
        const bool ok = detail::newton_polish(k, G, tol, 100);
        const double res = std::abs(fermi_function(k, G));
        if (!ok) {
            // a genuine near-zero that stalls is an error; a non-root local
            // minimum of |D| is simply discarded
            if (res < 1e-6) throw NonConvergence("fermi_points_root_find: polish failed");
            continue;
        }
        dedup_push(found, reduce_bz(k), 1e-6);
    }
    return found;
}

// Synthetic per-scale quadratic kernels W2^(h)(k) with the localized
// sigma-structure: diagonal i*zeta*k0 terms, sigma1 mass, xi-linear hops.
struct SelfEnergyModel {
    enum class Tag : std::uint8_t { Zero, ConstantSigma1, Linear };

    Tag tag = Tag::Zero;
    double U = 0.0;
    // restrict support to one scale; INT32_MIN means "all scales"
    int single_scale = INT32_MIN;

    bool active_at(int h) const { return single_scale == INT32_MIN || h == single_scale; }

    CMat4 w2(int h, Momentum3 k, const HoppingParams& p) const {
        if (tag == Tag::Zero || !active_at(h)) return CMat4::zero();
        if (tag == Tag::ConstantSigma1) {
            CMat4 m;
            m(0, 1) = U;
            m(1, 0) = U;
            return m;
        }
        const int w = nearest_omega(k.spatial());
        const Vec2 kp = kprime(k.spatial(), fermi_point_center_of(w));
        const cd xi = xi_of(kp, w);
        const cd d0 = I * k.k0;
        CMat4 m;
        m(0, 0) = d0;
        m(1, 1) = d0;
        m(2, 2) = d0;
        m(3, 3) = d0;
        m(0, 1) = p.gamma1();
        m(1, 0) = p.gamma1();
        m(1, 2) = xi;
        m(2, 1) = std::conj(xi);
        m(0, 3) = std::conj(xi);
        m(3, 0) = xi;
        m(2, 3) = p.gamma3() * xi;
        m(3, 2) = p.gamma3() * std::conj(xi);
        return m * cd(-U);
    }
};

}  // namespace honeycomb
