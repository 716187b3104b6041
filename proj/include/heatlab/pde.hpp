#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "grid.hpp"
#include "kernels.hpp"
#include "norms.hpp"
#include "stencils.hpp"

namespace heatlab {

struct CflError : std::runtime_error {
    double required_dt;
    explicit CflError(double req)
        : std::runtime_error("solve_backward: CFL violation, dt must be at most " +
                             std::to_string(req)),
          required_dt(req) {}
};

struct PicardDivergence : std::runtime_error {
    double factor;
    explicit PicardDivergence(double f)
        : std::runtime_error("picard_solve: divergence, contraction factor " + std::to_string(f)),
          factor(f) {}
};

namespace detail {

// Thomas solve of (I - dt D2) along one axis, homogeneous Dirichlet.
// The tridiagonal factor is an M-matrix, so each sweep is monotone.
class AxisDiffusion {
  public:
    AxisDiffusion(const Grid& g, double dt) : n_(g.nodes_per_axis()) {
        const double mu = dt / (g.h() * g.h());
        diag_ = 1.0 + 2.0 * mu;
        off_ = -mu;
        cp_.resize(static_cast<std::size_t>(n_));
    }

    // in-place on a strided line; boundary entries forced to zero
    void solve(double* x, std::size_t stride) {
        x[0] = 0.0;
        x[static_cast<std::size_t>(n_ - 1) * stride] = 0.0;
        const int m = n_ - 2;  // interior unknowns
        if (m <= 0) return;
        double beta = diag_;
        x[stride] /= beta;
        for (int i = 1; i < m; ++i) {
            cp_[static_cast<std::size_t>(i)] = off_ / beta;
            beta = diag_ - off_ * cp_[static_cast<std::size_t>(i)];
            const std::size_t idx = static_cast<std::size_t>(i + 1) * stride;
            x[idx] = (x[idx] - off_ * x[idx - stride]) / beta;
        }
        for (int i = m - 2; i >= 0; --i) {
            const std::size_t idx = static_cast<std::size_t>(i + 1) * stride;
            x[idx] -= cp_[static_cast<std::size_t>(i + 1)] * x[idx + stride];
        }
    }

  private:
    int n_;
    double diag_;
    double off_;
    std::vector<double> cp_;
};

inline void diffuse_slice(const Grid& g, double dt, double* v) {
    AxisDiffusion solver(g, dt);
    const int n1 = g.nodes_per_axis();
    for (int axis = 0; axis < g.d(); ++axis) {
        std::size_t stride = 1;
        for (int a = g.d() - 1; a > axis; --a) stride *= static_cast<std::size_t>(n1);
        // iterate over all lines along `axis`
        const std::size_t ns = g.space_size();
        const std::size_t block = stride * static_cast<std::size_t>(n1);
        for (std::size_t base = 0; base < ns; base += block)
            for (std::size_t off = 0; off < stride; ++off)
                solver.solve(v + base + off, stride);
    }
}

// First-order upwind b . Du on one slice.
inline void upwind_drift(const Grid& g, const VectorField& b, int it, const double* u, double* out) {
    const int n1 = g.nodes_per_axis();
    const std::size_t ns = g.space_size();
    for (std::size_t is = 0; is < ns; ++is) out[is] = 0.0;
    for (int axis = 0; axis < g.d(); ++axis) {
        std::size_t stride = 1;
        for (int a = g.d() - 1; a > axis; --a) stride *= static_cast<std::size_t>(n1);
        const double* bc = b.comp(axis).slice(it);
        for (std::size_t is = 0; is < ns; ++is) {
            const int i = g.unflatten(is)[static_cast<std::size_t>(axis)];
            const double bv = bc[is];
            double dv = 0.0;
            if (bv > 0.0 && i < n1 - 1)
                dv = (u[is + stride] - u[is]) / g.h();
            else if (bv < 0.0 && i > 0)
                dv = (u[is] - u[is - stride]) / g.h();
            out[is] += bv * dv;
        }
    }
}

inline double max_drift_l1(const VectorField& b) {
    const Grid& g = b.grid();
    double m = 0.0;
    for (int it = 0; it < g.time_slices(); ++it)
        for (std::size_t is = 0; is < g.space_size(); ++is) {
            double l1 = 0.0;
            for (int c = 0; c < g.d(); ++c) l1 += std::abs(b.comp(c).at(it, is));
            m = std::max(m, l1);
        }
    return m;
}

}  // namespace detail

/// Backward solve of d_t u + Lap u + b.Du = -f, u(T,.) = 0, homogeneous
/// Dirichlet on the box boundary. Implicit (dimension-split) diffusion,
/// explicit first-order upwind drift; the scheme is monotone, so f >= 0
/// gives u >= 0 and sup u <= T sup f.
inline ScalarField solve_backward(const VectorField& b, const ScalarField& f) {
    const Grid& g = f.grid();
    if (!g.same_shape(b.grid())) throw std::invalid_argument("solve_backward: grid mismatch");
    const double bmax = detail::max_drift_l1(b);
    if (g.dt() * bmax / g.h() > 1.0) throw CflError(g.h() / bmax);

    ScalarField u(g);
    const std::size_t ns = g.space_size();
    std::vector<double> drift(ns);
    for (int it = g.n_t() - 1; it >= 0; --it) {
        double* ui = u.slice(it);
        const double* up = u.slice(it + 1);
        detail::upwind_drift(g, b, it + 1, up, drift.data());
        const double* fs = f.slice(it + 1);
        for (std::size_t is = 0; is < ns; ++is)
            ui[is] = up[is] + g.dt() * (drift[is] + fs[is]);
        detail::diffuse_slice(g, g.dt(), ui);
    }
    return u;
}

struct SolveReport {
    ScalarField u;
    double sup_u = 0.0;
    double f_norm = 0.0;
    double ratio = 0.0;
    double grad_ratio = 0.0;
    int iterations = 0;
    double contraction_factor = 0.0;
};

/// Picard iteration u_{m+1} = c P_{2,4}(-b.Du_m - f) with the library's
/// sign convention c = -(4 pi)^{-d/2}. Converges when the drift's Morrey
/// norm is small; divergence (factor >= 1 three times running) throws.
inline SolveReport picard_solve(const VectorField& b, const ScalarField& f, int max_iter = 30,
                                int n_sigma = 48) {
    const Grid& g = f.grid();
    const double c = -std::pow(4.0 * std::numbers::pi, -g.d() / 2.0);
    ScalarField u(g);
    double prev_diff = -1.0;
    double factor = 0.0;
    int bad = 0;
    int iters = 0;
    for (int m = 0; m < max_iter; ++m) {
        // rhs = -(b.Du + f)
        ScalarField rhs(g);
        const VectorField du = gradient(u);
        for (int it = 0; it <= g.n_t(); ++it)
            for (std::size_t is = 0; is < g.space_size(); ++is) {
                double adv = 0.0;
                for (int cc = 0; cc < g.d(); ++cc)
                    adv += b.comp(cc).at(it, is) * du.comp(cc).at(it, is);
                rhs.at(it, is) = -(adv + f.at(it, is));
            }
        ScalarField next = potential_apply(rhs, KernelParams{2.0, 4.0}, n_sigma);
        for (double& v : next.values()) v *= c;

        double diff = 0.0;
        for (std::size_t i = 0; i < u.values().size(); ++i)
            diff = std::max(diff, std::abs(next.values()[i] - u.values()[i]));
        u = std::move(next);
        ++iters;
        if (prev_diff > 0.0) {
            factor = std::max(factor, diff / prev_diff);
            if (diff / prev_diff >= 1.0) {
                if (++bad >= 3) throw PicardDivergence(diff / prev_diff);
            } else {
                bad = 0;
            }
        }
        if (diff <= 1e-10 * std::max(sup_norm(u), 1e-300)) break;
        prev_diff = diff;
    }
    SolveReport rep{std::move(u)};
    rep.sup_u = sup_norm(rep.u);
    rep.f_norm = mixed_norm(f, MixedNormSpec{2.0, 2.0, NormOrder::TimeOuter});
    rep.ratio = rep.f_norm > 0.0 ? rep.sup_u / rep.f_norm : 0.0;
    rep.iterations = iters;
    rep.contraction_factor = factor;
    return rep;
}

/// Solve and report the measured constants of the maximum-modulus and
/// gradient estimates for subcritical (q, p).
inline SolveReport estimate_report(const VectorField& b, const ScalarField& f, double q, double p) {
    const Grid& g = f.grid();
    if (!admissibility(q, p, g.d(), AdmissibilityKind::Subcritical))
        throw std::invalid_argument("estimate_report: (q, p) not subcritical");
    SolveReport rep{solve_backward(b, f)};
    rep.sup_u = sup_norm(rep.u);
    rep.f_norm = mixed_norm(f, MixedNormSpec{q, p, NormOrder::TimeOuter});
    rep.ratio = rep.f_norm > 0.0 ? rep.sup_u / rep.f_norm : 0.0;
    const ScalarField gm = gradient(rep.u).magnitude_field();
    const double gn = mixed_norm(gm, MixedNormSpec{2.0 * q, 2.0 * p, NormOrder::TimeOuter});
    rep.grad_ratio = rep.f_norm > 0.0 ? gn / rep.f_norm : 0.0;
    return rep;
}

/// Least-squares slope of log(sup|u_T| / ||f_T||_{q,p}) against log T for
/// the parabolic rescaling family f_T(t,x) = f1(t/T, x/sqrt(T))/T,
/// b_T = b1(t/T, x/sqrt(T))/sqrt(T). The slope should match
/// 1 - d/(2p) - 1/q.
inline double scaling_fit(
    const std::function<std::array<double, 3>(double, const std::array<double, 3>&)>& b1,
    const std::function<double(double, const std::array<double, 3>&)>& f1, double q, double p,
    const std::vector<double>& T_list, int d, double L1, int n_x, int n_t) {
    if (T_list.size() < 3) throw std::invalid_argument("scaling_fit: need at least 3 horizons");
    std::vector<double> lx, ly;
    for (double T : T_list) {
        const double rt = std::sqrt(T);
        const Grid g(d, L1 * rt, n_x, T, n_t);
        const ScalarField fT = ScalarField::sample(g, [&](double t, const std::array<double, 3>& x) {
            std::array<double, 3> xs{x[0] / rt, x[1] / rt, x[2] / rt};
            return f1(t / T, xs) / T;
        });
        const VectorField bT = VectorField::sample(g, [&](double t, const std::array<double, 3>& x) {
            std::array<double, 3> xs{x[0] / rt, x[1] / rt, x[2] / rt};
            auto v = b1(t / T, xs);
            return std::array<double, 3>{v[0] / rt, v[1] / rt, v[2] / rt};
        });
        const SolveReport rep = estimate_report(bT, fT, q, p);
        if (!(rep.ratio > 0.0)) continue;
        lx.push_back(std::log(T));
        ly.push_back(std::log(rep.ratio));
    }
    if (lx.size() < 3) throw std::runtime_error("scaling_fit: fewer than 3 valid runs");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) { mx += lx[i]; my += ly[i]; }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    return num / den;
}

}  // namespace heatlab
