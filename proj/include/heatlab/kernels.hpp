#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "grid.hpp"
#include "morrey.hpp"
#include "norms.hpp"
#include "stencils.hpp"

namespace heatlab {

/// Indexes the parabolic kernel p_{alpha,k}(s,r) = s^{-(d+2-alpha)/2} e^{-r^2/(ks)}.
struct KernelParams {
    double alpha;
    double k;

    void validate() const {
        if (!(alpha > 0.0) || !(k > 0.0))
            throw std::invalid_argument("KernelParams: alpha, k must be positive");
    }
};

inline double kernel_eval(const KernelParams& params, int d, double s, double r) {
    params.validate();
    if (s <= 0.0) return 0.0;
    return std::pow(s, -(d + 2.0 - params.alpha) / 2.0) * std::exp(-r * r / (params.k * s));
}

namespace detail {

// Convolve along one spatial axis with centered weights w[-M..M]
// (stored as w[0..2M]); values outside the box count as zero.
inline void convolve_axis(const Grid& g, const double* in, double* out, int axis,
                          const std::vector<double>& w, int M) {
    const int n1 = g.nodes_per_axis();
    std::size_t stride = 1;
    for (int a = g.d() - 1; a > axis; --a) stride *= static_cast<std::size_t>(n1);
    const std::size_t ns = g.space_size();

    for (std::size_t is = 0; is < ns; ++is) {
        const int i = g.unflatten(is)[static_cast<std::size_t>(axis)];
        double acc = 0.0;
        const int mlo = std::max(-M, -i);
        const int mhi = std::min(M, n1 - 1 - i);
        for (int m = mlo; m <= mhi; ++m)
            acc += w[static_cast<std::size_t>(m + M)] * in[is + static_cast<std::size_t>(m) * stride];
        out[is] = acc;
    }
}

// Cell-integrated Gaussian weights for scale sqrt(ks): exact integral of
// e^{-y^2/(ks)} over each cell, so narrow kernels keep their full mass.
inline std::vector<double> gaussian_cell_weights(double h, double ks, int n1, int& M) {
    const double sig = std::sqrt(ks);
    M = std::min(n1, static_cast<int>(std::ceil(7.0 * sig / h)) + 1);
    std::vector<double> w(static_cast<std::size_t>(2 * M + 1));
    const double c = 0.5 * std::sqrt(std::numbers::pi) * sig;
    for (int m = -M; m <= M; ++m)
        w[static_cast<std::size_t>(m + M)] =
            c * (std::erf((m + 0.5) * h / sig) - std::erf((m - 0.5) * h / sig));
    return w;
}

}  // namespace detail

/// Potential operator P_{alpha,k} f(t,x) = int p_{alpha,k}(s,|y|) f(t+s, x+y) dy ds.
///
/// The s-integral is graded by the substitution s = sigma^2 (midpoint rule),
/// truncated at s = T - t where f vanishes; the spatial integral is an exact
/// cell-integrated Gaussian convolution, separable per axis.
inline ScalarField potential_apply(const ScalarField& f, const KernelParams& params,
                                   int n_sigma = 48) {
    params.validate();
    if (params.alpha < 1.0)
        throw std::invalid_argument("potential_apply: alpha < 1 not supported (quadrature not validated)");
    const Grid& g = f.grid();
    const std::size_t ns = g.space_size();
    ScalarField out(g);

    std::vector<double> fs(ns), buf_a(ns), buf_b(ns);
    for (int it = 0; it <= g.n_t(); ++it) {
        const double t = g.time(it);
        const double smax = g.T() - t;
        if (smax <= 0.0) continue;
        const double dsig = std::sqrt(smax) / n_sigma;
        double* o = out.slice(it);
        for (int j = 0; j < n_sigma; ++j) {
            const double sig = (j + 0.5) * dsig;
            const double s = sig * sig;
            // f(t+s, .) by linear interpolation between slices
            const double tau = (t + s) / g.dt();
            const int i0 = std::min(static_cast<int>(tau), g.n_t());
            const double fr = tau - i0;
            const double* a = f.slice(i0);
            const double* b = f.slice(std::min(i0 + 1, g.n_t()));
            for (std::size_t is = 0; is < ns; ++is) fs[is] = (1.0 - fr) * a[is] + fr * b[is];

            int M = 0;
            const auto w = detail::gaussian_cell_weights(g.h(), params.k * s, g.nodes_per_axis(), M);
            double* cur = fs.data();
            double* nxt = buf_a.data();
            for (int axis = 0; axis < g.d(); ++axis) {
                detail::convolve_axis(g, cur, nxt, axis, w, M);
                std::swap(cur, nxt);
                if (axis == 0 && g.d() > 1 && nxt == fs.data()) nxt = buf_b.data();
            }
            const double wq = 2.0 * sig * dsig * std::pow(s, -(g.d() + 2.0 - params.alpha) / 2.0);
            for (std::size_t is = 0; is < ns; ++is) o[is] += wq * cur[is];
        }
    }
    return out;
}

struct FitResult {
    double value;      // fitted scalar
    double residual;   // relative sup-norm residual of the fitted identity
    bool coarse;       // residual above the 10% grid-quality threshold
};

namespace detail {

inline FitResult fit_scalar(const std::vector<double>& target, const std::vector<double>& basis,
                            double mask_floor) {
    double num = 0.0, den = 0.0, bmax = 0.0, tmax = 0.0;
    for (double v : basis) bmax = std::max(bmax, std::abs(v));
    for (double v : target) tmax = std::max(tmax, std::abs(v));
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (std::abs(basis[i]) < mask_floor * bmax) continue;
        num += target[i] * basis[i];
        den += basis[i] * basis[i];
    }
    const double c = den > 0.0 ? num / den : 0.0;
    double res = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i)
        res = std::max(res, std::abs(target[i] - c * basis[i]));
    res /= std::max(tmax, 1e-300);
    return {c, res, res > 0.10};
}

inline ScalarField spacetime_gaussian(const Grid& g, double t_center, double t_width,
                                      double x_width) {
    return ScalarField::sample(g, [&](double t, const std::array<double, 3>& x) {
        double r2 = 0.0;
        for (int a = 0; a < g.d(); ++a) r2 += x[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
        const double dtc = (t - t_center) / t_width;
        return std::exp(-dtc * dtc) * std::exp(-r2 / (x_width * x_width));
    });
}

}  // namespace detail

/// Fit c in u = c P_{2,4}(d_t u + Lap u) for a smooth rapidly decaying
/// test bump; |c| should equal (4 pi)^{-d/2} (the fitted sign follows the
/// -f convention of the terminal-value problem).
inline FitResult reproduction_constant(int d, int n_x = 0, int n_t = 0, int n_sigma = 48) {
    if (n_x == 0) n_x = d == 1 ? 96 : (d == 2 ? 56 : 36);
    if (n_t == 0) n_t = d == 1 ? 48 : (d == 2 ? 40 : 28);
    const Grid g(d, 4.0, n_x, 1.0, n_t);
    const ScalarField u = detail::spacetime_gaussian(g, 0.5, 0.15, 1.0);
    ScalarField rhs = laplacian(u);
    const ScalarField ut = time_derivative(u);
    for (std::size_t i = 0; i < rhs.values().size(); ++i) rhs.values()[i] += ut.values()[i];
    const ScalarField pu = potential_apply(rhs, KernelParams{2.0, 4.0}, n_sigma);
    return detail::fit_scalar(u.values(), pu.values(), 1e-6);
}

/// Closed form of the composition constant in P_{a,k} P_{b,k} = c P_{a+b,k}:
/// spatial Gaussian convolution plus a Beta integral in time.
inline double composition_oracle(double alpha, double beta, double k, int d) {
    const double beta_fn = std::tgamma(alpha / 2.0) * std::tgamma(beta / 2.0) /
                           std::tgamma((alpha + beta) / 2.0);
    return std::pow(std::numbers::pi * k, d / 2.0) * beta_fn;
}

/// Fit c in P_{alpha,k}(P_{beta,k} f) = c P_{alpha+beta,k} f for a Gaussian f.
inline FitResult composition_constant(double alpha, double beta, double k, int d,
                                      int n_x = 128, int n_t = 40, int n_sigma = 48) {
    if (alpha < 1.0 || beta < 1.0 || alpha + beta > 4.0)
        throw std::invalid_argument("composition_constant: need alpha, beta >= 1, alpha+beta <= 4");
    const Grid g(d, 10.0, n_x, 1.0, n_t);
    const ScalarField f = detail::spacetime_gaussian(g, 0.6, 0.1, 0.5);
    const ScalarField pb = potential_apply(f, KernelParams{beta, k}, n_sigma);
    const ScalarField lhs = potential_apply(pb, KernelParams{alpha, k}, n_sigma);
    const ScalarField rhs = potential_apply(f, KernelParams{alpha + beta, k}, n_sigma);
    return detail::fit_scalar(lhs.values(), rhs.values(), 1e-3);
}

/// Empirical constant in |D P_{alpha,k} f| <= N P_{alpha-n,2k} |f|:
/// max ratio over nodes (zero if f vanishes).
inline double derivative_domination_check(const ScalarField& f, double alpha, double k,
                                          int n = 1, int n_sigma = 48) {
    if (n != 1) throw std::invalid_argument("derivative_domination_check: only n = 1 implemented");
    if (!(alpha - n >= 1.0))
        throw std::invalid_argument("derivative_domination_check: alpha - n >= 1 required");
    const Grid& g = f.grid();
    ScalarField absf(g);
    for (std::size_t i = 0; i < f.values().size(); ++i) absf.values()[i] = std::abs(f.values()[i]);
    const ScalarField pf = potential_apply(f, KernelParams{alpha, k}, n_sigma);
    const ScalarField grad_mag = gradient(pf).magnitude_field();
    const ScalarField dom = potential_apply(absf, KernelParams{alpha - n, 2.0 * k}, n_sigma);
    double best = 0.0;
    for (int it = 0; it <= g.n_t(); ++it)
        for (std::size_t is = 0; is < g.space_size(); ++is) {
            auto idx = g.unflatten(is);
            bool interior = true;
            for (int a = 0; a < g.d(); ++a)
                if (idx[static_cast<std::size_t>(a)] == 0 || idx[static_cast<std::size_t>(a)] == g.n_x()) interior = false;
            if (!interior) continue;
            const double den = dom.at(it, is);
            if (den < 1e-14) continue;
            best = std::max(best, grad_mag.at(it, is) / den);
        }
    return best;
}

enum class BoundSide { Forward, Adjoint };

/// Morrey-boundedness ratio: ||P(bf)|| / (btilde ||f||) (Forward) or
/// ||b Pf|| / (btilde ||f||) (Adjoint), in the given mixed norm.
inline double morrey_bound_ratio(const ScalarField& b, const ScalarField& f, double alpha,
                                 double p0, const MixedNormSpec& spec, BoundSide side,
                                 double k = 4.0, int n_sigma = 48) {
    spec.validate();
    const double p0p = p0 / (p0 - 1.0);
    if (side == BoundSide::Forward) {
        if (!(spec.q > p0p) || !(spec.p > p0p))
            throw std::invalid_argument("morrey_bound_ratio: Forward needs exponents > p0'");
    } else {
        if (!(spec.q < p0) || !(spec.p < p0))
            throw std::invalid_argument("morrey_bound_ratio: Adjoint needs exponents < p0");
    }
    const Grid& g = b.grid();
    const double btilde = morrey_norm(b, MorreyParams{alpha, p0, dyadic_radii(g)});
    if (btilde == 0.0) return 0.0;
    const double fnorm = mixed_norm(f, spec);
    if (fnorm == 0.0) return 0.0;

    ScalarField num(g);
    if (side == BoundSide::Forward) {
        ScalarField bf(g);
        for (std::size_t i = 0; i < bf.values().size(); ++i)
            bf.values()[i] = b.values()[i] * f.values()[i];
        num = potential_apply(bf, KernelParams{alpha, k}, n_sigma);
    } else {
        const ScalarField pf = potential_apply(f, KernelParams{alpha, k}, n_sigma);
        for (std::size_t i = 0; i < num.values().size(); ++i)
            num.values()[i] = b.values()[i] * pf.values()[i];
    }
    return mixed_norm(num, spec) / (btilde * fnorm);
}

}  // namespace heatlab
