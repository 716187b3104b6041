#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "grid.hpp"
#include "morrey.hpp"

namespace heatlab {

inline double unit_ball_volume(int d) {
    return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

/// Disjoint-bump drift on the x^1 axis: b = sum_n (alpha_n / r_n) on balls
/// B_{r_n}(c_n e_1). Its p-th power integral converges exactly at p = p0
/// and diverges for every p > p0.
struct BumpDrift {
    int d;
    double p0;
    int n_max;
    std::vector<double> r;       // bump radii, 1-based values at index n-1
    std::vector<double> alpha;   // bump heights scale alpha_n / r_n
    std::vector<double> rho;     // r_n^{d-p0}
    std::vector<double> center;  // x^1 coordinate of bump centers

    double height(int n) const { return alpha[static_cast<std::size_t>(n - 1)] / r[static_cast<std::size_t>(n - 1)]; }

    /// Exact integral over R^d of (sum of bumps n in [n_lo, n_hi])^p.
    double integral_bp(double p, int n_lo, int n_hi) const {
        const double vd = unit_ball_volume(d);
        double acc = 0.0;
        for (int n = n_lo; n <= std::min(n_hi, n_max); ++n)
            acc += vd * std::pow(height(n), p) * std::pow(r[static_cast<std::size_t>(n - 1)], d);
        return acc;
    }

    /// Grid realization of b I_{Gamma_k} (bumps n >= k), capped at the
    /// resolution limit r_n >= 4h.
    ScalarField to_field(const Grid& g, int k = 1) const {
        ScalarField f(g);
        for (int n = k; n <= n_max; ++n) {
            const double rn = r[static_cast<std::size_t>(n - 1)];
            if (rn < 4.0 * g.h()) break;
            const double hn = height(n);
            const double cn = center[static_cast<std::size_t>(n - 1)];
            for (std::size_t is = 0; is < g.space_size(); ++is) {
                auto x = g.point(is);
                double d2 = (x[0] - cn) * (x[0] - cn);
                for (int a = 1; a < g.d(); ++a) d2 += x[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
                if (d2 <= rn * rn) {
                    for (int it = 0; it <= g.n_t(); ++it) f.at(it, is) += hn;
                }
            }
        }
        return f;
    }

    /// Index of the last bump resolvable at spacing h (r_n >= 4h).
    int resolvable_n(double h) const {
        int n = 0;
        while (n < n_max && r[static_cast<std::size_t>(n)] >= 4.0 * h) ++n;
        return n;
    }
};

namespace detail {

// Sum of 1/(n ln^3 n) from n = 10 up, with an analytic tail beyond the
// summation horizon: int_N^inf dx/(x ln^3 x) = 1/(2 ln^2 N).
inline double bump_series_total() {
    const long N = 2'000'000;
    double acc = 0.0;
    for (long n = 10; n <= N; ++n) {
        const double ln = std::log(static_cast<double>(n));
        acc += 1.0 / (static_cast<double>(n) * ln * ln * ln);
    }
    acc += 1.0 / (2.0 * std::log(static_cast<double>(N)) * std::log(static_cast<double>(N)));
    return acc;
}

}  // namespace detail

/// Construct the bump drift. The published sequences are asymptotic; the
/// first nine radii are substituted as r_n = r_10 * 10 / n and everything
/// is rescaled so the full series of rho_n sums to 1/2, which keeps the
/// supports disjoint inside the unit interval.
inline BumpDrift bump_drift(int d, double p0, int n_max) {
    if (d < 3) throw std::invalid_argument("bump_drift: d >= 3 required");
    if (!(p0 >= d - 1.0) || !(p0 < static_cast<double>(d)))
        throw std::invalid_argument("bump_drift: p0 must lie in [d-1, d)");
    if (n_max < 3) throw std::invalid_argument("bump_drift: n_max >= 3 required");

    const double ex = static_cast<double>(d) - p0;  // in (0, 1]
    std::vector<double> raw_rho;
    raw_rho.reserve(static_cast<std::size_t>(n_max));
    double head = 0.0;
    const double r10_raw = std::pow(10.0 * std::pow(std::log(10.0), 3.0), -1.0 / ex);
    for (int n = 1; n <= n_max; ++n) {
        double rn;
        if (n < 10)
            rn = r10_raw * 10.0 / n;
        else {
            const double ln = std::log(static_cast<double>(n));
            rn = std::pow(static_cast<double>(n) * ln * ln * ln, -1.0 / ex);
        }
        raw_rho.push_back(std::pow(rn, ex));
        if (n < 10) head += raw_rho.back();
    }
    const double total = head + detail::bump_series_total();
    const double scale = 0.5 / total;

    BumpDrift b{d, p0, n_max, {}, {}, {}, {}};
    double csum = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        const double rho = scale * raw_rho[static_cast<std::size_t>(n - 1)];
        const double rn = std::pow(rho, 1.0 / ex);
        const double an = std::pow(std::log(static_cast<double>(std::max(n, 10))), -1.0 / p0);
        b.rho.push_back(rho);
        b.r.push_back(rn);
        b.alpha.push_back(an);
        b.center.push_back(1.0 - 2.0 * csum - rho);
        csum += rho;
        if (rn > rho + 1e-15)
            throw std::runtime_error("bump_drift: overlapping supports (misconfigured n_max)");
    }
    return b;
}

/// Morrey norm of the tail b I_{Gamma_k} on the given grid; zero when the
/// tail is empty, nonincreasing in k.
inline double tail_morrey(const BumpDrift& bump, int k, const Grid& g, const MorreyParams& params) {
    if (k > bump.n_max) return 0.0;
    ScalarField f = bump.to_field(g, k);
    bool all_zero = true;
    for (double v : f.values())
        if (v != 0.0) { all_zero = false; break; }
    if (all_zero) return 0.0;
    return morrey_norm(f, params);
}

}  // namespace heatlab
