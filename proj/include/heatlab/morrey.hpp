#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <optional>
#include <vector>

#include "grid.hpp"
#include "norms.hpp"

namespace heatlab {

/// Parameters of the (alpha, p0)-Morrey norm: sup over times, radii and
/// ball centers of r^alpha times the L_{p0} ball average.
struct MorreyParams {
    double alpha;
    double p0;
    std::vector<double> radii;  // decreasing

    void validate(const Grid& g) const {
        if (!(alpha > 0.0)) throw std::invalid_argument("MorreyParams: alpha must be positive");
        if (!(p0 > 1.0) || !(p0 <= static_cast<double>(g.d())))
            throw std::invalid_argument("MorreyParams: p0 must lie in (1, d]");
        if (radii.empty()) throw std::invalid_argument("MorreyParams: radii set empty");
        for (double r : radii) {
            if (r > g.L() + 1e-12) throw std::invalid_argument("MorreyParams: radius exceeds box half-width");
            if (r < 2.0 * g.h()) throw std::invalid_argument("MorreyParams: radius below 2h unresolvable");
        }
    }
};

/// Dyadic radii {L, L/2, ...} down to 4h (at least 2h).
inline std::vector<double> dyadic_radii(const Grid& g) {
    std::vector<double> out;
    for (double r = g.L(); r >= 4.0 * g.h() - 1e-12; r *= 0.5) out.push_back(r);
    if (out.empty()) out.push_back(g.L());
    return out;
}

namespace detail {

constexpr double kBallTol = 1e-12;

/// Ball sums over one spatial slice via prefix sums along the last axis.
class SliceScan {
  public:
    SliceScan(const Grid& g, const double* slice) : g_(&g) {
        const std::size_t n1 = static_cast<std::size_t>(g.nodes_per_axis());
        const std::size_t lines = g.space_size() / n1;
        pre_.assign(lines * (n1 + 1), 0.0);
        for (std::size_t l = 0; l < lines; ++l) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n1; ++j) {
                acc += slice[l * n1 + j];
                pre_[l * (n1 + 1) + j + 1] = acc;
            }
        }
    }

    /// Sum and node count of the ball of radius r centered at node `c`,
    /// clipped to the box.
    void ball(const std::array<int, 3>& c, double r, double& sum, std::int64_t& count) const {
        const Grid& g = *g_;
        const int n1 = g.nodes_per_axis();
        const double h = g.h();
        sum = 0.0;
        count = 0;
        auto segment = [&](std::size_t line, double halfwidth, int cj) {
            const int w = static_cast<int>(std::floor(halfwidth / h + kBallTol));
            const int lo = std::max(0, cj - w);
            const int hi = std::min(n1 - 1, cj + w);
            if (hi < lo) return;
            sum += pre_[line * static_cast<std::size_t>(n1 + 1) + static_cast<std::size_t>(hi) + 1] -
                   pre_[line * static_cast<std::size_t>(n1 + 1) + static_cast<std::size_t>(lo)];
            count += hi - lo + 1;
        };
        if (g.d() == 1) {
            segment(0, r, c[0]);
        } else if (g.d() == 2) {
            const int w0 = static_cast<int>(std::floor(r / h + kBallTol));
            for (int i0 = std::max(0, c[0] - w0); i0 <= std::min(n1 - 1, c[0] + w0); ++i0) {
                const double dx0 = (i0 - c[0]) * h;
                const double rem = r * r * (1.0 + kBallTol) - dx0 * dx0;
                if (rem < 0.0) continue;
                segment(static_cast<std::size_t>(i0), std::sqrt(rem), c[1]);
            }
        } else {
            const int w0 = static_cast<int>(std::floor(r / h + kBallTol));
            for (int i0 = std::max(0, c[0] - w0); i0 <= std::min(n1 - 1, c[0] + w0); ++i0)
                for (int i1 = std::max(0, c[1] - w0); i1 <= std::min(n1 - 1, c[1] + w0); ++i1) {
                    const double d2 = ((i0 - c[0]) * (i0 - c[0]) + (i1 - c[1]) * (i1 - c[1])) * h * h;
                    const double rem = r * r * (1.0 + kBallTol) - d2;
                    if (rem < 0.0) continue;
                    segment(static_cast<std::size_t>(i0) * static_cast<std::size_t>(n1) +
                                static_cast<std::size_t>(i1),
                            std::sqrt(rem), c[2]);
                }
        }
    }

  private:
    const Grid* g_;
    std::vector<double> pre_;
};

inline bool slices_equal(const double* a, const double* b, std::size_t n) {
    return std::memcmp(a, b, n * sizeof(double)) == 0;
}

/// Number of time slices covered by [t0, t0 + r^2), clipped to the grid.
inline int cylinder_depth(const Grid& g, int i0, double r) {
    int m = static_cast<int>(std::floor((r * r - 1e-12) / g.dt())) + 1;
    m = std::max(m, 1);
    return std::min(m, g.time_slices() - i0);
}

}  // namespace detail

/// (alpha, p0)-Morrey norm of |field|, ball suprema sampled at grid node
/// centers and the given radii, balls clipped to the box.
inline double morrey_norm(const ScalarField& f, const MorreyParams& params) {
    const Grid& g = f.grid();
    params.validate(g);
    const std::size_t ns = g.space_size();
    std::vector<double> pw(ns);
    double best = 0.0;
    for (int it = 0; it < g.time_slices(); ++it) {
        if (it > 0 && detail::slices_equal(f.slice(it), f.slice(it - 1), ns)) continue;
        const double* sl = f.slice(it);
        for (std::size_t is = 0; is < ns; ++is) pw[is] = std::pow(std::abs(sl[is]), params.p0);
        detail::SliceScan scan(g, pw.data());
        for (double r : params.radii) {
            const double ra = std::pow(r, params.alpha);
            for (std::size_t is = 0; is < ns; ++is) {
                double sum;
                std::int64_t cnt;
                scan.ball(g.unflatten(is), r, sum, cnt);
                if (cnt == 0) continue;
                best = std::max(best, ra * std::pow(sum / static_cast<double>(cnt), 1.0 / params.p0));
            }
        }
    }
    return best;
}

inline double morrey_norm(const VectorField& b, const MorreyParams& params) {
    return morrey_norm(b.magnitude_field(), params);
}

/// Weak-Lebesgue style quasinorm over unit balls: sup over t, lambda and
/// ball of (lambda *) |{|b| > lambda} cap B|^{1/s}. The lambda grid is 64
/// log-spaced values between the smallest positive and the largest |b|.
inline double weak_quasinorm(const VectorField& b, double s, bool with_lambda) {
    if (!(s > 0.0)) throw std::invalid_argument("weak_quasinorm: s must be positive");
    const Grid& g = b.grid();
    if (1.0 < 2.0 * g.h() || 1.0 > g.L() + 1e-12)
        throw std::invalid_argument("weak_quasinorm: unit ball unresolvable on this grid");
    const ScalarField mag = b.magnitude_field();
    double lo = kInf, hi = 0.0;
    for (double v : mag.values()) {
        if (v > 0.0) lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > 0.0)) return 0.0;
    const int n_lambda = 64;
    std::vector<double> lambdas(n_lambda);
    // nudge below each sampled level so that plateau values are counted by
    // the strict superlevel set {|b| > lambda}
    for (int i = 0; i < n_lambda; ++i)
        lambdas[static_cast<std::size_t>(i)] =
            lo * std::pow(hi / lo, static_cast<double>(i) / (n_lambda - 1)) * (1.0 - 1e-9);

    const std::size_t ns = g.space_size();
    std::vector<double> ind(ns);
    const double cell = std::pow(g.h(), g.d());
    double best = 0.0;
    for (int it = 0; it < g.time_slices(); ++it) {
        if (it > 0 && detail::slices_equal(mag.slice(it), mag.slice(it - 1), ns)) continue;
        const double* sl = mag.slice(it);
        for (double lam : lambdas) {
            for (std::size_t is = 0; is < ns; ++is) ind[is] = sl[is] > lam ? 1.0 : 0.0;
            detail::SliceScan scan(g, ind.data());
            for (std::size_t is = 0; is < ns; ++is) {
                double cnt_above;
                std::int64_t cnt;
                scan.ball(g.unflatten(is), 1.0, cnt_above, cnt);
                if (cnt_above <= 0.0) continue;
                const double meas = cnt_above * cell;
                best = std::max(best, (with_lambda ? lam : 1.0) * std::pow(meas, 1.0 / s));
            }
        }
    }
    return best;
}

/// Parabolic maximal function: pointwise sup of r^alpha times the average
/// of f over sampled cylinders [t0, t0+r^2) x B_r containing the point.
inline ScalarField parabolic_maximal(const ScalarField& f, double alpha,
                                     const std::vector<double>& radii) {
    const Grid& g = f.grid();
    const std::size_t ns = g.space_size();
    const int nt1 = g.time_slices();
    ScalarField out(g);

    std::vector<detail::SliceScan> scans;
    scans.reserve(static_cast<std::size_t>(nt1));
    for (int it = 0; it < nt1; ++it) scans.emplace_back(g, f.slice(it));

    std::vector<double> ballsum(static_cast<std::size_t>(nt1));
    std::vector<std::size_t> members;
    for (double r : radii) {
        const double ra = std::pow(r, alpha);
        for (std::size_t ic = 0; ic < ns; ++ic) {
            const auto c = g.unflatten(ic);
            std::int64_t cnt = 0;
            for (int it = 0; it < nt1; ++it) scans[static_cast<std::size_t>(it)].ball(c, r, ballsum[static_cast<std::size_t>(it)], cnt);
            if (cnt == 0) continue;
            // nodes of the spatial ball, reused for every base slice
            members.clear();
            for (std::size_t is = 0; is < ns; ++is) {
                const auto p = g.unflatten(is);
                double d2 = 0.0;
                for (int a = 0; a < g.d(); ++a) {
                    const double dx = (p[static_cast<std::size_t>(a)] - c[static_cast<std::size_t>(a)]) * g.h();
                    d2 += dx * dx;
                }
                if (d2 <= r * r * (1.0 + detail::kBallTol)) members.push_back(is);
            }
            for (int i0 = 0; i0 < nt1; ++i0) {
                const int m = detail::cylinder_depth(g, i0, r);
                double acc = 0.0;
                for (int j = 0; j < m; ++j) acc += ballsum[static_cast<std::size_t>(i0 + j)];
                const double val = ra * acc / (static_cast<double>(m) * static_cast<double>(cnt));
                for (int j = 0; j < m; ++j)
                    for (std::size_t is : members) {
                        double& o = out.at(i0 + j, is);
                        o = std::max(o, val);
                    }
            }
        }
    }
    return out;
}

/// Max over sampled cylinders of
///   r^alpha avg_C(b f) - btilde_{alpha,p0} (avg_C f^{p0'})^{1/p0'}.
/// Nonpositive (up to rounding) for any nonnegative b, f.
inline double holder_domination_check(const ScalarField& b, const ScalarField& f, double alpha,
                                      double p0, std::optional<std::vector<double>> radii_opt = {}) {
    const Grid& g = b.grid();
    const std::vector<double> radii = radii_opt ? *radii_opt : dyadic_radii(g);
    const double btilde = morrey_norm(b, MorreyParams{alpha, p0, radii});
    const double p0p = p0 / (p0 - 1.0);

    const std::size_t ns = g.space_size();
    const int nt1 = g.time_slices();
    std::vector<double> prod(g.total_size()), fpow(g.total_size());
    for (std::size_t i = 0; i < g.total_size(); ++i) {
        prod[i] = b.values()[i] * f.values()[i];
        fpow[i] = std::pow(f.values()[i], p0p);
    }
    std::vector<detail::SliceScan> pscan, fscan;
    for (int it = 0; it < nt1; ++it) {
        pscan.emplace_back(g, prod.data() + static_cast<std::size_t>(it) * ns);
        fscan.emplace_back(g, fpow.data() + static_cast<std::size_t>(it) * ns);
    }

    double worst = -kInf;
    std::vector<double> psum(static_cast<std::size_t>(nt1)), fsum(static_cast<std::size_t>(nt1));
    for (double r : radii) {
        const double ra = std::pow(r, alpha);
        for (std::size_t ic = 0; ic < ns; ++ic) {
            const auto c = g.unflatten(ic);
            std::int64_t cnt = 0;
            for (int it = 0; it < nt1; ++it) {
                pscan[static_cast<std::size_t>(it)].ball(c, r, psum[static_cast<std::size_t>(it)], cnt);
                fscan[static_cast<std::size_t>(it)].ball(c, r, fsum[static_cast<std::size_t>(it)], cnt);
            }
            if (cnt == 0) continue;
            for (int i0 = 0; i0 < nt1; ++i0) {
                const int m = detail::cylinder_depth(g, i0, r);
                double pacc = 0.0, facc = 0.0;
                for (int j = 0; j < m; ++j) {
                    pacc += psum[static_cast<std::size_t>(i0 + j)];
                    facc += fsum[static_cast<std::size_t>(i0 + j)];
                }
                const double denom = static_cast<double>(m) * static_cast<double>(cnt);
                const double lhs = ra * pacc / denom;
                const double rhs = btilde * std::pow(facc / denom, 1.0 / p0p);
                worst = std::max(worst, lhs - rhs);
            }
        }
    }
    return worst;
}

/// LPS threshold split b = b' + B with b' = b I_{|b| >= lambda(t)},
/// lambda(t) = N_hat * (int |b(t,.)|^{p0} dx)^{1/(p0-d)}.
struct Decomposition {
    VectorField b_prime;
    VectorField B_part;
    std::vector<double> lambda;        // per time slice
    double morrey_certificate;         // (1, d)-Morrey norm of b'
    double b_square_bracket;           // int_0^T lambda^2(t) dt
    double certificate_identity_rel;   // relative gap of the two lambda-integral routes
};

inline Decomposition lps_decompose(const VectorField& b, double p0_lps, double q0_lps,
                                   double N_hat) {
    const Grid& g = b.grid();
    if (!(p0_lps > static_cast<double>(g.d())))
        throw std::invalid_argument("lps_decompose: p0 must exceed d");
    if (!admissibility(q0_lps, p0_lps, g.d(), AdmissibilityKind::LPSCritical))
        throw std::invalid_argument("lps_decompose: (q0, p0) not LPS-critical");

    const std::size_t ns = g.space_size();
    const int nt1 = g.time_slices();
    const ScalarField mag = b.magnitude_field();

    std::vector<double> S(static_cast<std::size_t>(nt1)), lambda(static_cast<std::size_t>(nt1));
    for (int it = 0; it < nt1; ++it) {
        double acc = 0.0;
        const double* sl = mag.slice(it);
        for (std::size_t is = 0; is < ns; ++is)
            acc += g.space_weight(is) * std::pow(sl[is], p0_lps);
        if (!std::isfinite(acc))
            throw std::runtime_error("lps_decompose: non-integrable time slice");
        S[static_cast<std::size_t>(it)] = acc;
        lambda[static_cast<std::size_t>(it)] = N_hat * std::pow(acc, 1.0 / (p0_lps - g.d()));
    }

    Decomposition out{VectorField(g), VectorField(g), lambda, 0.0, 0.0, 0.0};
    for (int it = 0; it < nt1; ++it)
        for (std::size_t is = 0; is < ns; ++is) {
            const bool above = mag.at(it, is) >= lambda[static_cast<std::size_t>(it)];
            for (int c = 0; c < g.d(); ++c) {
                const double v = b.comp(c).at(it, is);
                (above ? out.b_prime : out.B_part).comp(c).at(it, is) = v;
            }
        }

    out.morrey_certificate =
        morrey_norm(out.b_prime, MorreyParams{1.0, static_cast<double>(g.d()), dyadic_radii(g)});

    double route_a = 0.0, route_b = 0.0;
    for (int it = 0; it < nt1; ++it) {
        const double w = g.time_weight(it);
        route_a += w * lambda[static_cast<std::size_t>(it)] * lambda[static_cast<std::size_t>(it)];
        route_b += w * std::pow(S[static_cast<std::size_t>(it)], q0_lps / p0_lps);
    }
    route_b *= N_hat * N_hat;
    out.b_square_bracket = route_a;
    out.certificate_identity_rel =
        std::abs(route_a - route_b) / std::max({route_a, route_b, 1e-300});
    return out;
}

/// [B]^2 = int_0^T sup_x |B(t,x)|^2 dt by trapezoid over slices.
inline double bracket_squared(const VectorField& B) {
    const Grid& g = B.grid();
    double acc = 0.0;
    for (int it = 0; it < g.time_slices(); ++it) {
        double m = 0.0;
        for (std::size_t is = 0; is < g.space_size(); ++is)
            m = std::max(m, B.magnitude(it, is));
        acc += g.time_weight(it) * m * m;
    }
    return acc;
}

}  // namespace heatlab
