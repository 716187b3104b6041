#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace heatlab {

namespace detail {

template <typename F>
double simpson(const F& f, double a, double b) {
    return (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
}

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double b, double whole, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double left = simpson(f, a, m);
    const double right = simpson(f, m, b);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, left, 0.5 * eps, depth - 1) +
           adaptive_simpson_rec(f, m, b, right, 0.5 * eps, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double eps, int depth = 30) {
    if (!(b > a)) return 0.0;
    return adaptive_simpson_rec(f, a, b, simpson(f, a, b), eps, depth);
}

// Upper incomplete gamma Gamma(a, x) by Lentz continued fraction; valid
// for x >= 1 (x > a + 1 in general), any real a.
inline double gamma_upper_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 400; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x)) * h;
}

}  // namespace detail

/// c = (integral_R e^{-y^2} dy * integral_0^inf r^{alpha-1} e^{-r^2} dr)^{-1},
/// evaluated by quadrature; analytically (sqrt(pi) Gamma(alpha/2) / 2)^{-1}.
inline double normalization_c(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("normalization_c: alpha must be positive");
    const double gauss =
        detail::adaptive_simpson([](double y) { return std::exp(-y * y); }, -8.0, 8.0, 1e-12);
    // r = e^z flattens the r^{alpha-1} endpoint; integrand e^{alpha z - e^{2z}}
    const double zmin = -40.0 / alpha;
    const double radial = detail::adaptive_simpson(
        [alpha](double z) { return std::exp(alpha * z - std::exp(2.0 * z)); }, zmin, 3.0, 1e-12);
    return 1.0 / (gauss * radial);
}

/// integral of cos^{alpha-1} over (-pi/2, pi/2):
/// sqrt(pi) Gamma(alpha/2) / Gamma((alpha+1)/2).
inline double cos_power_integral(double alpha) {
    return std::sqrt(std::numbers::pi) * std::tgamma(alpha / 2.0) /
           std::tgamma((alpha + 1.0) / 2.0);
}

/// Radial model of the explicit drift b = -(d-1)(1-theta) x / |x|^2.
struct RadialModel {
    int d;
    double theta;
    double alpha;  // theta (d - 1)
    double c;      // kernel normalization
};

inline RadialModel make_radial_model(int d, double theta) {
    if (d < 2) throw std::invalid_argument("make_radial_model: d >= 2 required");
    if (!(theta > 0.0) || !(theta < 1.0))
        throw std::invalid_argument("make_radial_model: theta must lie in (0, 1)");
    const double alpha = theta * (d - 1);
    return RadialModel{d, theta, alpha, normalization_c(alpha)};
}

namespace detail {

// phi-integral of the radial kernel with the exponential factored:
// integral over (-pi/2, pi/2) of cos^{alpha-1}(phi) e^{-lam (1 - sin phi)}.
// For alpha < 1 each half uses s = (alpha w)^{1/alpha}, which turns
// sin^{alpha-1}(s) ds into an O(1) integrand; for alpha >= 1 the milder
// phi = +-(pi/2 - xi^2) substitution suffices.
inline double kernel_phi_integral(double alpha, double lam) {
    const double half_pi = 0.5 * std::numbers::pi;
    double total = 0.0;
    for (int sign = -1; sign <= 1; sign += 2) {
        double part;
        if (alpha < 1.0) {
            const double wmax = std::pow(half_pi, alpha) / alpha;
            part = adaptive_simpson(
                [alpha, lam, sign](double w) {
                    const double s = std::pow(alpha * w, 1.0 / alpha);
                    const double ratio = s < 1e-8 ? 1.0 : std::sin(s) / s;
                    return std::pow(ratio, alpha - 1.0) * std::exp(-lam * (1.0 - sign * std::cos(s)));
                },
                0.0, wmax, 1e-10);
        } else {
            const double ximax = std::sqrt(half_pi);
            part = adaptive_simpson(
                [alpha, lam, sign](double xi) {
                    const double s = xi * xi;
                    return 2.0 * xi * std::pow(std::sin(s), alpha - 1.0) *
                           std::exp(-lam * (1.0 - sign * std::cos(s)));
                },
                0.0, ximax, 1e-10);
        }
        total += part;
    }
    return total;
}

}  // namespace detail

/// Explicit radial kernel
/// p(t,x,r) = c t^{-(alpha+1)/2} r^alpha
///            int cos^{alpha-1}(phi) e^{-(x^2+r^2-2xr sin phi)/t} dphi.
inline double radial_kernel(const RadialModel& m, double t, double x, double r) {
    if (!(t > 0.0)) throw std::invalid_argument("radial_kernel: t must be positive");
    if (x < 0.0 || r < 0.0) throw std::invalid_argument("radial_kernel: x, r must be nonnegative");
    if (r == 0.0) return 0.0;
    const double gap = (x - r) * (x - r) / t;
    if (gap > 700.0) return 0.0;
    const double lam = 2.0 * x * r / t;
    const double pref =
        m.c * std::pow(t, -(m.alpha + 1.0) / 2.0) * std::pow(r, m.alpha) * std::exp(-gap);
    return pref * detail::kernel_phi_integral(m.alpha, lam);
}

/// u(t, x) samples on a uniform (t, |x|) rectangle [0,T] x [0,R].
struct RadialField {
    int n_t;
    int n_r;
    double T;
    double R;
    std::vector<double> v;  // (n_t+1) x (n_r+1), time-major

    double dt() const { return T / n_t; }
    double dr() const { return R / n_r; }
    double at(int i, int j) const {
        return v[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_r + 1) +
                 static_cast<std::size_t>(j)];
    }
    double& at(int i, int j) {
        return v[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_r + 1) +
                 static_cast<std::size_t>(j)];
    }
};

/// u(t,x) = int_0^{T-t} int_0^inf p(s, x, r) f(t+s, r) dr ds by tensor
/// midpoint quadrature. The s-step matches the output grid (so the kernel
/// table is shared across output times); the r-quadrature runs 4x finer
/// than the output grid so the kernel spike at the smallest s-node stays
/// resolved (midpoint sums of Gaussians are spectrally accurate once the
/// width exceeds the spacing).
inline RadialField radial_solution(const RadialModel& m,
                                   const std::function<double(double, double)>& f, double T,
                                   double R, int n_t, int n_r) {
    if (n_t < 4 || n_r < 4) throw std::invalid_argument("radial_solution: n_t, n_r >= 4 required");
    RadialField u{n_t, n_r, T, R,
                  std::vector<double>(static_cast<std::size_t>(n_t + 1) *
                                      static_cast<std::size_t>(n_r + 1), 0.0)};
    const double ds = u.dt();
    const int n_s = n_t;
    const int n_q = 4 * n_r;
    const double dq = R / n_q;

    std::vector<double> table(static_cast<std::size_t>(n_s) * static_cast<std::size_t>(n_r + 1) *
                              static_cast<std::size_t>(n_q));
    for (int k = 0; k < n_s; ++k) {
        const double s = (k + 0.5) * ds;
        for (int j = 0; j <= n_r; ++j) {
            const double x = j * u.dr();
            for (int l = 0; l < n_q; ++l)
                table[(static_cast<std::size_t>(k) * static_cast<std::size_t>(n_r + 1) +
                       static_cast<std::size_t>(j)) * static_cast<std::size_t>(n_q) +
                      static_cast<std::size_t>(l)] = radial_kernel(m, s, x, (l + 0.5) * dq);
        }
    }
    // f at (i + k + 1/2) dt, shared across x
    std::vector<double> ftab(static_cast<std::size_t>(2 * n_t) * static_cast<std::size_t>(n_q));
    for (int mth = 0; mth < 2 * n_t; ++mth)
        for (int l = 0; l < n_q; ++l)
            ftab[static_cast<std::size_t>(mth) * static_cast<std::size_t>(n_q) +
                 static_cast<std::size_t>(l)] = f((mth + 0.5) * ds, (l + 0.5) * dq);

    for (int i = 0; i <= n_t; ++i) {
        const int k_max = n_t - i;  // s_k = (k+1/2) ds < T - t_i
        for (int j = 0; j <= n_r; ++j) {
            double acc = 0.0;
            for (int k = 0; k < k_max; ++k) {
                const double* pk = table.data() +
                                   (static_cast<std::size_t>(k) * static_cast<std::size_t>(n_r + 1) +
                                    static_cast<std::size_t>(j)) * static_cast<std::size_t>(n_q);
                const double* fk = ftab.data() +
                                   static_cast<std::size_t>(i + k) * static_cast<std::size_t>(n_q);
                for (int l = 0; l < n_q; ++l) acc += pk[l] * fk[l];
            }
            u.at(i, j) = acc * ds * dq;
        }
    }
    return u;
}

struct ResidualReport {
    double sup_residual = 0.0;
    double exclusion_radius = 0.0;
};

/// Sup-norm of the residual of 4 du/dt + u_xx + alpha u_x / x + 4 g = 0
/// over interior probe nodes with x >= 4 dr. On radial functions
/// Lap u + b.Du collapses to u_xx + alpha u_x / x; the kernel's diffusion
/// coefficient is 1/4, which puts the factor 4 on the source as well.
inline ResidualReport residual_check(const RadialModel& m,
                                     const std::function<double(double, double)>& f, double T,
                                     double R, int n) {
    const RadialField u = radial_solution(m, f, T, R, n, n);
    const double dt = u.dt();
    const double dr = u.dr();
    ResidualReport rep;
    rep.exclusion_radius = 4.0 * dr;
    for (int i = 1; i < n; ++i)
        for (int j = 4; j < n; ++j) {
            const double x = j * dr;
            const double ut = (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * dt);
            const double uxx = (u.at(i, j + 1) - 2.0 * u.at(i, j) + u.at(i, j - 1)) / (dr * dr);
            const double ux = (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * dr);
            const double res = 4.0 * ut + uxx + m.alpha * ux / x + 4.0 * f(i * dt, x);
            rep.sup_residual = std::max(rep.sup_residual, std::abs(res));
        }
    return rep;
}

/// Finiteness and scaling exponent of the dual r-integral in the blow-up
/// estimate: finite iff p > d/(alpha+1), with
/// e = -p'(alpha+1)/2 + (alpha p' - (d-1)/(p-1) + 1)/2.
struct ExponentE {
    bool finite = false;
    double e = 0.0;
};

inline ExponentE exponent_e(double p, double alpha, int d) {
    if (!(p > 1.0)) throw std::invalid_argument("exponent_e: p > 1 required");
    const double pp = p / (p - 1.0);
    ExponentE out;
    out.finite = p > static_cast<double>(d) / (alpha + 1.0);
    out.e = -pp * (alpha + 1.0) / 2.0 + (alpha * pp - (d - 1.0) / (p - 1.0) + 1.0) / 2.0;
    return out;
}

/// q with 2/q = 2 - margin - d/p, the largest time exponent keeping
/// (q, p) strictly subcritical with the stated margin.
inline double choose_blowup_q(double p, int d, double margin = 0.05) {
    const double inv2q = 2.0 - margin - static_cast<double>(d) / p;
    if (!(inv2q > 0.0)) throw std::invalid_argument("choose_blowup_q: no admissible q");
    return 2.0 / inv2q;
}

/// gamma_n = d/p - eps0 (n_first / n)^4: the singularity strength creeps
/// up to the critical d/p as n grows, which is what drives the blow-up.
inline std::vector<double> make_blowup_gammas(double p, int d, const std::vector<int>& n_list,
                                              double eps0 = 0.3) {
    if (n_list.empty()) throw std::invalid_argument("make_blowup_gammas: empty n_list");
    std::vector<double> out;
    out.reserve(n_list.size());
    const double n1 = static_cast<double>(n_list.front());
    for (int n : n_list) {
        const double eps = eps0 * std::pow(n1 / static_cast<double>(n), 4.0);
        out.push_back(static_cast<double>(d) / p - eps);
    }
    return out;
}

struct BlowupPoint {
    int n = 0;
    double gamma = 0.0;
    double u00 = 0.0;
    double norm = 0.0;
    double ratio = 0.0;
};

/// Ratio sequence |u_n(0,0)| / ||g_n||_{L_{q,p}} for the family
/// f_n(s,r) = I_{s<1/n^2} I_{r<1/n} r^{-gamma_n}. At x = 0 the kernel
/// separates and u_n(0,0) reduces to a 1-D incomplete-gamma integral:
/// u_n(0,0) = (c C_alpha / 2) n^{gamma-2} K(gamma),
/// K = Gamma(m) * 2/(2-gamma) - int_0^1 s^{-gamma/2} Gamma(m, 1/s) ds,
/// m = (alpha - gamma + 1)/2. The norm has the closed form
/// n^{-2/q} (S_{d-1} n^{-(d-gamma p)} / (d - gamma p))^{1/p}.
inline std::vector<BlowupPoint> blowup_scan(const RadialModel& m, double q, double p,
                                            const std::vector<int>& n_list,
                                            const std::vector<double>& gamma_list) {
    if (n_list.size() != gamma_list.size())
        throw std::invalid_argument("blowup_scan: n_list / gamma_list size mismatch");
    const double calpha = cos_power_integral(m.alpha);
    const double sphere = 2.0 * std::pow(std::numbers::pi, m.d / 2.0) / std::tgamma(m.d / 2.0);
    std::vector<BlowupPoint> out;
    out.reserve(n_list.size());
    for (std::size_t idx = 0; idx < n_list.size(); ++idx) {
        const int n = n_list[idx];
        const double gamma = gamma_list[idx];
        if (!(gamma < 2.0) || !(gamma * p < static_cast<double>(m.d)) ||
            !(gamma < m.alpha + 1.0))
            throw std::invalid_argument("blowup_scan: gamma out of range for convergence");
        const double mm = (m.alpha - gamma + 1.0) / 2.0;
        const double gm = std::tgamma(mm);
        const double tail = detail::adaptive_simpson(
            [gamma, mm](double s) {
                if (s <= 0.0) return 0.0;
                return std::pow(s, -gamma / 2.0) * detail::gamma_upper_cf(mm, 1.0 / s);
            },
            0.0, 1.0, 1e-12);
        const double K = gm * 2.0 / (2.0 - gamma) - tail;
        const double u00 = 0.5 * m.c * calpha * std::pow(static_cast<double>(n), gamma - 2.0) * K;
        const double dpg = static_cast<double>(m.d) - gamma * p;
        const double norm = std::pow(static_cast<double>(n), -2.0 / q) *
                            std::pow(sphere * std::pow(static_cast<double>(n), -dpg) / dpg, 1.0 / p);
        BlowupPoint pt{n, gamma, u00, norm, 0.0};
        pt.ratio = norm > 0.0 ? u00 / norm : 0.0;
        out.push_back(pt);
    }
    return out;
}

/// Closed form of int_0^1 ||x|-t|^{-2q/d} dt at |x| = r in (0,1).
inline double aniso_time_integral(double r, double q, int d) {
    const double a = 2.0 * q / d;
    return (std::pow(r, 1.0 - a) + std::pow(1.0 - r, 1.0 - a)) / (1.0 - a);
}

struct AnisotropicResult {
    std::vector<double> h;
    std::vector<double> slice_power;   // h Sum r^{d-1} |r - t*|^{-2p/d} at t* = 1/2
    std::vector<double> swapped_norm;  // sL_{p,q} norm at resolution h
    double fitted_exponent = 0.0;      // of the slice-power divergence, ~ 2p/d - 1
    double expected_exponent = 0.0;
    double cauchy_rel = 0.0;           // swapped-norm change between the two finest grids
};

/// Remark-style anisotropy of f(t,x) = I_{|x|<=1, 0<t<1} ||x|-t|^{-2/d}:
/// the spatial L_p slice power diverges like h^{-(2p/d-1)} while the
/// space-outer sL_{p,q} norm converges. h_list must be decreasing with
/// successive halvings (the divergence fit uses S(h) - S(2h)).
inline AnisotropicResult anisotropic_example(int d, double p, double q,
                                             const std::vector<double>& h_list) {
    if (d < 3) throw std::invalid_argument("anisotropic_example: d >= 3 required");
    if (!(p > d / 2.0)) throw std::invalid_argument("anisotropic_example: p > d/2 required");
    if (!(q > 1.0) || !(q < d / 2.0))
        throw std::invalid_argument("anisotropic_example: q must lie in (1, d/2)");
    if (h_list.size() < 3) throw std::invalid_argument("anisotropic_example: need >= 3 grids");

    const double sphere = 2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0);
    const double t_star = 0.5;
    const double a_space = 2.0 * p / d;

    auto slice_sum = [&](double h) {
        const int nn = static_cast<int>(std::llround(1.0 / h));
        double acc = 0.0;
        for (int j = 0; j < nn; ++j) {
            const double r = (j + 0.5) * h;
            acc += std::pow(r, d - 1.0) * std::pow(std::abs(r - t_star), -a_space);
        }
        return sphere * acc * h;
    };
    auto swapped = [&](double h) {
        const int nn = static_cast<int>(std::llround(1.0 / h));
        double acc = 0.0;
        for (int j = 0; j < nn; ++j) {
            const double r = (j + 0.5) * h;
            acc += std::pow(r, d - 1.0) * std::pow(aniso_time_integral(r, q, d), p / q);
        }
        return std::pow(sphere * acc * h, 1.0 / p);
    };

    AnisotropicResult out;
    out.expected_exponent = a_space - 1.0;
    for (double h : h_list) {
        out.h.push_back(h);
        out.slice_power.push_back(slice_sum(h));
        out.swapped_norm.push_back(swapped(h));
    }
    // fit log(S(h) - S(2h)) ~ -(2p/d - 1) log h on successive halvings
    std::vector<double> lx, ly;
    for (std::size_t i = 1; i < h_list.size(); ++i) {
        const double diff = out.slice_power[i] - out.slice_power[i - 1];
        if (diff > 0.0) {
            lx.push_back(std::log(h_list[i]));
            ly.push_back(std::log(diff));
        }
    }
    if (lx.size() < 2) throw std::runtime_error("anisotropic_example: degenerate divergence fit");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    out.fitted_exponent = -num / den;
    const std::size_t last = out.swapped_norm.size() - 1;
    out.cauchy_rel = std::abs(out.swapped_norm[last] - out.swapped_norm[last - 1]) /
                     out.swapped_norm[last];
    return out;
}

}  // namespace heatlab
