#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "grid.hpp"
#include "morrey.hpp"
#include "norms.hpp"
#include "rng.hpp"

namespace heatlab {

struct McSettings {
    std::int64_t n_paths = 10000;
    double dt_mc = 1e-3;
    std::uint64_t seed = 1;
};

namespace detail {

// Fixed-tree pairwise sum: result independent of evaluation order, so
// parallel reductions stay bit-reproducible.
inline double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

inline double mean_of(const std::vector<double>& v) {
    return pairwise_sum(v.data(), v.size()) / static_cast<double>(v.size());
}

inline double se_of(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - mean) * (v[i] - mean);
    const double var = pairwise_sum(dev.data(), dev.size()) / static_cast<double>(v.size() - 1);
    return std::sqrt(var / static_cast<double>(v.size()));
}

// Multilinear spatial interpolation on one time slice, clamped to the box.
inline double interp_slice(const ScalarField& f, int it, const std::array<double, 3>& x) {
    const Grid& g = f.grid();
    const int n1 = g.nodes_per_axis();
    std::array<int, 3> i0{0, 0, 0};
    std::array<double, 3> w{0.0, 0.0, 0.0};
    for (int a = 0; a < g.d(); ++a) {
        double u = (x[static_cast<std::size_t>(a)] + g.L()) / g.h();
        u = std::clamp(u, 0.0, static_cast<double>(n1 - 1));
        int i = static_cast<int>(u);
        if (i > n1 - 2) i = n1 - 2;
        i0[static_cast<std::size_t>(a)] = i;
        w[static_cast<std::size_t>(a)] = u - i;
    }
    const double* s = f.slice(it);
    double acc = 0.0;
    const int corners = 1 << g.d();
    for (int c = 0; c < corners; ++c) {
        double wt = 1.0;
        std::array<int, 3> idx = i0;
        for (int a = 0; a < g.d(); ++a) {
            if (c & (1 << a)) {
                idx[static_cast<std::size_t>(a)] += 1;
                wt *= w[static_cast<std::size_t>(a)];
            } else {
                wt *= 1.0 - w[static_cast<std::size_t>(a)];
            }
        }
        acc += wt * s[g.flatten(idx)];
    }
    return acc;
}

inline int nearest_slice(const Grid& g, double t) {
    const int it = static_cast<int>(std::llround(t / g.dt()));
    return std::clamp(it, 0, g.n_t());
}

inline double field_at(const ScalarField& f, double t, const std::array<double, 3>& x) {
    return interp_slice(f, nearest_slice(f.grid(), t), x);
}

inline std::array<double, 3> drift_at(const VectorField& b, double t, const std::array<double, 3>& x) {
    const int it = nearest_slice(b.grid(), t);
    std::array<double, 3> v{0.0, 0.0, 0.0};
    for (int c = 0; c < b.grid().d(); ++c) v[static_cast<std::size_t>(c)] = interp_slice(b.comp(c), it, x);
    return v;
}

// Up to three standard normals for (seed, path, step); two Philox blocks.
inline std::array<double, 3> step_normals(std::uint64_t seed, std::int64_t path, int step, int d) {
    const auto a = counter_normals(seed, static_cast<std::uint64_t>(path), static_cast<std::uint32_t>(step), 0);
    if (d <= 2) return {a[0], a[1], 0.0};
    const auto b = counter_normals(seed, static_cast<std::uint64_t>(path), static_cast<std::uint32_t>(step), 1);
    return {a[0], a[1], b[0]};
}

}  // namespace detail

/// Euler-Maruyama ensemble dx = b dt + sqrt(2) dW started at (t0, x0),
/// run to the grid horizon T. Positions and standard Brownian increments
/// are stored per path; everything is a pure function of the seed.
struct PathEnsemble {
    int d = 1;
    std::int64_t n_paths = 0;
    int n_steps = 0;
    double dt = 0.0;  // actual step, horizon / n_steps
    double t0 = 0.0;
    std::array<double, 3> x0{0.0, 0.0, 0.0};
    std::uint64_t seed = 0;
    double exit_fraction = 0.0;  // paths that ever left the box
    bool drift_overshoot = false;
    std::vector<double> xs;  // [path][0..n_steps][comp]
    std::vector<double> dw;  // [path][0..n_steps-1][comp]

    double pos(std::int64_t p, int k, int c) const {
        return xs[(static_cast<std::size_t>(p) * static_cast<std::size_t>(n_steps + 1) +
                   static_cast<std::size_t>(k)) * static_cast<std::size_t>(d) + static_cast<std::size_t>(c)];
    }
    double inc(std::int64_t p, int k, int c) const {
        return dw[(static_cast<std::size_t>(p) * static_cast<std::size_t>(n_steps) +
                   static_cast<std::size_t>(k)) * static_cast<std::size_t>(d) + static_cast<std::size_t>(c)];
    }
    double path_time(int k) const { return t0 + k * dt; }
};

namespace detail {

inline PathEnsemble run_paths(const VectorField* b, const Grid& g, double t0,
                              const std::array<double, 3>& x0, const McSettings& mc) {
    if (mc.n_paths < 2) throw std::invalid_argument("simulate: n_paths >= 2 required");
    if (!(mc.dt_mc > 0.0)) throw std::invalid_argument("simulate: dt_mc must be positive");
    const double horizon = g.T() - t0;
    if (!(horizon > 0.0)) throw std::invalid_argument("simulate: start time must precede T");

    PathEnsemble ens;
    ens.d = g.d();
    ens.n_paths = mc.n_paths;
    ens.n_steps = std::max(1, static_cast<int>(std::llround(horizon / mc.dt_mc)));
    ens.dt = horizon / ens.n_steps;
    ens.t0 = t0;
    ens.x0 = x0;
    ens.seed = mc.seed;

    if (b != nullptr) {
        double bmax = 0.0;
        for (int it = 0; it <= g.n_t(); ++it)
            for (std::size_t is = 0; is < g.space_size(); ++is)
                bmax = std::max(bmax, b->magnitude(it, is));
        ens.drift_overshoot = ens.dt * bmax > 0.5 * g.h();
    }

    const std::size_t per_path_x = static_cast<std::size_t>(ens.n_steps + 1) * static_cast<std::size_t>(ens.d);
    const std::size_t per_path_w = static_cast<std::size_t>(ens.n_steps) * static_cast<std::size_t>(ens.d);
    ens.xs.resize(static_cast<std::size_t>(ens.n_paths) * per_path_x);
    ens.dw.resize(static_cast<std::size_t>(ens.n_paths) * per_path_w);

    const double root_dt = std::sqrt(ens.dt);
    std::int64_t exited = 0;
    for (std::int64_t p = 0; p < ens.n_paths; ++p) {
        double* x = ens.xs.data() + static_cast<std::size_t>(p) * per_path_x;
        double* w = ens.dw.data() + static_cast<std::size_t>(p) * per_path_w;
        std::array<double, 3> cur = x0;
        for (int c = 0; c < ens.d; ++c) x[c] = cur[static_cast<std::size_t>(c)];
        bool left = false;
        for (int k = 0; k < ens.n_steps; ++k) {
            const auto z = step_normals(ens.seed, p, k, ens.d);
            std::array<double, 3> bv{0.0, 0.0, 0.0};
            if (b != nullptr) bv = drift_at(*b, ens.path_time(k), cur);
            for (int c = 0; c < ens.d; ++c) {
                const double dwc = root_dt * z[static_cast<std::size_t>(c)];
                w[static_cast<std::size_t>(k) * ens.d + c] = dwc;
                cur[static_cast<std::size_t>(c)] +=
                    bv[static_cast<std::size_t>(c)] * ens.dt + std::numbers::sqrt2 * dwc;
                x[static_cast<std::size_t>(k + 1) * ens.d + c] = cur[static_cast<std::size_t>(c)];
                if (std::abs(cur[static_cast<std::size_t>(c)]) > g.L()) left = true;
            }
        }
        if (left) ++exited;
    }
    ens.exit_fraction = static_cast<double>(exited) / static_cast<double>(ens.n_paths);
    return ens;
}

}  // namespace detail

inline PathEnsemble simulate(const VectorField& b, double t0, const std::array<double, 3>& x0,
                             const McSettings& mc) {
    return detail::run_paths(&b, b.grid(), t0, x0, mc);
}

inline PathEnsemble simulate_driftless(const Grid& g, double t0, const std::array<double, 3>& x0,
                                       const McSettings& mc) {
    return detail::run_paths(nullptr, g, t0, x0, mc);
}

/// Per-path Ito weight 2^{-1/2} sum v.dW - (1/4) sum |v|^2 dt for a vector
/// field v evaluated along the stored paths (left-point rule). With v = b
/// this is the Girsanov exponent phi; with v = B_part it is psi.
inline std::vector<double> ito_weight(const PathEnsemble& ens, const VectorField& v) {
    std::vector<double> out(static_cast<std::size_t>(ens.n_paths));
    for (std::int64_t p = 0; p < ens.n_paths; ++p) {
        double stoch = 0.0, quad = 0.0;
        for (int k = 0; k < ens.n_steps; ++k) {
            std::array<double, 3> x{0.0, 0.0, 0.0};
            for (int c = 0; c < ens.d; ++c) x[static_cast<std::size_t>(c)] = ens.pos(p, k, c);
            const auto bv = detail::drift_at(v, ens.path_time(k), x);
            for (int c = 0; c < ens.d; ++c) {
                stoch += bv[static_cast<std::size_t>(c)] * ens.inc(p, k, c);
                quad += bv[static_cast<std::size_t>(c)] * bv[static_cast<std::size_t>(c)];
            }
        }
        out[static_cast<std::size_t>(p)] = stoch / std::numbers::sqrt2 - 0.25 * quad * ens.dt;
    }
    return out;
}

inline std::vector<double> girsanov_phi(const PathEnsemble& ens, const VectorField& b) {
    return ito_weight(ens, b);
}

/// Per-path left-point integral of f along the stored paths.
inline std::vector<double> integral_f(const PathEnsemble& ens, const ScalarField& f) {
    std::vector<double> out(static_cast<std::size_t>(ens.n_paths));
    for (std::int64_t p = 0; p < ens.n_paths; ++p) {
        double acc = 0.0;
        for (int k = 0; k < ens.n_steps; ++k) {
            std::array<double, 3> x{0.0, 0.0, 0.0};
            for (int c = 0; c < ens.d; ++c) x[static_cast<std::size_t>(c)] = ens.pos(p, k, c);
            acc += detail::field_at(f, ens.path_time(k), x);
        }
        out[static_cast<std::size_t>(p)] = acc * ens.dt;
    }
    return out;
}

struct MomentCheck {
    double estimate = 0.0;
    double se = 0.0;
    double bound = 0.0;
    bool within() const { return estimate <= bound * (1.0 + 3.0 * se / std::max(estimate, 1e-300)); }
};

/// MC estimate of E e^{lambda phi} for the Morrey part against the
/// analytic exponential-moment bound e^{lambda^2 [B]^2 / 4}.
inline MomentCheck exp_moment_check(const VectorField& B_part, double lambda, double t0,
                                    const std::array<double, 3>& x0, const McSettings& mc) {
    const PathEnsemble ens = simulate_driftless(B_part.grid(), t0, x0, mc);
    const std::vector<double> phi = ito_weight(ens, B_part);
    std::vector<double> ew(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) ew[i] = std::exp(lambda * phi[i]);
    MomentCheck out;
    out.estimate = detail::mean_of(ew);
    out.se = detail::se_of(ew, out.estimate);
    out.bound = std::exp(lambda * lambda * bracket_squared(B_part) / 4.0);
    return out;
}

struct McEstimate {
    double value = 0.0;
    double se = 0.0;
};

enum class FkEstimator { Drifted, WeightedDriftless };

/// Feynman-Kac value u(t0, x0) = E int_0^{T-t0} f(t0+s, x_s) ds, either on
/// drifted paths directly or via Girsanov-weighted driftless paths.
inline McEstimate feynman_kac(const VectorField& b, const ScalarField& f, double t0,
                              const std::array<double, 3>& x0, const McSettings& mc,
                              FkEstimator kind = FkEstimator::Drifted) {
    std::vector<double> samples;
    if (kind == FkEstimator::Drifted) {
        const PathEnsemble ens = simulate(b, t0, x0, mc);
        samples = integral_f(ens, f);
    } else {
        const PathEnsemble ens = simulate_driftless(f.grid(), t0, x0, mc);
        const std::vector<double> phi = ito_weight(ens, b);
        samples = integral_f(ens, f);
        for (std::size_t i = 0; i < samples.size(); ++i) samples[i] *= std::exp(phi[i]);
    }
    McEstimate out;
    out.value = detail::mean_of(samples);
    out.se = detail::se_of(samples, out.value);
    return out;
}

struct PerturbedValue {
    double value = 0.0;
    double se = 0.0;
    double certified_bound = 0.0;
    bool within() const {
        return std::abs(value) <= certified_bound * (1.0 + 3.0 * se / std::max(std::abs(value), 1e-300));
    }
};

/// Value of the B-perturbed problem at (t0, x0) via e^{psi}-weighted paths
/// of the b-diffusion, with the certified maximum-modulus bound
/// sqrt(2) e^{[B]^2/2} N0 T^{1 - d/(2p) - 1/q} ||f||_{q,p}.
inline PerturbedValue perturbed_value(const VectorField& b, const VectorField& B_part,
                                      const ScalarField& f, double t0,
                                      const std::array<double, 3>& x0, const McSettings& mc,
                                      double N0, double q, double p) {
    const Grid& g = f.grid();
    const PathEnsemble ens = simulate(b, t0, x0, mc);
    const std::vector<double> psi = ito_weight(ens, B_part);
    std::vector<double> samples = integral_f(ens, f);
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] *= std::exp(psi[i]);
    PerturbedValue out;
    out.value = detail::mean_of(samples);
    out.se = detail::se_of(samples, out.value);
    const double horizon = g.T() - t0;
    const double tpow = std::pow(horizon, 1.0 - g.d() / (2.0 * p) - 1.0 / q);
    const double fnorm = mixed_norm(f, MixedNormSpec{q, p, NormOrder::TimeOuter});
    out.certified_bound =
        std::numbers::sqrt2 * std::exp(bracket_squared(B_part) / 2.0) * N0 * tpow * fnorm;
    return out;
}

struct SecondMoment {
    double lhs = 0.0;
    double lhs_se = 0.0;
    double rhs = 0.0;
    double rhs_se = 0.0;
};

/// Identity E(int f ds)^2 = 2 E int f(s, x_s) u(s, x_s) ds with u from the
/// finite-difference solver on the same data; paths start at (0, 0).
inline SecondMoment second_moment_check(const VectorField& b, const ScalarField& f,
                                        const ScalarField& u, const McSettings& mc) {
    const PathEnsemble ens = simulate(b, 0.0, {0.0, 0.0, 0.0}, mc);
    const std::vector<double> fi = integral_f(ens, f);
    std::vector<double> sq(fi.size());
    for (std::size_t i = 0; i < fi.size(); ++i) sq[i] = fi[i] * fi[i];

    std::vector<double> fu(static_cast<std::size_t>(ens.n_paths));
    for (std::int64_t p = 0; p < ens.n_paths; ++p) {
        double acc = 0.0;
        for (int k = 0; k < ens.n_steps; ++k) {
            std::array<double, 3> x{0.0, 0.0, 0.0};
            for (int c = 0; c < ens.d; ++c) x[static_cast<std::size_t>(c)] = ens.pos(p, k, c);
            const double t = ens.path_time(k);
            acc += detail::field_at(f, t, x) * detail::field_at(u, t, x);
        }
        fu[static_cast<std::size_t>(p)] = 2.0 * acc * ens.dt;
    }
    SecondMoment out;
    out.lhs = detail::mean_of(sq);
    out.lhs_se = detail::se_of(sq, out.lhs);
    out.rhs = detail::mean_of(fu);
    out.rhs_se = detail::se_of(fu, out.rhs);
    return out;
}

}  // namespace heatlab
