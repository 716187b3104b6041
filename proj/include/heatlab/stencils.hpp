#pragma once

#include "grid.hpp"

namespace heatlab {

namespace detail {

// Second-order first derivative along one spatial axis: centered in the
// interior, one-sided three-point at the axis ends (exact on quadratics).
inline void deriv_axis(const Grid& g, const double* in, double* out, int axis) {
    const int n1 = g.nodes_per_axis();
    const double h = g.h();
    // stride of the axis in the flat spatial index
    std::size_t stride = 1;
    for (int a = g.d() - 1; a > axis; --a) stride *= static_cast<std::size_t>(n1);

    const std::size_t ns = g.space_size();
    for (std::size_t is = 0; is < ns; ++is) {
        const int i = g.unflatten(is)[static_cast<std::size_t>(axis)];
        if (i == 0)
            out[is] = (-3.0 * in[is] + 4.0 * in[is + stride] - in[is + 2 * stride]) / (2.0 * h);
        else if (i == n1 - 1)
            out[is] = (3.0 * in[is] - 4.0 * in[is - stride] + in[is - 2 * stride]) / (2.0 * h);
        else
            out[is] = (in[is + stride] - in[is - stride]) / (2.0 * h);
    }
}

}  // namespace detail

/// Spatial gradient Du = (D_i u), second-order stencils.
inline VectorField gradient(const ScalarField& f) {
    const Grid& g = f.grid();
    if (g.nodes_per_axis() < 3) throw std::invalid_argument("gradient: n_x >= 3 nodes required");
    VectorField out(g);
    for (int it = 0; it <= g.n_t(); ++it)
        for (int a = 0; a < g.d(); ++a)
            detail::deriv_axis(g, f.slice(it), out.comp(a).slice(it), a);
    return out;
}

/// Divergence of a vector field with the same stencils as gradient.
inline ScalarField divergence(const VectorField& v) {
    const Grid& g = v.grid();
    ScalarField out(g);
    std::vector<double> tmp(g.space_size());
    for (int it = 0; it <= g.n_t(); ++it) {
        double* o = out.slice(it);
        for (int a = 0; a < g.d(); ++a) {
            detail::deriv_axis(g, v.comp(a).slice(it), tmp.data(), a);
            for (std::size_t is = 0; is < g.space_size(); ++is) o[is] += tmp[is];
        }
    }
    return out;
}

/// Discrete Laplacian, defined as divergence(gradient(f)) so the two
/// operators close exactly in discrete arithmetic. Exact on quadratics.
inline ScalarField laplacian(const ScalarField& f) { return divergence(gradient(f)); }

/// Time derivative: centered in the interior, one-sided three-point ends.
inline ScalarField time_derivative(const ScalarField& f) {
    const Grid& g = f.grid();
    if (g.time_slices() < 3) throw std::invalid_argument("time_derivative: n_t >= 3 slices required");
    ScalarField out(g);
    const double dt = g.dt();
    const int nt = g.n_t();
    for (std::size_t is = 0; is < g.space_size(); ++is) {
        out.at(0, is) = (-3.0 * f.at(0, is) + 4.0 * f.at(1, is) - f.at(2, is)) / (2.0 * dt);
        out.at(nt, is) = (3.0 * f.at(nt, is) - 4.0 * f.at(nt - 1, is) + f.at(nt - 2, is)) / (2.0 * dt);
        for (int it = 1; it < nt; ++it)
            out.at(it, is) = (f.at(it + 1, is) - f.at(it - 1, is)) / (2.0 * dt);
    }
    return out;
}

}  // namespace heatlab
