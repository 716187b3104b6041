#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace heatlab {

/// Uniform space-time grid on [0,T] x [-L,L]^d.
///
/// Spatial axes carry n_x intervals (n_x+1 nodes), time carries n_t
/// intervals (n_t+1 slices). All fields in the library live on such a
/// grid and are immutable after construction.
class Grid {
  public:
    Grid(int d, double L, int n_x, double T, int n_t)
        : d_(d), L_(L), n_x_(n_x), T_(T), n_t_(n_t) {
        if (d < 1 || d > 3) throw std::invalid_argument("Grid: d must be 1, 2 or 3");
        if (!(L > 0.0) || !(T > 0.0)) throw std::invalid_argument("Grid: L, T must be positive");
        if (n_x < 8) throw std::invalid_argument("Grid: n_x >= 8 required");
        if (n_t < 8) throw std::invalid_argument("Grid: n_t >= 8 required");
        h_ = 2.0 * L / n_x;
        dt_ = T / n_t;
        n_space_ = 1;
        for (int a = 0; a < d; ++a) n_space_ *= static_cast<std::size_t>(n_x + 1);
    }

    int d() const { return d_; }
    double L() const { return L_; }
    int n_x() const { return n_x_; }
    double T() const { return T_; }
    int n_t() const { return n_t_; }
    double h() const { return h_; }
    double dt() const { return dt_; }

    int nodes_per_axis() const { return n_x_ + 1; }
    int time_slices() const { return n_t_ + 1; }
    std::size_t space_size() const { return n_space_; }
    std::size_t total_size() const { return n_space_ * static_cast<std::size_t>(n_t_ + 1); }

    double coord(int i) const { return -L_ + i * h_; }
    double time(int it) const { return it * dt_; }

    /// Decompose a flat spatial index into per-axis node indices.
    std::array<int, 3> unflatten(std::size_t is) const {
        std::array<int, 3> idx{0, 0, 0};
        const std::size_t n1 = static_cast<std::size_t>(n_x_ + 1);
        for (int a = d_ - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(is % n1);
            is /= n1;
        }
        return idx;
    }

    std::size_t flatten(const std::array<int, 3>& idx) const {
        const std::size_t n1 = static_cast<std::size_t>(n_x_ + 1);
        std::size_t is = 0;
        for (int a = 0; a < d_; ++a) is = is * n1 + static_cast<std::size_t>(idx[a]);
        return is;
    }

    std::array<double, 3> point(std::size_t is) const {
        auto idx = unflatten(is);
        std::array<double, 3> x{0, 0, 0};
        for (int a = 0; a < d_; ++a) x[a] = coord(idx[a]);
        return x;
    }

    /// Trapezoid weight of a time slice.
    double time_weight(int it) const {
        return (it == 0 || it == n_t_) ? 0.5 * dt_ : dt_;
    }

    /// Trapezoid weight of a spatial node (tensor product over axes).
    double space_weight(std::size_t is) const {
        auto idx = unflatten(is);
        double w = 1.0;
        for (int a = 0; a < d_; ++a)
            w *= (idx[a] == 0 || idx[a] == n_x_) ? 0.5 * h_ : h_;
        return w;
    }

    bool same_shape(const Grid& o) const {
        return d_ == o.d_ && n_x_ == o.n_x_ && n_t_ == o.n_t_ &&
               L_ == o.L_ && T_ == o.T_;
    }

  private:
    int d_;
    double L_;
    int n_x_;
    double T_;
    int n_t_;
    double h_;
    double dt_;
    std::size_t n_space_;
};

/// Real-valued function sampled on a grid's space-time nodes.
class ScalarField {
  public:
    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid_(g), values_(g.total_size(), fill) {}

    ScalarField(const Grid& g, std::vector<double> v) : grid_(g), values_(std::move(v)) {
        if (values_.size() != g.total_size())
            throw std::invalid_argument("ScalarField: value array shape mismatch");
    }

    static ScalarField sample(const Grid& g,
                              const std::function<double(double, const std::array<double, 3>&)>& fn) {
        ScalarField f(g);
        for (int it = 0; it <= g.n_t(); ++it) {
            const double t = g.time(it);
            for (std::size_t is = 0; is < g.space_size(); ++is)
                f.at(it, is) = fn(t, g.point(is));
        }
        return f;
    }

    const Grid& grid() const { return grid_; }
    double& at(int it, std::size_t is) { return values_[static_cast<std::size_t>(it) * grid_.space_size() + is]; }
    double at(int it, std::size_t is) const { return values_[static_cast<std::size_t>(it) * grid_.space_size() + is]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    const double* slice(int it) const { return values_.data() + static_cast<std::size_t>(it) * grid_.space_size(); }
    double* slice(int it) { return values_.data() + static_cast<std::size_t>(it) * grid_.space_size(); }

    bool compact_support() const { return compact_support_; }

    /// Declare (and verify) that a boundary band of `band` nodes is zero.
    void declare_compact_support(int band) {
        for (int it = 0; it <= grid_.n_t(); ++it)
            for (std::size_t is = 0; is < grid_.space_size(); ++is) {
                auto idx = grid_.unflatten(is);
                bool in_band = false;
                for (int a = 0; a < grid_.d(); ++a)
                    if (idx[a] < band || idx[a] > grid_.n_x() - band) in_band = true;
                if (in_band && at(it, is) != 0.0)
                    throw std::invalid_argument("ScalarField: nonzero value in declared boundary band");
            }
        compact_support_ = true;
        support_band_ = band;
    }

    int support_band() const { return support_band_; }

  private:
    Grid grid_;
    std::vector<double> values_;
    bool compact_support_ = false;
    int support_band_ = 0;
};

/// d-component vector field on a grid.
class VectorField {
  public:
    explicit VectorField(const Grid& g, double fill = 0.0) : grid_(g) {
        comps_.reserve(g.d());
        for (int c = 0; c < g.d(); ++c) comps_.emplace_back(g, fill);
    }

    static VectorField sample(const Grid& g,
                              const std::function<std::array<double, 3>(double, const std::array<double, 3>&)>& fn) {
        VectorField b(g);
        for (int it = 0; it <= g.n_t(); ++it) {
            const double t = g.time(it);
            for (std::size_t is = 0; is < g.space_size(); ++is) {
                auto v = fn(t, g.point(is));
                for (int c = 0; c < g.d(); ++c) b.comp(c).at(it, is) = v[c];
            }
        }
        return b;
    }

    const Grid& grid() const { return grid_; }
    ScalarField& comp(int c) { return comps_[static_cast<std::size_t>(c)]; }
    const ScalarField& comp(int c) const { return comps_[static_cast<std::size_t>(c)]; }

    double magnitude(int it, std::size_t is) const {
        double s = 0.0;
        for (int c = 0; c < grid_.d(); ++c) {
            const double v = comps_[static_cast<std::size_t>(c)].at(it, is);
            s += v * v;
        }
        return std::sqrt(s);
    }

    ScalarField magnitude_field() const {
        ScalarField m(grid_);
        for (int it = 0; it <= grid_.n_t(); ++it)
            for (std::size_t is = 0; is < grid_.space_size(); ++is)
                m.at(it, is) = magnitude(it, is);
        return m;
    }

  private:
    Grid grid_;
    std::vector<ScalarField> comps_;
};

}  // namespace heatlab
