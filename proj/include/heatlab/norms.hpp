#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "grid.hpp"

namespace heatlab {

enum class NormOrder { TimeOuter, SpaceOuter };

/// Mixed Lebesgue norm specification: outer/time exponent q, inner/space
/// exponent p, and which variable the outer integral runs over.
struct MixedNormSpec {
    double q;
    double p;
    NormOrder order = NormOrder::TimeOuter;

    void validate() const {
        if (!(q > 1.0) || !(p > 1.0))
            throw std::invalid_argument("MixedNormSpec: exponents must exceed 1");
    }
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {

// Weighted l_p over one index set; p = inf gives the discrete sup.
template <class Getter>
double lp_reduce(std::size_t n, double p, const Getter& term_and_weight) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, term_and_weight(i).first);
        return m;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto [v, w] = term_and_weight(i);
        acc += w * std::pow(v, p);
    }
    return std::pow(acc, 1.0 / p);
}

}  // namespace detail

/// Mixed L_{q,p} norm by trapezoid quadrature on the grid. TimeOuter
/// integrates space first; SpaceOuter swaps the order. Infinite
/// exponents reduce to discrete suprema.
inline double mixed_norm(const ScalarField& f, const MixedNormSpec& spec) {
    spec.validate();
    const Grid& g = f.grid();
    const std::size_t ns = g.space_size();
    const int nt1 = g.time_slices();

    if (spec.order == NormOrder::TimeOuter) {
        return detail::lp_reduce(static_cast<std::size_t>(nt1), spec.q, [&](std::size_t it) {
            const double* sl = f.slice(static_cast<int>(it));
            double inner = detail::lp_reduce(ns, spec.p, [&](std::size_t is) {
                return std::pair<double, double>(std::abs(sl[is]), g.space_weight(is));
            });
            return std::pair<double, double>(inner, g.time_weight(static_cast<int>(it)));
        });
    }
    return detail::lp_reduce(ns, spec.p, [&](std::size_t is) {
        double inner = detail::lp_reduce(static_cast<std::size_t>(nt1), spec.q, [&](std::size_t it) {
            return std::pair<double, double>(std::abs(f.at(static_cast<int>(it), is)),
                                             g.time_weight(static_cast<int>(it)));
        });
        return std::pair<double, double>(inner, g.space_weight(is));
    });
}

/// sup over all space-time nodes of |f|.
inline double sup_norm(const ScalarField& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

enum class AdmissibilityKind { Subcritical, LPSCritical, TheoremPair };

/// Exponent admissibility checks.
///  - Subcritical:  d/p + 2/q < 2.
///  - LPSCritical:  p in (d, inf] and d/p + 2/q = 1.
///  - TheoremPair:  2p, 2q > p0' with p0' = p0/(p0-1); when p0' <= 2 the
///    condition is implied by p, q > 1, which is cross-checked.
inline bool admissibility(double q, double p, int d, AdmissibilityKind kind, double p0 = 0.0) {
    if (!(q > 1.0) || !(p > 1.0))
        throw std::invalid_argument("admissibility: q, p must exceed 1");
    switch (kind) {
        case AdmissibilityKind::Subcritical:
            return d / p + 2.0 / q < 2.0;
        case AdmissibilityKind::LPSCritical: {
            if (!(p > static_cast<double>(d))) return false;
            const double lhs = (std::isinf(p) ? 0.0 : d / p) + (std::isinf(q) ? 0.0 : 2.0 / q);
            return std::abs(lhs - 1.0) < 1e-9;
        }
        case AdmissibilityKind::TheoremPair: {
            if (!(p0 > 1.0)) throw std::invalid_argument("admissibility: TheoremPair needs p0 > 1");
            const double p0p = p0 / (p0 - 1.0);
            const bool ok = 2.0 * p > p0p && 2.0 * q > p0p;
            if (p0p <= 2.0 && !ok)
                throw std::logic_error("admissibility: p0' <= 2 must imply the pair condition");
            return ok;
        }
    }
    return false;
}

}  // namespace heatlab
