#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "common.hpp"
#include "model.hpp"
#include "smoothing.hpp"

namespace debtctrl {

// ---------------------------------------------------------------------------
// Debt-reduction closed form for the power cost C x^m: the optimal control is
// the constant that minimizes -(g(u) + u), and the value is k x^m.
// ---------------------------------------------------------------------------
struct ReductionSolution {
    Real g = 0.0;       // optimal drift extreme, min over u of -(g(u) + u)
    Real u_star = 0.0;  // attaining control
    Real k = 0.0;       // value coefficient
    Real m = 2.0;       // cost exponent

    Real value(Real x) const {
        require_domain(x);
        return k * std::pow(x, m);
    }
    Real deriv(Real x) const {
        require_domain(x);
        return k * m * std::pow(x, m - 1.0);
    }
    Real second(Real x) const {
        require_domain(x);
        return k * m * (m - 1.0) * std::pow(x, m - 2.0);
    }

  private:
    static void require_domain(Real x) {
        if (!(x > 0.0)) fail(errc::domain_error, "value function defined for x > 0");
    }
};

// Minimum of -(g(u) + u) over the control interval, computed analytically per
// growth family and cross-checked against a 10^4-point grid search.
inline std::pair<Real, Real> optimal_drift(const Model& model) {
    if (!model.growth.is_z_constant() || !model.rate.is_constant())
        fail(errc::not_applicable, "optimal drift needs constant coefficients");
    const auto ext = drift_extremes(model);

    const Real z = model.z0;
    const Real lo = model.bounds.lo(), hi = model.bounds.hi();
    Real best = std::numeric_limits<Real>::infinity();
    for (int i = 0; i <= 10000; ++i) {
        const Real u = lo + (hi - lo) * static_cast<Real>(i) / 10000;
        best = std::min(best, -(model.growth(z, u) + u));
    }
    // the grid minimum can only overshoot by the modulus of continuity over one cell
    if (!(std::abs(best - ext.g1) <= 1e-6 * (1.0 + std::abs(ext.g1)) + 1e-7))
        fail(errc::internal_inconsistency, "analytic drift extreme disagrees with grid search");
    return {ext.g1, ext.u_at_g1};
}

inline Real k_coefficient(const Model& model, Real g) {
    if (model.cost.family != CostFunction::Family::power)
        fail(errc::not_applicable, "k coefficient needs the power cost");
    const Real m = model.cost.m;
    const Real r = model.rate(model.z0);
    const Real den = model.lambda - (g + r) * m - 0.5 * model.sigma * model.sigma * m * (m - 1.0);
    if (!(den > 0.0))
        fail(errc::discount_too_small,
             "lambda must exceed (G + r) m + m (m - 1) sigma^2 / 2; denominator = " +
                 std::to_string(den));
    return model.cost.c0 / den;
}

inline ReductionSolution reduction_value(const Model& model) {
    if (model.cost.family != CostFunction::Family::power)
        fail(errc::not_applicable, "reduction closed form needs the power cost");
    if (!(model.cost.m >= 2.0))
        fail(errc::invalid_exponent, "reduction closed form needs cost exponent m >= 2");
    const auto [g, u_star] = optimal_drift(model);
    return {g, u_star, k_coefficient(model, g), model.cost.m};
}

// Interior equation residual |(G + r) x v' + C x^m + s^2 x^2 v''/2 - lambda v|.
inline Real ode_residual_x(const ReductionSolution& sol, const Model& model, Real x) {
    if (!(x > 0.0)) fail(errc::domain_error, "residual defined for x > 0");
    const Real r = model.rate(model.z0);
    return std::abs((sol.g + r) * x * sol.deriv(x) + model.cost.c0 * std::pow(x, sol.m) +
                    0.5 * model.sigma * model.sigma * x * x * sol.second(x) -
                    model.lambda * sol.value(x));
}

// ---------------------------------------------------------------------------
// Residual profile of the factor-dependent coefficient equation
//   s_Z^2 phi''/2 + (b_Z + rho s s_Z m) phi' + [(G(z) + r(z)) m - lambda
//   + s^2 m (m-1)/2] phi + C = 0
// for a user-supplied positive candidate phi tabulated on a uniform z-grid.
// Central differences at interior nodes; this is a checker, not a solver.
// ---------------------------------------------------------------------------
struct OdeResidualProfile {
    std::vector<Real> z;         // interior nodes
    std::vector<Real> residual;  // signed residual at each interior node
    Real max_abs = 0.0;
};

inline OdeResidualProfile ode_residual(const Model& model, const std::vector<Real>& phi,
                                       const std::vector<Real>& z_grid) {
    if (model.cost.family != CostFunction::Family::power)
        fail(errc::not_applicable, "coefficient equation is stated for the power cost");
    if (phi.size() != z_grid.size() || phi.size() < 3)
        fail(errc::invalid_candidate, "need phi tabulated on at least 3 grid nodes");
    const Real dz = z_grid[1] - z_grid[0];
    if (!(dz > 0.0)) fail(errc::invalid_candidate, "z-grid must be strictly increasing");
    for (std::size_t i = 1; i + 1 < z_grid.size(); ++i)
        if (std::abs((z_grid[i + 1] - z_grid[i]) - dz) > 1e-9 * (1.0 + std::abs(dz)))
            fail(errc::invalid_candidate, "z-grid must be uniform");
    for (const Real v : phi)
        if (!(v > 0.0)) fail(errc::invalid_candidate, "phi must be strictly positive");

    const Real m = model.cost.m;
    const Real s = model.sigma;
    OdeResidualProfile out;
    out.z.reserve(phi.size() - 2);
    out.residual.reserve(phi.size() - 2);
    for (std::size_t i = 1; i + 1 < phi.size(); ++i) {
        const Real z = z_grid[i];
        const Real d1 = (phi[i + 1] - phi[i - 1]) / (2.0 * dz);
        const Real d2 = (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) / (dz * dz);
        // pointwise drift extreme at this factor level
        const Real lo = model.bounds.lo(), hi = model.bounds.hi();
        Real g;
        if (model.growth.family == GrowthFunction::Family::linear_u) {
            g = std::min(-(model.growth(z, lo) + lo), -(model.growth(z, hi) + hi));
        } else {
            const Real vertex =
                std::clamp((1.0 - model.growth.alpha(z)) / (2.0 * model.growth.beta(z)), lo, hi);
            g = -(model.growth(z, vertex) + vertex);
        }
        const Real sz = model.factor.vol(z);
        const Real bz = model.factor.drift(z);
        const Real res = 0.5 * sz * sz * d2 + (bz + model.rho * s * sz * m) * d1 +
                         ((g + model.rate(z)) * m - model.lambda + 0.5 * s * s * m * (m - 1.0)) *
                             phi[i] +
                         model.cost.c0;
        out.z.push_back(z);
        out.residual.push_back(res);
        out.max_abs = std::max(out.max_abs, std::abs(res));
    }
    return out;
}

}  // namespace debtctrl
