#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"
#include "model.hpp"
#include "policy.hpp"
#include "reduction.hpp"
#include "smoothing.hpp"

namespace debtctrl {

// ---------------------------------------------------------------------------
// Spatial grid
// ---------------------------------------------------------------------------
enum class GridSpacing { uniform, log_uniform };

struct Grid {
    Real x_min = 0.01;
    Real x_max = 8.0;
    std::size_t n = 2001;
    GridSpacing spacing = GridSpacing::log_uniform;

    static Grid log_uniform(Real x_min, Real x_max, std::size_t n) {
        return {x_min, x_max, n, GridSpacing::log_uniform};
    }
    static Grid uniform(Real x_min, Real x_max, std::size_t n) {
        return {x_min, x_max, n, GridSpacing::uniform};
    }

    std::vector<Real> nodes() const {
        if (!(x_min > 0.0) || !(x_min < x_max))
            fail(errc::config_invalid, "grid needs 0 < x_min < x_max");
        if (n < 16) fail(errc::config_invalid, "grid needs at least 16 nodes");
        std::vector<Real> x(n);
        if (spacing == GridSpacing::uniform) {
            for (std::size_t i = 0; i < n; ++i)
                x[i] = x_min + (x_max - x_min) * static_cast<Real>(i) / static_cast<Real>(n - 1);
        } else {
            const Real lr = std::log(x_max / x_min);
            for (std::size_t i = 0; i < n; ++i)
                x[i] = x_min * std::exp(lr * static_cast<Real>(i) / static_cast<Real>(n - 1));
        }
        x.front() = x_min;
        x.back() = x_max;
        return x;
    }
};

// Artificial condition imposed at x_max: either pin the one-sided second
// difference to an asymptotic curvature or pin the value itself.
enum class UpperBoundary { curvature, value };

struct HjbConfig {
    Real tol = 1e-10;
    std::size_t max_iter = 200;
    UpperBoundary upper_kind = UpperBoundary::curvature;
    // unset fields are derived from the cost family: lower value f(0)/lambda,
    // upper curvature 2*a1 (quadratic cost) or k m (m-1) x_max^(m-2) (power)
    std::optional<Real> lower_value;
    std::optional<Real> upper_target;
};

struct GridValue {
    std::vector<Real> x;
    std::vector<Real> v;
    std::vector<Real> u;
    std::size_t iterations = 0;
    Real residual = 0.0;               // discrete equation residual after convergence
    Real value_change = 0.0;           // sup-norm change of the last evaluation sweep
    Real max_nodewise_increase = 0.0;  // largest per-node increase after the first sweep
};

namespace detail {

struct HjbBoundary {
    Real lower_value;
    UpperBoundary upper_kind;
    Real upper_target;
};

inline HjbBoundary resolve_boundary(const Model& model, const Grid& grid, const HjbConfig& cfg) {
    HjbBoundary b;
    b.lower_value = cfg.lower_value ? *cfg.lower_value
                                    : model.cost(0.0, model.z0) / model.lambda;
    b.upper_kind = cfg.upper_kind;
    if (cfg.upper_target) {
        b.upper_target = *cfg.upper_target;
        return b;
    }
    if (cfg.upper_kind == UpperBoundary::value)
        fail(errc::config_invalid, "value condition at x_max needs an explicit target");
    if (model.cost.family == CostFunction::Family::quadratic_distance) {
        const auto ext = drift_extremes(model);
        const auto q = quadratic_coeffs(model, ext.g1, ext.g2);
        b.upper_target = 2.0 * q.a1;
    } else {
        const auto sol = reduction_value(model);
        b.upper_target = sol.k * sol.m * (sol.m - 1.0) * std::pow(grid.x_max, sol.m - 2.0);
    }
    return b;
}

// Node-wise candidate controls: the Hamiltonian minimizers for each one-sided
// gradient. Each candidate is then scored with its own upwind direction, so
// bang-bang problems keep two-valued policy vectors.
inline void node_candidates(const Model& model, Real x, Real dp, Real dm, std::vector<Real>& out) {
    const Real z = model.z0;
    out.clear();
    const Real up = minimize_hamiltonian(model, x, z, dp).u;
    out.push_back(up);
    const Real um = minimize_hamiltonian(model, x, z, dm).u;
    if (std::abs(um - up) > 1e-14) out.push_back(um);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Policy iteration on the constant-factor equation
//   lambda v = min_u { x (r - g(u) - u) v' } + s^2 x^2 v''/2 + f(x).
// Improvement minimizes the upwinded discrete drift term node-wise;
// evaluation solves the resulting tridiagonal system exactly.
// ---------------------------------------------------------------------------
inline GridValue policy_iteration(const Model& model, const Grid& grid, HjbConfig cfg = {}) {
    if (!model.rate.is_constant() || !model.growth.is_z_constant())
        fail(errc::not_applicable, "solver needs constant coefficients");
    {
        const Real lm = lambda_m(model, model.cost.growth_exponent());
        if (!(model.lambda > lm))
            fail(errc::lambda_too_small, "lambda must exceed the moment growth bound " +
                                             std::to_string(lm));
    }
    const std::vector<Real> x = grid.nodes();
    const std::size_t n = x.size();
    const Real z = model.z0;
    const Real r = model.rate(z);
    const Real s2 = model.sigma * model.sigma;
    const auto bc = detail::resolve_boundary(model, grid, cfg);

    std::vector<Real> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = model.cost(x[i], z);

    // initial sweep works from the zeroth-order value f/lambda
    std::vector<Real> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = f[i] / model.lambda;

    std::vector<Real> u(n, model.bounds.lo());
    std::vector<Real> a(n), b(n), c(n), rhs(n), e(n), d(n);
    std::vector<Real> cand;
    cand.reserve(8);

    const auto improve = [&](const std::vector<Real>& w, std::vector<Real>& out) {
        Real max_change = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const Real hm = x[i] - x[i - 1], hp = x[i + 1] - x[i];
            const Real dp = (w[i + 1] - w[i]) / hp;
            const Real dm = (w[i] - w[i - 1]) / hm;
            detail::node_candidates(model, x[i], dp, dm, cand);
            Real best_u = cand.front();
            Real best_h = std::numeric_limits<Real>::infinity();
            for (const Real uc : cand) {
                const Real mu = r - model.growth(z, uc) - uc;
                const Real h = x[i] * mu * (mu >= 0.0 ? dp : dm);
                if (h < best_h) best_h = h, best_u = uc;
            }
            max_change = std::max(max_change, std::abs(best_u - out[i]));
            out[i] = best_u;
        }
        out[0] = out[1];
        out[n - 1] = out[n - 2];
        return max_change;
    };

    const auto evaluate = [&](const std::vector<Real>& pol, std::vector<Real>& w) {
        // assemble lambda v - L v = f with per-node upwinding
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const Real hm = x[i] - x[i - 1], hp = x[i + 1] - x[i];
            const Real diff = 0.5 * s2 * x[i] * x[i];
            Real lo_c = diff * 2.0 / (hm * (hm + hp));
            Real hi_c = diff * 2.0 / (hp * (hm + hp));
            Real di_c = -diff * 2.0 / (hm * hp);
            const Real mu = r - model.growth(z, pol[i]) - pol[i];
            const Real adv = x[i] * mu;
            if (mu >= 0.0) {
                hi_c += adv / hp;
                di_c -= adv / hp;
            } else {
                lo_c -= adv / hm;
                di_c += adv / hm;
            }
            if (lo_c < 0.0 || hi_c < 0.0)
                fail(errc::scheme_violation, "negative off-diagonal after upwinding");
            a[i] = -lo_c;
            b[i] = model.lambda - di_c;
            c[i] = -hi_c;
            rhs[i] = f[i];
        }
        // forward elimination with Dirichlet at x_min: v_i + e_i v_{i+1} = d_i
        e[0] = 0.0;
        d[0] = bc.lower_value;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const Real piv = b[i] - a[i] * e[i - 1];
            if (!(piv > 0.0)) fail(errc::scheme_violation, "tridiagonal pivot not positive");
            e[i] = c[i] / piv;
            d[i] = (rhs[i] - a[i] * d[i - 1]) / piv;
        }
        if (bc.upper_kind == UpperBoundary::value) {
            w[n - 1] = bc.upper_target;
        } else {
            // one-sided second difference over the last three nodes = target
            const Real u1 = x[n - 2] - x[n - 3], u2 = x[n - 1] - x[n - 2];
            const Real qa = 2.0 / (u1 * (u1 + u2));
            const Real qb = -2.0 / (u1 * u2);
            const Real qc = 2.0 / (u2 * (u1 + u2));
            const Real rb = qb - qa * e[n - 3];
            const Real coef = qc - rb * e[n - 2];
            if (coef == 0.0) fail(errc::scheme_violation, "upper boundary closure is singular");
            w[n - 1] = (bc.upper_target - qa * d[n - 3] - rb * d[n - 2]) / coef;
        }
        for (std::size_t i = n - 1; i-- > 0;) w[i] = d[i] - e[i] * w[i + 1];
    };

    GridValue out;
    std::vector<Real> v_new(n);
    bool have_value = false;
    std::size_t it = 0;
    for (; it < cfg.max_iter; ++it) {
        const Real policy_change = improve(v, u);
        if (have_value && policy_change == 0.0) break;
        evaluate(u, v_new);
        Real change = 0.0, increase = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            change = std::max(change, std::abs(v_new[i] - v[i]));
            if (have_value) increase = std::max(increase, v_new[i] - v[i]);
        }
        v.swap(v_new);
        out.value_change = change;
        out.max_nodewise_increase = std::max(out.max_nodewise_increase, increase);
        if (have_value && change < cfg.tol) {
            ++it;
            break;
        }
        have_value = true;
    }
    if (it >= cfg.max_iter)
        fail(errc::no_convergence, "policy iteration hit max_iter with value change " +
                                       std::to_string(out.value_change));

    // fresh minimization against the converged value gives the reported residual
    out.x = x;
    out.v = v;
    out.iterations = it;
    improve(v, u);
    Real res = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const Real hm = x[i] - x[i - 1], hp = x[i + 1] - x[i];
        const Real dp = (v[i + 1] - v[i]) / hp;
        const Real dm = (v[i] - v[i - 1]) / hm;
        const Real d2 = 2.0 * (v[i - 1] / (hm * (hm + hp)) - v[i] / (hm * hp) +
                               v[i + 1] / (hp * (hm + hp)));
        const Real mu = r - model.growth(z, u[i]) - u[i];
        const Real lv = x[i] * mu * (mu >= 0.0 ? dp : dm) + 0.5 * s2 * x[i] * x[i] * d2;
        res = std::max(res, std::abs(lv + f[i] - model.lambda * v[i]));
    }
    out.residual = res;
    out.u = std::move(u);
    return out;
}

// ---------------------------------------------------------------------------
// Sup over interior nodes of the minimized discrete equation residual
// |min_u { x mu(u) Dv } + s^2 x^2 D^2 v / 2 + f - lambda v|.
// ---------------------------------------------------------------------------
inline Real residual_norm(const GridValue& gv, const Model& model) {
    const Real z = model.z0;
    const Real r = model.rate(z);
    const Real s2 = model.sigma * model.sigma;
    std::vector<Real> cand;
    Real res = 0.0;
    for (std::size_t i = 1; i + 1 < gv.x.size(); ++i) {
        const Real hm = gv.x[i] - gv.x[i - 1], hp = gv.x[i + 1] - gv.x[i];
        const Real dp = (gv.v[i + 1] - gv.v[i]) / hp;
        const Real dm = (gv.v[i] - gv.v[i - 1]) / hm;
        const Real d2 = 2.0 * (gv.v[i - 1] / (hm * (hm + hp)) - gv.v[i] / (hm * hp) +
                               gv.v[i + 1] / (hp * (hm + hp)));
        detail::node_candidates(model, gv.x[i], dp, dm, cand);
        Real best = std::numeric_limits<Real>::infinity();
        for (const Real uc : cand) {
            const Real mu = r - model.growth(z, uc) - uc;
            best = std::min(best, gv.x[i] * mu * (mu >= 0.0 ? dp : dm));
        }
        const Real f = model.cost(gv.x[i], z);
        res = std::max(res,
                       std::abs(best + 0.5 * s2 * gv.x[i] * gv.x[i] * d2 + f - model.lambda * gv.v[i]));
    }
    return res;
}

// Same residual for a twice-differentiable closed form (anything exposing
// value/deriv/second), using analytic derivatives and the exact minimizer.
template <class ClosedForm>
Real residual_norm(const ClosedForm& sol, const Model& model, const std::vector<Real>& xs) {
    const Real z = model.z0;
    const Real r = model.rate(z);
    const Real s2 = model.sigma * model.sigma;
    Real res = 0.0;
    for (const Real x : xs) {
        const Real w = sol.value(x);
        const Real wp = sol.deriv(x);
        const Real wpp = sol.second(x);
        const auto min = minimize_hamiltonian(model, x, z, wp);
        const Real h = hamiltonian(model, x, z, min.u, wp);
        res = std::max(res, std::abs(r * x * wp + h + 0.5 * s2 * x * x * wpp - model.lambda * w));
    }
    return res;
}

// ---------------------------------------------------------------------------
// Empirical switching point: midpoint of the unique grid interval where the
// node policy jumps. A constant policy or several jumps is a structure error.
// ---------------------------------------------------------------------------
inline Real extract_threshold(const GridValue& gv) {
    if (gv.u.size() != gv.x.size() || gv.u.size() < 3)
        fail(errc::structure_mismatch, "grid value lacks a policy vector");
    std::vector<std::size_t> switches;
    for (std::size_t i = 0; i + 1 < gv.u.size(); ++i)
        if (std::abs(gv.u[i + 1] - gv.u[i]) > 1e-9) switches.push_back(i);
    if (switches.empty())
        fail(errc::structure_mismatch, "constant policy: no switching interval");
    if (switches.size() > 1)
        fail(errc::structure_mismatch,
             "policy switches " + std::to_string(switches.size()) + " times; expected one");
    const std::size_t i = switches.front();
    return 0.5 * (gv.x[i] + gv.x[i + 1]);
}

}  // namespace debtctrl
