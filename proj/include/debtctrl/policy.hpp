#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "common.hpp"
#include "model.hpp"

namespace debtctrl {

// ---------------------------------------------------------------------------
// Feedback rules. Every variant is a pure function of (x, z) emitting a
// control in [-u1, u2]; nearest-node lookups keep tabulated rules on exactly
// grid-feasible values.
// ---------------------------------------------------------------------------

struct ConstantPolicy {
    Real u = 0.0;
    Real operator()(Real, Real) const { return u; }
};

// Bang-bang rule, closed on the right: value_above applies for x >= x_tilde.
struct ThresholdBangBang {
    Real x_tilde = 0.0;
    Real value_below = 0.0;
    Real value_above = 0.0;
    Real operator()(Real x, Real) const { return x >= x_tilde ? value_above : value_below; }
};

namespace detail {

inline std::size_t nearest_index(const std::vector<Real>& grid, Real v) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), v);
    if (it == grid.begin()) return 0;
    if (it == grid.end()) return grid.size() - 1;
    const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
    return (v - grid[hi - 1] <= grid[hi] - v) ? hi - 1 : hi;
}

}  // namespace detail

// Control tabulated against the factor state.
struct ZFeedback {
    std::vector<Real> z_grid;  // ascending
    std::vector<Real> u_values;
    Real operator()(Real, Real z) const { return u_values[detail::nearest_index(z_grid, z)]; }
};

// Control tabulated on an (x, z) product grid, row-major in x.
struct StateFeedback {
    std::vector<Real> x_grid;  // ascending
    std::vector<Real> z_grid;  // ascending
    std::vector<Real> u_values;  // size x_grid.size() * z_grid.size()
    Real operator()(Real x, Real z) const {
        const std::size_t i = detail::nearest_index(x_grid, x);
        const std::size_t j = detail::nearest_index(z_grid, z);
        return u_values[i * z_grid.size() + j];
    }
};

struct PolicyRule : std::variant<ConstantPolicy, ThresholdBangBang, ZFeedback, StateFeedback> {
    using variant::variant;
    Real operator()(Real x, Real z) const {
        return std::visit([&](const auto& p) { return p(x, z); }, static_cast<const variant&>(*this));
    }
};

template <class P>
concept PolicyLike = requires(const P& p, Real x, Real z) {
    { p(x, z) } -> std::convertible_to<Real>;
};

// ---------------------------------------------------------------------------
// Value gradient: evaluator for dv/dx with a provenance tag.
// ---------------------------------------------------------------------------
struct ValueGradient {
    enum class Provenance { closed_form, grid_interpolated };

    std::function<Real(Real, Real)> eval;
    Provenance provenance = Provenance::closed_form;

    Real operator()(Real x, Real z) const { return eval(x, z); }
};

// ---------------------------------------------------------------------------
// Hamiltonian H(x, z, u) = -x (g(z,u) + u) v_x + f. The u-independent rate
// term is excluded; minimizers are unaffected.
// ---------------------------------------------------------------------------

inline Real hamiltonian(const Model& model, Real x, Real z, Real u, Real v_x) {
    if (!(x > 0.0)) fail(errc::domain_error, "hamiltonian requires x > 0");
    return -x * (model.growth(z, u) + u) * v_x + model.cost(x, z);
}

inline Real hamiltonian(const Model& model, const ValueGradient& grad, Real x, Real z, Real u) {
    return hamiltonian(model, x, z, u, grad(x, z));
}

// Which minimization rule produced a control.
enum class MinimizerRegime {
    linear_endpoint,    // linear control impact: endpoint by sign test
    interior_match,     // concave impact: marginal-growth match du g = -1
    clamped_low,        // interior candidate below -u1
    clamped_high,       // interior candidate above u2
    endpoint_compare,   // nonincreasing-value direction: best endpoint
    convex_bisection,   // u-dependent cost: root of du H
    grid_fallback,      // dense search (explicitly requested)
};

constexpr std::string_view to_string(MinimizerRegime r) {
    switch (r) {
        case MinimizerRegime::linear_endpoint: return "linear-endpoint";
        case MinimizerRegime::interior_match: return "interior-match";
        case MinimizerRegime::clamped_low: return "clamped-low";
        case MinimizerRegime::clamped_high: return "clamped-high";
        case MinimizerRegime::endpoint_compare: return "endpoint-compare";
        case MinimizerRegime::convex_bisection: return "convex-bisection";
        case MinimizerRegime::grid_fallback: return "grid-fallback";
    }
    return "unknown";
}

struct MinimizerResult {
    Real u;
    MinimizerRegime regime;
};

namespace detail {

// Endpoint rule for a linear control impact: H is affine in u with slope
// -x v_x (1 - alpha); ties (including v_x = 0) resolve to -u1.
inline MinimizerResult minimize_linear(const Model& model, Real z, Real v_x) {
    const Real alpha = model.growth.alpha(z);
    const Real u = (v_x * (alpha - 1.0) >= 0.0) ? model.bounds.lo() : model.bounds.hi();
    return {u, MinimizerRegime::linear_endpoint};
}

// Concave impact, cost independent of u. For v_x > 0 the minimizer is the
// three-branch clamp of the marginal-growth match; for v_x <= 0 the interior
// point is a maximizer, so compare endpoints (ties to -u1).
inline MinimizerResult minimize_concave(const Model& model, Real x, Real z, Real v_x) {
    const Real lo = model.bounds.lo(), hi = model.bounds.hi();
    if (v_x > 0.0) {
        if (model.growth.du(z, lo) < -1.0) return {lo, MinimizerRegime::clamped_low};
        if (model.growth.du(z, hi) > -1.0) return {hi, MinimizerRegime::clamped_high};
        const Real u_hat = (1.0 - model.growth.alpha(z)) / (2.0 * model.growth.beta(z));
        return {std::clamp(u_hat, lo, hi), MinimizerRegime::interior_match};
    }
    const Real h_lo = hamiltonian(model, x, z, lo, v_x);
    const Real h_hi = hamiltonian(model, x, z, hi, v_x);
    return {h_lo <= h_hi ? lo : hi, MinimizerRegime::endpoint_compare};
}

}  // namespace detail

// Pointwise minimizer of H over [-u1, u2] for the model's own (u-independent)
// running cost. Dispatch follows the growth family.
inline MinimizerResult minimize_hamiltonian(const Model& model, Real x, Real z, Real v_x) {
    if (!(x > 0.0)) fail(errc::domain_error, "minimize_hamiltonian requires x > 0");
    if (model.growth.family == GrowthFunction::Family::linear_u)
        return detail::minimize_linear(model, z, v_x);
    return detail::minimize_concave(model, x, z, v_x);
}

inline MinimizerResult minimize_hamiltonian(const Model& model, const ValueGradient& grad, Real x,
                                            Real z) {
    return minimize_hamiltonian(model, x, z, grad(x, z));
}

// ---------------------------------------------------------------------------
// General running cost f(x, z, u): H = -x (g + u) v_x + f. Requires convexity
// of H in u, verified by sampling du H at 33 points; the minimizer is then
// the bisection root of du H (or the binding endpoint).
// ---------------------------------------------------------------------------

inline constexpr Real bisection_u_tol = 1e-10;

template <class F, class Fu>
    requires std::invocable<F, Real, Real, Real> && std::invocable<Fu, Real, Real, Real>
MinimizerResult minimize_hamiltonian(const Model& model, Real x, Real z, Real v_x, F&& f, Fu&& f_u,
                                     bool allow_grid_fallback = false) {
    if (!(x > 0.0)) fail(errc::domain_error, "minimize_hamiltonian requires x > 0");
    const Real lo = model.bounds.lo(), hi = model.bounds.hi();

    const auto h = [&](Real u) { return -x * (model.growth(z, u) + u) * v_x + f(x, z, u); };
    const auto dh = [&](Real u) { return -x * v_x * (model.growth.du(z, u) + 1.0) + f_u(x, z, u); };

    // convexity probe: du H must be nondecreasing across 33 samples
    constexpr int probes = 33;
    Real prev = dh(lo);
    const Real slope_scale = 1.0 + std::abs(x * v_x);
    bool convex = true;
    for (int i = 1; i < probes; ++i) {
        const Real u = lo + (hi - lo) * static_cast<Real>(i) / (probes - 1);
        const Real cur = dh(u);
        if (cur < prev - 1e-9 * slope_scale) {
            convex = false;
            break;
        }
        prev = cur;
    }
    if (!convex) {
        if (!allow_grid_fallback)
            fail(errc::nonconvex_hamiltonian, "du H changes monotonicity on the control interval");
        constexpr int n = 10'000;
        Real best_u = lo, best_h = h(lo);
        for (int i = 1; i <= n; ++i) {
            const Real u = lo + (hi - lo) * static_cast<Real>(i) / n;
            const Real hu = h(u);
            if (hu < best_h) best_h = hu, best_u = u;
        }
        return {best_u, MinimizerRegime::grid_fallback};
    }

    const Real d_lo = dh(lo), d_hi = dh(hi);
    if (d_lo >= 0.0) return {lo, MinimizerRegime::convex_bisection};
    if (d_hi <= 0.0) return {hi, MinimizerRegime::convex_bisection};
    Real a = lo, b = hi;
    while (b - a > bisection_u_tol) {
        const Real m = 0.5 * (a + b);
        (dh(m) < 0.0 ? a : b) = m;
    }
    return {0.5 * (a + b), MinimizerRegime::convex_bisection};
}

// ---------------------------------------------------------------------------
// Interior candidate for a concave impact: the root of du g(z, u) = -1.
// ---------------------------------------------------------------------------
struct InteriorCandidate {
    std::optional<Real> u_hat;           // present when inside [-u1, u2]
    std::optional<Real> dominating_end;  // present otherwise: the better endpoint
};

inline InteriorCandidate interior_candidate(const Model& model, Real z) {
    if (model.growth.family != GrowthFunction::Family::concave_quadratic_u)
        fail(errc::not_applicable, "interior candidate needs a strictly concave impact");
    const Real u_hat = (1.0 - model.growth.alpha(z)) / (2.0 * model.growth.beta(z));
    if (model.bounds.contains(u_hat)) return {u_hat, std::nullopt};
    // du g + 1 keeps one sign across the interval, so one endpoint dominates
    // for any positive value slope
    return {std::nullopt, u_hat > model.bounds.hi() ? model.bounds.hi() : model.bounds.lo()};
}

// ---------------------------------------------------------------------------
// Factor-feedback minimizer for increasing values (v_x > 0) and u-independent
// cost, tabulated over the evaluation lattice: three-branch classification
//   du g(z, -u1) < -1  -> -u1
//   du g(z, u2)  > -1  ->  u2
//   otherwise          ->  interior match
// ---------------------------------------------------------------------------
inline ZFeedback reduction_policy_z(const Model& model) {
    if (model.growth.family != GrowthFunction::Family::concave_quadratic_u)
        fail(errc::not_applicable, "factor-feedback rule needs a strictly concave impact");
    const auto zs = z_lattice(model);
    ZFeedback rule;
    rule.z_grid = zs;
    rule.u_values.reserve(zs.size());
    for (const Real z : zs) {
        Real u;
        if (model.growth.du(z, model.bounds.lo()) < -1.0) u = model.bounds.lo();
        else if (model.growth.du(z, model.bounds.hi()) > -1.0) u = model.bounds.hi();
        else u = std::clamp((1.0 - model.growth.alpha(z)) / (2.0 * model.growth.beta(z)),
                            model.bounds.lo(), model.bounds.hi());
        rule.u_values.push_back(u);
    }
    return rule;
}

}  // namespace debtctrl
