#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "common.hpp"

namespace debtctrl {

// ---------------------------------------------------------------------------
// Coefficient building block: affine function of the factor state, optionally
// clamped. Constant coefficients are the a1 == 0 special case.
// ---------------------------------------------------------------------------
struct AffineClamped {
    Real a0 = 0.0;
    Real a1 = 0.0;
    Real lo = -inf;
    Real hi = inf;

    Real operator()(Real z) const { return std::clamp(a0 + a1 * z, lo, hi); }

    // derivative in z; zero where the clamp is active
    Real slope(Real z) const {
        const Real raw = a0 + a1 * z;
        return (raw > lo && raw < hi) ? a1 : 0.0;
    }

    bool is_constant() const { return a1 == 0.0; }

    static AffineClamped constant(Real v) { return {v, 0.0, -inf, inf}; }
};

// ---------------------------------------------------------------------------
// Exogenous factor dZ = b(Z) dt + s(Z) dW.
// ---------------------------------------------------------------------------
struct FactorDynamics {
    enum class Family { none, constant_coeff, ornstein_uhlenbeck };

    Family family = Family::none;
    Real b = 0.0;      // constant_coeff drift
    Real c = 0.0;      // diffusion level (constant_coeff and OU)
    Real kappa = 0.0;  // OU mean-reversion speed
    Real theta = 0.0;  // OU long-run level

    static FactorDynamics none() { return {}; }
    static FactorDynamics constant_coeff(Real b, Real c) {
        return {Family::constant_coeff, b, c, 0.0, 0.0};
    }
    static FactorDynamics ornstein_uhlenbeck(Real kappa, Real theta, Real c) {
        return {Family::ornstein_uhlenbeck, 0.0, c, kappa, theta};
    }

    Real drift(Real z) const {
        switch (family) {
            case Family::none: return 0.0;
            case Family::constant_coeff: return b;
            case Family::ornstein_uhlenbeck: return kappa * (theta - z);
        }
        return 0.0;
    }

    Real vol(Real) const { return family == Family::none ? 0.0 : c; }

    bool is_degenerate() const { return family == Family::none || c == 0.0; }

    void collect_violations(std::vector<Violation>& out) const {
        if (family == Family::none && (b != 0.0 || c != 0.0))
            out.push_back({errc::factor_invalid, "factor family none requires zero coefficients"});
        if (c < 0.0) out.push_back({errc::factor_invalid, "factor volatility must be nonnegative"});
        if (family == Family::ornstein_uhlenbeck && kappa <= 0.0)
            out.push_back({errc::factor_invalid, "mean-reversion speed must be positive"});
    }
};

// ---------------------------------------------------------------------------
// Interest rate r(z), positive and capped: 0 < r(z) <= cap.
// ---------------------------------------------------------------------------
struct RateFunction {
    enum class Family { constant, affine };

    // Affine rates are clamped into (floor, cap]; the floor keeps positivity
    // machine-checkable.
    static constexpr Real default_floor = 1e-6;

    Family family = Family::constant;
    Real r0 = 0.0;
    Real r1 = 0.0;
    Real cap_ = 0.0;
    Real floor_ = default_floor;

    static RateFunction constant(Real r) { return {Family::constant, r, 0.0, r, default_floor}; }
    static RateFunction affine(Real r0, Real r1, Real cap, Real floor = default_floor) {
        return {Family::affine, r0, r1, cap, floor};
    }

    Real operator()(Real z) const {
        if (family == Family::constant) return r0;
        return std::clamp(r0 + r1 * z, floor_, cap_);
    }

    // derivative in z; zero where the clamp is active
    Real slope(Real z) const {
        if (family == Family::constant) return 0.0;
        const Real raw = r0 + r1 * z;
        return (raw > floor_ && raw < cap_) ? r1 : 0.0;
    }

    Real cap() const { return cap_; }
    bool is_constant() const { return family == Family::constant || r1 == 0.0; }

    void collect_violations(std::vector<Violation>& out) const {
        if (!(cap_ > 0.0)) out.push_back({errc::rate_unbounded, "rate cap must be positive"});
        if (family == Family::constant && !(r0 > 0.0 && r0 <= cap_))
            out.push_back({errc::rate_unbounded, "constant rate must satisfy 0 < r <= cap"});
        if (family == Family::affine && !(floor_ > 0.0 && floor_ < cap_))
            out.push_back({errc::rate_unbounded, "affine rate clamp requires 0 < floor < cap"});
    }
};

// ---------------------------------------------------------------------------
// Fiscal bounds: controls take values in [-u1, u2].
// ---------------------------------------------------------------------------
struct ControlBounds {
    Real u1 = 0.0;  // maximum deficit rate (applied as -u1)
    Real u2 = 0.0;  // maximum surplus rate

    Real lo() const { return -u1; }
    Real hi() const { return u2; }
    Real clamp(Real u) const { return std::clamp(u, lo(), hi()); }
    bool contains(Real u) const { return u >= lo() && u <= hi(); }

    void collect_violations(std::vector<Violation>& out) const {
        if (!(u1 > 0.0) || !std::isfinite(u1))
            out.push_back({errc::bounds_nonpositive, "deficit bound u1 must be positive and finite"});
        if (!(u2 > 0.0) || !std::isfinite(u2))
            out.push_back({errc::bounds_nonpositive, "surplus bound u2 must be positive and finite"});
    }
};

// ---------------------------------------------------------------------------
// GDP growth g(z, u). Two families:
//   linear_u:            g = g0(z) - alpha(z) u
//   concave_quadratic_u: g = g0(z) - alpha(z) u - beta(z) u^2, beta > 0
// Declared range [gbar1, gbar2] must cover g on the evaluation lattice and
// must straddle zero.
// ---------------------------------------------------------------------------
struct GrowthFunction {
    enum class Family { linear_u, concave_quadratic_u };

    Family family = Family::linear_u;
    AffineClamped g0;
    AffineClamped alpha;
    AffineClamped beta;
    Real gbar1 = 0.0;  // declared lower bound, < 0
    Real gbar2 = 0.0;  // declared upper bound, > 0

    static GrowthFunction linear_u(AffineClamped g0, AffineClamped alpha) {
        GrowthFunction g;
        g.family = Family::linear_u;
        g.g0 = g0;
        g.alpha = alpha;
        return g;
    }
    static GrowthFunction linear_u(Real g0, Real alpha) {
        return linear_u(AffineClamped::constant(g0), AffineClamped::constant(alpha));
    }
    static GrowthFunction concave_quadratic_u(AffineClamped g0, AffineClamped alpha,
                                              AffineClamped beta) {
        GrowthFunction g;
        g.family = Family::concave_quadratic_u;
        g.g0 = g0;
        g.alpha = alpha;
        g.beta = beta;
        return g;
    }
    static GrowthFunction concave_quadratic_u(Real g0, Real alpha, Real beta) {
        return concave_quadratic_u(AffineClamped::constant(g0), AffineClamped::constant(alpha),
                                   AffineClamped::constant(beta));
    }

    Real operator()(Real z, Real u) const {
        const Real base = g0(z) - alpha(z) * u;
        return family == Family::linear_u ? base : base - beta(z) * u * u;
    }

    Real du(Real z, Real u) const {
        return family == Family::linear_u ? -alpha(z) : -alpha(z) - 2.0 * beta(z) * u;
    }

    Real duu(Real z) const { return family == Family::linear_u ? 0.0 : -2.0 * beta(z); }

    Real dz(Real z, Real u) const {
        const Real base = g0.slope(z) - alpha.slope(z) * u;
        return family == Family::linear_u ? base : base - beta.slope(z) * u * u;
    }

    bool is_z_constant() const {
        return g0.is_constant() && alpha.is_constant() &&
               (family == Family::linear_u || beta.is_constant());
    }
    bool is_concave() const { return family == Family::concave_quadratic_u; }
};

// ---------------------------------------------------------------------------
// Running cost f(x, z) >= 0 with declared growth bound f <= C (1 + x^m).
//   power:              f = c0 x^m
//   quadratic_distance: f = (x - xbar)^2
// ---------------------------------------------------------------------------
struct CostFunction {
    enum class Family { power, quadratic_distance };

    Family family = Family::quadratic_distance;
    Real c0 = 0.0;    // power coefficient
    Real m = 2.0;     // power exponent
    Real xbar = 0.0;  // quadratic target

    static CostFunction power(Real c0, Real m) {
        return {Family::power, c0, m, 0.0};
    }
    static CostFunction quadratic_distance(Real xbar) {
        return {Family::quadratic_distance, 0.0, 2.0, xbar};
    }

    Real operator()(Real x, Real /*z*/) const {
        if (family == Family::power) return c0 * std::pow(x, m);
        const Real d = x - xbar;
        return d * d;
    }

    // growth-bound constants: f <= growth_constant() * (1 + x^growth_exponent())
    Real growth_exponent() const { return family == Family::power ? m : 2.0; }
    Real growth_constant() const {
        if (family == Family::power) return c0;
        return 2.0 * std::max(Real(1), xbar * xbar);
    }

    void collect_violations(std::vector<Violation>& out) const {
        if (family == Family::power) {
            if (c0 < 0.0) out.push_back({errc::cost_negative, "power cost coefficient must be >= 0"});
            if (!(m > 0.0)) out.push_back({errc::invalid_exponent, "cost exponent must be positive"});
        } else if (!(xbar > 0.0)) {
            out.push_back({errc::cost_negative, "quadratic cost target must be positive"});
        }
    }
};

// ---------------------------------------------------------------------------
// Full problem description.
// ---------------------------------------------------------------------------
struct Model {
    FactorDynamics factor;
    RateFunction rate;
    GrowthFunction growth;
    ControlBounds bounds;
    CostFunction cost;
    Real sigma = 0.0;   // GDP volatility, per sqrt(year)
    Real rho = 0.0;     // correlation between GDP and factor noise
    Real lambda = 0.0;  // discount rate, per year
    Real x0 = 0.0;      // initial debt-to-GDP ratio
    Real z0 = 0.0;      // initial factor state
};

// ---------------------------------------------------------------------------
// Evaluation lattice in z used for range checks. Degenerate factors collapse
// to the single point z0; otherwise the range covers six standard deviations
// of the factor over a ten-year reference window around its travel.
// ---------------------------------------------------------------------------
inline std::vector<Real> z_lattice(const Model& model, int n = 256) {
    constexpr Real t_ref = 10.0;
    Real center = model.z0, half = 0.0;
    switch (model.factor.family) {
        case FactorDynamics::Family::none: break;
        case FactorDynamics::Family::constant_coeff:
            center = model.z0 + 0.5 * model.factor.b * t_ref;
            half = 6.0 * model.factor.c * std::sqrt(t_ref) +
                   0.5 * std::abs(model.factor.b) * t_ref;
            break;
        case FactorDynamics::Family::ornstein_uhlenbeck:
            center = model.factor.theta;
            half = std::abs(model.z0 - model.factor.theta);
            if (model.factor.kappa > 0.0)
                half += 6.0 * model.factor.c / std::sqrt(2.0 * model.factor.kappa);
            break;
    }
    if (half == 0.0) return {center};
    std::vector<Real> zs(n);
    for (int i = 0; i < n; ++i)
        zs[i] = center - half + 2.0 * half * static_cast<Real>(i) / (n - 1);
    return zs;
}

namespace detail {

// Tight sampled range of g over lattice x control box (exact for
// z-constant coefficients; 256 control samples otherwise).
inline std::pair<Real, Real> sampled_growth_range(const GrowthFunction& g,
                                                  const std::vector<Real>& zs,
                                                  const ControlBounds& bounds, int nu = 256) {
    Real lo = inf, hi = -inf;
    for (const Real z : zs) {
        for (int j = 0; j < nu; ++j) {
            const Real u = bounds.lo() + (bounds.hi() - bounds.lo()) * static_cast<Real>(j) / (nu - 1);
            const Real v = g(z, u);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (g.family == GrowthFunction::Family::linear_u) {
            // linear in u: endpoints are exact
            lo = std::min({lo, g(z, bounds.lo()), g(z, bounds.hi())});
            hi = std::max({hi, g(z, bounds.lo()), g(z, bounds.hi())});
        } else {
            // concave in u: interior maximum at the vertex when it is feasible
            const Real b = g.beta(z);
            if (b > 0.0) {
                const Real vertex = -g.alpha(z) / (2.0 * b);
                if (bounds.contains(vertex)) hi = std::max(hi, g(z, vertex));
            }
        }
    }
    return {lo, hi};
}

}  // namespace detail

// Fills the declared growth range from the sampled one when the caller has
// not set it. Returns the model for chaining.
inline Model& derive_growth_bounds(Model& model) {
    if (model.growth.gbar1 == 0.0 && model.growth.gbar2 == 0.0) {
        const auto zs = z_lattice(model);
        const auto [lo, hi] = detail::sampled_growth_range(model.growth, zs, model.bounds);
        model.growth.gbar1 = lo;
        model.growth.gbar2 = hi;
    }
    return model;
}

// Moment growth rate: the m-th moment of the ratio grows at most like
// exp(lambda_m t). Admissible discounting requires lambda > lambda_m.
inline Real lambda_m(const Model& model, Real m) {
    if (!(m > 0.0)) fail(errc::invalid_exponent, "moment exponent must be positive");
    const Real drift_cap = model.rate.cap() - model.growth.gbar1 + model.bounds.u1;
    return m * drift_cap + 0.5 * m * (m - 1.0) * model.sigma * model.sigma;
}

// ---------------------------------------------------------------------------
// Validation: returns every violated constraint (empty means valid).
// ---------------------------------------------------------------------------
inline std::vector<Violation> check(const Model& model) {
    std::vector<Violation> out;
    model.factor.collect_violations(out);
    model.rate.collect_violations(out);
    model.bounds.collect_violations(out);
    model.cost.collect_violations(out);

    if (!(model.sigma > 0.0)) out.push_back({errc::sigma_nonpositive, "sigma must be positive"});
    if (!(model.rho >= -1.0 && model.rho <= 1.0))
        out.push_back({errc::rho_out_of_range, "rho must lie in [-1, 1]"});
    if (!(model.lambda > 0.0))
        out.push_back({errc::discount_nonpositive, "discount rate must be positive"});
    if (!(model.x0 > 0.0)) out.push_back({errc::x0_nonpositive, "initial ratio must be positive"});

    const auto zs = z_lattice(model);

    // rate positivity and cap on the lattice
    for (const Real z : zs) {
        const Real r = model.rate(z);
        if (!(r > 0.0 && r <= model.rate.cap())) {
            out.push_back({errc::rate_unbounded, "rate leaves (0, cap] on the evaluation range"});
            break;
        }
    }

    // growth component signs
    for (const Real z : zs) {
        if (model.growth.alpha(z) <= 0.0) {
            out.push_back({errc::alpha_nonpositive, "alpha must be positive on the evaluation range"});
            break;
        }
    }
    if (model.growth.is_concave()) {
        for (const Real z : zs) {
            if (model.growth.beta(z) <= 0.0) {
                out.push_back({errc::beta_nonpositive, "beta must be positive on the evaluation range"});
                break;
            }
        }
    }

    // declared growth range: must straddle zero and cover the sampled range
    const auto [glo, ghi] = detail::sampled_growth_range(model.growth, zs, model.bounds);
    if (!(model.growth.gbar1 < 0.0 && model.growth.gbar2 > 0.0))
        out.push_back({errc::growth_bounds_violated, "declared growth range must straddle zero"});
    else if (glo < model.growth.gbar1 - 1e-12 || ghi > model.growth.gbar2 + 1e-12)
        out.push_back({errc::growth_bounds_violated, "growth leaves its declared range"});

    // cost nonnegativity and growth bound on an x sample
    {
        const Real c = model.cost.growth_constant();
        const Real m = model.cost.growth_exponent();
        const Real x_hi = 10.0 * std::max(Real(1), std::max(model.x0, model.cost.xbar));
        for (int i = 0; i <= 256; ++i) {
            const Real x = x_hi * static_cast<Real>(i) / 256;
            const Real f = model.cost(x, model.z0);
            if (f < 0.0) {
                out.push_back({errc::cost_negative, "cost takes a negative value"});
                break;
            }
            if (f > c * (1.0 + std::pow(x, m)) * (1.0 + 1e-12)) {
                out.push_back({errc::cost_growth_violated, "cost exceeds its declared growth bound"});
                break;
            }
        }
    }

    // admissibility of the discount rate; skipped when the exponent is itself
    // invalid, which is already reported above
    if (model.lambda > 0.0 && model.growth.gbar1 < 0.0 && model.cost.growth_exponent() > 0.0) {
        const Real lm = lambda_m(model, model.cost.growth_exponent());
        if (!(model.lambda > lm))
            out.push_back({errc::lambda_too_small,
                           "discount rate must exceed the moment growth rate " + std::to_string(lm)});
    }
    return out;
}

// Throwing form: returns the model unchanged when valid.
inline const Model& validate(const Model& model) {
    const auto violations = check(model);
    if (!violations.empty()) {
        std::string what = "model validation failed:";
        for (const auto& v : violations)
            what += "\n  [" + std::string(to_string(v.code)) + "] " + v.detail;
        fail(violations.front().code, what);
    }
    return model;
}

// Convenience pipeline: fill derived fields, then validate.
inline Model make_validated(Model model) {
    derive_growth_bounds(model);
    validate(model);
    return model;
}

// ---------------------------------------------------------------------------
// Constant-coefficient diagnostics.
// ---------------------------------------------------------------------------

enum class EconomyKind { strong, weak, boundary };

constexpr std::string_view to_string(EconomyKind k) {
    switch (k) {
        case EconomyKind::strong: return "strong";
        case EconomyKind::weak: return "weak";
        case EconomyKind::boundary: return "boundary";
    }
    return "unknown";
}

// Growth-adjusted comparison of baseline growth and rate: strong economies
// have g0 + sigma^2/2 > r.
inline EconomyKind classify_economy(const Model& model) {
    if (!model.rate.is_constant() || !model.growth.g0.is_constant())
        fail(errc::not_applicable, "economy classification needs constant coefficients");
    const Real lhs = model.growth.g0(model.z0) + 0.5 * model.sigma * model.sigma;
    const Real r = model.rate(model.z0);
    if (lhs > r) return EconomyKind::strong;
    if (lhs < r) return EconomyKind::weak;
    return EconomyKind::boundary;
}

struct SustainabilityBounds {
    bool deficit_sustainable;   // u = -u1 keeps the discounted ratio vanishing
    bool surplus_sustainable;   // u = +u2 does
    Real deficit_threshold;     // deficit bound below which -u1 is sustainable
    Real surplus_threshold;     // surplus bound below which +u2 is sustainable
};

// Long-run sustainability of the two extreme constant policies for a linear
// control impact with alpha != 1.
inline SustainabilityBounds sustainability_bounds(const Model& model) {
    if (model.growth.family != GrowthFunction::Family::linear_u)
        fail(errc::not_applicable, "sustainability bounds need the linear growth family");
    if (!model.growth.alpha.is_constant())
        fail(errc::not_applicable, "sustainability bounds need constant alpha");
    const Real alpha = model.growth.alpha(model.z0);
    if (alpha == 1.0) fail(errc::degenerate_alpha, "alpha = 1 makes the control drift-neutral");

    const auto zs = z_lattice(model);
    Real g0_min = inf;
    for (const Real z : zs) g0_min = std::min(g0_min, model.growth.g0(z));

    return {
        .deficit_sustainable = model.bounds.u1 * (1.0 - alpha) < g0_min,
        .surplus_sustainable = model.bounds.u2 * (alpha - 1.0) < g0_min,
        .deficit_threshold = -g0_min / (alpha - 1.0),
        .surplus_threshold = -g0_min / (1.0 - alpha),
    };
}

}  // namespace debtctrl
