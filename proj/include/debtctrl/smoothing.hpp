#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "common.hpp"
#include "model.hpp"
#include "policy.hpp"

namespace debtctrl {

// Coefficient scheme for the piecewise closed form.
//
//   consistent: power exponents are the exact roots of the characteristic
//     equation (sigma^2/2) g (g - 1) + (G_i + r) g - lambda = 0 and the power
//     coefficients d1, d2 solve the 2x2 linear system expressing first- and
//     second-derivative continuity at the switching point. Pasting residuals
//     and interior equation residuals vanish to machine precision.
//
//   reference: transcribes the coefficient recipe behind the benchmark
//     threshold table shipped with the CLI (exponent discriminant with
//     4*lambda*sigma^2 instead of 8*lambda*sigma^2, d2 denominator exponent
//     gamma2 - 3 instead of gamma2 - 1, d1 from upper-branch stationarity).
//     It reproduces that table's eight thresholds to 5e-5 but does not
//     satisfy the characteristic equation or first-derivative continuity;
//     see README for the discrepancy analysis.
enum class SmoothingScheme { consistent, reference };

constexpr std::string_view to_string(SmoothingScheme s) {
    return s == SmoothingScheme::consistent ? "consistent" : "reference";
}

// How solve_threshold treats multiple value-matching roots.
enum class RootSelect { require_unique, smallest };

// ---------------------------------------------------------------------------
// Extreme drifts G1 = min_u -(g(u) + u), G2 = max_u -(g(u) + u), with the
// attaining controls. Requires constant coefficients.
// ---------------------------------------------------------------------------
struct DriftExtremes {
    Real g1 = 0.0;  // minimum of -(g + u): strongest downward pull on the ratio
    Real g2 = 0.0;  // maximum
    Real u_at_g1 = 0.0;
    Real u_at_g2 = 0.0;
};

inline DriftExtremes drift_extremes(const Model& model) {
    if (!model.growth.is_z_constant())
        fail(errc::not_applicable, "drift extremes need constant coefficients");
    const Real z = model.z0;
    const Real lo = model.bounds.lo(), hi = model.bounds.hi();
    const auto neg_total = [&](Real u) { return -(model.growth(z, u) + u); };

    DriftExtremes out;
    if (model.growth.family == GrowthFunction::Family::linear_u) {
        // -(g + u) is affine in u: both extremes sit at endpoints
        const Real at_lo = neg_total(lo), at_hi = neg_total(hi);
        if (at_lo <= at_hi) out = {at_lo, at_hi, lo, hi};
        else out = {at_hi, at_lo, hi, lo};
    } else {
        // g + u is concave in u: its maximum (the minimum of -(g + u)) sits at
        // the clamped vertex, its minimum at an endpoint
        const Real vertex =
            std::clamp((1.0 - model.growth.alpha(z)) / (2.0 * model.growth.beta(z)), lo, hi);
        out.u_at_g1 = vertex;
        out.g1 = neg_total(vertex);
        const Real at_lo = neg_total(lo), at_hi = neg_total(hi);
        if (at_lo >= at_hi) out.g2 = at_lo, out.u_at_g2 = lo;
        else out.g2 = at_hi, out.u_at_g2 = hi;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Quadratic-branch coefficients of the ansatz a x^2 + b x + c + d x^gamma.
// ---------------------------------------------------------------------------
struct QuadraticCoeffs {
    Real a1, a2, b1, b2, c;
};

inline QuadraticCoeffs quadratic_coeffs(const Model& model, Real g1, Real g2) {
    const Real r = model.rate(model.z0);
    const Real lam = model.lambda;
    const Real s2 = model.sigma * model.sigma;
    const Real xbar = model.cost.xbar;
    const Real den_a1 = lam - 2.0 * (g1 + r) - s2;
    const Real den_a2 = lam - 2.0 * (g2 + r) - s2;
    if (!(den_a1 > 0.0) || !(den_a2 > 0.0))
        fail(errc::discount_too_small, "lambda must exceed 2(G + r) + sigma^2 on both branches");
    if (!(lam - (g1 + r) > 0.0) || !(lam - (g2 + r) > 0.0))
        fail(errc::discount_too_small, "lambda must exceed G + r on both branches");
    return {1.0 / den_a1, 1.0 / den_a2, 2.0 * xbar / (g1 + r - lam), 2.0 * xbar / (g2 + r - lam),
            xbar * xbar / lam};
}

// ---------------------------------------------------------------------------
// Power exponents gamma1 < 0 < gamma2 for the two branches.
// ---------------------------------------------------------------------------
inline std::pair<Real, Real> gamma_roots(const Model& model, Real g1, Real g2,
                                         SmoothingScheme scheme = SmoothingScheme::consistent) {
    if (!(model.sigma > 0.0)) fail(errc::degenerate_diffusion, "exponents need sigma > 0");
    if (!(model.lambda > 0.0)) fail(errc::discount_nonpositive, "exponents need lambda > 0");
    const Real r = model.rate(model.z0);
    const Real s2 = model.sigma * model.sigma;
    const Real disc_scale = scheme == SmoothingScheme::consistent ? 8.0 : 4.0;
    const auto root = [&](Real g, Real sign) {
        const Real p = 2.0 * (g + r) - s2;
        return (-p + sign * std::sqrt(p * p + disc_scale * model.lambda * s2)) / (2.0 * s2);
    };
    const Real gamma1 = root(g1, -1.0);
    const Real gamma2 = root(g2, +1.0);
    if (!(gamma1 < 0.0 && gamma2 > 0.0))
        fail(errc::internal_inconsistency, "exponent signs violated");
    return {gamma1, gamma2};
}

// ---------------------------------------------------------------------------
// Power coefficients d1 (branch above the switch) and d2 (below) for a given
// candidate switching point.
// ---------------------------------------------------------------------------
struct SmoothingPieces {
    QuadraticCoeffs q;
    Real gamma1, gamma2;
};

inline std::pair<Real, Real> d_coefficients(const SmoothingPieces& p, Real x_tilde,
                                            SmoothingScheme scheme = SmoothingScheme::consistent) {
    if (!(x_tilde > 0.0)) fail(errc::domain_error, "switching point must be positive");
    const auto& [a1, a2, b1, b2, c] = p.q;
    const Real g1 = p.gamma1, g2 = p.gamma2;
    if (g2 == 0.0 || g2 == 1.0) fail(errc::degenerate_root, "gamma2 in {0, 1} is degenerate");

    if (scheme == SmoothingScheme::reference) {
        const Real d1 = -(2.0 * a1 * x_tilde + b1) / (g1 * std::pow(x_tilde, g1 - 1.0));
        const Real d2 = (2.0 * (a1 - a2) * x_tilde - (g1 - 1.0) * (2.0 * a1 * x_tilde + b1)) /
                        (g2 * (g2 - 1.0) * std::pow(x_tilde, g2 - 3.0));
        return {d1, d2};
    }

    // first- and second-derivative continuity as a linear system in (d1, d2):
    //   g1 t^(g1-1) d1 - g2 t^(g2-1) d2 = (2 a2 t + b2) - (2 a1 t + b1)
    //   g1 (g1-1) t^(g1-2) d1 - g2 (g2-1) t^(g2-2) d2 = 2 (a2 - a1)
    const Real m11 = g1 * std::pow(x_tilde, g1 - 1.0);
    const Real m12 = -g2 * std::pow(x_tilde, g2 - 1.0);
    const Real m21 = g1 * (g1 - 1.0) * std::pow(x_tilde, g1 - 2.0);
    const Real m22 = -g2 * (g2 - 1.0) * std::pow(x_tilde, g2 - 2.0);
    const Real r1 = (2.0 * a2 * x_tilde + b2) - (2.0 * a1 * x_tilde + b1);
    const Real r2 = 2.0 * (a2 - a1);
    const Real det = m11 * m22 - m12 * m21;
    if (det == 0.0) fail(errc::degenerate_root, "pasting system is singular");
    return {(r1 * m22 - m12 * r2) / det, (m11 * r2 - r1 * m21) / det};
}

// ---------------------------------------------------------------------------
// Value-matching residual F(t) = upper(t) - lower(t) with scheme-consistent
// d-coefficients recomputed per candidate.
// ---------------------------------------------------------------------------
inline Real value_match_residual(const SmoothingPieces& p, Real t, SmoothingScheme scheme) {
    const auto [d1, d2] = d_coefficients(p, t, scheme);
    const auto& [a1, a2, b1, b2, c] = p.q;
    const Real upper = a1 * t * t + b1 * t + d1 * std::pow(t, p.gamma1);
    const Real lower = a2 * t * t + b2 * t + d2 * std::pow(t, p.gamma2);
    return upper - lower;
}

namespace detail {

inline SmoothingPieces build_pieces(const Model& model, SmoothingScheme scheme) {
    if (model.cost.family != CostFunction::Family::quadratic_distance)
        fail(errc::not_applicable, "smoothing needs the quadratic-distance cost");
    if (!model.rate.is_constant() || !model.growth.is_z_constant())
        fail(errc::not_applicable, "smoothing needs constant coefficients");
    const auto ext = drift_extremes(model);
    if (ext.g1 == ext.g2)
        fail(errc::degenerate_alpha,
             "control does not move the drift; the two-branch construction is degenerate");
    const auto q = quadratic_coeffs(model, ext.g1, ext.g2);
    const auto [gamma1, gamma2] = gamma_roots(model, ext.g1, ext.g2, scheme);
    return {q, gamma1, gamma2};
}

}  // namespace detail

// All value-matching roots on [xbar/10, 10 xbar], found by a 512-interval
// sign scan followed by bracketed refinement to |F| < 1e-12 and bracket
// width < 1e-10.
inline std::vector<Real> threshold_candidates(const Model& model,
                                              SmoothingScheme scheme = SmoothingScheme::consistent) {
    const auto pieces = detail::build_pieces(model, scheme);
    const Real lo = model.cost.xbar / 10.0, hi = 10.0 * model.cost.xbar;
    const auto f = [&](Real t) { return value_match_residual(pieces, t, scheme); };
    std::vector<Real> roots;
    for (const auto& [blo, bhi] : scan_sign_changes(f, lo, hi, 512)) {
        const Real root = refine_root(f, blo, bhi, {.x_tol = 1e-10, .f_tol = 1e-12});
        if (roots.empty() || std::abs(root - roots.back()) > 1e-9) roots.push_back(root);
    }
    return roots;
}

inline Real solve_threshold(const Model& model,
                            SmoothingScheme scheme = SmoothingScheme::consistent,
                            RootSelect select = RootSelect::require_unique) {
    const auto roots = threshold_candidates(model, scheme);
    if (roots.empty()) {
        const auto pieces = detail::build_pieces(model, scheme);
        const Real lo = model.cost.xbar / 10.0, hi = 10.0 * model.cost.xbar;
        fail(errc::no_threshold,
             "no sign change of the value-matching residual on [" + std::to_string(lo) + ", " +
                 std::to_string(hi) + "]; F(lo) = " +
                 std::to_string(value_match_residual(pieces, lo, scheme)) + ", F(hi) = " +
                 std::to_string(value_match_residual(pieces, hi, scheme)));
    }
    if (roots.size() > 1 && select == RootSelect::require_unique) {
        std::string list;
        for (std::size_t i = 0; i < roots.size() && i < 8; ++i)
            list += " " + std::to_string(roots[i]);
        if (roots.size() > 8) list += " ... (" + std::to_string(roots.size()) + " total)";
        fail(errc::ambiguous_threshold, "multiple value-matching roots:" + list);
    }
    return roots.front();
}

// ---------------------------------------------------------------------------
// Assembled piecewise solution
//   w(x) = a1 x^2 + b1 x + c + d1 x^gamma1   for x >= x_tilde
//          a2 x^2 + b2 x + c + d2 x^gamma2   for x <  x_tilde
// ---------------------------------------------------------------------------
struct SmoothingSolution {
    Real g1 = 0.0, g2 = 0.0;          // extreme drifts
    Real a1 = 0.0, a2 = 0.0;
    Real b1 = 0.0, b2 = 0.0;
    Real c = 0.0;                     // shared constant xbar^2 / lambda
    Real gamma1 = 0.0, gamma2 = 0.0;  // power exponents, gamma1 < 0 < gamma2
    Real d1 = 0.0, d2 = 0.0;          // power coefficients
    Real x_tilde = 0.0;               // switching point
    Real alpha = 0.0;                 // control impact, fixes the orientation
    SmoothingScheme scheme = SmoothingScheme::consistent;
    // problem constants retained for residual evaluation
    Real lambda = 0.0, sigma = 0.0, r = 0.0, xbar = 0.0;

    // branch evaluators; branch 1 applies at and above the switch
    Real branch1(Real x) const { return a1 * x * x + b1 * x + c + d1 * std::pow(x, gamma1); }
    Real branch2(Real x) const { return a2 * x * x + b2 * x + c + d2 * std::pow(x, gamma2); }

    Real value(Real x) const {
        require_domain(x);
        return x >= x_tilde ? branch1(x) : branch2(x);
    }
    Real deriv(Real x) const {
        require_domain(x);
        return x >= x_tilde ? 2.0 * a1 * x + b1 + gamma1 * d1 * std::pow(x, gamma1 - 1.0)
                            : 2.0 * a2 * x + b2 + gamma2 * d2 * std::pow(x, gamma2 - 1.0);
    }
    Real second(Real x) const {
        require_domain(x);
        return x >= x_tilde
                   ? 2.0 * a1 + gamma1 * (gamma1 - 1.0) * d1 * std::pow(x, gamma1 - 2.0)
                   : 2.0 * a2 + gamma2 * (gamma2 - 1.0) * d2 * std::pow(x, gamma2 - 2.0);
    }

  private:
    static void require_domain(Real x) {
        if (!(x > 0.0)) fail(errc::domain_error, "value function defined for x > 0");
    }
};

inline SmoothingSolution smoothing_solution(const Model& model,
                                            SmoothingScheme scheme = SmoothingScheme::consistent,
                                            RootSelect select = RootSelect::require_unique) {
    const auto pieces = detail::build_pieces(model, scheme);
    const Real x_tilde = solve_threshold(model, scheme, select);
    const auto [d1, d2] = d_coefficients(pieces, x_tilde, scheme);

    SmoothingSolution sol;
    const auto ext = drift_extremes(model);
    sol.g1 = ext.g1;
    sol.g2 = ext.g2;
    sol.a1 = pieces.q.a1;
    sol.a2 = pieces.q.a2;
    sol.b1 = pieces.q.b1;
    sol.b2 = pieces.q.b2;
    sol.c = pieces.q.c;
    sol.gamma1 = pieces.gamma1;
    sol.gamma2 = pieces.gamma2;
    sol.d1 = d1;
    sol.d2 = d2;
    sol.x_tilde = x_tilde;
    sol.alpha = model.growth.alpha(model.z0);
    sol.scheme = scheme;
    sol.lambda = model.lambda;
    sol.sigma = model.sigma;
    sol.r = model.rate(model.z0);
    sol.xbar = model.cost.xbar;

    // the assembled value must be convex on the working range
    for (int i = 0; i <= 1000; ++i) {
        const Real x = 0.05 + (5.0 - 0.05) * static_cast<Real>(i) / 1000;
        if (!(sol.second(x) > 0.0))
            fail(errc::scheme_violation, "assembled value not convex at x = " + std::to_string(x));
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Pasting residuals at the switching point, evaluated from both branches.
// ---------------------------------------------------------------------------
struct SmoothFitReport {
    Real value_gap;
    Real slope_gap;
    Real curvature_gap;
    Real stationarity;  // |w'(x_tilde+)|: the slope itself vanishes at the switch
};

inline SmoothFitReport verify_smooth_fit(const SmoothingSolution& sol) {
    const Real t = sol.x_tilde;
    const Real w1 = sol.branch1(t);
    const Real w2 = sol.branch2(t);
    const Real s1 = 2.0 * sol.a1 * t + sol.b1 + sol.gamma1 * sol.d1 * std::pow(t, sol.gamma1 - 1.0);
    const Real s2 = 2.0 * sol.a2 * t + sol.b2 + sol.gamma2 * sol.d2 * std::pow(t, sol.gamma2 - 1.0);
    const Real c1 =
        2.0 * sol.a1 + sol.gamma1 * (sol.gamma1 - 1.0) * sol.d1 * std::pow(t, sol.gamma1 - 2.0);
    const Real c2 =
        2.0 * sol.a2 + sol.gamma2 * (sol.gamma2 - 1.0) * sol.d2 * std::pow(t, sol.gamma2 - 2.0);
    return {std::abs(w1 - w2), std::abs(s1 - s2), std::abs(c1 - c2), std::abs(s1)};
}

// ---------------------------------------------------------------------------
// Interior equation residual: |(G + r) x w' + (x - xbar)^2 + s^2 x^2 w''/2
// - lambda w| with G chosen by the sign of w' (G1 where w' >= 0).
// ---------------------------------------------------------------------------
inline Real hjb_residual_smoothing(const SmoothingSolution& sol, const Model& model, Real x) {
    if (!(x > 0.0)) fail(errc::domain_error, "residual defined for x > 0");
    const Real w = sol.value(x);
    const Real wp = sol.deriv(x);
    const Real wpp = sol.second(x);
    const Real g = wp >= 0.0 ? sol.g1 : sol.g2;
    const Real r = model.rate(model.z0);
    const Real d = x - model.cost.xbar;
    return std::abs((g + r) * x * wp + d * d + 0.5 * sol.sigma * sol.sigma * x * x * wpp -
                    sol.lambda * w);
}

// ---------------------------------------------------------------------------
// Optimal rule induced by the solution: bang-bang at the switching point,
// closed on the right. Orientation follows the control impact.
// ---------------------------------------------------------------------------
inline ThresholdBangBang smoothing_policy(const SmoothingSolution& sol, const Model& model) {
    if (model.growth.family != GrowthFunction::Family::linear_u)
        fail(errc::not_applicable, "bang-bang rule needs the linear growth family");
    if (!model.growth.alpha.is_constant())
        fail(errc::not_applicable, "bang-bang rule needs constant alpha");
    const Real alpha = model.growth.alpha(model.z0);
    if (alpha == 1.0) fail(errc::degenerate_alpha, "alpha = 1 makes the control drift-neutral");
    const Real lo = model.bounds.lo(), hi = model.bounds.hi();
    if (alpha < 1.0) return {sol.x_tilde, lo, hi};
    return {sol.x_tilde, hi, lo};
}

}  // namespace debtctrl
