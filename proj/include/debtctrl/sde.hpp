#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "common.hpp"
#include "model.hpp"
#include "policy.hpp"
#include "rng.hpp"

namespace debtctrl {

// ---------------------------------------------------------------------------
// Simulation configuration. Path i draws from stream (seed, i), so results
// never depend on execution order; with antithetic pairing, paths 2j and
// 2j+1 share stream j and the odd path negates every Gaussian draw.
// ---------------------------------------------------------------------------
struct PathConfig {
    Real dt = 1.0 / 252.0;
    Real horizon = 10.0;
    std::int64_t n_paths = 10'000;
    std::uint64_t seed = 0;
    bool antithetic = false;

    int n_steps() const { return static_cast<int>(std::llround(horizon / dt)); }

    void require_valid() const {
        if (!(dt > 0.0) || !(horizon > 0.0) || dt > horizon)
            fail(errc::config_invalid, "path config requires 0 < dt <= horizon");
        if (n_paths < 1) fail(errc::config_invalid, "path config requires n_paths >= 1");
        if (n_steps() < 1) fail(errc::config_invalid, "horizon shorter than one step");
        if (antithetic && n_paths % 2 != 0)
            fail(errc::config_invalid, "antithetic pairing requires an even path count");
    }
};

// Observer protocol for the streaming engine. begin_path/end_path bracket
// each path; step sees the left state, the applied control, and the right
// state after one dt.
template <class O>
concept PathObserver = requires(O o, std::int64_t i, int k, Real v) {
    o.begin_path(i, v, v);
    o.step(i, k, v, v, v, v, v, v);
    o.end_path(i);
};

// ---------------------------------------------------------------------------
// Streaming engine. The factor advances by Euler-Maruyama; the ratio advances
// exactly in log space, so positivity, pathwise monotonicity in x0 and exact
// linearity (for controls that do not feed back on x) hold by construction.
// Controls and coefficients are frozen at the left endpoint of each step.
// ---------------------------------------------------------------------------
template <PolicyLike P, PathObserver O>
void run_paths(const Model& model, const P& policy, const PathConfig& cfg, O& obs) {
    cfg.require_valid();
    const int n = cfg.n_steps();
    const Real dt = cfg.dt;
    const Real sqrt_dt = std::sqrt(dt);
    const Real rho = model.rho;
    const Real rho_perp = std::sqrt(std::max(Real(0), 1.0 - rho * rho));
    const Real sig = model.sigma;

    for (std::int64_t i = 0; i < cfg.n_paths; ++i) {
        const std::uint64_t stream = cfg.antithetic ? static_cast<std::uint64_t>(i / 2)
                                                    : static_cast<std::uint64_t>(i);
        const Real flip = (cfg.antithetic && (i % 2 == 1)) ? Real(-1) : Real(1);
        NormalStream rng(cfg.seed, stream);

        Real x = model.x0, z = model.z0;
        obs.begin_path(i, x, z);
        for (int k = 0; k < n; ++k) {
            const Real u = policy(x, z);
            if (!model.bounds.contains(u))
                fail(errc::control_violation,
                     "policy value " + std::to_string(u) + " outside bounds at step " +
                         std::to_string(k));
            const Real xi_z = flip * rng();
            const Real xi_perp = flip * rng();
            const Real dw_z = sqrt_dt * xi_z;
            const Real dw = rho * dw_z + rho_perp * sqrt_dt * xi_perp;

            const Real drift = model.rate(z) - model.growth(z, u) - u - 0.5 * sig * sig;
            const Real x_next = x * std::exp(drift * dt + sig * dw);
            const Real z_next = z + model.factor.drift(z) * dt + model.factor.vol(z) * dw_z;

            obs.step(i, k, (k + 1) * dt, x, z, u, x_next, z_next);
            x = x_next;
            z = z_next;
        }
        obs.end_path(i);
    }
}

// ---------------------------------------------------------------------------
// Full path record.
// ---------------------------------------------------------------------------
struct Trajectory {
    std::vector<Real> t;
    std::vector<Real> z;
    std::vector<Real> x;
    std::vector<Real> u;           // control applied on [t_k, t_{k+1}); last entry re-evaluated
    std::vector<Real> disc_cost;   // trapezoid of exp(-lambda s) f over [0, t_k]
    std::vector<Real> disc_ratio;  // exp(-int_0^t r(Z) ds) X_t, left-endpoint rate
};

// Simulates and materializes every path. Memory grows with n_paths * n_steps;
// prefer the streaming estimators for large studies. Entry k of u is the
// control applied on [t_k, t_{k+1}); the terminal entry is re-evaluated at
// the final state.
template <PolicyLike P>
std::vector<Trajectory> simulate_paths(const Model& model, const P& policy,
                                       const PathConfig& cfg) {
    cfg.require_valid();

    struct Collector {
        const Model& model;
        const P& policy;
        Real dt;
        int n_steps;
        Trajectory cur{};
        Real rate_integral = 0.0;
        std::vector<Trajectory> done{};

        void begin_path(std::int64_t, Real x0, Real z0) {
            cur = {};
            rate_integral = 0.0;
            cur.t.reserve(n_steps + 1);
            cur.t.push_back(0.0);
            cur.z.push_back(z0);
            cur.x.push_back(x0);
            cur.u.push_back(policy(x0, z0));
            cur.disc_cost.push_back(0.0);
            cur.disc_ratio.push_back(x0);
        }
        void step(std::int64_t, int k, Real t1, Real x0, Real z0, Real, Real x1, Real z1) {
            const Real t0 = k * dt;
            const Real lambda = model.lambda;
            const Real inc = 0.5 * dt *
                             (std::exp(-lambda * t0) * model.cost(x0, z0) +
                              std::exp(-lambda * t1) * model.cost(x1, z1));
            rate_integral += model.rate(z0) * dt;
            cur.t.push_back(t1);
            cur.z.push_back(z1);
            cur.x.push_back(x1);
            cur.u.push_back(policy(x1, z1));
            cur.disc_cost.push_back(cur.disc_cost.back() + inc);
            cur.disc_ratio.push_back(std::exp(-rate_integral) * x1);
        }
        void end_path(std::int64_t) { done.push_back(std::move(cur)); }
    } collector{model, policy, cfg.dt, cfg.n_steps()};

    run_paths(model, policy, cfg, collector);
    return std::move(collector.done);
}

// ---------------------------------------------------------------------------
// Discounted-cost estimation.
// ---------------------------------------------------------------------------
struct CostEstimate {
    Real value = 0.0;
    Real std_error = 0.0;
    Real tail_bound = 0.0;  // deterministic bound on the truncated remainder
    Real horizon = 0.0;     // effective horizon after auto-extension
    std::int64_t n_samples = 0;
};

// Deterministic truncation bound: discounted cost beyond T is at most
// (C x_T^m / (lambda - lambda_m) + C / lambda) exp(-lambda T) with
// x_T = x0 exp((cap(r) - gbar1 + u1) T).
inline Real cost_tail_bound(const Model& model, Real t) {
    const Real c = model.cost.growth_constant();
    const Real m = model.cost.growth_exponent();
    const Real lm = lambda_m(model, m);
    const Real drift_cap = model.rate.cap() - model.growth.gbar1 + model.bounds.u1;
    const Real x_t = model.x0 * std::exp(drift_cap * t);
    return (c * std::pow(x_t, m) / (model.lambda - lm) + c / model.lambda) *
           std::exp(-model.lambda * t);
}

// Smallest quarter-year multiple of the starting horizon whose tail bound
// drops below eps.
inline Real horizon_for_tolerance(const Model& model, Real eps, Real start,
                                  Real max_horizon = 200.0) {
    const Real m = model.cost.growth_exponent();
    const Real lm = lambda_m(model, m);
    if (!(model.lambda > lm))
        fail(errc::lambda_too_small, "tail bound needs lambda above the moment growth rate");
    const Real drift_cap = model.rate.cap() - model.growth.gbar1 + model.bounds.u1;
    if (m * drift_cap >= model.lambda)
        fail(errc::horizon_overflow, "tail bound does not decay for this exponent");
    Real t = start;
    while (cost_tail_bound(model, t) >= eps) {
        t += 0.25;
        if (t > max_horizon)
            fail(errc::horizon_overflow,
                 "requested tail tolerance unreachable within the maximum horizon");
    }
    return t;
}

// Monte-Carlo estimate of J = E int_0^inf exp(-lambda t) f dt under the given
// policy, truncated at an auto-extended horizon with the requested tail
// tolerance. With antithetic pairing the estimator treats each pair average
// as one sample.
template <PolicyLike P>
CostEstimate estimate_cost(const Model& model, const P& policy, PathConfig cfg,
                           Real tail_eps = 1e-6) {
    cfg.require_valid();
    cfg.horizon = horizon_for_tolerance(model, tail_eps, cfg.horizon);

    const int n = cfg.n_steps();
    const Real lambda = model.lambda;
    std::vector<Real> disc(n + 1);
    for (int k = 0; k <= n; ++k) disc[k] = std::exp(-lambda * k * cfg.dt);

    struct Accumulator {
        const Model& model;
        const std::vector<Real>& disc;
        Real dt;
        bool antithetic;
        Real path_j = 0.0, pair_j = 0.0;
        // Welford accumulation over samples (paths, or antithetic pair means)
        std::int64_t count = 0;
        Real mean = 0.0, m2 = 0.0;

        void begin_path(std::int64_t, Real, Real) { path_j = 0.0; }
        void step(std::int64_t, int k, Real, Real x0, Real z0, Real, Real x1, Real z1) {
            path_j += 0.5 * dt *
                      (disc[k] * model.cost(x0, z0) + disc[k + 1] * model.cost(x1, z1));
        }
        void end_path(std::int64_t i) {
            if (antithetic) {
                if (i % 2 == 0) {
                    pair_j = path_j;
                    return;
                }
                push(0.5 * (pair_j + path_j));
            } else {
                push(path_j);
            }
        }
        void push(Real v) {
            ++count;
            const Real d = v - mean;
            mean += d / count;
            m2 += d * (v - mean);
        }
    } acc{model, disc, cfg.dt, cfg.antithetic};

    run_paths(model, policy, cfg, acc);

    CostEstimate est;
    est.n_samples = acc.count;
    est.value = acc.mean;
    est.std_error = acc.count > 1 ? std::sqrt(acc.m2 / (acc.count - 1) / acc.count) : 0.0;
    est.tail_bound = cost_tail_bound(model, cfg.horizon);
    est.horizon = cfg.horizon;
    return est;
}

// ---------------------------------------------------------------------------
// Moment-bound diagnostic: empirical E[X_t^m] against x0^m exp(lambda_m t).
// ---------------------------------------------------------------------------
struct MomentBoundReport {
    Real m = 0.0;
    Real t = 0.0;
    Real empirical = 0.0;
    Real std_error = 0.0;
    Real bound = 0.0;
    bool pass = false;
};

template <PolicyLike P>
MomentBoundReport moment_bound_check(const Model& model, const P& policy, const PathConfig& cfg,
                                     Real m, Real t) {
    cfg.require_valid();
    if (!(m > 0.0)) fail(errc::invalid_exponent, "moment exponent must be positive");
    if (t > cfg.horizon + 1e-12) fail(errc::config_invalid, "moment time exceeds the horizon");
    const int k_target = std::min(cfg.n_steps(), static_cast<int>(std::llround(t / cfg.dt)));

    struct Accumulator {
        Real m;
        int k_target;
        std::int64_t count = 0;
        Real mean = 0.0, m2 = 0.0;
        void begin_path(std::int64_t, Real x0, Real) {
            if (k_target == 0) push(std::pow(x0, m));
        }
        void step(std::int64_t, int k, Real, Real, Real, Real, Real x1, Real) {
            if (k + 1 == k_target) push(std::pow(x1, m));
        }
        void end_path(std::int64_t) {}
        void push(Real v) {
            ++count;
            const Real d = v - mean;
            mean += d / count;
            m2 += d * (v - mean);
        }
    } acc{m, k_target};

    run_paths(model, policy, cfg, acc);

    MomentBoundReport rep;
    rep.m = m;
    rep.t = k_target * cfg.dt;
    rep.empirical = acc.mean;
    rep.std_error = acc.count > 1 ? std::sqrt(acc.m2 / (acc.count - 1) / acc.count) : 0.0;
    rep.bound = std::pow(model.x0, m) * std::exp(lambda_m(model, m) * rep.t);
    const Real rel = rep.empirical > 0.0 ? rep.std_error / rep.empirical : 0.0;
    rep.pass = rep.empirical <= rep.bound * (1.0 + 3.0 * rel);
    return rep;
}

// ---------------------------------------------------------------------------
// Sustainability diagnostic: mean rate-discounted ratio across horizons and a
// geometric-decay verdict from the least-squares slope of its logarithm.
// ---------------------------------------------------------------------------
struct SustainabilityReport {
    std::vector<Real> horizons;
    std::vector<Real> mean_ratio;
    Real fit_slope = 0.0;
    bool sustainable = false;
};

template <PolicyLike P>
SustainabilityReport sustainability_check(const Model& model, const P& policy,
                                          const PathConfig& cfg, std::vector<Real> horizons) {
    cfg.require_valid();
    if (horizons.empty()) fail(errc::config_invalid, "at least one horizon required");
    for (std::size_t i = 1; i < horizons.size(); ++i)
        if (horizons[i] <= horizons[i - 1])
            fail(errc::config_invalid, "horizons must be strictly increasing");
    if (horizons.back() > cfg.horizon + 1e-12)
        fail(errc::config_invalid, "last horizon exceeds the simulation horizon");

    std::vector<int> k_targets;
    k_targets.reserve(horizons.size());
    for (const Real h : horizons)
        k_targets.push_back(std::min(cfg.n_steps(), static_cast<int>(std::llround(h / cfg.dt))));

    struct Accumulator {
        const Model& model;
        const std::vector<int>& k_targets;
        Real dt;
        Real rate_integral = 0.0;
        std::vector<Real> sums;
        std::int64_t count = 0;

        void begin_path(std::int64_t, Real x0, Real z0) {
            rate_integral = 0.0;
            ++count;
            for (std::size_t j = 0; j < k_targets.size(); ++j)
                if (k_targets[j] == 0) sums[j] += x0;
            (void)z0;
        }
        void step(std::int64_t, int k, Real, Real, Real z0, Real, Real x1, Real) {
            rate_integral += model.rate(z0) * dt;
            for (std::size_t j = 0; j < k_targets.size(); ++j)
                if (k_targets[j] == k + 1) sums[j] += std::exp(-rate_integral) * x1;
        }
        void end_path(std::int64_t) {}
    } acc{model, k_targets, cfg.dt, 0.0, std::vector<Real>(horizons.size(), 0.0)};

    run_paths(model, policy, cfg, acc);

    SustainabilityReport rep;
    rep.horizons = std::move(horizons);
    rep.mean_ratio.reserve(rep.horizons.size());
    for (const Real s : acc.sums) rep.mean_ratio.push_back(s / acc.count);

    // least-squares slope of log(mean) on horizon
    const std::size_t n = rep.horizons.size();
    if (n == 1) {
        rep.fit_slope = rep.mean_ratio[0] < model.x0 ? -1.0 : 1.0;
    } else {
        Real st = 0, sy = 0, stt = 0, sty = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const Real y = std::log(std::max(rep.mean_ratio[j], Real(1e-300)));
            st += rep.horizons[j];
            sy += y;
            stt += rep.horizons[j] * rep.horizons[j];
            sty += rep.horizons[j] * y;
        }
        rep.fit_slope = (n * sty - st * sy) / (n * stt - st * st);
    }
    rep.sustainable = rep.fit_slope < 0.0;
    return rep;
}

// ---------------------------------------------------------------------------
// Covariation diagnostic: discrete covariation of r(Z) and g(Z, u) against
// the analytic integral of dz g * r' * vol^2. The gap shrinks at first order
// in dt.
// ---------------------------------------------------------------------------
struct CovariationReport {
    Real mean_discrete = 0.0;
    Real mean_formula = 0.0;
    Real max_abs_gap = 0.0;
};

inline CovariationReport covariation_diagnostic(const Model& model, Real u_fixed,
                                                const PathConfig& cfg) {
    cfg.require_valid();
    if (!model.bounds.contains(u_fixed))
        fail(errc::control_violation, "fixed control outside bounds");

    struct Accumulator {
        const Model& model;
        Real u;
        Real dt;
        Real discrete = 0.0, formula = 0.0;
        std::int64_t count = 0;
        Real sum_d = 0.0, sum_f = 0.0, max_gap = 0.0;

        void begin_path(std::int64_t, Real, Real) { discrete = formula = 0.0; }
        void step(std::int64_t, int, Real, Real, Real z0, Real, Real, Real z1) {
            const Real dr = model.rate(z1) - model.rate(z0);
            const Real dg = model.growth(z1, u) - model.growth(z0, u);
            discrete += dr * dg;
            const Real vol = model.factor.vol(z0);
            formula += model.growth.dz(z0, u) * model.rate.slope(z0) * vol * vol * dt;
        }
        void end_path(std::int64_t) {
            ++count;
            sum_d += discrete;
            sum_f += formula;
            max_gap = std::max(max_gap, std::abs(discrete - formula));
        }
    } acc{model, u_fixed, cfg.dt};

    ConstantPolicy fixed{u_fixed};
    run_paths(model, fixed, cfg, acc);

    return {acc.sum_d / acc.count, acc.sum_f / acc.count, acc.max_gap};
}

}  // namespace debtctrl
