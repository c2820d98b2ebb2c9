#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace debtctrl {

using Real = double;

inline constexpr Real inf = std::numeric_limits<Real>::infinity();

// Every failure mode has a stable code so callers (and the CLI exit-code
// mapping) can dispatch without parsing messages.
enum class errc {
    // construction / validation
    invalid_exponent,
    rate_unbounded,
    growth_bounds_violated,
    alpha_nonpositive,
    beta_nonpositive,
    bounds_nonpositive,
    cost_negative,
    cost_growth_violated,
    sigma_nonpositive,
    rho_out_of_range,
    discount_nonpositive,
    lambda_too_small,
    x0_nonpositive,
    factor_invalid,
    degenerate_alpha,
    not_applicable,
    domain_error,
    // simulation
    control_violation,
    horizon_overflow,
    // optimization / solvers
    nonconvex_hamiltonian,
    degenerate_diffusion,
    degenerate_root,
    discount_too_small,
    no_threshold,
    ambiguous_threshold,
    invalid_candidate,
    scheme_violation,
    no_convergence,
    structure_mismatch,
    // plumbing
    config_invalid,
    io_failure,
    internal_inconsistency,
};

constexpr std::string_view to_string(errc c) {
    switch (c) {
        case errc::invalid_exponent: return "invalid-exponent";
        case errc::rate_unbounded: return "rate-unbounded";
        case errc::growth_bounds_violated: return "growth-bounds-violated";
        case errc::alpha_nonpositive: return "alpha-nonpositive";
        case errc::beta_nonpositive: return "beta-nonpositive";
        case errc::bounds_nonpositive: return "bounds-nonpositive";
        case errc::cost_negative: return "cost-negative";
        case errc::cost_growth_violated: return "cost-growth-violated";
        case errc::sigma_nonpositive: return "sigma-nonpositive";
        case errc::rho_out_of_range: return "rho-out-of-range";
        case errc::discount_nonpositive: return "discount-nonpositive";
        case errc::lambda_too_small: return "lambda-too-small";
        case errc::x0_nonpositive: return "x0-nonpositive";
        case errc::factor_invalid: return "factor-invalid";
        case errc::degenerate_alpha: return "degenerate-alpha";
        case errc::not_applicable: return "not-applicable";
        case errc::domain_error: return "domain-error";
        case errc::control_violation: return "control-violation";
        case errc::horizon_overflow: return "horizon-overflow";
        case errc::nonconvex_hamiltonian: return "nonconvex-hamiltonian";
        case errc::degenerate_diffusion: return "degenerate-diffusion";
        case errc::degenerate_root: return "degenerate-root";
        case errc::discount_too_small: return "discount-too-small";
        case errc::no_threshold: return "no-threshold";
        case errc::ambiguous_threshold: return "ambiguous-threshold";
        case errc::invalid_candidate: return "invalid-candidate";
        case errc::scheme_violation: return "scheme-violation";
        case errc::no_convergence: return "no-convergence";
        case errc::structure_mismatch: return "structure-mismatch";
        case errc::config_invalid: return "config-invalid";
        case errc::io_failure: return "io-failure";
        case errc::internal_inconsistency: return "internal-inconsistency";
    }
    return "unknown";
}

class error : public std::runtime_error {
  public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

// A named constraint violation; validation returns these instead of throwing
// so callers can report every problem at once.
struct Violation {
    errc code;
    std::string detail;
};

namespace detail {

inline bool close(Real a, Real b, Real atol, Real rtol = 0.0) {
    return std::abs(a - b) <= atol + rtol * std::max(std::abs(a), std::abs(b));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scalar root finding on a bracket.
// ---------------------------------------------------------------------------

struct RootOptions {
    Real x_tol = 1e-10;   // bracket width target
    Real f_tol = 1e-12;   // residual target
    int max_iter = 200;
};

// Safeguarded secant/bisection refinement of a sign-change bracket [lo, hi].
// Requires f(lo) and f(hi) of opposite sign (either may be zero). The result
// satisfies |f| <= f_tol or bracket width <= x_tol, whichever binds later:
// both targets are pursued until max_iter.
template <class F>
Real refine_root(F&& f, Real lo, Real hi, RootOptions opt = {}) {
    Real flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi))
        fail(errc::internal_inconsistency, "refine_root called without a sign change");
    Real best = lo, fbest = flo;
    if (std::abs(fhi) < std::abs(flo)) best = hi, fbest = fhi;
    for (int it = 0; it < opt.max_iter; ++it) {
        // secant proposal, clipped into the open bracket; fall back to midpoint
        Real mid = 0.5 * (lo + hi);
        Real x = mid;
        const Real denom = fhi - flo;
        if (denom != 0.0) {
            const Real sec = lo - flo * (hi - lo) / denom;
            if (sec > lo && sec < hi) x = sec;
        }
        // alternate toward bisection progress when the secant stalls at an edge
        const Real w = hi - lo;
        if (std::abs(x - lo) < 0.01 * w || std::abs(hi - x) < 0.01 * w) x = mid;
        const Real fx = f(x);
        if (std::abs(fx) < std::abs(fbest)) best = x, fbest = fx;
        if (fx == 0.0) return x;
        if (std::signbit(fx) == std::signbit(flo)) lo = x, flo = fx;
        else hi = x, fhi = fx;
        if (std::abs(fbest) <= opt.f_tol && hi - lo <= opt.x_tol) return best;
    }
    if (std::abs(fbest) <= opt.f_tol || hi - lo <= opt.x_tol) return best;
    fail(errc::no_convergence, "root refinement did not reach tolerance");
}

// Scans [lo, hi] split into n subintervals and returns every subinterval
// [x_i, x_{i+1}] whose endpoint values change sign.
template <class F>
std::vector<std::pair<Real, Real>> scan_sign_changes(F&& f, Real lo, Real hi, int n) {
    std::vector<std::pair<Real, Real>> brackets;
    Real x_prev = lo, f_prev = f(lo);
    for (int i = 1; i <= n; ++i) {
        const Real x = lo + (hi - lo) * static_cast<Real>(i) / n;
        const Real fx = f(x);
        if (f_prev == 0.0 || std::signbit(f_prev) != std::signbit(fx))
            brackets.emplace_back(x_prev, x);
        x_prev = x;
        f_prev = fx;
    }
    return brackets;
}

}  // namespace debtctrl
