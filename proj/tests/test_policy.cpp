#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"

#include <random>

using namespace debtctrl;

namespace {

bool raises(errc expected, const std::function<void()>& fn) {
    try {
        fn();
    } catch (const error& e) {
        return e.code() == expected;
    }
    return false;
}

// dense argmin of H over the control box
Real grid_argmin(const Model& m, Real x, Real z, Real v_x, int n = 10'000) {
    Real best_u = m.bounds.lo();
    Real best_h = hamiltonian(m, x, z, best_u, v_x);
    for (int i = 1; i <= n; ++i) {
        const Real u = m.bounds.lo() + (m.bounds.hi() - m.bounds.lo()) * static_cast<Real>(i) / n;
        const Real h = hamiltonian(m, x, z, u, v_x);
        if (h < best_h) best_h = h, best_u = u;
    }
    return best_u;
}

}  // namespace

TEST_CASE("hamiltonian basics") {
    const Model m = fixtures::benchmark();

    SECTION("vanishing value slope leaves only the running cost") {
        for (const Real u : {-1.0, 0.0, 1.0})
            CHECK(hamiltonian(m, 0.7, 0.0, u, 0.0) == Catch::Approx(m.cost(0.7, 0.0)));
    }

    SECTION("affine in u with slope -x v_x (1 - alpha)") {
        const Real x = 0.8, v_x = 0.4;
        const Real h0 = hamiltonian(m, x, 0.0, 0.0, v_x);
        const Real h1 = hamiltonian(m, x, 0.0, 1.0, v_x);
        CHECK(h1 - h0 == Catch::Approx(-x * v_x * (1.0 - 0.9)).margin(1e-14));
    }

    SECTION("state must be positive") {
        CHECK(raises(errc::domain_error, [&] { hamiltonian(m, 0.0, 0.0, 0.0, 1.0); }));
        CHECK(raises(errc::domain_error, [&] { minimize_hamiltonian(m, -1.0, 0.0, 1.0); }));
    }
}

TEST_CASE("linear impact: endpoint rule") {
    const Model m = fixtures::benchmark();  // alpha = 0.9 < 1

    SECTION("increasing value pushes to the maximum surplus") {
        const auto r = minimize_hamiltonian(m, 0.7, 0.0, 0.5);
        CHECK(r.u == 1.0);
        CHECK(r.regime == MinimizerRegime::linear_endpoint);
    }
    SECTION("decreasing value pushes to the maximum deficit") {
        const auto r = minimize_hamiltonian(m, 0.7, 0.0, -0.5);
        CHECK(r.u == -1.0);
    }
    SECTION("ties resolve to the deficit endpoint") {
        CHECK(minimize_hamiltonian(m, 0.7, 0.0, 0.0).u == -1.0);
    }
    SECTION("alpha above one flips the orientation") {
        Model f = fixtures::benchmark(true, 1.1);
        CHECK(minimize_hamiltonian(f, 0.7, 0.0, 0.5).u == -1.0);
        CHECK(minimize_hamiltonian(f, 0.7, 0.0, -0.5).u == 1.0);
    }
    SECTION("scale of the slope never matters") {
        for (const Real s : {1e-8, 1.0, 1e8})
            CHECK(minimize_hamiltonian(m, 0.7, 0.0, s).u == 1.0);
    }
}

TEST_CASE("concave impact: marginal-growth match") {
    // u_hat = (1 - alpha) / (2 beta) = 1 for alpha = 0.5, beta = 0.25
    const Model m = fixtures::benchmark_concave();

    SECTION("interior match for an increasing value") {
        const auto r = minimize_hamiltonian(m, 1.0, 0.0, 0.5);
        CHECK(r.u == Catch::Approx(1.0));
        CHECK(r.regime == MinimizerRegime::interior_match);
    }
    SECTION("drift-neutral alpha = 1 gives u_hat = 0") {
        const Model m1 = fixtures::benchmark_concave(1.0, 0.25);
        const auto r = minimize_hamiltonian(m1, 1.0, 0.0, 0.5);
        CHECK(r.u == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("nonpositive slope compares the endpoints") {
        const auto r = minimize_hamiltonian(m, 1.0, 0.0, -0.4);
        CHECK(r.regime == MinimizerRegime::endpoint_compare);
        CHECK(r.u == grid_argmin(m, 1.0, 0.0, -0.4));
    }
    SECTION("clamped when the match leaves the box") {
        // u_hat = (1 - 0.2) / (2 * 0.1) = 4 > u2
        const Model mc = fixtures::benchmark_concave(0.2, 0.1);
        const auto r = minimize_hamiltonian(mc, 1.0, 0.0, 0.5);
        CHECK(r.u == 1.0);
        CHECK(r.regime == MinimizerRegime::clamped_high);
    }
}

TEST_CASE("interior candidate report") {
    SECTION("inside the box") {
        const auto ic = interior_candidate(fixtures::benchmark_concave(), 0.0);
        REQUIRE(ic.u_hat.has_value());
        CHECK(*ic.u_hat == Catch::Approx(1.0));
        CHECK_FALSE(ic.dominating_end.has_value());
    }
    SECTION("outside the box: the nearer endpoint dominates") {
        const auto ic = interior_candidate(fixtures::benchmark_concave(0.2, 0.1), 0.0);
        CHECK_FALSE(ic.u_hat.has_value());
        REQUIRE(ic.dominating_end.has_value());
        CHECK(*ic.dominating_end == 1.0);
    }
    SECTION("linear impact has no interior candidate") {
        CHECK(raises(errc::not_applicable,
                     [&] { interior_candidate(fixtures::benchmark(), 0.0); }));
    }
}

TEST_CASE("factor-feedback rule tabulates the three branches") {
    // alpha(z) crosses the clamp thresholds as z moves
    Model m = fixtures::benchmark_factor();
    m.growth = GrowthFunction::concave_quadratic_u(AffineClamped::constant(0.02),
                                                   AffineClamped{1.0, 0.6, 0.2, 1.8},
                                                   AffineClamped::constant(0.25));
    m.lambda = 8.0;  // the wide alpha range raises the moment growth rate
    m = make_validated(m);

    const auto rule = reduction_policy_z(m);
    REQUIRE(rule.z_grid.size() == rule.u_values.size());
    bool saw_lo = false, saw_hi = false, saw_interior = false;
    for (std::size_t i = 0; i < rule.z_grid.size(); ++i) {
        const Real z = rule.z_grid[i];
        const Real u = rule.u_values[i];
        const Real u_hat = (1.0 - m.growth.alpha(z)) / (2.0 * m.growth.beta(z));
        if (u == m.bounds.lo() && u_hat < m.bounds.lo()) saw_lo = true;
        else if (u == m.bounds.hi() && u_hat > m.bounds.hi()) saw_hi = true;
        else {
            CHECK(u == Catch::Approx(u_hat).margin(1e-12));
            saw_interior = true;
        }
    }
    CHECK(saw_lo);
    CHECK(saw_hi);
    CHECK(saw_interior);

    SECTION("linear impact is rejected") {
        CHECK(raises(errc::not_applicable,
                     [&] { reduction_policy_z(fixtures::benchmark()); }));
    }
}

TEST_CASE("control-dependent cost: convex bisection") {
    const Model m = fixtures::benchmark_concave();
    const auto f = [](Real, Real, Real u) { return 0.05 * u * u; };
    const auto fu = [](Real, Real, Real u) { return 0.1 * u; };

    SECTION("stationarity at the reported minimizer") {
        const Real x = 1.0, v_x = 0.9;
        const auto r = minimize_hamiltonian(m, x, 0.0, v_x, f, fu);
        CHECK(r.regime == MinimizerRegime::convex_bisection);
        const Real dh = -x * v_x * (m.growth.du(0.0, r.u) + 1.0) + fu(x, 0.0, r.u);
        CHECK(std::abs(dh) < 1e-8 * (1.0 + std::abs(x * v_x)));
    }

    SECTION("agrees with a dense search") {
        const Real x = 1.0, v_x = 0.9;
        const auto r = minimize_hamiltonian(m, x, 0.0, v_x, f, fu);
        Real best_u = m.bounds.lo(), best_h = 1e300;
        for (int i = 0; i <= 10'000; ++i) {
            const Real u = -1.0 + 2.0 * i / 10'000.0;
            const Real h = -x * (m.growth(0.0, u) + u) * v_x + f(x, 0.0, u);
            if (h < best_h) best_h = h, best_u = u;
        }
        const Real h_star = -x * (m.growth(0.0, r.u) + r.u) * v_x + f(x, 0.0, r.u);
        CHECK(h_star <= best_h + 1e-9);
        CHECK(std::abs(r.u - best_u) < 1e-3);
    }

    SECTION("binding endpoints short-circuit") {
        // large quadratic penalty centers the minimizer at zero; a strongly
        // negative slope then pins it to an endpoint
        const auto big = [](Real, Real, Real u) { return 50.0 * u; };
        const auto big_u = [](Real, Real, Real) { return 50.0; };
        const auto r = minimize_hamiltonian(m, 1.0, 0.0, 0.1, big, big_u);
        CHECK(r.u == -1.0);
    }

    SECTION("curvature sign changes are detected") {
        const auto quart = [](Real, Real, Real u) { return u * u * u * u; };
        const auto quart_u = [](Real, Real, Real u) { return 4.0 * u * u * u; };
        CHECK(raises(errc::nonconvex_hamiltonian,
                     [&] { minimize_hamiltonian(m, 1.0, 0.0, -40.0, quart, quart_u); }));

        // opt-in dense fallback still finds the argmin
        const auto r = minimize_hamiltonian(m, 1.0, 0.0, -40.0, quart, quart_u, true);
        CHECK(r.regime == MinimizerRegime::grid_fallback);
        Real best_u = -1.0, best_h = 1e300;
        for (int i = 0; i <= 200'000; ++i) {
            const Real u = -1.0 + 2.0 * i / 200'000.0;
            const Real h = -(m.growth(0.0, u) + u) * -40.0 + quart(1.0, 0.0, u);
            if (h < best_h) best_h = h, best_u = u;
        }
        CHECK(std::abs(r.u - best_u) < 1e-3);
    }
}

TEST_CASE("random-instance argmin oracle") {
    std::mt19937_64 gen(20240814);
    std::uniform_real_distribution<Real> ux(0.1, 3.0);
    std::uniform_real_distribution<Real> uv(-2.0, 2.0);
    std::uniform_real_distribution<Real> ua(0.3, 1.7);
    std::uniform_real_distribution<Real> ub(0.1, 0.8);

    for (int i = 0; i < 60; ++i) {
        Model m = fixtures::benchmark();
        const Real alpha = ua(gen);
        if (i % 2 == 0) {
            m.growth = GrowthFunction::linear_u(0.03, alpha);
        } else {
            m.growth = GrowthFunction::concave_quadratic_u(0.03, alpha, ub(gen));
        }
        m.growth.gbar1 = -5.0;
        m.growth.gbar2 = 5.0;

        const Real x = ux(gen), v_x = uv(gen);
        const auto r = minimize_hamiltonian(m, x, 0.0, v_x);
        const Real u_grid = grid_argmin(m, x, 0.0, v_x);
        const Real h_star = hamiltonian(m, x, 0.0, r.u, v_x);
        const Real h_grid = hamiltonian(m, x, 0.0, u_grid, v_x);
        REQUIRE(h_star <= h_grid + 1e-9);
    }
}

TEST_CASE("threshold rule is closed on the right") {
    const ThresholdBangBang rule{0.6, -1.0, 1.0};
    CHECK(rule(0.59, 0.0) == -1.0);
    CHECK(rule(0.6, 0.0) == 1.0);  // at the switch: the upper branch applies
    CHECK(rule(0.61, 0.0) == 1.0);
}

TEST_CASE("tabulated feedback rules snap to the nearest node") {
    StateFeedback fb;
    fb.x_grid = {0.5, 1.0, 1.5};
    fb.z_grid = {0.0};
    fb.u_values = {-1.0, 0.0, 1.0};  // row-major in x
    CHECK(fb(0.5, 0.0) == -1.0);
    CHECK(fb(0.74, 0.0) == -1.0);
    CHECK(fb(0.76, 0.0) == 0.0);
    CHECK(fb(5.0, 0.0) == 1.0);

    ZFeedback zf;
    zf.z_grid = {-1.0, 0.0, 1.0};
    zf.u_values = {0.2, 0.4, 0.6};
    CHECK(zf(0.7, -0.9) == 0.2);
    CHECK(zf(0.7, 0.9) == 0.6);
}

TEST_CASE("policy variant dispatches uniformly") {
    PolicyRule rule{ThresholdBangBang{0.6, -1.0, 1.0}};
    CHECK(rule(0.7, 0.0) == 1.0);
    rule = PolicyRule{ConstantPolicy{0.3}};
    CHECK(rule(0.7, 0.0) == 0.3);
}

TEST_CASE("value gradients carry their provenance") {
    const ValueGradient g{[](Real x, Real) { return 2.0 * x; },
                          ValueGradient::Provenance::closed_form};
    CHECK(g(0.5, 0.0) == 1.0);
    CHECK(g.provenance == ValueGradient::Provenance::closed_form);
    const Model m = fixtures::benchmark();
    CHECK(minimize_hamiltonian(m, g, 0.7, 0.0).u == 1.0);
    CHECK(hamiltonian(m, g, 0.7, 0.0, 1.0) ==
          Catch::Approx(hamiltonian(m, 0.7, 0.0, 1.0, 1.4)));
}
