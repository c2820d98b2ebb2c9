#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"

#include <cstring>

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

bool identical(const Trajectory& a, const Trajectory& b) {
    return a.x.size() == b.x.size() && a.z.size() == b.z.size() &&
           std::memcmp(a.x.data(), b.x.data(), a.x.size() * sizeof(Real)) == 0 &&
           std::memcmp(a.z.data(), b.z.data(), a.z.size() * sizeof(Real)) == 0 &&
           std::memcmp(a.u.data(), b.u.data(), a.u.size() * sizeof(Real)) == 0;
}

}  // namespace

TEST_CASE("path configuration is validated") {
    PathConfig pc;
    pc.horizon = 1.0;
    pc.n_paths = 2;
    const Model m = fixtures::benchmark();

    SECTION("step must fit the horizon") {
        pc.dt = 2.0;
        CHECK(raises(errc::config_invalid, [&] { simulate_paths(m, ConstantPolicy{0.0}, pc); }));
    }
    SECTION("at least one path") {
        pc.n_paths = 0;
        CHECK(raises(errc::config_invalid, [&] { simulate_paths(m, ConstantPolicy{0.0}, pc); }));
    }
    SECTION("antithetic pairing needs an even path count") {
        pc.n_paths = 3;
        pc.antithetic = true;
        CHECK(raises(errc::config_invalid, [&] { simulate_paths(m, ConstantPolicy{0.0}, pc); }));
    }
    SECTION("controls outside the box are rejected") {
        CHECK(raises(errc::control_violation,
                     [&] { simulate_paths(m, ConstantPolicy{1.5}, pc); }));
    }
}

TEST_CASE("simulation determinism") {
    const Model m = fixtures::benchmark();
    PathConfig pc;
    pc.horizon = 2.0;
    pc.n_paths = 4;
    pc.seed = 20240817;

    const auto a = simulate_paths(m, ConstantPolicy{0.3}, pc);
    const auto b = simulate_paths(m, ConstantPolicy{0.3}, pc);
    REQUIRE(a.size() == 4);

    SECTION("reruns are bit-identical") {
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(identical(a[i], b[i]));
    }

    SECTION("per-path streams do not depend on the batch size") {
        PathConfig half = pc;
        half.n_paths = 2;
        const auto c = simulate_paths(m, ConstantPolicy{0.3}, half);
        CHECK(identical(a[0], c[0]));
        CHECK(identical(a[1], c[1]));
    }

    SECTION("different seeds decorrelate") {
        PathConfig other = pc;
        other.seed = 7;
        const auto c = simulate_paths(m, ConstantPolicy{0.3}, other);
        CHECK_FALSE(identical(a[0], c[0]));
    }
}

TEST_CASE("ratio paths stay positive and scale linearly in x0") {
    Model m = fixtures::benchmark();
    PathConfig pc;
    pc.horizon = 5.0;
    pc.n_paths = 8;
    pc.seed = 99;

    const auto base = simulate_paths(m, ConstantPolicy{-1.0}, pc);
    for (const auto& tr : base)
        for (const Real x : tr.x) CHECK(x > 0.0);

    Model doubled = m;
    doubled.x0 = 2.0 * m.x0;
    const auto scaled = simulate_paths(doubled, ConstantPolicy{-1.0}, pc);

    // exact pathwise linearity: the log-space update is state-proportional
    Real worst = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i)
        for (std::size_t k = 0; k < base[i].x.size(); ++k)
            worst = std::max(worst,
                             std::abs(scaled[i].x[k] / base[i].x[k] - 2.0) / 2.0);
    CHECK(worst < 1e-12);
}

TEST_CASE("pathwise monotonicity in the starting ratio") {
    Model lo = fixtures::benchmark();
    Model hi = lo;
    hi.x0 = 0.9;
    PathConfig pc;
    pc.horizon = 3.0;
    pc.n_paths = 8;
    pc.seed = 4;
    const auto a = simulate_paths(lo, ConstantPolicy{0.5}, pc);
    const auto b = simulate_paths(hi, ConstantPolicy{0.5}, pc);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < a[i].x.size(); ++k) CHECK(a[i].x[k] < b[i].x[k]);
}

TEST_CASE("near-driftless log mean matches -sigma^2 T / 2") {
    Model m;
    m.rate = RateFunction::constant(1e-9);
    m.growth = GrowthFunction::linear_u(1e-12, 1e-9);
    m.bounds = {1.0, 1.0};
    m.cost = CostFunction::quadratic_distance(0.6);
    m.sigma = 0.2;
    m.lambda = 5.0;
    m.x0 = 1.0;
    m = make_validated(m);

    PathConfig pc;
    pc.horizon = 1.0;
    pc.n_paths = 2000;
    pc.seed = 31;
    const auto paths = simulate_paths(m, ConstantPolicy{0.0}, pc);
    Real mean = 0.0, mean2 = 0.0;
    for (const auto& tr : paths) {
        const Real v = std::log(tr.x.back()) - std::log(tr.x.front());
        mean += v;
        mean2 += v * v;
    }
    mean /= static_cast<Real>(paths.size());
    mean2 /= static_cast<Real>(paths.size());
    const Real se = std::sqrt((mean2 - mean * mean) / static_cast<Real>(paths.size()));
    CHECK(std::abs(mean - (-0.5 * 0.04)) < 3.0 * se);
}

TEST_CASE("explosive regime: mean ratio grows at the drift rate") {
    // r - g = 0.03 > 0 under u = 0: E[X_T] = x exp(0.03 T) exactly
    Model m;
    m.rate = RateFunction::constant(0.05);
    m.growth = GrowthFunction::linear_u(0.02, 0.9);
    m.bounds = {1.0, 1.0};
    m.cost = CostFunction::quadratic_distance(0.6);
    m.sigma = 0.2;
    m.lambda = 5.0;
    m.x0 = 0.7;
    m = make_validated(m);

    PathConfig pc;
    pc.horizon = 4.0;
    pc.n_paths = 4000;
    pc.seed = 12;
    pc.antithetic = true;
    const auto paths = simulate_paths(m, ConstantPolicy{0.0}, pc);
    Real mean = 0.0, mean2 = 0.0;
    for (const auto& tr : paths) {
        mean += tr.x.back();
        mean2 += tr.x.back() * tr.x.back();
    }
    mean /= static_cast<Real>(paths.size());
    mean2 /= static_cast<Real>(paths.size());
    const Real se = std::sqrt((mean2 - mean * mean) / static_cast<Real>(paths.size()));
    const Real target = 0.7 * std::exp(0.03 * 4.0);
    CHECK(mean >= target * (1.0 - 3.0 * se / mean));
    CHECK(std::abs(mean - target) < 3.0 * se + 1e-3);  // dt bias allowance
}

TEST_CASE("degenerate factor stays constant") {
    const Model m = fixtures::benchmark();
    PathConfig pc;
    pc.horizon = 1.0;
    pc.n_paths = 2;
    pc.seed = 8;
    const auto paths = simulate_paths(m, ConstantPolicy{0.0}, pc);
    for (const auto& tr : paths)
        for (const Real z : tr.z) CHECK(z == m.z0);
}

TEST_CASE("discounted cost accumulates monotonically") {
    const Model m = fixtures::benchmark();
    PathConfig pc;
    pc.horizon = 2.0;
    pc.n_paths = 2;
    pc.seed = 15;
    const auto paths = simulate_paths(m, ConstantPolicy{0.2}, pc);
    for (const auto& tr : paths) {
        REQUIRE(tr.disc_cost.size() == tr.x.size());
        for (std::size_t k = 1; k < tr.disc_cost.size(); ++k)
            CHECK(tr.disc_cost[k] >= tr.disc_cost[k - 1]);
    }
}

TEST_CASE("cost tail bound and horizon selection") {
    const Model m = fixtures::benchmark();

    SECTION("bound decays and the chosen horizon honors it") {
        CHECK(cost_tail_bound(m, 12.0) < cost_tail_bound(m, 8.0));
        const Real t = horizon_for_tolerance(m, 1e-6, 10.0);
        CHECK(t >= 10.0);
        CHECK(cost_tail_bound(m, t) < 1e-6);
        // quarter-year increments only
        CHECK(std::abs(t / 0.25 - std::round(t / 0.25)) < 1e-9);
    }

    SECTION("non-decaying exponent window is rejected") {
        Model mo = fixtures::benchmark();
        mo.cost = CostFunction::power(1.0, 0.5);
        mo.lambda = 0.9375;  // inside (lambda_m(1/2) = 0.935, m drift_cap = 0.94)
        mo = make_validated(mo);
        CHECK(raises(errc::horizon_overflow, [&] { horizon_for_tolerance(mo, 1e-6, 5.0); }));
    }
}

TEST_CASE("discounted-cost estimate against the closed form") {
    const Model m = fixtures::benchmark();
    PathConfig pc;
    pc.horizon = 10.0;
    pc.n_paths = 2000;
    pc.seed = 777;
    pc.dt = 1.0 / 252.0;
    pc.antithetic = true;

    // constant-policy GBM value: x^2/(l - 2mu - s^2) - 2 xbar x/(l - mu) + xbar^2/l
    const auto closed = [&](Real u) {
        const Real mu = 0.01 - 0.03 - (1.0 - 0.9) * u;
        return 0.49 / (5.0 - 2.0 * mu - 0.04) - 2.0 * 0.6 * 0.7 / (5.0 - mu) + 0.36 / 5.0;
    };
    for (const Real u : {-1.0, 0.0, 1.0}) {
        const auto est = estimate_cost(m, ConstantPolicy{u}, pc);
        CHECK(est.tail_bound < 1e-6);
        CHECK(std::abs(est.value - closed(u)) < 3.0 * est.std_error + 2.0 / 252.0 * 0.05);
    }

    SECTION("zero running cost gives exactly zero") {
        Model z = fixtures::benchmark_power(0.0, 2.0);
        const auto est = estimate_cost(z, ConstantPolicy{0.0}, pc);
        CHECK(est.value == 0.0);
        CHECK(est.std_error == 0.0);
    }

    SECTION("antithetic pairs count once") {
        const auto est = estimate_cost(m, ConstantPolicy{0.0}, pc);
        CHECK(est.n_samples == 1000);
    }
}

TEST_CASE("moment bound diagnostic") {
    const Model m = fixtures::benchmark();
    PathConfig pc;
    pc.horizon = 4.0;
    pc.n_paths = 2000;
    pc.seed = 11;

    SECTION("maximum-deficit policy respects the envelope for m = 1, 2") {
        for (const Real mm : {1.0, 2.0}) {
            const auto rep = moment_bound_check(m, ConstantPolicy{-1.0}, pc, mm, 4.0);
            CHECK(rep.pass);
            CHECK(rep.empirical <= rep.bound * (1.0 + 3.0 * rep.std_error /
                                                          std::max(rep.empirical, Real(1e-300))));
        }
    }

    SECTION("the bound is tight under frozen coefficients") {
        // sigma ~ 0, r at its cap, g pinned at the declared minimum: the bound
        // is the realized deterministic path up to rounding
        Model t;
        t.rate = RateFunction::constant(0.04);
        t.growth = GrowthFunction::linear_u(-0.05, 1e-9);
        t.growth.gbar1 = -0.0500001;
        t.growth.gbar2 = 0.0001;
        t.bounds = {0.3, 0.3};
        t.cost = CostFunction::quadratic_distance(0.6);
        t.sigma = 1e-9;
        t.lambda = 2.0;
        t.x0 = 0.7;
        t = make_validated(t);
        PathConfig tp;
        tp.horizon = 1.0;
        tp.n_paths = 4;
        tp.seed = 5;
        const auto rep = moment_bound_check(t, ConstantPolicy{-0.3}, tp, 2.0, 1.0);
        CHECK(rep.pass);
        CHECK(rep.empirical / rep.bound == Catch::Approx(1.0).margin(1e-5));
    }

    SECTION("measurement time must fit the horizon") {
        CHECK(raises(errc::config_invalid,
                     [&] { moment_bound_check(m, ConstantPolicy{0.0}, pc, 1.0, 9.0); }));
    }
}

TEST_CASE("sustainability diagnostic") {
    const Model m = fixtures::benchmark();
    PathConfig pc;
    pc.horizon = 10.0;
    pc.n_paths = 2000;
    pc.seed = 17;
    pc.dt = 1.0 / 252.0;

    SECTION("maximum surplus decays at rate g0 + (1 - alpha) U2") {
        const auto rep = sustainability_check(m, ConstantPolicy{1.0}, pc, {2.5, 5.0, 7.5, 10.0});
        CHECK(rep.sustainable);
        CHECK(rep.fit_slope == Catch::Approx(-0.13).margin(0.02));
        REQUIRE(rep.horizons.size() == 4);
        REQUIRE(rep.mean_ratio.size() == 4);
    }

    SECTION("maximum deficit diverges for this parameter set") {
        const auto rep = sustainability_check(m, ConstantPolicy{-1.0}, pc, {2.5, 5.0, 7.5, 10.0});
        CHECK_FALSE(rep.sustainable);
        CHECK(rep.fit_slope == Catch::Approx(0.07).margin(0.02));
    }

    SECTION("discounted ratios scale linearly in x0") {
        Model d = fixtures::benchmark();
        d.x0 = 1.4;
        const auto a = sustainability_check(m, ConstantPolicy{1.0}, pc, {5.0, 10.0});
        const auto b = sustainability_check(d, ConstantPolicy{1.0}, pc, {5.0, 10.0});
        for (std::size_t i = 0; i < a.mean_ratio.size(); ++i)
            CHECK(b.mean_ratio[i] == Catch::Approx(2.0 * a.mean_ratio[i]).epsilon(1e-12));
    }
}

TEST_CASE("factor covariation diagnostic") {
    SECTION("constant coefficients have zero covariation on both sides") {
        const Model m = fixtures::benchmark();
        PathConfig pc;
        pc.horizon = 1.0;
        pc.n_paths = 4;
        pc.seed = 2;
        const auto rep = covariation_diagnostic(m, 0.5, pc);
        CHECK(rep.mean_discrete == 0.0);
        CHECK(rep.mean_formula == 0.0);
        CHECK(rep.max_abs_gap == 0.0);
    }

    SECTION("affine coefficients: exact formula side, gap shrinks with dt") {
        Model mc;
        mc.factor = FactorDynamics::constant_coeff(0.0, 0.25);
        mc.rate = RateFunction::affine(0.05, 0.01, 0.12, 1e-9);
        mc.growth = GrowthFunction::linear_u(AffineClamped{0.03, 0.02, -inf, inf},
                                             AffineClamped::constant(0.9));
        mc.bounds = {1.0, 1.0};
        mc.cost = CostFunction::quadratic_distance(0.6);
        mc.sigma = 0.2;
        mc.rho = 0.3;
        mc.lambda = 5.0;
        mc.x0 = 0.7;
        mc = make_validated(mc);

        PathConfig pc;
        pc.horizon = 2.0;
        pc.n_paths = 16;
        pc.seed = 99;
        pc.dt = 1.0 / 100.0;
        const auto c1 = covariation_diagnostic(mc, 0.5, pc);
        // g1 r1 c^2 T while both clamps stay inactive
        CHECK(c1.mean_formula == Catch::Approx(0.02 * 0.01 * 0.25 * 0.25 * 2.0).epsilon(1e-12));

        pc.dt = 1.0 / 200.0;
        const auto c2 = covariation_diagnostic(mc, 0.5, pc);
        CHECK(c2.max_abs_gap < c1.max_abs_gap);
        CHECK(c1.max_abs_gap / c2.max_abs_gap > 1.2);
        CHECK(c1.max_abs_gap / c2.max_abs_gap < 2.8);
    }
}
