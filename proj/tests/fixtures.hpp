#pragma once

// Shared model fixtures for the test suites. The quadratic benchmark matches
// the worked parameter set used throughout the docs: r = 0.01, g0 = 0.03,
// alpha = 0.9, U1 = U2 = 1, xbar = 0.6, sigma = 0.2, lambda = 5, x0 = 0.7.

#include <debtctrl/debtctrl.hpp>

namespace fixtures {

using namespace debtctrl;

inline Model benchmark(bool strong = true, Real alpha = 0.9, Real u_bound = 1.0) {
    Model m;
    m.rate = RateFunction::constant(strong ? 0.01 : 0.07);
    m.growth = GrowthFunction::linear_u(strong ? 0.03 : 0.015, alpha);
    m.bounds = {u_bound, u_bound};
    m.cost = CostFunction::quadratic_distance(0.6);
    m.sigma = strong ? 0.2 : 0.3;
    m.lambda = 5.0;
    m.x0 = 0.7;
    return make_validated(m);
}

// Same dynamics with the homogeneous power cost C x^m.
inline Model benchmark_power(Real c0 = 1.0, Real m_exp = 2.0) {
    Model m = benchmark();
    m.cost = CostFunction::power(c0, m_exp);
    return make_validated(m);
}

// Concave (quadratic-in-u) control impact on the strong-economy dynamics.
inline Model benchmark_concave(Real alpha = 0.5, Real beta = 0.25) {
    Model m = benchmark();
    m.growth = GrowthFunction::concave_quadratic_u(0.03, alpha, beta);
    return make_validated(m);
}

// Factor-driven variant: OU factor, affine rate, affine baseline growth.
inline Model benchmark_factor() {
    Model m;
    m.factor = FactorDynamics::ornstein_uhlenbeck(1.0, 0.0, 0.3);
    m.rate = RateFunction::affine(0.02, 0.005, 0.04);
    m.growth = GrowthFunction::linear_u(AffineClamped{0.02, 0.01, -inf, inf},
                                        AffineClamped::constant(0.9));
    m.bounds = {1.0, 1.0};
    m.cost = CostFunction::power(1.0, 2.0);
    m.sigma = 0.2;
    m.rho = 0.3;
    m.lambda = 5.0;
    m.x0 = 0.7;
    return make_validated(m);
}

}  // namespace fixtures
