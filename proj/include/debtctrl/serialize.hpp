#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "common.hpp"
#include "model.hpp"

namespace debtctrl {

using nlohmann::json;

namespace detail {

[[noreturn]] inline void bad_config(const std::string& what) {
    fail(errc::config_invalid, what);
}

inline void reject_unknown(const json& obj, const char* where,
                           std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) bad_config(std::string(where) + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || key == k;
        if (!ok) bad_config("unknown key '" + key + "' in " + where);
    }
}

inline Real require_number(const json& obj, const char* where, const char* key) {
    if (!obj.contains(key))
        bad_config(std::string(where) + " is missing required key '" + key + "'");
    const auto& v = obj.at(key);
    if (!v.is_number()) bad_config(std::string(where) + "." + key + " must be a number");
    return v.get<Real>();
}

inline Real number_or(const json& obj, const char* key, Real fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number()) bad_config(std::string(key) + " must be a number");
    return obj.at(key).get<Real>();
}

inline std::string require_string(const json& obj, const char* where, const char* key) {
    if (!obj.contains(key))
        bad_config(std::string(where) + " is missing required key '" + key + "'");
    const auto& v = obj.at(key);
    if (!v.is_string()) bad_config(std::string(where) + "." + key + " must be a string");
    return v.get<std::string>();
}

// A coefficient is either a plain number (constant) or an affine-in-z object.
inline AffineClamped parse_coefficient(const json& v, const char* where) {
    if (v.is_number()) return AffineClamped::constant(v.get<Real>());
    reject_unknown(v, where, {"base", "slope", "lo", "hi"});
    AffineClamped c;
    c.a0 = require_number(v, where, "base");
    c.a1 = require_number(v, where, "slope");
    c.lo = number_or(v, "lo", -inf);
    c.hi = number_or(v, "hi", inf);
    return c;
}

inline json coefficient_to_json(const AffineClamped& c) {
    if (c.is_constant() && c.lo == -inf && c.hi == inf) return c.a0;
    json v{{"base", c.a0}, {"slope", c.a1}};
    if (c.lo != -inf) v["lo"] = c.lo;
    if (c.hi != inf) v["hi"] = c.hi;
    return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Model document
// ---------------------------------------------------------------------------
inline Model parse_model(const json& doc) {
    using detail::bad_config;
    using detail::number_or;
    using detail::parse_coefficient;
    using detail::reject_unknown;
    using detail::require_number;
    using detail::require_string;

    reject_unknown(doc, "model",
                   {"factor", "rate", "growth", "bounds", "cost", "sigma", "rho", "lambda", "x0",
                    "z0"});
    Model m;

    if (doc.contains("factor")) {
        const auto& f = doc.at("factor");
        const std::string fam = require_string(f, "model.factor", "family");
        if (fam == "none") {
            reject_unknown(f, "model.factor", {"family"});
            m.factor = FactorDynamics::none();
        } else if (fam == "constant_coeff") {
            reject_unknown(f, "model.factor", {"family", "b", "c"});
            m.factor = FactorDynamics::constant_coeff(require_number(f, "model.factor", "b"),
                                                      require_number(f, "model.factor", "c"));
        } else if (fam == "ornstein_uhlenbeck") {
            reject_unknown(f, "model.factor", {"family", "kappa", "theta", "c"});
            m.factor = FactorDynamics::ornstein_uhlenbeck(
                require_number(f, "model.factor", "kappa"),
                require_number(f, "model.factor", "theta"), require_number(f, "model.factor", "c"));
        } else {
            bad_config("model.factor.family must be none, constant_coeff or ornstein_uhlenbeck");
        }
    }

    if (!doc.contains("rate")) bad_config("model is missing required key 'rate'");
    {
        const auto& r = doc.at("rate");
        const std::string fam = require_string(r, "model.rate", "family");
        if (fam == "constant") {
            reject_unknown(r, "model.rate", {"family", "r"});
            m.rate = RateFunction::constant(require_number(r, "model.rate", "r"));
        } else if (fam == "affine") {
            reject_unknown(r, "model.rate", {"family", "r0", "r1", "cap", "floor"});
            m.rate = RateFunction::affine(require_number(r, "model.rate", "r0"),
                                          require_number(r, "model.rate", "r1"),
                                          require_number(r, "model.rate", "cap"),
                                          number_or(r, "floor", RateFunction::default_floor));
        } else {
            bad_config("model.rate.family must be constant or affine");
        }
    }

    if (!doc.contains("growth")) bad_config("model is missing required key 'growth'");
    {
        const auto& g = doc.at("growth");
        const std::string fam = require_string(g, "model.growth", "family");
        const auto coeff = [&](const char* key) {
            if (!g.contains(key))
                bad_config("model.growth is missing required key '" + std::string(key) + "'");
            return parse_coefficient(g.at(key), "model.growth");
        };
        if (fam == "linear_u") {
            reject_unknown(g, "model.growth", {"family", "g0", "alpha", "gbar1", "gbar2"});
            m.growth = GrowthFunction::linear_u(coeff("g0"), coeff("alpha"));
        } else if (fam == "concave_quadratic_u") {
            reject_unknown(g, "model.growth", {"family", "g0", "alpha", "beta", "gbar1", "gbar2"});
            m.growth = GrowthFunction::concave_quadratic_u(coeff("g0"), coeff("alpha"),
                                                           coeff("beta"));
        } else {
            bad_config("model.growth.family must be linear_u or concave_quadratic_u");
        }
        m.growth.gbar1 = detail::number_or(g, "gbar1", 0.0);
        m.growth.gbar2 = detail::number_or(g, "gbar2", 0.0);
    }

    if (!doc.contains("bounds")) bad_config("model is missing required key 'bounds'");
    {
        const auto& b = doc.at("bounds");
        reject_unknown(b, "model.bounds", {"u1", "u2"});
        m.bounds = ControlBounds{require_number(b, "model.bounds", "u1"),
                                 require_number(b, "model.bounds", "u2")};
    }

    if (!doc.contains("cost")) bad_config("model is missing required key 'cost'");
    {
        const auto& c = doc.at("cost");
        const std::string fam = require_string(c, "model.cost", "family");
        if (fam == "power") {
            reject_unknown(c, "model.cost", {"family", "c0", "m"});
            m.cost = CostFunction::power(require_number(c, "model.cost", "c0"),
                                         require_number(c, "model.cost", "m"));
        } else if (fam == "quadratic_distance") {
            reject_unknown(c, "model.cost", {"family", "xbar"});
            m.cost = CostFunction::quadratic_distance(require_number(c, "model.cost", "xbar"));
        } else {
            bad_config("model.cost.family must be power or quadratic_distance");
        }
    }

    m.sigma = require_number(doc, "model", "sigma");
    m.rho = number_or(doc, "rho", 0.0);
    m.lambda = require_number(doc, "model", "lambda");
    m.x0 = require_number(doc, "model", "x0");
    m.z0 = number_or(doc, "z0", 0.0);
    return m;
}

inline json model_to_json(const Model& m) {
    json doc;
    switch (m.factor.family) {
        case FactorDynamics::Family::none: doc["factor"] = {{"family", "none"}}; break;
        case FactorDynamics::Family::constant_coeff:
            doc["factor"] = {{"family", "constant_coeff"}, {"b", m.factor.b}, {"c", m.factor.c}};
            break;
        case FactorDynamics::Family::ornstein_uhlenbeck:
            doc["factor"] = {{"family", "ornstein_uhlenbeck"},
                             {"kappa", m.factor.kappa},
                             {"theta", m.factor.theta},
                             {"c", m.factor.c}};
            break;
    }
    if (m.rate.family == RateFunction::Family::constant) {
        doc["rate"] = {{"family", "constant"}, {"r", m.rate.r0}};
    } else {
        doc["rate"] = {{"family", "affine"},
                       {"r0", m.rate.r0},
                       {"r1", m.rate.r1},
                       {"cap", m.rate.cap_},
                       {"floor", m.rate.floor_}};
    }
    json g;
    g["family"] = m.growth.family == GrowthFunction::Family::linear_u ? "linear_u"
                                                                      : "concave_quadratic_u";
    g["g0"] = detail::coefficient_to_json(m.growth.g0);
    g["alpha"] = detail::coefficient_to_json(m.growth.alpha);
    if (m.growth.family == GrowthFunction::Family::concave_quadratic_u)
        g["beta"] = detail::coefficient_to_json(m.growth.beta);
    if (m.growth.gbar1 != 0.0) g["gbar1"] = m.growth.gbar1;
    if (m.growth.gbar2 != 0.0) g["gbar2"] = m.growth.gbar2;
    doc["growth"] = std::move(g);
    doc["bounds"] = {{"u1", m.bounds.u1}, {"u2", m.bounds.u2}};
    if (m.cost.family == CostFunction::Family::power) {
        doc["cost"] = {{"family", "power"}, {"c0", m.cost.c0}, {"m", m.cost.m}};
    } else {
        doc["cost"] = {{"family", "quadratic_distance"}, {"xbar", m.cost.xbar}};
    }
    doc["sigma"] = m.sigma;
    doc["rho"] = m.rho;
    doc["lambda"] = m.lambda;
    doc["x0"] = m.x0;
    doc["z0"] = m.z0;
    return doc;
}

// ---------------------------------------------------------------------------
// Dotted-path overrides: "model.sigma=0.3" replaces one leaf of the document.
// The value is parsed as JSON when possible, else taken as a string.
// ---------------------------------------------------------------------------
inline void apply_override(json& doc, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
        detail::bad_config("override must look like path.to.key=value: '" + spec + "'");
    const std::string path = spec.substr(0, eq);
    const std::string raw = spec.substr(eq + 1);

    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (key.empty()) detail::bad_config("empty path segment in override '" + spec + "'");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        if (!node->contains(key)) (*node)[key] = json::object();
        node = &(*node)[key];
        if (!node->is_object())
            detail::bad_config("override path '" + path + "' crosses a non-object value");
        start = dot + 1;
    }
}

inline json parse_json_text(const std::string& text, const char* what) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) detail::bad_config(std::string(what) + " is not valid JSON");
    return doc;
}

}  // namespace debtctrl
