#pragma once

#include "pucci/nonlinearity.hpp"

#include <fstream>
#include <string>

#include <json.hpp>

namespace testing {

inline std::string data_path(const std::string& name) { return std::string(PUCCI_TEST_DATA) + "/" + name; }

/// Frozen reference values written by tools/oracles.py.
inline const nlohmann::json& oracles() {
    static const nlohmann::json j = [] {
        std::ifstream in(data_path("oracles.json"));
        return nlohmann::json::parse(in);
    }();
    return j;
}

/// The two-equation combustion instance (tau = 20, alpha = 1/2, unit disc).
inline pucci::SystemSpec combustion_spec(std::size_t M = 4096, double tau = 20.0) {
    pucci::SystemSpec spec;
    spec.pairs = {{1.0, 1.0}, {1.0, 1.0}};
    spec.f = pucci::builtin_combustion(2, tau, {0.5, 0.5});
    spec.domain = pucci::BallDomain{1.0, 2};
    spec.radial_intervals = M;
    return spec;
}

inline pucci::SystemSpec expression_spec(std::vector<std::string> exprs, std::vector<pucci::EllipticityPair> pairs,
                                         std::size_t M = 1024, double R = 1.0, int N = 2) {
    std::vector<pucci::expr::Expr> parts;
    for (const auto& e : exprs) parts.push_back(pucci::expr::parse(e, exprs.size()));
    pucci::SystemSpec spec;
    spec.pairs = std::move(pairs);
    spec.f = std::make_shared<const pucci::Nonlinearity>(std::move(parts));
    spec.domain = pucci::BallDomain{R, N};
    spec.radial_intervals = M;
    return spec;
}

inline double rel_err(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

}  // namespace testing
