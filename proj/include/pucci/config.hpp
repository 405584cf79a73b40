#pragma once

// JSON run configuration:
// {
//   "n": 2,
//   "equations": [{"lambda": 1, "Lambda": 1}, ...],
//   "domain": {"type": "ball", "R": 1, "N": 2}
//          or {"type": "grid2d", "shape": "disc" | "mask_file": "path", "h": 0.0078125, "K": 8},
//   "nonlinearity": {"builtin": "combustion", "tau": 20, "alphas": [0.5, 0.5]}
//                or {"expressions": ["...", "..."]},
//   "numerics": {"M": 4096, "tol": 1e-8, "tol_cert": 1e-6, "max_iter": 10000, "seed": 24301}
// }
// "numerics" and each of its keys are optional. Unknown keys are errors.

#include "pucci/errors.hpp"
#include "pucci/nonlinearity.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

namespace pucci {

class ConfigError : public Error {
public:
    using Error::Error;
};

struct Numerics {
    double tol = 1e-8;
    int max_iter = 10000;
    std::uint64_t seed = kDefaultSeed;
};

struct Config {
    SystemSpec spec;
    Numerics numerics;
};

/// Relative mask_file paths are resolved against base_dir.
Config parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
Config load_config(const std::filesystem::path& path);

}  // namespace pucci
