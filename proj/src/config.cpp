#include "pucci/config.hpp"

#include <fstream>
#include <initializer_list>
#include <string_view>

namespace pucci {

namespace {

using nlohmann::json;

void allow_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> keys) {
    if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (auto k : keys) known = known || key == k;
        if (!known) throw ConfigError(std::string(where) + ": unknown key \"" + key + "\"");
    }
}

const json& need(const json& obj, std::string_view where, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(std::string(where) + ": missing \"" + key + "\"");
    return *it;
}

double number(const json& v, std::string_view what) {
    if (!v.is_number()) throw ConfigError(std::string(what) + " must be a number");
    return v.get<double>();
}

long long integer(const json& v, std::string_view what) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError(std::string(what) + " must be an integer");
    return v.get<long long>();
}

Domain parse_domain(const json& d, const std::filesystem::path& base_dir) {
    if (!d.is_object()) throw ConfigError("domain: expected an object");
    const json& type = need(d, "domain", "type");
    if (type == "ball") {
        allow_keys(d, "domain", {"type", "R", "N"});
        BallDomain ball;
        ball.radius = number(need(d, "domain", "R"), "domain.R");
        ball.dimension = static_cast<int>(integer(need(d, "domain", "N"), "domain.N"));
        return ball;
    }
    if (type == "grid2d") {
        allow_keys(d, "domain", {"type", "shape", "mask_file", "h", "K"});
        GridDomain g;
        bool has_shape = d.contains("shape"), has_file = d.contains("mask_file");
        if (has_shape == has_file) throw ConfigError("domain: grid2d needs exactly one of \"shape\" and \"mask_file\"");
        if (has_shape) {
            if (!d["shape"].is_string()) throw ConfigError("domain.shape must be a string");
            g.shape = d["shape"].get<std::string>();
            if (g.shape != "disc" && g.shape != "square" && g.shape != "lshape") {
                throw ConfigError("domain.shape must be disc, square or lshape");
            }
        } else {
            if (!d["mask_file"].is_string()) throw ConfigError("domain.mask_file must be a string");
            std::filesystem::path p = d["mask_file"].get<std::string>();
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            g.mask_file = p.string();
        }
        g.h = number(need(d, "domain", "h"), "domain.h");
        if (!(g.h > 0.0)) throw ConfigError("domain.h must be positive");
        if (d.contains("K")) g.stencil_width = static_cast<int>(integer(d["K"], "domain.K"));
        if (g.stencil_width < 1 || g.stencil_width > 16) throw ConfigError("domain.K must be in 1..16");
        return g;
    }
    throw ConfigError("domain.type must be \"ball\" or \"grid2d\"");
}

std::shared_ptr<const Nonlinearity> parse_nonlinearity(const json& f, std::size_t n) {
    if (!f.is_object()) throw ConfigError("nonlinearity: expected an object");
    if (f.contains("builtin")) {
        allow_keys(f, "nonlinearity", {"builtin", "tau", "alphas"});
        if (f["builtin"] != "combustion") throw ConfigError("nonlinearity.builtin: only \"combustion\" is available");
        double tau = number(need(f, "nonlinearity", "tau"), "nonlinearity.tau");
        const json& a = need(f, "nonlinearity", "alphas");
        if (!a.is_array()) throw ConfigError("nonlinearity.alphas must be an array");
        std::vector<double> alphas;
        for (const auto& v : a) alphas.push_back(number(v, "nonlinearity.alphas[]"));
        return builtin_combustion(n, tau, std::move(alphas));
    }
    allow_keys(f, "nonlinearity", {"expressions"});
    const json& e = need(f, "nonlinearity", "expressions");
    if (!e.is_array()) throw ConfigError("nonlinearity.expressions must be an array of strings");
    if (e.size() != n) {
        throw ConfigError("nonlinearity.expressions has " + std::to_string(e.size()) + " entries, expected n = " +
                          std::to_string(n));
    }
    std::vector<expr::Expr> parts;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (!e[i].is_string()) throw ConfigError("nonlinearity.expressions must be an array of strings");
        try {
            parts.push_back(expr::parse(e[i].get<std::string>(), n));
        } catch (const expr::ParseError& err) {
            throw ConfigError("nonlinearity.expressions[" + std::to_string(i) + "]: " + err.what());
        }
    }
    return std::make_shared<const Nonlinearity>(std::move(parts));
}

}  // namespace

Config parse_config(const json& j, const std::filesystem::path& base_dir) {
    allow_keys(j, "config", {"n", "equations", "domain", "nonlinearity", "numerics"});
    Config cfg;
    long long n = integer(need(j, "config", "n"), "n");
    if (n < 1) throw ConfigError("n must be >= 1");

    const json& eqs = need(j, "config", "equations");
    if (!eqs.is_array() || eqs.size() != static_cast<std::size_t>(n)) {
        throw ConfigError("equations must be an array of n entries");
    }
    for (const auto& e : eqs) {
        allow_keys(e, "equations[]", {"lambda", "Lambda"});
        double lo = number(need(e, "equations[]", "lambda"), "lambda");
        double hi = number(need(e, "equations[]", "Lambda"), "Lambda");
        try {
            cfg.spec.pairs.emplace_back(lo, hi);
        } catch (const PreconditionError& err) {
            throw ConfigError(std::string("equations[]: ") + err.what());
        }
    }
    cfg.spec.domain = parse_domain(need(j, "config", "domain"), base_dir);
    try {
        cfg.spec.f = parse_nonlinearity(need(j, "config", "nonlinearity"), static_cast<std::size_t>(n));
    } catch (const PreconditionError& err) {
        throw ConfigError(std::string("nonlinearity: ") + err.what());
    }

    if (auto it = j.find("numerics"); it != j.end()) {
        const json& num = *it;
        allow_keys(num, "numerics", {"M", "tol", "tol_cert", "max_iter", "seed"});
        if (num.contains("M")) {
            long long M = integer(num["M"], "numerics.M");
            if (M < 16) throw ConfigError("numerics.M must be >= 16");
            cfg.spec.radial_intervals = static_cast<std::size_t>(M);
        }
        if (num.contains("tol")) cfg.numerics.tol = number(num["tol"], "numerics.tol");
        if (num.contains("tol_cert")) cfg.spec.certificate_tol = number(num["tol_cert"], "numerics.tol_cert");
        if (num.contains("max_iter")) cfg.numerics.max_iter = static_cast<int>(integer(num["max_iter"], "numerics.max_iter"));
        if (num.contains("seed")) {
            if (!num["seed"].is_number_unsigned()) throw ConfigError("numerics.seed must be a nonnegative integer");
            cfg.numerics.seed = num["seed"].get<std::uint64_t>();
        }
        if (!(cfg.numerics.tol > 0.0)) throw ConfigError("numerics.tol must be positive");
        if (!(cfg.spec.certificate_tol > 0.0)) throw ConfigError("numerics.tol_cert must be positive");
        if (cfg.numerics.max_iter < 1) throw ConfigError("numerics.max_iter must be >= 1");
    }

    try {
        cfg.spec.validate();
    } catch (const PreconditionError& err) {
        throw ConfigError(err.what());
    }
    return cfg;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& err) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + err.what());
    }
    return parse_config(j, path.parent_path());
}

}  // namespace pucci
