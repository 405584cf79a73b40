#include "pucci/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace pucci {

Nonlinearity::Nonlinearity(std::vector<expr::Expr> components) : n_(components.size()), exprs_(std::move(components)) {
    if (n_ == 0) throw PreconditionError("nonlinearity needs at least one component");
    for (const auto& e : exprs_) {
        if (e.arity() != n_) {
            throw PreconditionError("component arity " + std::to_string(e.arity()) + " does not match n = " +
                                    std::to_string(n_));
        }
    }
}

Nonlinearity Nonlinearity::combustion(std::size_t n, double tau, std::vector<double> alphas) {
    if (n < 1) throw PreconditionError("combustion family needs n >= 1");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw PreconditionError("combustion family needs tau > 0");
    if (alphas.size() != n) throw PreconditionError("combustion family needs exactly n exponents alpha_j");
    for (double a : alphas) {
        if (!(a > 0.0 && a < 1.0)) throw PreconditionError("combustion exponents must lie in (0, 1)");
    }
    Nonlinearity f;
    f.n_ = n;
    f.combustion_ = CombustionParams{tau, std::move(alphas)};
    return f;
}

std::shared_ptr<const Nonlinearity> builtin_combustion(std::size_t n, double tau, std::vector<double> alphas) {
    return std::make_shared<const Nonlinearity>(Nonlinearity::combustion(n, tau, std::move(alphas)));
}

double Nonlinearity::raw(std::size_t i, std::span<const double> x) const {
    if (x.size() != n_) throw PreconditionError("nonlinearity argument has wrong length");
    if (combustion_) {
        const double tau = combustion_->tau;
        double value = std::expm1(tau * x[i] / (tau + x[i]));
        for (std::size_t j = 0; j < n_; ++j) {
            if (j == i) continue;
            value += x[j] > 0.0 ? std::pow(x[j], combustion_->alphas[j]) : 0.0;
        }
        return value;
    }
    return expr::eval(exprs_[i], x);
}

double Nonlinearity::operator()(std::size_t i, std::span<const double> x) const {
    const double v = raw(i, x);
    if (v >= 0.0) return v;
    if (v >= -1e-12) return 0.0;
    throw NumericalError("component f" + std::to_string(i + 1) + " is negative (" + std::to_string(v) +
                         "); sign-changing right-hand sides are unsupported");
}

double Nonlinearity::on_diagonal(std::size_t i, double s) const {
    std::vector<double> x(n_, s);
    return (*this)(i, x);
}

void SystemSpec::validate() const {
    if (pairs.empty()) throw PreconditionError("system needs n >= 1 equations");
    if (!f) throw PreconditionError("system has no nonlinearity");
    if (f->size() != pairs.size()) {
        throw PreconditionError("nonlinearity has " + std::to_string(f->size()) + " components but system has " +
                                std::to_string(pairs.size()) + " equations");
    }
    if (radial_intervals < 16) throw PreconditionError("radial grid needs M >= 16");
    if (const auto* ball = std::get_if<BallDomain>(&domain)) {
        if (!(ball->radius > 0.0)) throw PreconditionError("ball radius must be positive");
        if (ball->dimension < 1 || ball->dimension > static_cast<int>(SymMatrix::kMaxDimension)) {
            throw PreconditionError("space dimension must be in 1..8");
        }
    }
}

const BallDomain& SystemSpec::ball() const {
    if (const auto* ball = std::get_if<BallDomain>(&domain)) return *ball;
    throw PreconditionError("operation requires a ball domain");
}

std::string to_string(Condition c) {
    switch (c) {
        case Condition::C1: return "C1";
        case Condition::C2: return "C2";
        case Condition::C3: return "C3";
        case Condition::C4: return "C4";
    }
    return "?";
}

Condition condition_from_string(const std::string& s) {
    if (s == "C1") return Condition::C1;
    if (s == "C2") return Condition::C2;
    if (s == "C3") return Condition::C3;
    if (s == "C4") return Condition::C4;
    throw PreconditionError("unknown condition id '" + s + "'");
}

void to_json(nlohmann::json& j, const Witness& w) {
    nlohmann::json q = nlohmann::json::object();
    for (const auto& [k, v] : w.quantities) q[k] = v;
    j = {{"point", w.point}, {"component", w.component}, {"quantities", q}, {"note", w.note}};
}

void from_json(const nlohmann::json& j, Witness& w) {
    j.at("point").get_to(w.point);
    j.at("component").get_to(w.component);
    j.at("note").get_to(w.note);
    w.quantities.clear();
    for (const auto& [k, v] : j.at("quantities").items()) w.quantities.emplace_back(k, v.get<double>());
}

void to_json(nlohmann::json& j, const AuditReport& r) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : r.params) params[k] = v;
    j = {{"condition", to_string(r.condition)},
         {"pass", r.pass},
         {"witnesses", r.witnesses},
         {"params", params},
         {"sequences", r.sequences}};
}

void from_json(const nlohmann::json& j, AuditReport& r) {
    r.condition = condition_from_string(j.at("condition").get<std::string>());
    j.at("pass").get_to(r.pass);
    j.at("witnesses").get_to(r.witnesses);
    r.params.clear();
    for (const auto& [k, v] : j.at("params").items()) r.params.emplace_back(k, v.get<double>());
    r.sequences = j.value("sequences", std::vector<std::vector<double>>{});
}

namespace {

// nlohmann::json objects iterate in key order; keep params sorted so that a
// report survives a JSON round trip unchanged.
void sort_keys(AuditReport& r) {
    std::sort(r.params.begin(), r.params.end());
    for (auto& w : r.witnesses) std::sort(w.quantities.begin(), w.quantities.end());
}

}  // namespace

AuditReport audit_C1(const Nonlinearity& f, double box, std::size_t samples, std::uint64_t seed) {
    if (!(box > 0.0)) throw PreconditionError("audit_C1 needs box > 0");
    const std::size_t n = f.size();
    AuditReport report{Condition::C1, true, {}, {{"box", box}, {"samples", static_cast<double>(samples)},
                                                 {"seed", static_cast<double>(seed)}, {"tolerance", 1e-10}}, {}};

    const std::vector<double> zero(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        try {
            const double v0 = f.raw(i, zero);
            if (std::abs(v0) > 1e-10) {
                report.pass = false;
                report.witnesses.push_back({zero, static_cast<int>(i), {{"value", v0}}, "f_i(0,...,0) != 0"});
            }
        } catch (const Error& e) {
            report.pass = false;
            report.witnesses.push_back({zero, static_cast<int>(i), {}, std::string("evaluation error: ") + e.what()});
        }
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> x(n), y(n);
    constexpr std::size_t kMaxWitnesses = 16;
    for (std::size_t s = 0; s < samples; ++s) {
        for (std::size_t k = 0; k < n; ++k) {
            x[k] = box * unit(rng);
            y[k] = x[k] + (box - x[k]) * unit(rng);
        }
        for (std::size_t i = 0; i < n; ++i) {
            try {
                const double fx = f.raw(i, x);
                const double fy = f.raw(i, y);
                if (!(fx <= fy + 1e-10)) {
                    report.pass = false;
                    if (report.witnesses.size() < kMaxWitnesses) {
                        std::vector<double> both = x;
                        both.insert(both.end(), y.begin(), y.end());
                        report.witnesses.push_back({both, static_cast<int>(i), {{"f_x", fx}, {"f_y", fy}},
                                                    "decrease along x <= y (point = x then y)"});
                    }
                }
            } catch (const Error& e) {
                report.pass = false;
                if (report.witnesses.size() < kMaxWitnesses) {
                    report.witnesses.push_back({x, static_cast<int>(i), {}, std::string("evaluation error: ") + e.what()});
                }
            }
        }
    }
    sort_keys(report);
    return report;
}

AuditReport audit_C2(const Nonlinearity& f, double s_min) {
    if (!(s_min > 0.0 && s_min < 1.0)) throw PreconditionError("audit_C2 needs s_min in (0, 1)");
    const std::size_t n = f.size();
    constexpr int kSteps = 20;
    constexpr double kSlopeThreshold = 1e3;
    constexpr int kTail = 5;
    AuditReport report{Condition::C2, true, {}, {{"s_min", s_min}, {"steps", kSteps}, {"slope_threshold", kSlopeThreshold}}, {}};

    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> slopes;
        std::vector<double> x(n, 0.0);
        try {
            const double f0 = f.raw(i, x);
            for (int k = 0; k <= kSteps; ++k) {
                const double s = s_min * std::ldexp(1.0, -k);
                x[i] = s;
                slopes.push_back((f.raw(i, x) - f0) / s);
            }
        } catch (const Error& e) {
            report.pass = false;
            report.witnesses.push_back({x, static_cast<int>(i), {}, std::string("evaluation error: ") + e.what()});
            report.sequences.push_back(slopes);
            continue;
        }
        bool increasing_tail = true;
        for (int k = kSteps - kTail + 1; k <= kSteps; ++k) increasing_tail = increasing_tail && slopes[k] > slopes[k - 1];
        const double last = slopes.back();
        if (!increasing_tail || !(last > kSlopeThreshold)) {
            report.pass = false;
            x.assign(n, 0.0);
            x[i] = s_min * std::ldexp(1.0, -kSteps);
            report.witnesses.push_back({x, static_cast<int>(i), {{"final_slope", last}},
                                        increasing_tail ? "slope stays below threshold" : "slope not eventually increasing"});
        }
        report.sequences.push_back(std::move(slopes));
    }
    sort_keys(report);
    return report;
}

AuditReport audit_C3(const Nonlinearity& f, double s_max) {
    if (!(s_max >= 1.0)) throw PreconditionError("audit_C3 needs s_max >= 1");
    const std::size_t n = f.size();
    constexpr int kSteps = 10;
    constexpr double kRatioThreshold = 0.1;
    AuditReport report{Condition::C3, true, {}, {{"s_max", s_max}, {"steps", kSteps}, {"ratio_threshold", kRatioThreshold}}, {}};

    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> ratios;
        double s = s_max;
        try {
            for (int k = 0; k <= kSteps; ++k) {
                s = s_max * std::ldexp(1.0, k);
                const std::vector<double> x(n, s);
                const double v = f.raw(i, x);
                if (!std::isfinite(v)) throw NumericalError("overflow");
                ratios.push_back(v / s);
            }
        } catch (const Error& e) {
            report.pass = false;
            report.witnesses.push_back({std::vector<double>(n, s), static_cast<int>(i), {},
                                        std::string("evaluation failed: ") + e.what()});
            report.sequences.push_back(ratios);
            continue;
        }
        bool decreasing = true;
        for (std::size_t k = 1; k < ratios.size(); ++k) decreasing = decreasing && ratios[k] < ratios[k - 1];
        const double first = ratios.front();
        const double last = ratios.back();
        const bool small = last < kRatioThreshold || last < kRatioThreshold * first;
        if (!decreasing || !small) {
            report.pass = false;
            report.witnesses.push_back({std::vector<double>(n, s), static_cast<int>(i),
                                        {{"first_ratio", first}, {"final_ratio", last}},
                                        decreasing ? "ratio does not fall below threshold" : "ratio not decreasing"});
        }
        report.sequences.push_back(std::move(ratios));
    }
    sort_keys(report);
    return report;
}

AuditReport check_C4(const SystemSpec& spec, double a, double b, std::span<const double> normsE,
                     std::span<const double> A, LowerConvention convention) {
    if (!(a > 0.0 && a < b)) throw PreconditionError("check_C4 needs 0 < a < b");
    const std::size_t n = spec.size();
    if (normsE.size() != n || A.size() != n) throw PreconditionError("check_C4 needs n torsion norms and n constants A_i");

    AuditReport report{Condition::C4, true, {}, {}, {}};
    double left = std::numeric_limits<double>::infinity();
    double right = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double fa = spec.f->on_diagonal(i, a);
        const double fb = spec.f->on_diagonal(i, b);
        if (fa == 0.0 || fb == 0.0) {
            report.pass = false;
            report.witnesses.push_back({{fa == 0.0 ? a : b}, static_cast<int>(i), {{"f_a", fa}, {"f_b", fb}},
                                        "f_i vanishes on the diagonal at a or b"});
            continue;
        }
        const double weight = convention == LowerConvention::Proof ? spec.pairs[i].upper : 1.0;
        left = std::min(left, a / (normsE[i] * fa));
        right = std::max(right, weight * A[i] * b / fb);
    }
    report.params = {{"a", a}, {"b", b}, {"left", left}, {"right", right},
                     {"lambda_weighted", convention == LowerConvention::Proof ? 1.0 : 0.0}};
    if (report.pass && !(left > right)) {
        report.pass = false;
        report.witnesses.push_back({{a, b}, -1, {{"left", left}, {"right", right}}, "min side does not exceed max side"});
    }
    sort_keys(report);
    return report;
}

}  // namespace pucci
