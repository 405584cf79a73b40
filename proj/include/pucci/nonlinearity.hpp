#pragma once

#include "pucci/errors.hpp"
#include "pucci/exprlang.hpp"
#include "pucci/pucci_core.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace pucci {

/// Parameters of the combustion family
///   f_i(x) = exp(tau x_i / (tau + x_i)) - 1 + sum_{j != i} x_j^{alpha_j}.
struct CombustionParams {
    double tau = 0.0;
    std::vector<double> alphas;
};

/// Right-hand side map [0, inf)^n -> [0, inf)^n, component by component.
class Nonlinearity {
public:
    /// Components given as expressions over u1..un (n = expressions.size()).
    explicit Nonlinearity(std::vector<expr::Expr> components);

    static Nonlinearity combustion(std::size_t n, double tau, std::vector<double> alphas);

    std::size_t size() const { return n_; }
    const std::optional<CombustionParams>& combustion_params() const { return combustion_; }

    /// Unclamped value of component i (0-based). Evaluation errors propagate.
    double raw(std::size_t i, std::span<const double> x) const;

    /// Value of component i clamped at zero. Values in [-1e-12, 0) become 0;
    /// anything more negative raises NumericalError (sign-changing f is unsupported).
    double operator()(std::size_t i, std::span<const double> x) const;

    /// f_i(s, s, ..., s).
    double on_diagonal(std::size_t i, double s) const;

private:
    Nonlinearity() = default;

    std::size_t n_ = 0;
    std::vector<expr::Expr> exprs_;
    std::optional<CombustionParams> combustion_;
};

std::shared_ptr<const Nonlinearity> builtin_combustion(std::size_t n, double tau, std::vector<double> alphas);

struct BallDomain {
    double radius = 1.0;
    int dimension = 2;
};

/// Description of a 2D grid domain. The mask either comes from a named shape
/// ("disc", "square", "lshape") or from a mask file.
struct GridDomain {
    std::string shape;       // empty when mask_file is used
    std::string mask_file;   // empty when shape is used
    double h = 1.0 / 64.0;
    int stencil_width = 4;
};

using Domain = std::variant<BallDomain, GridDomain>;

/// The weakly coupled system -M+_{lambda_i,Lambda_i}(D^2 u_i) = mu f_i(u).
struct SystemSpec {
    std::vector<EllipticityPair> pairs;
    std::shared_ptr<const Nonlinearity> f;
    Domain domain = BallDomain{};
    /// Radial mesh intervals M used by every radial computation.
    std::size_t radial_intervals = 4096;
    /// Non-strict certificates accept residuals up to certificate_tol (1 + |mu f(u)|_inf).
    double certificate_tol = 1e-6;

    std::size_t size() const { return pairs.size(); }

    /// Checks n consistency, positive radius and M >= 16.
    void validate() const;

    const BallDomain& ball() const;
};

enum class Condition { C1, C2, C3, C4 };

std::string to_string(Condition c);
Condition condition_from_string(const std::string& s);

struct Witness {
    std::vector<double> point;
    int component = -1;   // -1 when not tied to a component
    std::vector<std::pair<std::string, double>> quantities;
    std::string note;

    bool operator==(const Witness&) const = default;
};

struct AuditReport {
    Condition condition = Condition::C1;
    bool pass = false;
    std::vector<Witness> witnesses;
    std::vector<std::pair<std::string, double>> params;
    /// Raw sequences (slopes for C2, ratios for C3), one per component.
    std::vector<std::vector<double>> sequences;

    bool operator==(const AuditReport&) const = default;
};

void to_json(nlohmann::json& j, const Witness& w);
void from_json(const nlohmann::json& j, Witness& w);
void to_json(nlohmann::json& j, const AuditReport& r);
void from_json(const nlohmann::json& j, AuditReport& r);

inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

/// Monotonicity and f(0) = 0 on random ordered pairs in [0, box]^n.
AuditReport audit_C1(const Nonlinearity& f, double box, std::size_t samples, std::uint64_t seed = kDefaultSeed);

/// Diagonal slope blow-up at 0, estimated along s = s_min 2^{-k}, k = 0..20.
AuditReport audit_C2(const Nonlinearity& f, double s_min);

/// Sublinear growth on the diagonal, estimated along s = s_max 2^k, k = 0..10.
AuditReport audit_C3(const Nonlinearity& f, double s_max);

/// Which lower threshold the C4 comparison uses: the A_i form (no Lambda_i
/// factor) or the Lambda_i A_i form that the strict subsolution construction needs.
enum class LowerConvention { A, Proof };

/// min_i a / (normE_i f_i(a..a)) > max_i weight_i A_i b / f_i(b..b), where
/// weight_i = 1 for LowerConvention::A and Lambda_i for LowerConvention::Proof.
/// params carry "left" (mu^*) and "right" (mu_*).
AuditReport check_C4(const SystemSpec& spec, double a, double b, std::span<const double> normsE,
                     std::span<const double> A, LowerConvention convention = LowerConvention::A);

}  // namespace pucci
