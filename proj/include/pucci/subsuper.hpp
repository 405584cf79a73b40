#pragma once

#include "pucci/errors.hpp"
#include "pucci/nonlinearity.hpp"
#include "pucci/radial.hpp"

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace pucci {

/// A barrier could not be constructed or failed its own verification.
class BarrierError : public Error {
public:
    using Error::Error;
};

/// Lazily computed torsion functions and principal eigenpairs of one system,
/// shared by all barrier constructors. Each entry is written once (guarded by
/// std::call_once) and read-only afterwards, so concurrent readers are safe.
class RadialCache {
public:
    explicit RadialCache(SystemSpec spec, double eigen_tol = 1e-12);

    const SystemSpec& spec() const { return spec_; }
    const RadialGrid& grid() const { return grid_; }
    const Torsion& torsion(std::size_t i) const;
    const Eigenpair& eigenpair(std::size_t i) const;

private:
    SystemSpec spec_;
    RadialGrid grid_;
    double eigen_tol_;
    std::unique_ptr<std::once_flag[]> torsion_once_;
    std::unique_ptr<std::once_flag[]> eigen_once_;
    mutable std::vector<std::optional<Torsion>> torsion_;
    mutable std::vector<std::optional<Eigenpair>> eigen_;
};

struct Exponents {
    double minus;  // (Lambda / lambda)(N - 1) + 1
    double plus;   // (lambda / Lambda)(N - 1) + 1
};

Exponents exponents(const EllipticityPair& pair, int N);

struct AConstant {
    double A;
    double eps_star;
};

/// eps* = N- R / (N- + 1) minimizes N- R^{N+ - 1} / (eps^{N-} (R - eps)); A is the minimum.
AConstant A_constant(const EllipticityPair& pair, int N, double R);

struct EquationConstants {
    double N_minus;
    double N_plus;
    double eps_star;
    double A;
    double normE;
};

struct ThresholdReport {
    std::vector<EquationConstants> equations;
    double mu0;              // f_i(mu0 |e_1|, ..., mu0 |e_n|) < 1 for all i
    double mu_star;          // min_i a / (|e_i| f_i(a..a))
    double mu_lower_A;       // max_i A_i b / f_i(b..b)
    double mu_lower_proof;   // max_i Lambda_i A_i b / f_i(b..b)
    double a;
    double b;

    /// The multiplicity window (mu_lower_proof, mu_star) is nonempty.
    bool window_open() const { return mu_lower_proof < mu_star; }
};

void to_json(nlohmann::json& j, const ThresholdReport& r);

/// Largest 2^-k, k = 0..60, with f_i(mu0 |e_1|, ..., mu0 |e_n|) < 1 for all i.
double dyadic_mu0(const SystemSpec& spec, std::span<const double> normsE);
double dyadic_mu0(const RadialCache& cache);

/// Throws PreconditionError unless 0 < a < b, and BarrierError when some
/// f_i vanishes at (a..a) or (b..b).
ThresholdReport thresholds(const RadialCache& cache, double a, double b);
/// Same with externally computed torsion norms |e_i| and inscribed radius R
/// (used for grid domains).
ThresholdReport thresholds(const SystemSpec& spec, std::span<const double> normsE, int N, double R, double a, double b);
ThresholdReport thresholds(const SystemSpec& spec, double a, double b);

/// Plateau profile rho = 1 on [0, eps], 1 - (1 - ((R - r)/(R - eps))^m)^l on (eps, R].
struct BumpProfile {
    double b;
    double epsilon;
    double l;
    double m;
    double R;

    void validate() const;
};

double rho(double r, const BumpProfile& p);
/// d = b rho sampled on the grid.
RadialField bump_field(const BumpProfile& p, const RadialGrid& grid);

enum class CertificateKind { Sub, Sup, StrictSub, StrictSup };

std::string to_string(CertificateKind k);

struct EquationMargin {
    double worst_margin;     // signed; >= 0 means the inequality holds at every interior node
    std::size_t worst_node;
    std::size_t violations;  // nodes failing the acceptance test
};

struct CertificateReport {
    CertificateKind kind;
    std::vector<EquationMargin> equations;
    bool pass;
    /// Realized slack: the smallest margin over equations and interior nodes.
    double slack;
    /// Non-strict acceptance tolerance certificate_tol (1 + |mu f(u)|_inf).
    double tolerance;
    /// Slack demanded by the caller for strict kinds (0 when none).
    double required_slack;
};

void to_json(nlohmann::json& j, const CertificateReport& r);

/// Residual sign test of -M+_h(D^2 u_i) - mu f_i(u) at nodes 0..M-1 (the
/// boundary node is exempt). Sub: residual <= tol; sup: >= -tol. Strict kinds
/// need the margin to exceed the round-off bound of its own evaluation at
/// every node and to be at least required_slack.
CertificateReport certify(const SystemState& u, const SystemSpec& spec, double mu, CertificateKind kind,
                          double required_slack = 0.0);

struct OrderWitness {
    std::size_t component;
    std::size_t node;
    double lhs;
    double rhs;
};

struct Ordering {
    bool holds;
    std::optional<OrderWitness> witness;
};

/// x <= y componentwise up to 1e-12 (relative to max(1, |x|, |y|)). When the
/// order fails the witness is the center node if it violates, otherwise the
/// node with the largest violation.
Ordering check_ordering(const SystemState& x, const SystemState& y);

void to_json(nlohmann::json& j, const Ordering& o);

struct EigenSubsolution {
    SystemState psi;   // m_mu phi_1^+
    double m_mu;
    CertificateReport certificate;
};

/// Largest m in (0, 1] (dyadic bracket, then bisection) with
/// mu f_i(m phi^+(r_k)) > mu_1,i m phi^+_i(r_k) at every node and component.
EigenSubsolution build_eigen_subsolution(const RadialCache& cache, double mu);

struct SmallPair {
    SystemState psi;
    SystemState phi_small;   // mu e_i
    double m_mu;
    CertificateReport sub_certificate;
    CertificateReport sup_certificate;
};

/// Requires mu < mu0. psi is shrunk (halving m_mu) until psi <= phi_small.
SmallPair build_small_pair(const RadialCache& cache, double mu, double mu0);

struct LargeSupersolution {
    SystemState phi;   // m~ e_i
    double m_tilde;
    CertificateReport certificate;
};

/// Smallest m~ = 2^k, k = 0..60, with m~ >= mu f_i(m~ |e_1|, ..., m~ |e_n|) for all i
/// and m~ e >= every state in `below`.
LargeSupersolution build_large_supersolution(const RadialCache& cache, double mu,
                                             const std::vector<SystemState>& below = {});

struct StrictSupersolution {
    SystemState phi_tilde;   // a e_i / |e_i|
    CertificateReport certificate;
};

/// Requires mu < mu_star.
StrictSupersolution build_strict_supersolution(const RadialCache& cache, double a, double mu, double mu_star);

/// Bump parameters for the strict subsolution: eps = min_i eps*_i and l = m
/// grown geometrically from 1.05 while mu > 1.1 l m mu_lower_proof, capped at 8.
/// When even l = 1.05 leaves no headroom, l = m = (mu / mu_lower_proof)^{1/4};
/// for mu <= mu_lower_proof no admissible l exists and l = m = 1.05 is returned.
BumpProfile choose_bump(const ThresholdReport& report, const RadialGrid& grid, double mu);

struct DominanceCheck {
    bool values_hold;   // psi~_i > d on [0, R)
    bool slopes_hold;   // -psi~_i' > -d' on (eps, R]
    std::optional<OrderWitness> witness;
};

struct StrictSubsolution {
    SystemState psi_tilde;
    RadialField d;
    BumpProfile profile;
    DominanceCheck dominance;
    CertificateReport certificate;
};

/// Solves the auxiliary system with load mu f_i(d, ..., d), d = b rho, then
/// checks dominance and certifies strict-sub. When mu_lower is given, mu must
/// exceed it (PreconditionError). Dominance or certificate failure raises
/// BarrierError unless `throw_on_failure` is false.
StrictSubsolution build_strict_subsolution(const RadialCache& cache, double mu, const BumpProfile& profile,
                                           std::optional<double> mu_lower, bool throw_on_failure = true);

}  // namespace pucci
