#pragma once

#include "pucci/nonlinearity.hpp"
#include "pucci/radial.hpp"
#include "pucci/subsuper.hpp"

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace pucci {

struct OrderInterval {
    SystemState sub;
    SystemState sup;
};

enum class Direction { FromSub, FromSup };

std::string to_string(Direction d);

struct SolveReport {
    SystemState solution;
    int iterations = 0;
    /// sup over i and nodes 0..M-1 of |-M+_h(D^2 u_i) - mu f_i(u)|.
    double residual = 0.0;
    /// residual / (1 + |mu f(u)|_inf).
    double relative_residual = 0.0;
    Direction direction = Direction::FromSub;
    /// sup-norm change per iteration.
    std::vector<double> history;

    std::vector<double> norms() const;
};

void to_json(nlohmann::json& j, const SolveReport& r);

struct SolveOptions {
    double tol = 1e-8;
    int max_iter = 10000;
};

/// Picard iteration u_i <- solve_radial(mu f_i(u)) started at interval.sub
/// (FromSub) or interval.sup (FromSup). Every step is checked for
/// monotonicity (up to 1e-10 relative) and for staying inside the interval
/// (up to tol relative); violations raise NumericalError. Stops when the
/// update is below tol max(1, |u|) and the relative residual is below tol.
SolveReport monotone_solve(const OrderInterval& interval, const SystemSpec& spec, double mu, Direction from,
                           const SolveOptions& options = {});

/// mu lies outside (mu_lower_proof, mu_star).
class OutsideWindowError : public PreconditionError {
public:
    OutsideWindowError(const std::string& msg, ThresholdReport report)
        : PreconditionError(msg), report_(std::move(report)) {}
    const ThresholdReport& report() const { return report_; }

private:
    ThresholdReport report_;
};

struct BarrierSet {
    SystemState psi;         // m_mu phi_1^+
    SystemState phi_small;   // mu e_i when mu < mu0, else empty
    SystemState phi_large;   // m~ e_i
    SystemState phi_tilde;   // a e_i / |e_i|
    SystemState psi_tilde;
    double m_mu = 0.0;
    double m_tilde = 0.0;
    std::optional<BumpProfile> bump;
};

struct NamedOrdering {
    std::string relation;
    bool expected;   // true: must hold, false: must fail
    Ordering verdict;
};

struct MultiplicityReport {
    ThresholdReport thresholds;
    std::vector<AuditReport> audits;
    BarrierSet barriers;
    std::optional<CertificateReport> psi_certificate;
    std::optional<CertificateReport> phi_certificate;
    std::optional<CertificateReport> psi_tilde_certificate;
    std::optional<CertificateReport> phi_tilde_certificate;
    std::optional<DominanceCheck> dominance;
    std::vector<NamedOrdering> orderings;
    std::optional<SolveReport> u1;
    std::optional<SolveReport> u2;
    double distance = 0.0;   // |u1 - u2|_inf
    bool separated = false;  // |u1_i| <= a < b <= |u2_i| for all i
    bool third_solution_certified = false;
    std::vector<std::string> diagnostics;
};

void to_json(nlohmann::json& j, const MultiplicityReport& r);

/// Builds and certifies the two ordered barrier pairs and computes
/// u1 in [psi, phi~] and u2 in [psi~, phi]. Throws OutsideWindowError when mu
/// is not in (mu_lower_proof, mu_star); every other failure is recorded in
/// the diagnostics and leaves third_solution_certified false.
MultiplicityReport find_multiplicity(const RadialCache& cache, double mu, double a, double b,
                                     const SolveOptions& options = {});

}  // namespace pucci
