#pragma once

// Command implementations behind the pucci executable. Each returns the
// process exit code and writes its report to `out`; messages go to `err`.
//   0 success, 2 config or argument error, 3 C4 violation,
//   4 barrier construction or C1 failure, 5 mu outside the multiplicity
//   window, 6 certificate failure.

#include "pucci/config.hpp"
#include "pucci/iterate.hpp"
#include "pucci/subsuper.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pucci {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 2;
inline constexpr int condition = 3;
inline constexpr int barrier = 4;
inline constexpr int window = 5;
inline constexpr int certificate = 6;
}  // namespace exit_code

struct RunOptions {
    /// Adds a "meta" block (tool version, UTC timestamp) to JSON reports.
    bool meta = true;
    /// Worker threads for sweep; 0 means PUCCI_THREADS or the hardware count.
    unsigned threads = 0;
};

/// Result of the existence pipeline used by solve and sweep.
struct SolvePipeline {
    double mu = 0.0;
    double mu0 = 0.0;
    AuditReport c1;
    SystemState psi;
    double m_mu = 0.0;
    CertificateReport psi_certificate;
    std::optional<CertificateReport> phi_small_certificate;   // only for mu < mu0
    SystemState phi_large;
    double m_tilde = 0.0;
    CertificateReport phi_large_certificate;
    SolveReport minimal;
    std::optional<SolveReport> maximal;
    std::optional<Ordering> minimal_le_maximal;
};

/// C1 failed before a solve; carries the audit with its witness.
class AuditError : public BarrierError {
public:
    explicit AuditError(AuditReport report)
        : BarrierError("f fails the C1 monotonicity audit"), report_(std::move(report)) {}
    const AuditReport& report() const { return report_; }

private:
    AuditReport report_;
};

/// Box side of the C1 audit run before every solve.
inline constexpr double kSolveAuditBox = 100.0;

/// C1 audit, psi = m_mu phi^+ (shrunk below mu e when mu < mu0), phi = m~ e
/// above psi, then monotone_solve from psi (and from phi when `maximal`).
/// Throws AuditError when C1 fails and BarrierError when a barrier cannot be built.
SolvePipeline run_solve_pipeline(const RadialCache& cache, const Numerics& numerics, double mu, bool maximal);

/// steps values mu_min (mu_max / mu_min)^{k / (steps - 1)}, endpoints exact.
std::vector<double> geometric_grid(double mu_min, double mu_max, int steps);

/// PUCCI_THREADS when set to a positive integer, else the hardware count (at least 1).
unsigned default_threads();

int cmd_thresholds(const Config& cfg, double a, double b, std::ostream& out, std::ostream& err,
                   const RunOptions& options = {});
/// JSON report to `out`; profiles as CSV (r, u_1..u_n of the minimal solution,
/// then of the maximal one) to `profiles` when given.
int cmd_solve(const Config& cfg, double mu, std::ostream& out, std::ostream* profiles, std::ostream& err,
              const RunOptions& options = {});
int cmd_multiplicity(const Config& cfg, double mu, double a, double b, std::ostream& out, std::ostream& err,
                     const RunOptions& options = {});
/// CSV: mu, norm_u1..norm_un, iterations, residual, error.
int cmd_sweep(const Config& cfg, double mu_min, double mu_max, int steps, std::ostream& out, std::ostream& err,
              const RunOptions& options = {});

}  // namespace pucci
