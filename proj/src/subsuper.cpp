#include "pucci/subsuper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pucci {

RadialCache::RadialCache(SystemSpec spec, double eigen_tol)
    : spec_((spec.validate(), std::move(spec))),
      grid_(radial_grid(spec_)),
      eigen_tol_(eigen_tol),
      torsion_once_(new std::once_flag[spec_.size()]),
      eigen_once_(new std::once_flag[spec_.size()]),
      torsion_(spec_.size()),
      eigen_(spec_.size()) {}

const Torsion& RadialCache::torsion(std::size_t i) const {
    std::call_once(torsion_once_[i], [&] { torsion_[i] = pucci::torsion(spec_.pairs[i], grid_); });
    return *torsion_[i];
}

const Eigenpair& RadialCache::eigenpair(std::size_t i) const {
    std::call_once(eigen_once_[i], [&] { eigen_[i] = principal_eigenpair(spec_.pairs[i], grid_, eigen_tol_); });
    return *eigen_[i];
}

Exponents exponents(const EllipticityPair& pair, int N) {
    if (N < 1) throw PreconditionError("exponents need N >= 1");
    const double ratio = pair.upper / pair.lower;
    return {ratio * (N - 1) + 1.0, (N - 1) / ratio + 1.0};
}

AConstant A_constant(const EllipticityPair& pair, int N, double R) {
    if (!(R > 0.0)) throw PreconditionError("A_constant needs R > 0");
    const Exponents ex = exponents(pair, N);
    const double eps = ex.minus * R / (ex.minus + 1.0);
    const double A = ex.minus * std::pow(R, ex.plus - 1.0) / (std::pow(eps, ex.minus) * (R - eps));
    return {A, eps};
}

double dyadic_mu0(const SystemSpec& spec, std::span<const double> normsE) {
    const std::size_t n = spec.size();
    if (normsE.size() != n) throw PreconditionError("mu0: one torsion norm per equation is required");
    std::vector<double> x(n);
    for (int k = 0; k <= 60; ++k) {
        const double trial = std::ldexp(1.0, -k);
        for (std::size_t j = 0; j < n; ++j) x[j] = trial * normsE[j];
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) ok = (*spec.f)(i, x) < 1.0;
        if (ok) return trial;
    }
    throw BarrierError("no dyadic mu0 >= 2^-60 with f_i(mu0 |e|) < 1");
}

double dyadic_mu0(const RadialCache& cache) {
    std::vector<double> norms(cache.spec().size());
    for (std::size_t i = 0; i < norms.size(); ++i) norms[i] = cache.torsion(i).sup_norm;
    return dyadic_mu0(cache.spec(), norms);
}

ThresholdReport thresholds(const SystemSpec& spec, std::span<const double> normsE, int N, double R, double a, double b) {
    if (!(a > 0.0 && a < b)) throw PreconditionError("thresholds need 0 < a < b");
    const std::size_t n = spec.size();
    if (normsE.size() != n) throw PreconditionError("thresholds: one torsion norm per equation is required");

    ThresholdReport report{};
    report.a = a;
    report.b = b;
    report.mu_star = std::numeric_limits<double>::infinity();
    report.mu_lower_A = 0.0;
    report.mu_lower_proof = 0.0;

    for (std::size_t i = 0; i < n; ++i) {
        const auto& pair = spec.pairs[i];
        if (!(normsE[i] > 0.0)) throw PreconditionError("thresholds: torsion norms must be positive");
        const Exponents ex = exponents(pair, N);
        const AConstant ac = A_constant(pair, N, R);
        report.equations.push_back({ex.minus, ex.plus, ac.eps_star, ac.A, normsE[i]});

        const double fa = spec.f->on_diagonal(i, a);
        const double fb = spec.f->on_diagonal(i, b);
        if (fa == 0.0 || fb == 0.0) {
            const double at = fa == 0.0 ? a : b;
            throw BarrierError("C4 requires f_i(a..a) and f_i(b..b) to be nonzero, but f" + std::to_string(i + 1) +
                               " vanishes at (" + std::to_string(at) + ", ..., " + std::to_string(at) + ")");
        }
        report.mu_star = std::min(report.mu_star, a / (normsE[i] * fa));
        report.mu_lower_A = std::max(report.mu_lower_A, ac.A * b / fb);
        report.mu_lower_proof = std::max(report.mu_lower_proof, pair.upper * ac.A * b / fb);
    }

    report.mu0 = dyadic_mu0(spec, normsE);
    return report;
}

ThresholdReport thresholds(const RadialCache& cache, double a, double b) {
    const SystemSpec& spec = cache.spec();
    std::vector<double> norms(spec.size());
    for (std::size_t i = 0; i < norms.size(); ++i) norms[i] = cache.torsion(i).sup_norm;
    const auto& ball = spec.ball();
    return thresholds(spec, norms, ball.dimension, ball.radius, a, b);
}

ThresholdReport thresholds(const SystemSpec& spec, double a, double b) { return thresholds(RadialCache(spec), a, b); }

void to_json(nlohmann::json& j, const ThresholdReport& r) {
    nlohmann::json eqs = nlohmann::json::array();
    for (const auto& e : r.equations) {
        eqs.push_back({{"N_minus", e.N_minus}, {"N_plus", e.N_plus}, {"eps_star", e.eps_star}, {"A", e.A}, {"normE", e.normE}});
    }
    j = {{"equations", eqs},       {"mu0", r.mu0}, {"muStar", r.mu_star}, {"muLower_A", r.mu_lower_A},
         {"muLower_proof", r.mu_lower_proof}, {"a", r.a}, {"b", r.b}, {"window_open", r.window_open()}};
}

void BumpProfile::validate() const {
    if (!(R > 0.0)) throw PreconditionError("bump profile needs R > 0");
    if (!(b > 0.0)) throw PreconditionError("bump profile needs b > 0");
    if (!(epsilon > 0.0 && epsilon < R)) throw PreconditionError("bump profile needs 0 < eps < R");
    if (!(l > 1.0 && m > 1.0)) throw PreconditionError("bump profile needs l, m > 1");
}

double rho(double r, const BumpProfile& p) {
    if (!(r >= 0.0 && r <= p.R)) throw PreconditionError("rho evaluated outside [0, R]");
    if (r <= p.epsilon) return 1.0;
    const double s = (p.R - r) / (p.R - p.epsilon);
    return 1.0 - std::pow(1.0 - std::pow(s, p.m), p.l);
}

RadialField bump_field(const BumpProfile& p, const RadialGrid& grid) {
    p.validate();
    std::vector<double> d(grid.nodes());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = p.b * rho(std::min(grid.r(k), p.R), p);
    return RadialField(grid, std::move(d));
}

std::string to_string(CertificateKind k) {
    switch (k) {
        case CertificateKind::Sub: return "sub";
        case CertificateKind::Sup: return "sup";
        case CertificateKind::StrictSub: return "strict-sub";
        case CertificateKind::StrictSup: return "strict-sup";
    }
    return "?";
}

void to_json(nlohmann::json& j, const CertificateReport& r) {
    nlohmann::json eqs = nlohmann::json::array();
    for (const auto& e : r.equations) {
        eqs.push_back({{"worst_margin", e.worst_margin}, {"worst_node", e.worst_node}, {"violations", e.violations}});
    }
    j = {{"kind", to_string(r.kind)}, {"equations", eqs},        {"pass", r.pass},
         {"slack", r.slack},          {"tolerance", r.tolerance}, {"required_slack", r.required_slack}};
}

CertificateReport certify(const SystemState& u, const SystemSpec& spec, double mu, CertificateKind kind,
                          double required_slack) {
    const std::size_t n = spec.size();
    if (u.size() != n) throw PreconditionError("certify: state has wrong number of components");
    const RadialGrid grid = radial_grid(spec);
    for (const auto& field : u) {
        if (!(field.grid == grid)) throw PreconditionError("certify: state grid does not match the system grid");
    }
    const bool strict = kind == CertificateKind::StrictSub || kind == CertificateKind::StrictSup;
    const bool sub = kind == CertificateKind::Sub || kind == CertificateKind::StrictSub;
    const std::size_t M = grid.intervals();
    const double h = grid.h();
    const double tangential = grid.dimension() - 1;
    constexpr double kNoise = 32.0 * std::numeric_limits<double>::epsilon();

    std::vector<std::vector<double>> loads(n);
    double load_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        loads[i] = system_load(spec, mu, u, i);
        for (double g : loads[i]) load_norm = std::max(load_norm, std::abs(g));
    }

    CertificateReport report{kind, {}, true, std::numeric_limits<double>::infinity(), spec.certificate_tol * (1.0 + load_norm),
                             required_slack};
    for (std::size_t i = 0; i < n; ++i) {
        const auto& v = u[i].values;
        const double upper = spec.pairs[i].upper;
        const auto op = radial_pucci(v, grid, spec.pairs[i]);
        EquationMargin eq{std::numeric_limits<double>::infinity(), 0, 0};
        for (std::size_t k = 0; k < M; ++k) {
            const double residual = -op[k] - loads[i][k];
            const double margin = sub ? -residual : residual;
            bool ok;
            if (strict) {
                double noise;
                if (k == 0) {
                    noise = grid.dimension() * upper * 2.0 * (std::abs(v[1]) + std::abs(v[0])) / (h * h);
                } else {
                    noise = upper * (std::abs(v[k + 1]) + 2.0 * std::abs(v[k]) + std::abs(v[k - 1])) / (h * h) +
                            tangential * upper * (std::abs(v[k + 1]) + std::abs(v[k]) + std::abs(v[k - 1])) / (grid.r(k) * h);
                }
                noise = kNoise * (noise + std::abs(loads[i][k]));
                ok = margin > noise && margin > 0.0 && margin >= required_slack;
            } else {
                ok = margin >= -report.tolerance;
            }
            if (!ok) ++eq.violations;
            if (margin < eq.worst_margin) {
                eq.worst_margin = margin;
                eq.worst_node = k;
            }
        }
        report.pass = report.pass && eq.violations == 0;
        report.slack = std::min(report.slack, eq.worst_margin);
        report.equations.push_back(eq);
    }
    return report;
}

Ordering check_ordering(const SystemState& x, const SystemState& y) {
    if (x.size() != y.size()) throw PreconditionError("check_ordering: component count mismatch");
    std::optional<OrderWitness> worst;
    double worst_excess = 0.0;
    std::optional<OrderWitness> center;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i].grid == y[i].grid)) throw PreconditionError("check_ordering: grid mismatch");
        for (std::size_t k = 0; k < x[i].values.size(); ++k) {
            const double a = x[i].values[k];
            const double b = y[i].values[k];
            const double tol = 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
            if (a > b + tol) {
                if (k == 0 && !center) center = OrderWitness{i, k, a, b};
                if (a - b > worst_excess) {
                    worst_excess = a - b;
                    worst = OrderWitness{i, k, a, b};
                }
            }
        }
    }
    if (!worst) return {true, std::nullopt};
    return {false, center ? center : worst};
}

void to_json(nlohmann::json& j, const Ordering& o) {
    j = {{"holds", o.holds}};
    if (o.witness) {
        j["witness"] = {{"component", o.witness->component + 1},
                        {"node", o.witness->node},
                        {"lhs", o.witness->lhs},
                        {"rhs", o.witness->rhs}};
    }
}

namespace {

SystemState scaled_state(const SystemState& s, double c) {
    SystemState out;
    out.reserve(s.size());
    for (const auto& f : s) out.push_back(f.scaled(c));
    return out;
}

SystemState eigen_state(const RadialCache& cache) {
    SystemState out;
    for (std::size_t i = 0; i < cache.spec().size(); ++i) out.push_back(cache.eigenpair(i).phi);
    return out;
}

SystemState torsion_state(const RadialCache& cache) {
    SystemState out;
    for (std::size_t i = 0; i < cache.spec().size(); ++i) out.push_back(cache.torsion(i).profile);
    return out;
}

// mu f_i(m phi(r_k)) > mu_1,i m phi_i(r_k) at all nodes where phi_i > 0.
bool eigen_scale_admissible(const RadialCache& cache, const SystemState& phi, double mu, double m) {
    const SystemSpec& spec = cache.spec();
    const std::size_t n = spec.size();
    std::vector<double> x(n);
    for (std::size_t k = 0; k < cache.grid().intervals(); ++k) {
        for (std::size_t j = 0; j < n; ++j) x[j] = m * phi[j].values[k];
        for (std::size_t i = 0; i < n; ++i) {
            if (!(x[i] > 0.0)) continue;
            if (!(mu * (*spec.f)(i, x) > cache.eigenpair(i).mu * x[i])) return false;
        }
    }
    return true;
}

}  // namespace

EigenSubsolution build_eigen_subsolution(const RadialCache& cache, double mu) {
    if (!(mu > 0.0)) throw PreconditionError("eigen subsolution needs mu > 0");
    const SystemState phi = eigen_state(cache);

    double good = 0.0;
    double bad = 0.0;
    for (int k = 0; k <= 60; ++k) {
        const double m = std::ldexp(1.0, -k);
        if (eigen_scale_admissible(cache, phi, mu, m)) {
            good = m;
            bad = k == 0 ? m : 2.0 * m;
            break;
        }
    }
    if (good == 0.0) {
        throw BarrierError("no admissible scale m in [2^-60, 1] with mu f_i(m phi) > mu_1,i m phi_i");
    }
    for (int it = 0; it < 40 && bad > good; ++it) {
        const double mid = 0.5 * (good + bad);
        if (eigen_scale_admissible(cache, phi, mu, mid)) good = mid;
        else bad = mid;
    }

    SystemState psi = scaled_state(phi, good);
    CertificateReport cert = certify(psi, cache.spec(), mu, CertificateKind::Sub);
    if (!cert.pass) throw BarrierError("eigenfunction subsolution failed its certificate");
    return {std::move(psi), good, std::move(cert)};
}

SmallPair build_small_pair(const RadialCache& cache, double mu, double mu0) {
    if (!(mu > 0.0 && mu < mu0)) {
        throw PreconditionError("small pair needs 0 < mu < mu0 = " + std::to_string(mu0));
    }
    EigenSubsolution sub = build_eigen_subsolution(cache, mu);
    SystemState phi_small = scaled_state(torsion_state(cache), mu);
    CertificateReport sup = certify(phi_small, cache.spec(), mu, CertificateKind::Sup);
    if (!sup.pass) throw BarrierError("mu e failed its supersolution certificate");

    double m = sub.m_mu;
    SystemState psi = std::move(sub.psi);
    for (int it = 0; it < 200 && !check_ordering(psi, phi_small).holds; ++it) {
        m *= 0.5;
        psi = scaled_state(psi, 0.5);
    }
    if (!check_ordering(psi, phi_small).holds) throw BarrierError("could not shrink psi below mu e");
    CertificateReport sub_cert = certify(psi, cache.spec(), mu, CertificateKind::Sub);
    return {std::move(psi), std::move(phi_small), m, std::move(sub_cert), std::move(sup)};
}

LargeSupersolution build_large_supersolution(const RadialCache& cache, double mu, const std::vector<SystemState>& below) {
    if (!(mu > 0.0)) throw PreconditionError("large supersolution needs mu > 0");
    const SystemSpec& spec = cache.spec();
    const std::size_t n = spec.size();
    std::vector<double> x(n);
    for (int k = 0; k <= 60; ++k) {
        const double m = std::ldexp(1.0, k);
        for (std::size_t j = 0; j < n; ++j) x[j] = m * cache.torsion(j).sup_norm;
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) ok = m >= mu * (*spec.f)(i, x);
        if (!ok) continue;
        SystemState phi = scaled_state(torsion_state(cache), m);
        for (const auto& lower : below) ok = ok && check_ordering(lower, phi).holds;
        if (!ok) continue;
        CertificateReport cert = certify(phi, spec, mu, CertificateKind::Sup);
        if (!cert.pass) throw BarrierError("m~ e failed its supersolution certificate");
        return {std::move(phi), m, std::move(cert)};
    }
    throw BarrierError("no m~ <= 2^60 satisfies m~ >= mu f_i(m~ |e|)" +
                       std::string(below.empty() ? "" : " above the given states") + "; the growth is not sublinear");
}

StrictSupersolution build_strict_supersolution(const RadialCache& cache, double a, double mu, double mu_star) {
    if (!(a > 0.0)) throw PreconditionError("strict supersolution needs a > 0");
    if (!(mu > 0.0 && mu < mu_star)) {
        throw PreconditionError("strict supersolution needs 0 < mu < mu* = " + std::to_string(mu_star));
    }
    const SystemSpec& spec = cache.spec();
    SystemState phi;
    double required = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const double norm = cache.torsion(i).sup_norm;
        phi.push_back(cache.torsion(i).profile.scaled(a / norm));
        required = std::min(required, 0.5 * (a / norm - mu * spec.f->on_diagonal(i, a)));
    }
    CertificateReport cert = certify(phi, spec, mu, CertificateKind::StrictSup, required);
    if (!cert.pass) throw BarrierError("a e / |e| failed its strict supersolution certificate");
    return {std::move(phi), std::move(cert)};
}

BumpProfile choose_bump(const ThresholdReport& report, const RadialGrid& grid, double mu) {
    double eps = grid.radius();
    for (const auto& e : report.equations) eps = std::min(eps, e.eps_star);
    const double lower = report.mu_lower_proof;
    constexpr double kHeadroom = 1.1;
    constexpr double kCap = 8.0;

    double l = 1.05;
    if (mu > kHeadroom * l * l * lower) {
        while (l * 1.05 <= kCap && mu > kHeadroom * (l * 1.05) * (l * 1.05) * lower) l *= 1.05;
    } else if (mu > lower) {
        l = std::pow(mu / lower, 0.25);
    }
    return BumpProfile{report.b, eps, l, l, grid.radius()};
}

StrictSubsolution build_strict_subsolution(const RadialCache& cache, double mu, const BumpProfile& profile,
                                           std::optional<double> mu_lower, bool throw_on_failure) {
    profile.validate();
    if (mu_lower && !(mu > *mu_lower)) {
        throw PreconditionError("strict subsolution needs mu > mu_* = " + std::to_string(*mu_lower));
    }
    const SystemSpec& spec = cache.spec();
    const RadialGrid& grid = cache.grid();
    if (std::abs(profile.R - grid.radius()) > 1e-12 * grid.radius()) {
        throw PreconditionError("bump profile radius does not match the ball");
    }
    RadialField d = bump_field(profile, grid);
    SystemState psi = solve_auxiliary_system(spec, mu, d);

    DominanceCheck dom{true, true, std::nullopt};
    const std::size_t M = grid.intervals();
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const auto& v = psi[i].values;
        for (std::size_t k = 0; k < M; ++k) {
            if (!(v[k] > d.values[k])) {
                if (dom.values_hold) dom.witness = OrderWitness{i, k, v[k], d.values[k]};
                dom.values_hold = false;
            }
        }
        for (std::size_t k = 0; k < M; ++k) {
            if (grid.r(k + 1) <= profile.epsilon) continue;
            // forward differences on (eps, R]: psi~ must fall faster than d
            if (!(v[k + 1] - v[k] < d.values[k + 1] - d.values[k])) dom.slopes_hold = false;
        }
    }

    CertificateReport cert = certify(psi, spec, mu, CertificateKind::StrictSub);
    StrictSubsolution out{std::move(psi), std::move(d), profile, dom, std::move(cert)};
    if (throw_on_failure) {
        if (!dom.values_hold) {
            const auto& w = *dom.witness;
            throw BarrierError("dominance psi~ > d fails for component " + std::to_string(w.component + 1) + " at r = " +
                               std::to_string(grid.r(w.node)) + " (psi~ = " + std::to_string(w.lhs) +
                               ", d = " + std::to_string(w.rhs) + "); mu is too small");
        }
        if (!out.certificate.pass) throw BarrierError("psi~ failed its strict subsolution certificate");
    }
    return out;
}

}  // namespace pucci
