#include "pucci/iterate.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

namespace pucci {

std::string to_string(Direction d) { return d == Direction::FromSub ? "from-sub" : "from-sup"; }

std::vector<double> SolveReport::norms() const {
    std::vector<double> out;
    for (const auto& f : solution) out.push_back(f.sup_norm());
    return out;
}

void to_json(nlohmann::json& j, const SolveReport& r) {
    j = {{"iterations", r.iterations},
         {"residual", r.residual},
         {"relative_residual", r.relative_residual},
         {"direction", to_string(r.direction)},
         {"norms", r.norms()},
         {"history", r.history}};
}

namespace {

double state_norm(const SystemState& u) {
    double m = 0.0;
    for (const auto& f : u) m = std::max(m, f.sup_norm());
    return m;
}

struct Residual {
    double absolute;
    double relative;
};

Residual residual_of(const SystemState& u, const SystemSpec& spec, double mu) {
    double res = 0.0;
    double load_norm = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const auto g = system_load(spec, mu, u, i);
        const auto op = radial_pucci(u[i].values, u[i].grid, spec.pairs[i]);
        for (std::size_t k = 0; k < op.size(); ++k) {
            res = std::max(res, std::abs(-op[k] - g[k]));
            load_norm = std::max(load_norm, std::abs(g[k]));
        }
    }
    return {res, res / (1.0 + load_norm)};
}

}  // namespace

SolveReport monotone_solve(const OrderInterval& interval, const SystemSpec& spec, double mu, Direction from,
                           const SolveOptions& options) {
    if (!(mu > 0.0)) throw PreconditionError("monotone_solve needs mu > 0");
    if (!(options.tol > 0.0) || options.max_iter < 1) throw PreconditionError("monotone_solve needs tol > 0, max_iter >= 1");
    if (interval.sub.size() != spec.size() || interval.sup.size() != spec.size()) {
        throw PreconditionError("monotone_solve: interval does not match the system size");
    }
    const Ordering order = check_ordering(interval.sub, interval.sup);
    if (!order.holds) {
        const auto& w = *order.witness;
        throw PreconditionError("monotone_solve: sub > sup for component " + std::to_string(w.component + 1) +
                                " at node " + std::to_string(w.node));
    }

    const std::size_t n = spec.size();
    const double escape_tol = options.tol * std::max(1.0, state_norm(interval.sup));
    SolveReport report;
    report.direction = from;
    SystemState u = from == Direction::FromSub ? interval.sub : interval.sup;

    for (int it = 1; it <= options.max_iter; ++it) {
        SystemState next;
        next.reserve(n);
        for (std::size_t i = 0; i < n; ++i) next.push_back(solve_radial(system_load(spec, mu, u, i), u[i].grid, spec.pairs[i]));

        const double scale = std::max(1.0, state_norm(u));
        const double mono_tol = 1e-10 * (1.0 + scale);
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < next[i].values.size(); ++k) {
                const double step = next[i].values[k] - u[i].values[k];
                delta = std::max(delta, std::abs(step));
                const bool backwards = from == Direction::FromSub ? step < -mono_tol : step > mono_tol;
                if (backwards) {
                    throw NumericalError("monotone_solve: " + to_string(from) + " iterate " + std::to_string(it) +
                                         " moved the wrong way for component " + std::to_string(i + 1) + " at r = " +
                                         std::to_string(u[i].grid.r(k)) + " (step " + std::to_string(step) + ")");
                }
                const double v = next[i].values[k];
                if (v < interval.sub[i].values[k] - escape_tol || v > interval.sup[i].values[k] + escape_tol) {
                    throw NumericalError("monotone_solve: iterate " + std::to_string(it) + " left the order interval for component " +
                                         std::to_string(i + 1) + " at r = " + std::to_string(u[i].grid.r(k)) +
                                         "; a barrier certificate is faulty");
                }
            }
        }
        u = std::move(next);
        report.history.push_back(delta);
        report.iterations = it;

        if (delta == 0.0 || delta < options.tol * std::max(1.0, state_norm(u))) {
            const Residual res = residual_of(u, spec, mu);
            if (delta == 0.0 || res.relative <= options.tol) {
                report.residual = res.absolute;
                report.relative_residual = res.relative;
                report.solution = std::move(u);
                return report;
            }
        }
    }
    throw NumericalError("monotone_solve: no convergence in " + std::to_string(options.max_iter) +
                         " iterations (last update " + std::to_string(report.history.back()) + ")");
}

namespace {

SystemState scaled_state(const SystemState& s, double c) {
    SystemState out;
    for (const auto& f : s) out.push_back(f.scaled(c));
    return out;
}

}  // namespace

MultiplicityReport find_multiplicity(const RadialCache& cache, double mu, double a, double b, const SolveOptions& options) {
    const SystemSpec& spec = cache.spec();
    MultiplicityReport report;
    report.thresholds = thresholds(cache, a, b);
    const ThresholdReport& t = report.thresholds;
    if (!(mu > t.mu_lower_proof && mu < t.mu_star)) {
        throw OutsideWindowError("mu = " + std::to_string(mu) + " is outside (mu_*, mu*) = (" +
                                     std::to_string(t.mu_lower_proof) + ", " + std::to_string(t.mu_star) + ")",
                                 t);
    }

    const AuditReport c1 = audit_C1(*spec.f, 2.0 * b, 1000);
    report.audits.push_back(c1);
    report.audits.push_back(audit_C2(*spec.f, 1e-3));
    report.audits.push_back(audit_C3(*spec.f, 1e3));
    if (!c1.pass) report.diagnostics.push_back("C1 audit failed: f is not monotone or f(0) != 0");

    BarrierSet& bs = report.barriers;
    try {
        StrictSupersolution sup = build_strict_supersolution(cache, a, mu, t.mu_star);
        bs.phi_tilde = std::move(sup.phi_tilde);
        report.phi_tilde_certificate = sup.certificate;
    } catch (const Error& e) {
        report.diagnostics.push_back(std::string("phi~: ") + e.what());
    }

    try {
        const BumpProfile profile = choose_bump(t, cache.grid(), mu);
        bs.bump = profile;
        StrictSubsolution sub = build_strict_subsolution(cache, mu, profile, t.mu_lower_proof, false);
        bs.psi_tilde = std::move(sub.psi_tilde);
        report.psi_tilde_certificate = sub.certificate;
        report.dominance = sub.dominance;
        if (!sub.dominance.values_hold) {
            const auto& w = *sub.dominance.witness;
            report.diagnostics.push_back("psi~: dominance psi~ > d fails for component " + std::to_string(w.component + 1) +
                                         " at r = " + std::to_string(cache.grid().r(w.node)));
        }
        if (!sub.dominance.slopes_hold) report.diagnostics.push_back("psi~: slope dominance fails on (eps, R]");
        if (!sub.certificate.pass) report.diagnostics.push_back("psi~: strict subsolution certificate failed");
    } catch (const Error& e) {
        report.diagnostics.push_back(std::string("psi~: ") + e.what());
    }

    try {
        EigenSubsolution eig = build_eigen_subsolution(cache, mu);
        bs.m_mu = eig.m_mu;
        bs.psi = std::move(eig.psi);
        for (int it = 0; it < 200; ++it) {
            const bool below_tilde = bs.psi_tilde.empty() || check_ordering(bs.psi, bs.psi_tilde).holds;
            const bool below_phi = bs.phi_tilde.empty() || check_ordering(bs.psi, bs.phi_tilde).holds;
            if (below_tilde && below_phi) break;
            bs.m_mu *= 0.5;
            bs.psi = scaled_state(bs.psi, 0.5);
        }
        report.psi_certificate = certify(bs.psi, spec, mu, CertificateKind::Sub);
        if (!report.psi_certificate->pass) report.diagnostics.push_back("psi: subsolution certificate failed");
    } catch (const Error& e) {
        report.diagnostics.push_back(std::string("psi: ") + e.what());
    }

    try {
        std::vector<SystemState> below;
        if (!bs.phi_tilde.empty()) below.push_back(bs.phi_tilde);
        if (!bs.psi_tilde.empty()) below.push_back(bs.psi_tilde);
        LargeSupersolution large = build_large_supersolution(cache, mu, below);
        bs.m_tilde = large.m_tilde;
        bs.phi_large = std::move(large.phi);
        report.phi_certificate = certify(bs.phi_large, spec, mu, CertificateKind::Sup);
        if (!report.phi_certificate->pass) report.diagnostics.push_back("phi: supersolution certificate failed");
    } catch (const Error& e) {
        report.diagnostics.push_back(std::string("phi: ") + e.what());
    }

    const bool all_built = !bs.psi.empty() && !bs.phi_large.empty() && !bs.psi_tilde.empty() && !bs.phi_tilde.empty();
    if (all_built) {
        auto add = [&](std::string rel, bool expected, const SystemState& x, const SystemState& y) {
            Ordering o = check_ordering(x, y);
            if (o.holds != expected) report.diagnostics.push_back("ordering " + rel + " violated");
            report.orderings.push_back({std::move(rel), expected, std::move(o)});
        };
        add("psi <= psi~", true, bs.psi, bs.psi_tilde);
        add("psi~ <= phi", true, bs.psi_tilde, bs.phi_large);
        add("psi <= phi~", true, bs.psi, bs.phi_tilde);
        add("phi~ <= phi", true, bs.phi_tilde, bs.phi_large);
        add("psi~ <= phi~", false, bs.psi_tilde, bs.phi_tilde);

        auto solve = [&](SystemState lo, SystemState hi) {
            return monotone_solve(OrderInterval{std::move(lo), std::move(hi)}, spec, mu, Direction::FromSub, options);
        };
        auto f1 = std::async(std::launch::async, solve, bs.psi, bs.phi_tilde);
        auto f2 = std::async(std::launch::async, solve, bs.psi_tilde, bs.phi_large);
        try {
            report.u1 = f1.get();
        } catch (const Error& e) {
            report.diagnostics.push_back(std::string("u1: ") + e.what());
        }
        try {
            report.u2 = f2.get();
        } catch (const Error& e) {
            report.diagnostics.push_back(std::string("u2: ") + e.what());
        }
    }

    if (report.u1 && report.u2) {
        report.separated = true;
        for (std::size_t i = 0; i < spec.size(); ++i) {
            const auto& x = report.u1->solution[i].values;
            const auto& y = report.u2->solution[i].values;
            for (std::size_t k = 0; k < x.size(); ++k) report.distance = std::max(report.distance, std::abs(x[k] - y[k]));
            if (!(report.u1->solution[i].sup_norm() <= a && report.u2->solution[i].sup_norm() >= b)) report.separated = false;
        }
        if (!report.separated) report.diagnostics.push_back("solutions are not separated by a < b");
    }

    const auto strict_ok = [](const std::optional<CertificateReport>& c) { return c && c->pass && c->slack > 0.0; };
    bool ok = c1.pass && all_built && report.psi_certificate && report.psi_certificate->pass && report.phi_certificate &&
              report.phi_certificate->pass && strict_ok(report.psi_tilde_certificate) &&
              strict_ok(report.phi_tilde_certificate) && report.dominance && report.dominance->values_hold &&
              report.u1 && report.u2 && report.separated;
    for (const auto& o : report.orderings) ok = ok && o.verdict.holds == o.expected;
    report.third_solution_certified = ok;
    return report;
}

void to_json(nlohmann::json& j, const MultiplicityReport& r) {
    j = nlohmann::json::object();
    j["thresholds"] = r.thresholds;
    j["audits"] = r.audits;
    nlohmann::json barriers = {{"m_mu", r.barriers.m_mu}, {"mTilde_mu", r.barriers.m_tilde}};
    if (r.barriers.bump) {
        const auto& p = *r.barriers.bump;
        barriers["bump"] = {{"b", p.b}, {"epsilon", p.epsilon}, {"l", p.l}, {"m", p.m}, {"R", p.R}};
    }
    auto center_values = [](const SystemState& s) {
        std::vector<double> v;
        for (const auto& f : s) v.push_back(f.values.front());
        return v;
    };
    barriers["psi_center"] = center_values(r.barriers.psi);
    barriers["phi_center"] = center_values(r.barriers.phi_large);
    barriers["psiTilde_center"] = center_values(r.barriers.psi_tilde);
    barriers["phiTilde_center"] = center_values(r.barriers.phi_tilde);
    j["barriers"] = barriers;

    nlohmann::json certs = nlohmann::json::object();
    auto put = [&](const char* name, const std::optional<CertificateReport>& c) {
        certs[name] = c ? nlohmann::json(*c) : nlohmann::json(nullptr);
    };
    put("psi", r.psi_certificate);
    put("phi", r.phi_certificate);
    put("psiTilde", r.psi_tilde_certificate);
    put("phiTilde", r.phi_tilde_certificate);
    j["certificates"] = certs;
    if (r.dominance) {
        j["dominance"] = {{"values_hold", r.dominance->values_hold}, {"slopes_hold", r.dominance->slopes_hold}};
    }

    nlohmann::json orders = nlohmann::json::array();
    for (const auto& o : r.orderings) {
        nlohmann::json v = o.verdict;
        v["relation"] = o.relation;
        v["expected"] = o.expected;
        orders.push_back(v);
    }
    j["orderings"] = orders;
    j["u1"] = r.u1 ? nlohmann::json(*r.u1) : nlohmann::json(nullptr);
    j["u2"] = r.u2 ? nlohmann::json(*r.u2) : nlohmann::json(nullptr);
    j["distinctness"] = {{"distance", r.distance}, {"separated", r.separated}, {"a", r.thresholds.a}, {"b", r.thresholds.b}};
    j["third_solution_certified"] = r.third_solution_certified;
    j["diagnostics"] = r.diagnostics;
}

}  // namespace pucci
