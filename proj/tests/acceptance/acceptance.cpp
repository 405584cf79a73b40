// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include "pucci/commands.hpp"
#include "pucci/exprlang.hpp"
#include "pucci/grid2d.hpp"
#include "pucci/pucci_core.hpp"

#include "../unit/expr_gen.hpp"
#include "../unit/support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace pucci;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

SymMatrix random_sym(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-3, 3);
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) m.set(i, j, u(rng));
    return m;
}

Outcome pucci_algebra() {
    Outcome o;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 4);
    const double tol = 1e-10;
    int bad = 0;
    for (int k = 0; k < 10000; ++k) {
        const std::size_t n = 2 + k % 2;
        const double lo = 0.25 + u(rng), hi = lo + u(rng);
        const EllipticityPair p(lo, hi);
        const SymMatrix m = random_sym(rng, n), q = random_sym(rng, n);
        const double c = u(rng);
        const double pm = pucci_plus(m, p);
        const double s = 1 + std::abs(pm);
        bool ok = std::abs(pucci_plus(m * c, p) - c * pm) <= tol * s * (1 + c);
        ok = ok && std::abs(pucci_minus(m * c, p) - c * pucci_minus(m, p)) <= tol * s * (1 + c);
        ok = ok && pucci_plus(m + q, p) <= pm + pucci_plus(q, p) + tol * s;
        ok = ok && std::abs(pucci_minus(m, p) + pucci_plus(-m, p)) <= tol * s;
        ok = ok && std::abs(pucci_plus(m, EllipticityPair(lo, lo)) - lo * m.trace()) <= tol * s * (1 + lo);
        if (!ok) ++bad;
    }
    o.require(bad == 0, std::to_string(bad) + " of 10000 matrices violate an identity");
    o.detail = o.pass ? "10000 matrices, N in {2,3}" : o.detail;
    return o;
}

Outcome radial_torsion() {
    Outcome o;
    struct Case {
        double l, L;
        int N;
    };
    std::string d;
    for (const Case c : {Case{1, 1, 2}, Case{1, 2, 2}, Case{2, 3, 3}}) {
        const EllipticityPair p(c.l, c.L);
        double err[2];
        for (int s = 0; s < 2; ++s) {
            const std::size_t M = s == 0 ? 4096 : 2048;
            const RadialGrid g(1.0, c.N, M);
            const RadialField e = torsion(p, g).profile;
            double worst = 0;
            for (std::size_t k = 0; k < g.nodes(); ++k) {
                const double r = g.r(k);
                worst = std::max(worst, std::abs(e.values[k] - (1 - r * r) / (2 * c.N * c.l)));
            }
            err[s] = worst;
        }
        const std::string tag = "(" + num(c.l) + "," + num(c.L) + "," + std::to_string(c.N) + ")";
        o.require(err[0] < 1e-6, tag + " error " + num(err[0]));
        // an exact discrete solution has no decay to measure
        const bool second_order = err[0] < 1e-11 || err[1] / err[0] >= 3.5;
        o.require(second_order, tag + " doubling ratio " + num(err[1] / err[0]));
        d += tag + " err " + num(err[0]) + " ";
    }
    if (o.pass) o.detail = d;
    return o;
}

Outcome eigenvalue() {
    Outcome o;
    const EllipticityPair p(1, 1);
    const Eigenpair e1 = principal_eigenpair(p, RadialGrid(1.0, 2, 4096), 1e-9);
    const Eigenpair e2 = principal_eigenpair(p, RadialGrid(2.0, 2, 4096), 1e-9);
    const double j01 = testing::oracles()["j01_squared"];
    const double scaling = std::abs(e2.mu - e1.mu / 4) / (e1.mu / 4);
    o.require(std::abs(e1.mu - j01) < 1e-3, "mu1 = " + num(e1.mu));
    o.require(scaling < 1e-3, "scaling error " + num(scaling));
    if (o.pass) o.detail = "mu1 " + num(e1.mu) + ", |mu1 - j01^2| " + num(std::abs(e1.mu - j01)) + ", R=2 rel " + num(scaling);
    return o;
}

Outcome threshold_arithmetic() {
    Outcome o;
    const Config cfg = load_config(testing::data_path("combustion.json"));
    const RadialCache cache(cfg.spec);
    const ThresholdReport t = thresholds(cache, 1, 20);
    const auto& ref = testing::oracles()["thresholds"];
    const double e1 = testing::rel_err(t.mu_star, ref["mu_star"]);
    const double e2 = testing::rel_err(t.mu_lower_proof, ref["mu_lower_proof"]);
    o.require(e1 < 1e-6, "muStar rel err " + num(e1));
    o.require(e2 < 1e-6, "muLower_proof rel err " + num(e2));
    o.require(t.mu_lower_proof < t.mu_star, "window closed");
    if (o.pass) o.detail = "muStar " + num(t.mu_star) + ", muLower_proof " + num(t.mu_lower_proof);
    return o;
}

Outcome barrier_certificates() {
    Outcome o;
    const Config cfg = load_config(testing::data_path("combustion.json"));
    const RadialCache cache(cfg.spec);
    const ThresholdReport t = thresholds(cache, 1, 20);
    const double mu = 0.1;
    o.require(mu < t.mu0, "mu0 " + num(t.mu0));

    const SmallPair small = build_small_pair(cache, mu, t.mu0);
    o.require(small.sup_certificate.pass, "mu e not a supersolution");
    o.require(small.sub_certificate.pass, "m_mu phi+ not a subsolution");
    const EigenSubsolution eig = build_eigen_subsolution(cache, 1.0);
    o.require(eig.certificate.pass, "m_mu phi+ at mu = 1 not a subsolution");

    const StrictSupersolution sup = build_strict_supersolution(cache, 1, mu, t.mu_star);
    o.require(sup.certificate.pass, "phi~ not strict at mu = 0.1");
    const StrictSupersolution edge = build_strict_supersolution(cache, 1, 0.99 * t.mu_star, t.mu_star);
    o.require(edge.certificate.pass, "phi~ not strict at 0.99 muStar");

    const StrictSubsolution sub = build_strict_subsolution(cache, mu, choose_bump(t, cache.grid(), mu), t.mu_lower_proof, false);
    o.require(sub.certificate.pass && sub.dominance.values_hold && sub.dominance.slopes_hold, "psi~ not strict at mu = 0.1");
    for (const auto& c : sub.psi_tilde) o.require(c.values.front() > 20, "psi~(0) = " + num(c.values.front()));

    const double low = 0.5 * t.mu_lower_proof;
    const StrictSubsolution neg = build_strict_subsolution(cache, low, choose_bump(t, cache.grid(), low), std::nullopt, false);
    o.require(!neg.dominance.values_hold, "negative control passed dominance");
    if (o.pass) {
        o.detail = "m_mu " + num(small.m_mu) + ", psi~(0) " + num(sub.psi_tilde[0].values.front()) +
                   ", negative control fails dominance";
    }
    return o;
}

// Picard steps replayed outside the solver so the ordering is checked here too.
bool replay_monotone(const SystemSpec& spec, double mu, SystemState u, bool up, int steps) {
    for (int s = 0; s < steps; ++s) {
        SystemState next;
        for (std::size_t i = 0; i < u.size(); ++i) {
            next.push_back(solve_radial(system_load(spec, mu, u, i), u[i].grid, spec.pairs[i]));
        }
        for (std::size_t i = 0; i < u.size(); ++i)
            for (std::size_t k = 0; k < u[i].values.size(); ++k) {
                const double a = u[i].values[k], b = next[i].values[k];
                const double slack = 1e-12 * std::max(1.0, std::abs(a));
                if (up ? b < a - slack : b > a + slack) return false;
            }
        u = std::move(next);
    }
    return true;
}

Outcome monotone_iteration() {
    Outcome o;
    const Config cfg = load_config(testing::data_path("combustion.json"));
    const RadialCache cache(cfg.spec);
    std::string d;
    for (double mu : {0.02, 0.1}) {
        const SolvePipeline p = run_solve_pipeline(cache, cfg.numerics, mu, true);
        o.require(p.psi_certificate.pass && p.phi_large_certificate.pass, "barriers at mu " + num(mu));
        o.require(p.minimal_le_maximal && p.minimal_le_maximal->holds, "minimal > maximal at mu " + num(mu));
        o.require(p.minimal.residual < 1e-6, "minimal residual " + num(p.minimal.residual));
        o.require(p.maximal->relative_residual < 1e-6, "maximal relative residual " + num(p.maximal->relative_residual));
        o.require(replay_monotone(cfg.spec, mu, p.psi, true, p.minimal.iterations), "from-sub not nondecreasing");
        o.require(replay_monotone(cfg.spec, mu, p.phi_large, false, p.maximal->iterations), "from-sup not nonincreasing");
        d += "mu " + num(mu) + ": residual " + num(p.minimal.residual) + " (" + std::to_string(p.minimal.iterations) +
             " it), max rel " + num(p.maximal->relative_residual) + "; ";
    }
    if (o.pass) o.detail = d;
    return o;
}

Outcome multiplicity() {
    Outcome o;
    const Config cfg = load_config(testing::data_path("combustion.json"));
    const RunOptions quiet{false, 0};
    std::ostringstream out, err;
    const int code = cmd_multiplicity(cfg, 0.1, 1, 20, out, err, quiet);
    o.require(code == 0, "exit " + std::to_string(code) + " at mu = 0.1");
    const json j = json::parse(out.str());
    o.require(j.value("third_solution_certified", false), "third solution not certified");
    double n1 = 0, n2 = INFINITY;
    if (j.contains("u1") && j.contains("u2")) {
        for (double v : j["u1"]["norms"]) n1 = std::max(n1, v);
        for (double v : j["u2"]["norms"]) n2 = std::min(n2, v);
    }
    o.require(n1 <= 1, "max |u1_i| " + num(n1));
    o.require(n2 >= 20, "min |u2_i| " + num(n2));
    const double dist = j["distinctness"].value("distance", 0.0);
    o.require(dist >= 19, "|u1 - u2| " + num(dist));
    std::ostringstream out3, err3;
    const int code3 = cmd_multiplicity(cfg, 3, 1, 20, out3, err3, quiet);
    o.require(code3 == exit_code::window, "exit " + std::to_string(code3) + " at mu = 3");
    if (o.pass) o.detail = "|u1| " + num(n1) + ", |u2| " + num(n2) + ", distance " + num(dist) + ", mu=3 exits 5";
    return o;
}

Outcome decay() {
    Outcome o;
    const Config cfg = load_config(testing::data_path("combustion.json"));
    std::ostringstream out, err;
    const int code = cmd_sweep(cfg, 0.0025, 0.02, 4, out, err, RunOptions{false, 0});
    o.require(code == 0, "sweep exit " + std::to_string(code));
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    std::vector<double> mus, norms;
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string mu, n1;
        std::getline(row, mu, ',');
        std::getline(row, n1, ',');
        mus.push_back(std::stod(mu));
        norms.push_back(std::stod(n1));
    }
    o.require(norms.size() == 4, "expected 4 rows");
    const double want[] = {0.0025, 0.005, 0.01, 0.02};
    for (std::size_t k = 0; k < mus.size() && k < 4; ++k) o.require(std::abs(mus[k] - want[k]) < 1e-15, "mu grid");
    for (std::size_t k = 1; k < norms.size(); ++k) o.require(norms[k] > norms[k - 1], "norm not increasing at row " + std::to_string(k));
    o.require(!norms.empty() && norms[0] < 0.05, "norm at 0.0025 too large");
    if (o.pass) {
        std::string d = "|u_1|:";
        for (double v : norms) d += " " + num(v);
        o.detail = d;
    }
    return o;
}

Outcome cross_validation() {
    Outcome o;
    const EllipticityPair pair(1, 2);
    const auto grid = std::make_shared<const Grid2D>(make_shape("disc", 1.0 / 128, 8));
    GridField g(grid);
    for (std::size_t k = 0; k < grid->size(); ++k) g.values[k] = grid->mask()[k] ? 1.0 : 0.0;
    const Solve2DReport r = solve_2d_report(g, pair, {1e-6});
    const RadialField e = torsion(pair, RadialGrid(1.0, 2, 4096)).profile;
    double worst = 0;
    for (int j = 0; j < grid->ny(); ++j)
        for (int i = 0; i < grid->nx(); ++i) {
            if (!grid->interior(i, j)) continue;
            const Point p = grid->node(i, j);
            const double rr = std::min(1.0, std::hypot(p.x, p.y));
            worst = std::max(worst, std::abs(r.solution.at(i, j) - e.at(rr)));
        }
    const double rel = worst / e.values.front();
    o.require(rel < 0.03, "sup error " + num(100 * rel) + "%");

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0, 1);
    int failures = 0;
    for (int t = 0; t < 100; ++t) {
        const int K = 1 + t % 4;
        const auto small = std::make_shared<const Grid2D>(make_shape(t % 3 == 0 ? "square" : t % 3 == 1 ? "disc" : "lshape", 1.0 / 14, K));
        const EllipticityPair p(1, 1 + 3 * U(rng));
        if (t % 2 == 0) {
            GridField g1(small), g2(small);
            for (std::size_t k = 0; k < small->size(); ++k) {
                if (!small->mask()[k]) continue;
                g1.values[k] = U(rng);
                g2.values[k] = g1.values[k] + U(rng);
            }
            const GridField u1 = solve_2d(g1, p), u2 = solve_2d(g2, p);
            for (std::size_t k = 0; k < small->size(); ++k)
                if (u1.values[k] > u2.values[k] + 1e-8 || u1.values[k] < 0) {
                    ++failures;
                    break;
                }
        } else {
            GridField u(small);
            for (auto& v : u.values) v = 2 * U(rng) - 1;
            const GridField before = pucci_wide_stencil(u, p);
            const std::size_t k = std::uniform_int_distribution<std::size_t>(0, small->size() - 1)(rng);
            u.values[k] += U(rng) + 1e-3;
            const GridField after = pucci_wide_stencil(u, p);
            for (std::size_t m = 0; m < small->size(); ++m) {
                if (!small->mask()[m]) continue;
                const bool ok = m == k ? after.values[m] <= before.values[m] + 1e-9 : after.values[m] >= before.values[m] - 1e-9;
                if (!ok) {
                    ++failures;
                    break;
                }
            }
        }
    }
    o.require(failures == 0, std::to_string(failures) + " of 100 randomized checks failed");
    if (o.pass) o.detail = "sup error " + num(100 * rel) + "% (" + std::to_string(r.iterations) + " sweeps), 100 randomized checks";
    return o;
}

Outcome parser() {
    Outcome o;
    testing::Gen gen{std::mt19937_64(77), {0.3, 2.2, 1.1}};
    int bad = 0;
    for (int k = 0; k < 1000; ++k) {
        const auto ex = gen.expression(1 + k % 7);
        const expr::Expr e = expr::parse(ex.text, 3);
        const expr::Expr again = expr::parse(expr::print(e), 3);
        const double v = expr::eval(e, gen.x);
        if (!(again == e) || std::abs(v - ex.value) > 1e-12 * std::max(1.0, std::abs(ex.value))) ++bad;
    }
    o.require(bad == 0, std::to_string(bad) + " of 1000 random expressions disagree");

    const auto& table = testing::oracles()["expressions"];
    const auto x = table["point"].get<std::vector<double>>();
    for (const auto& c : table["cases"]) {
        const double v = expr::eval(expr::parse(c["text"].get<std::string>(), 3), x);
        o.require(std::abs(v - c["value"].get<double>()) <= 1e-13 * std::max(1.0, std::abs(v)), "oracle " + c["text"].get<std::string>());
    }

    auto parse_kind = [](const char* text, std::size_t n) -> std::optional<expr::ParseErrorKind> {
        try {
            expr::parse(text, n);
        } catch (const expr::ParseError& e) {
            return e.kind();
        }
        return std::nullopt;
    };
    o.require(parse_kind("u1 +", 1) == expr::ParseErrorKind::Syntax, "syntax error");
    o.require(parse_kind("sin(u1)", 1) == expr::ParseErrorKind::UnknownIdentifier, "unknown identifier");
    o.require(parse_kind("u2", 1) == expr::ParseErrorKind::VariableOutOfRange, "variable range");

    auto eval_kind = [](const char* text, std::vector<double> x) -> std::optional<expr::EvalErrorKind> {
        try {
            expr::eval(expr::parse(text, 1), x);
        } catch (const expr::EvalError& e) {
            return e.kind();
        }
        return std::nullopt;
    };
    o.require(eval_kind("1 / (u1 - u1)", {1}) == expr::EvalErrorKind::DivisionByZero, "division by zero");
    o.require(eval_kind("pow(0 - u1, 0.5)", {1}) == expr::EvalErrorKind::InvalidPow, "invalid pow");
    o.require(eval_kind("exp(1000 * u1)", {1}) == expr::EvalErrorKind::NonFinite, "non-finite");
    o.require(eval_kind("u1", {1, 2}) == expr::EvalErrorKind::ArityMismatch, "arity");
    if (o.pass) o.detail = "1000 random expressions, " + std::to_string(table["cases"].size()) + " oracle cases, 7 error kinds";
    return o;
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "pucci-algebra", 5, pucci_algebra},
        {2, "radial-torsion", 10, radial_torsion},
        {3, "eigenvalue", 30, eigenvalue},
        {4, "thresholds", 5, threshold_arithmetic},
        {5, "barrier-certificates", 60, barrier_certificates},
        {6, "monotone-iteration", 60, monotone_iteration},
        {7, "multiplicity", 300, multiplicity},
        {8, "decay", 120, decay},
        {9, "cross-validation-2d", 300, cross_validation},
        {10, "parser", 5, parser},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_s) o.require(false, "over budget " + num(c.budget_s) + " s");
        if (!o.pass) ++failed;
        std::printf("%s %2d %-22s %8.2f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
