#include "pucci/commands.hpp"

#include "pucci/grid2d.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>
#include <thread>

namespace pucci {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

void emit(std::ostream& out, json j, const char* command, const RunOptions& options) {
    if (options.meta) {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
        j["meta"] = {{"tool", "pucci"}, {"version", kVersion}, {"command", command}, {"generated", stamp}};
    }
    out << j.dump(2) << '\n';
}

std::vector<double> center_values(const SystemState& s) {
    std::vector<double> v;
    for (const auto& f : s) v.push_back(f.values.front());
    return v;
}

json ball_json(const BallDomain& b) { return {{"type", "ball"}, {"R", b.radius}, {"N", b.dimension}}; }

const BallDomain* require_ball(const Config& cfg, const char* command, std::ostream& err) {
    const auto* ball = std::get_if<BallDomain>(&cfg.spec.domain);
    if (!ball) err << "pucci " << command << ": needs a ball domain (grid2d is supported by thresholds only)\n";
    return ball;
}

SolveOptions solve_options(const Numerics& n) { return {n.tol, n.max_iter}; }

}  // namespace

SolvePipeline run_solve_pipeline(const RadialCache& cache, const Numerics& numerics, double mu, bool maximal) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw PreconditionError("solve needs mu > 0");
    const SystemSpec& spec = cache.spec();
    SolvePipeline p;
    p.mu = mu;
    p.c1 = audit_C1(*spec.f, kSolveAuditBox, 1000, numerics.seed);
    if (!p.c1.pass) throw AuditError(p.c1);

    p.mu0 = dyadic_mu0(cache);
    if (mu < p.mu0) {
        SmallPair small = build_small_pair(cache, mu, p.mu0);
        p.psi = std::move(small.psi);
        p.m_mu = small.m_mu;
        p.psi_certificate = std::move(small.sub_certificate);
        p.phi_small_certificate = std::move(small.sup_certificate);
    } else {
        EigenSubsolution sub = build_eigen_subsolution(cache, mu);
        p.psi = std::move(sub.psi);
        p.m_mu = sub.m_mu;
        p.psi_certificate = std::move(sub.certificate);
    }
    if (!p.psi_certificate.pass) throw BarrierError("psi failed its subsolution certificate");

    LargeSupersolution large = build_large_supersolution(cache, mu, {p.psi});
    p.phi_large = std::move(large.phi);
    p.m_tilde = large.m_tilde;
    p.phi_large_certificate = std::move(large.certificate);

    const OrderInterval interval{p.psi, p.phi_large};
    p.minimal = monotone_solve(interval, spec, mu, Direction::FromSub, solve_options(numerics));
    if (maximal) {
        p.maximal = monotone_solve(interval, spec, mu, Direction::FromSup, solve_options(numerics));
        p.minimal_le_maximal = check_ordering(p.minimal.solution, p.maximal->solution);
    }
    return p;
}

std::vector<double> geometric_grid(double mu_min, double mu_max, int steps) {
    if (!(mu_min > 0.0 && mu_min < mu_max) || !std::isfinite(mu_max)) {
        throw PreconditionError("sweep needs 0 < mu_min < mu_max");
    }
    if (steps < 2) throw PreconditionError("sweep needs steps >= 2");
    std::vector<double> mus(static_cast<std::size_t>(steps));
    const double ratio = std::log(mu_max / mu_min);
    for (int k = 0; k < steps; ++k) mus[k] = mu_min * std::exp(ratio * k / (steps - 1));
    mus.front() = mu_min;
    mus.back() = mu_max;
    return mus;
}

unsigned default_threads() {
    if (const char* env = std::getenv("PUCCI_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_thresholds(const Config& cfg, double a, double b, std::ostream& out, std::ostream& err,
                   const RunOptions& options) {
    if (!(a > 0.0 && a < b) || !std::isfinite(b)) {
        err << "pucci thresholds: need 0 < a < b\n";
        return exit_code::usage;
    }
    const SystemSpec& spec = cfg.spec;
    const std::size_t n = spec.size();
    std::vector<double> norms(n);
    int N = 0;
    double R = 0.0;
    json j;
    j["command"] = "thresholds";
    try {
        if (const auto* ball = std::get_if<BallDomain>(&spec.domain)) {
            RadialCache cache(spec);
            for (std::size_t i = 0; i < n; ++i) norms[i] = cache.torsion(i).sup_norm;
            N = ball->dimension;
            R = ball->radius;
            j["domain"] = ball_json(*ball);
        } else {
            const auto& gd = std::get<GridDomain>(spec.domain);
            auto grid = std::make_shared<const Grid2D>(make_grid(gd));
            const InscribedBall ib = inscribed_ball(*grid);
            GridField load(grid);
            for (std::size_t k = 0; k < grid->size(); ++k) load.values[k] = grid->mask()[k] ? 1.0 : 0.0;
            Solve2DOptions o;
            o.tol = cfg.numerics.tol;
            o.max_iter = std::max(o.max_iter, cfg.numerics.max_iter);
            json sweeps = json::array();
            for (std::size_t i = 0; i < n; ++i) {
                const Solve2DReport r = solve_2d_report(load, spec.pairs[i], o);
                norms[i] = r.solution.sup_norm();
                sweeps.push_back(r.iterations);
            }
            N = 2;
            R = ib.radius;
            j["domain"] = {{"type", "grid2d"},
                           {"h", gd.h},
                           {"K", gd.stencil_width},
                           {"inscribed_center", {ib.center.x, ib.center.y}},
                           {"inscribed_radius", ib.radius},
                           {"torsion_sweeps", sweeps}};
        }
    } catch (const Error& e) {
        err << "pucci thresholds: " << e.what() << '\n';
        return exit_code::usage;
    }

    std::vector<double> A(n);
    for (std::size_t i = 0; i < n; ++i) A[i] = A_constant(spec.pairs[i], N, R).A;
    const AuditReport c4 = check_C4(spec, a, b, norms, A, LowerConvention::Proof);
    const AuditReport c4_A = check_C4(spec, a, b, norms, A, LowerConvention::A);
    j["c4"] = c4;
    j["c4_A"] = c4_A;

    bool open = false;
    try {
        const ThresholdReport report = thresholds(spec, norms, N, R, a, b);
        j["thresholds"] = report;
        open = report.window_open();
    } catch (const BarrierError& e) {
        j["thresholds"] = nullptr;
        j["error"] = e.what();
    }
    j["window_open"] = open;
    emit(out, std::move(j), "thresholds", options);
    if (!open) {
        err << "pucci thresholds: C4 fails, the window (mu_lower_proof, mu_star) is empty\n";
        return exit_code::condition;
    }
    return exit_code::ok;
}

int cmd_solve(const Config& cfg, double mu, std::ostream& out, std::ostream* profiles, std::ostream& err,
              const RunOptions& options) {
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        err << "pucci solve: need mu > 0\n";
        return exit_code::usage;
    }
    if (!require_ball(cfg, "solve", err)) return exit_code::usage;

    json j;
    j["command"] = "solve";
    j["mu"] = mu;
    RadialCache cache(cfg.spec);
    SolvePipeline p;
    try {
        p = run_solve_pipeline(cache, cfg.numerics, mu, true);
    } catch (const AuditError& e) {
        j["audits"] = json::array({e.report()});
        j["error"] = e.what();
        emit(out, std::move(j), "solve", options);
        err << "pucci solve: " << e.what() << '\n';
        return exit_code::barrier;
    } catch (const Error& e) {
        j["error"] = e.what();
        emit(out, std::move(j), "solve", options);
        err << "pucci solve: " << e.what() << '\n';
        return exit_code::barrier;
    }

    j["mu0"] = p.mu0;
    j["audits"] = json::array({p.c1});
    j["barriers"] = {{"m_mu", p.m_mu},
                     {"mTilde_mu", p.m_tilde},
                     {"psi_center", center_values(p.psi)},
                     {"phi_center", center_values(p.phi_large)}};
    j["certificates"] = {{"psi", p.psi_certificate},
                         {"phiSmall", p.phi_small_certificate ? json(*p.phi_small_certificate) : json(nullptr)},
                         {"phi", p.phi_large_certificate}};
    j["minimal"] = p.minimal;
    j["maximal"] = *p.maximal;
    j["minimal_le_maximal"] = *p.minimal_le_maximal;
    bool positive = true;
    for (const auto& u : p.minimal.solution) {
        for (std::size_t k = 0; k + 1 < u.values.size(); ++k) positive = positive && u.values[k] > 0.0;
    }
    j["positive"] = positive;
    emit(out, std::move(j), "solve", options);

    if (profiles) {
        const std::size_t n = cfg.spec.size();
        *profiles << "r";
        for (const char* tag : {"min", "max"}) {
            for (std::size_t i = 0; i < n; ++i) *profiles << ',' << tag << "_u" << (i + 1);
        }
        *profiles << '\n' << std::setprecision(17);
        const RadialGrid& grid = cache.grid();
        for (std::size_t k = 0; k < grid.nodes(); ++k) {
            *profiles << grid.r(k);
            for (const auto* s : {&p.minimal.solution, &p.maximal->solution}) {
                for (const auto& u : *s) *profiles << ',' << u.values[k];
            }
            *profiles << '\n';
        }
    }
    if (!p.minimal_le_maximal->holds) {
        err << "pucci solve: minimal solution is not below the maximal one\n";
        return exit_code::certificate;
    }
    return exit_code::ok;
}

int cmd_multiplicity(const Config& cfg, double mu, double a, double b, std::ostream& out, std::ostream& err,
                     const RunOptions& options) {
    if (!(a > 0.0 && a < b) || !std::isfinite(b)) {
        err << "pucci multiplicity: need 0 < a < b\n";
        return exit_code::usage;
    }
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        err << "pucci multiplicity: need mu > 0\n";
        return exit_code::usage;
    }
    if (!require_ball(cfg, "multiplicity", err)) return exit_code::usage;

    RadialCache cache(cfg.spec);
    json j;
    try {
        const MultiplicityReport report = find_multiplicity(cache, mu, a, b, solve_options(cfg.numerics));
        j = report;
        j["command"] = "multiplicity";
        j["mu"] = mu;
        j["status"] = report.third_solution_certified ? "certified" : "not-certified";
        emit(out, std::move(j), "multiplicity", options);
        if (!report.third_solution_certified) {
            err << "pucci multiplicity: certification failed";
            if (!report.diagnostics.empty()) err << ": " << report.diagnostics.front();
            err << '\n';
            return exit_code::certificate;
        }
        return exit_code::ok;
    } catch (const OutsideWindowError& e) {
        const ThresholdReport& t = e.report();
        std::ostringstream why;
        why << std::setprecision(17);
        if (!t.window_open()) {
            why << "window is empty: mu_lower_proof = " << t.mu_lower_proof << " >= mu_star = " << t.mu_star;
        } else if (mu >= t.mu_star) {
            why << "mu = " << mu << " >= mu_star = " << t.mu_star;
        } else {
            why << "mu = " << mu << " <= mu_lower_proof = " << t.mu_lower_proof;
        }
        j = {{"command", "multiplicity"}, {"mu", mu}, {"status", "outside-window"}, {"explanation", why.str()},
             {"thresholds", t}};
        emit(out, std::move(j), "multiplicity", options);
        err << "pucci multiplicity: " << why.str() << '\n';
        return exit_code::window;
    } catch (const BarrierError& e) {
        j = {{"command", "multiplicity"}, {"mu", mu}, {"status", "barrier-failure"}, {"error", e.what()}};
        emit(out, std::move(j), "multiplicity", options);
        err << "pucci multiplicity: " << e.what() << '\n';
        return std::string_view(e.what()).starts_with("C4") ? exit_code::condition : exit_code::barrier;
    } catch (const Error& e) {
        err << "pucci multiplicity: " << e.what() << '\n';
        return exit_code::barrier;
    }
}

int cmd_sweep(const Config& cfg, double mu_min, double mu_max, int steps, std::ostream& out, std::ostream& err,
              const RunOptions& options) {
    std::vector<double> mus;
    try {
        mus = geometric_grid(mu_min, mu_max, steps);
    } catch (const PreconditionError& e) {
        err << "pucci sweep: " << e.what() << '\n';
        return exit_code::usage;
    }
    if (!require_ball(cfg, "sweep", err)) return exit_code::usage;

    struct Row {
        std::vector<double> norms;
        int iterations = 0;
        double residual = 0.0;
        std::string error;
    };
    const std::size_t n = cfg.spec.size();
    RadialCache cache(cfg.spec);
    std::vector<Row> rows(mus.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < mus.size(); k = next++) {
            try {
                const SolvePipeline p = run_solve_pipeline(cache, cfg.numerics, mus[k], false);
                rows[k].norms = p.minimal.norms();
                rows[k].iterations = p.minimal.iterations;
                rows[k].residual = p.minimal.residual;
            } catch (const std::exception& e) {
                rows[k].error = e.what();
            }
        }
    };
    const unsigned threads =
        std::min<std::size_t>(options.threads ? options.threads : default_threads(), mus.size());
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    out << "mu";
    for (std::size_t i = 0; i < n; ++i) out << ",norm_u" << (i + 1);
    out << ",iterations,residual,error\n" << std::setprecision(17);
    std::size_t ok = 0;
    for (std::size_t k = 0; k < mus.size(); ++k) {
        const Row& r = rows[k];
        out << mus[k];
        if (r.error.empty()) {
            ++ok;
            for (double v : r.norms) out << ',' << v;
            out << ',' << r.iterations << ',' << r.residual << ",\n";
        } else {
            std::string msg = r.error;
            std::replace_if(msg.begin(), msg.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ';');
            for (std::size_t i = 0; i < n; ++i) out << ',';
            out << ",," << msg << '\n';
        }
    }
    if (10 * ok < 9 * mus.size()) {
        err << "pucci sweep: only " << ok << " of " << mus.size() << " rows succeeded\n";
        return exit_code::barrier;
    }
    return exit_code::ok;
}

}  // namespace pucci
