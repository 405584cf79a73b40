#include "pucci/iterate.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace pucci;
using testing::oracles;
using testing::rel_err;

namespace {

SystemState zeros(const RadialGrid& grid, std::size_t n) { return SystemState(n, RadialField::zeros(grid)); }

double max_diff(const SystemState& x, const SystemState& y) {
    double d = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t k = 0; k < x[i].values.size(); ++k) d = std::max(d, std::abs(x[i].values[k] - y[i].values[k]));
    return d;
}

bool below(const SystemState& x, const SystemState& y, double slack) {
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t k = 0; k < x[i].values.size(); ++k)
            if (x[i].values[k] > y[i].values[k] + slack) return false;
    return true;
}

}  // namespace

TEST_SUITE("iterate") {

TEST_CASE("zero nonlinearity converges at once") {
    const RadialCache cache(testing::expression_spec({"0", "0"}, {{1, 1}, {1, 2}}, 256));
    const SystemState z = zeros(cache.grid(), 2);
    SystemState top{cache.torsion(0).profile, cache.torsion(1).profile};
    const SolveReport r = monotone_solve({z, top}, cache.spec(), 1.0, Direction::FromSub);
    CHECK(r.iterations == 1);
    CHECK(r.residual == 0);
    CHECK(r.norms() == std::vector<double>{0, 0});
    const SolveReport d = monotone_solve({z, top}, cache.spec(), 1.0, Direction::FromSup);
    CHECK(d.solution[0].sup_norm() == 0);
    CHECK(to_string(Direction::FromSup) == "from-sup");
}

TEST_CASE("square root problem against shooting") {
    const RadialCache cache(testing::expression_spec({"pow(u1, 0.5)"}, {{1, 1}}, 4096));
    const EigenSubsolution lo = build_eigen_subsolution(cache, 1.0);
    const LargeSupersolution hi = build_large_supersolution(cache, 1.0, {lo.psi});
    const SolveOptions opt{1e-9, 10000};
    const SolveReport up = monotone_solve({lo.psi, hi.phi}, cache.spec(), 1.0, Direction::FromSub, opt);
    const SolveReport down = monotone_solve({lo.psi, hi.phi}, cache.spec(), 1.0, Direction::FromSup, opt);
    const double ref = oracles()["sqrt_fixed_point_center"];
    CHECK(rel_err(up.solution[0].values.front(), ref) < 1e-5);
    CHECK(rel_err(down.solution[0].values.front(), ref) < 1e-5);
    CHECK(up.solution[0].values.back() == 0);
    CHECK(up.residual < 1e-9);
}

TEST_CASE("minimal and maximal solutions in [psi, phi~]") {
    const RadialCache cache(testing::combustion_spec());
    const ThresholdReport t = thresholds(cache, 1, 20);
    const double mu = 0.02;
    const SmallPair s = build_small_pair(cache, mu, t.mu0);
    const StrictSupersolution top = build_strict_supersolution(cache, 1, mu, t.mu_star);
    const OrderInterval box{s.psi, top.phi_tilde};
    const SolveOptions opt{1e-10, 10000};
    const SolveReport lo = monotone_solve(box, cache.spec(), mu, Direction::FromSub, opt);
    const SolveReport hi = monotone_solve(box, cache.spec(), mu, Direction::FromSup, opt);
    CHECK(below(lo.solution, hi.solution, 1e-12));
    CHECK(max_diff(lo.solution, hi.solution) < 10 * opt.tol);
    CHECK(below(s.psi, lo.solution, 0));
    CHECK(below(hi.solution, top.phi_tilde, 0));
    for (const auto& u : lo.solution) {
        for (std::size_t k = 0; k + 1 < u.values.size(); ++k) CHECK(u.values[k] > 0);
        CHECK(u.values.back() == 0);
    }
    for (std::size_t k = 1; k < lo.history.size(); ++k) CHECK(lo.history[k] <= lo.history[k - 1] * 1.5 + 1e-15);
    CHECK(lo.history.size() == static_cast<std::size_t>(lo.iterations));

    // a solved state certifies as both sub- and supersolution
    CHECK(certify(lo.solution, cache.spec(), mu, CertificateKind::Sub).pass);
    CHECK(certify(lo.solution, cache.spec(), mu, CertificateKind::Sup).pass);

    const nlohmann::json j = lo;
    CHECK(j["direction"] == "from-sub");
    CHECK(j["iterations"] == lo.iterations);
}

TEST_CASE("inverted interval is rejected") {
    const RadialCache cache(testing::combustion_spec(512));
    const SmallPair s = build_small_pair(cache, 0.02, 1.0);
    CHECK_THROWS_AS(monotone_solve({s.phi_small, s.psi}, cache.spec(), 0.02, Direction::FromSub), PreconditionError);
    CHECK_THROWS_AS(monotone_solve({s.psi, s.phi_small}, cache.spec(), 0.02, Direction::FromSub, {1e-8, 1}),
                    NumericalError);
}

TEST_CASE("multiplicity in the window") {
    const RadialCache cache(testing::combustion_spec());
    const MultiplicityReport m = find_multiplicity(cache, 0.1, 1, 20);
    CHECK(m.third_solution_certified);
    CHECK(m.diagnostics.empty());
    REQUIRE(m.u1);
    REQUIRE(m.u2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(m.u1->norms()[i] <= 1);
        CHECK(m.u2->norms()[i] >= 20);
    }
    CHECK(m.separated);
    CHECK(m.distance >= 19);
    CHECK(m.psi_tilde_certificate->pass);
    CHECK(m.phi_tilde_certificate->pass);
    for (const auto& o : m.orderings) CHECK_MESSAGE(o.verdict.holds == o.expected, o.relation);
    CHECK(std::any_of(m.orderings.begin(), m.orderings.end(), [](const NamedOrdering& o) { return !o.expected; }));

    const nlohmann::json j = m;
    CHECK(j["third_solution_certified"] == true);
    CHECK(j.contains("orderings"));
    CHECK(j.contains("thresholds"));
}

TEST_CASE("outside the window") {
    const RadialCache cache(testing::combustion_spec(1024));
    const ThresholdReport t = thresholds(cache, 1, 20);
    CHECK_THROWS_AS(find_multiplicity(cache, 2 * t.mu_star, 1, 20), OutsideWindowError);
    CHECK_THROWS_AS(find_multiplicity(cache, 0.5 * t.mu_lower_proof, 1, 20), OutsideWindowError);
    try {
        find_multiplicity(cache, t.mu_star, 1, 20);
        FAIL("expected OutsideWindowError");
    } catch (const OutsideWindowError& e) {
        CHECK(e.report().mu_star == t.mu_star);
    }
    const RadialCache tau1(testing::combustion_spec(1024, 1.0));
    try {
        find_multiplicity(tau1, 1.0, 1, 20);
        FAIL("expected OutsideWindowError");
    } catch (const OutsideWindowError& e) {
        CHECK_FALSE(e.report().window_open());
    }
}

}  // TEST_SUITE
