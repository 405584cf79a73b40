#include "pucci/radial.hpp"

#include "pucci/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace pucci {

RadialGrid::RadialGrid(double radius, int dimension, std::size_t intervals)
    : radius_(radius), dimension_(dimension), intervals_(intervals) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw PreconditionError("radial grid needs R > 0");
    if (dimension < 1 || dimension > static_cast<int>(SymMatrix::kMaxDimension)) {
        throw PreconditionError("radial grid needs 1 <= N <= 8");
    }
    if (intervals < 16) throw PreconditionError("radial grid needs M >= 16");
}

RadialField::RadialField(RadialGrid g, std::vector<double> v, std::vector<double> d)
    : grid(g), values(std::move(v)), derivative(std::move(d)) {
    if (values.size() != grid.nodes()) throw PreconditionError("radial field size does not match its grid");
    if (!derivative.empty() && derivative.size() != grid.nodes()) {
        throw PreconditionError("radial derivative samples do not match the grid");
    }
}

RadialField RadialField::zeros(const RadialGrid& g) { return RadialField(g, std::vector<double>(g.nodes(), 0.0)); }

double RadialField::sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double RadialField::at(double r) const {
    const double t = std::clamp(r / grid.h(), 0.0, static_cast<double>(grid.intervals()));
    const auto k = std::min(static_cast<std::size_t>(t), grid.intervals() - 1);
    const double w = t - static_cast<double>(k);
    return (1.0 - w) * values[k] + w * values[k + 1];
}

RadialField RadialField::scaled(double c) const {
    RadialField out = *this;
    for (double& v : out.values) v *= c;
    for (double& v : out.derivative) v *= c;
    return out;
}

RadialGrid radial_grid(const SystemSpec& spec) {
    const auto& ball = spec.ball();
    return RadialGrid(ball.radius, ball.dimension, spec.radial_intervals);
}

std::size_t centered_start(const RadialGrid& grid, const EllipticityPair& pair) {
    const double bound = (grid.dimension() - 1) * pair.upper / (2.0 * pair.lower);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(bound)));
}

std::vector<double> radial_pucci(std::span<const double> u, const RadialGrid& grid, const EllipticityPair& pair) {
    if (u.size() != grid.nodes()) throw PreconditionError("radial_pucci: field does not match grid");
    const std::size_t M = grid.intervals();
    const double h = grid.h();
    const double h2 = h * h;
    const double tangential = grid.dimension() - 1;
    const std::size_t kc = centered_start(grid, pair);

    std::vector<double> out(M);
    out[0] = grid.dimension() * theta_times(2.0 * (u[1] - u[0]) / h2, pair);
    for (std::size_t k = 1; k < M; ++k) {
        const double d2 = (u[k + 1] - 2.0 * u[k] + u[k - 1]) / h2;
        const double d1 = k >= kc ? (u[k + 1] - u[k - 1]) / (2.0 * h) : (u[k + 1] - u[k]) / h;
        out[k] = theta_times(d2, pair) + tangential / grid.r(k) * theta_times(d1, pair);
    }
    return out;
}

namespace {

// Solves w1 Theta(a1 (x - p1)) + w2 Theta(a2 (x - p2)) = target for x, where
// a1, a2 > 0 and w1 > 0, w2 >= 0. The left side is strictly increasing and
// piecewise linear with kinks at p1, p2.
double solve_two_kink(double w1, double a1, double p1, double w2, double a2, double p2, double target,
                      const EllipticityPair& pair) {
    auto value = [&](double x) { return w1 * theta_times(a1 * (x - p1), pair) + w2 * theta_times(a2 * (x - p2), pair); };
    auto slope_right_of = [&](double x) {
        return w1 * a1 * (x >= p1 ? pair.upper : pair.lower) + w2 * a2 * (x >= p2 ? pair.upper : pair.lower);
    };
    const double lo = std::min(p1, p2);
    const double hi = std::max(p1, p2);
    const double v_lo = value(lo);
    const double v_hi = value(hi);
    if (target < v_lo) {
        const double slope = w1 * a1 * pair.lower + w2 * a2 * pair.lower;
        return lo + (target - v_lo) / slope;
    }
    if (target >= v_hi) return hi + (target - v_hi) / slope_right_of(hi);
    return lo + (target - v_lo) / slope_right_of(lo);
}

}  // namespace

RadialField solve_radial(std::span<const double> g, const RadialGrid& grid, const EllipticityPair& pair) {
    if (g.size() != grid.nodes()) throw PreconditionError("solve_radial: load does not match grid");
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!std::isfinite(g[k])) throw PreconditionError("solve_radial: non-finite load at node " + std::to_string(k));
        if (g[k] < 0.0) throw PreconditionError("solve_radial: negative load at node " + std::to_string(k));
    }
    const std::size_t M = grid.intervals();
    const double h = grid.h();
    const double h2 = h * h;
    const double tangential = grid.dimension() - 1;
    const std::size_t kc = centered_start(grid, pair);

    std::vector<double> u(M + 1, 0.0);
    u[1] = u[0] + 0.5 * h2 * theta_solve(-g[0] / grid.dimension(), pair);
    for (std::size_t k = 1; k < M; ++k) {
        const double c = tangential / grid.r(k);
        double next;
        if (k >= kc) {
            next = solve_two_kink(1.0, 1.0 / h2, 2.0 * u[k] - u[k - 1], c, 1.0 / (2.0 * h), u[k - 1], -g[k], pair);
        } else {
            next = solve_two_kink(1.0, 1.0 / h2, 2.0 * u[k] - u[k - 1], c, 1.0 / h, u[k], -g[k], pair);
        }
        if (!std::isfinite(next)) throw NumericalError("solve_radial: non-finite value at node " + std::to_string(k + 1));
        u[k + 1] = next;
    }
    const double shift = u[M];
    for (double& v : u) v -= shift;

    std::vector<double> du(M + 1, 0.0);
    for (std::size_t k = 1; k < M; ++k) du[k] = (u[k + 1] - u[k - 1]) / (2.0 * h);
    du[M] = (3.0 * u[M] - 4.0 * u[M - 1] + u[M - 2]) / (2.0 * h);
    return RadialField(grid, std::move(u), std::move(du));
}

RadialField solve_radial(const RadialField& g, const EllipticityPair& pair) { return solve_radial(g.values, g.grid, pair); }

Torsion torsion(const EllipticityPair& pair, const RadialGrid& grid) {
    const std::vector<double> one(grid.nodes(), 1.0);
    RadialField e = solve_radial(one, grid, pair);
    const double norm = e.values[0];
    return {std::move(e), norm};
}

Eigenpair principal_eigenpair(const EllipticityPair& pair, const RadialGrid& grid, double tol, int max_iter) {
    if (!(tol > 0.0)) throw PreconditionError("principal_eigenpair needs tol > 0");
    std::vector<double> phi(grid.nodes());
    for (std::size_t k = 0; k < phi.size(); ++k) {
        const double s = grid.r(k) / grid.radius();
        phi[k] = 1.0 - s * s;
    }

    double mu = 0.0;
    double gap = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        RadialField next = solve_radial(phi, grid, pair);
        const double norm = next.sup_norm();
        if (!(norm > 0.0)) throw NumericalError("principal_eigenpair: iterate collapsed to zero");
        const double mu_next = 1.0 / norm;
        double move = 0.0;
        for (std::size_t k = 0; k < phi.size(); ++k) {
            const double v = std::max(next.values[k] / norm, 0.0);
            move = std::max(move, std::abs(v - phi[k]));
            phi[k] = v;
        }
        gap = std::abs(mu_next - mu);
        const bool converged = it > 1 && gap < tol * mu && move < tol;
        mu = mu_next;
        if (converged) {
            RadialField eig(grid, phi);
            const auto op = radial_pucci(eig.values, grid, pair);
            double residual = 0.0;
            for (std::size_t k = 0; k < op.size(); ++k) residual = std::max(residual, std::abs(-op[k] - mu * phi[k]));
            eig.derivative.assign(grid.nodes(), 0.0);
            for (std::size_t k = 1; k < grid.intervals(); ++k) {
                eig.derivative[k] = (phi[k + 1] - phi[k - 1]) / (2.0 * grid.h());
            }
            return {mu, std::move(eig), it, residual};
        }
    }
    throw NumericalError("principal_eigenpair did not converge in " + std::to_string(max_iter) +
                         " iterations (last eigenvalue gap " + std::to_string(gap) + ")");
}

std::vector<double> system_load(const SystemSpec& spec, double mu, const SystemState& u, std::size_t i) {
    const std::size_t n = spec.size();
    if (u.size() != n) throw PreconditionError("state has wrong number of components");
    const std::size_t nodes = u.front().values.size();
    std::vector<double> x(n);
    std::vector<double> g(nodes);
    for (std::size_t k = 0; k < nodes; ++k) {
        for (std::size_t j = 0; j < n; ++j) x[j] = u[j].values[k];
        g[k] = mu * (*spec.f)(i, x);
    }
    return g;
}

SystemState solve_auxiliary_system(const SystemSpec& spec, double mu, const RadialField& d) {
    if (!(mu > 0.0)) throw PreconditionError("auxiliary system needs mu > 0");
    const std::size_t n = spec.size();
    SystemState out;
    out.reserve(n);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> g(d.values.size());
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (d.values[k] < 0.0) throw PreconditionError("auxiliary system needs d >= 0");
            std::fill(x.begin(), x.end(), d.values[k]);
            try {
                g[k] = mu * (*spec.f)(i, x);
            } catch (const Error& e) {
                throw NumericalError("f" + std::to_string(i + 1) + " failed at r = " + std::to_string(d.grid.r(k)) +
                                     ": " + e.what());
            }
        }
        out.push_back(solve_radial(g, d.grid, spec.pairs[i]));
    }
    return out;
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_csv(std::ostream& os, const RadialField& field) {
    os << "r,value,derivative\n";
    for (std::size_t k = 0; k < field.values.size(); ++k) {
        const double d = field.derivative.empty() ? 0.0 : field.derivative[k];
        os << fmt17(field.grid.r(k)) << ',' << fmt17(field.values[k]) << ',' << fmt17(d) << '\n';
    }
}

void write_csv(std::ostream& os, const SystemState& state) {
    if (state.empty()) return;
    os << "r";
    for (std::size_t i = 0; i < state.size(); ++i) os << ",u" << i + 1;
    os << '\n';
    const auto& grid = state.front().grid;
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        os << fmt17(grid.r(k));
        for (const auto& f : state) os << ',' << fmt17(f.values[k]);
        os << '\n';
    }
}

}  // namespace pucci
