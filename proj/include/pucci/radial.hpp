#pragma once

// Radial reduction of -M+(D^2 u) = g on the ball B_R in R^N.
//
// For u(x) = u(|x|) the Hessian has eigenvalues u'' (once) and u'/r (N-1
// times), so M+(D^2 u) = Theta(u'') + (N-1)/r Theta(u') with
// Theta(s) = theta(s) s. The discrete operator used everywhere in this
// library (solver, certificates, residuals) is
//
//   node 0      : N Theta(2 (u_1 - u_0) / h^2)             (isotropic Hessian limit)
//   node k >= 1 : Theta(delta2 u_k) + (N-1)/r_k Theta(D u_k)
//
// with delta2 the centered second difference and D the centered first
// difference, except at the first few nodes k < (N-1) Lambda / (2 lambda)
// where D is the forward difference so every neighbour coefficient stays
// nonnegative (monotone scheme). The solver marches this discrete system
// outward exactly, so computed solutions have round-off level residuals.

#include "pucci/nonlinearity.hpp"
#include "pucci/pucci_core.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace pucci {

/// Uniform mesh r_k = k h, k = 0..M, h = R / M, for a ball of dimension N.
class RadialGrid {
public:
    RadialGrid(double radius, int dimension, std::size_t intervals);

    double radius() const { return radius_; }
    int dimension() const { return dimension_; }
    std::size_t intervals() const { return intervals_; }
    std::size_t nodes() const { return intervals_ + 1; }
    double h() const { return radius_ / static_cast<double>(intervals_); }
    double r(std::size_t k) const { return radius_ * static_cast<double>(k) / static_cast<double>(intervals_); }

    bool operator==(const RadialGrid&) const = default;

private:
    double radius_;
    int dimension_;
    std::size_t intervals_;
};

/// Samples u(r_k) and, when available, u'(r_k).
struct RadialField {
    RadialGrid grid;
    std::vector<double> values;
    std::vector<double> derivative;

    RadialField(RadialGrid g, std::vector<double> v, std::vector<double> d = {});

    static RadialField zeros(const RadialGrid& g);

    double sup_norm() const;
    /// Piecewise-linear interpolation; r is clamped to [0, R].
    double at(double r) const;

    RadialField scaled(double c) const;
};

/// One radial field per equation.
using SystemState = std::vector<RadialField>;

RadialGrid radial_grid(const SystemSpec& spec);

/// Index of the first node where the first-derivative term is centered.
std::size_t centered_start(const RadialGrid& grid, const EllipticityPair& pair);

/// Discrete M+_h(D^2 u) at nodes 0..M-1 (the boundary node is excluded).
std::vector<double> radial_pucci(std::span<const double> u, const RadialGrid& grid, const EllipticityPair& pair);

/// Solves -M+_h(D^2 u) = g with u'(0) = 0 and u(R) = 0. g must be
/// nonnegative and finite (PreconditionError otherwise); a non-finite
/// intermediate raises NumericalError naming the node.
RadialField solve_radial(std::span<const double> g, const RadialGrid& grid, const EllipticityPair& pair);
RadialField solve_radial(const RadialField& g, const EllipticityPair& pair);

struct Torsion {
    RadialField profile;
    double sup_norm;
};

/// Solution of -M+(D^2 e) = 1, e = 0 on the boundary; sup_norm = e(0).
Torsion torsion(const EllipticityPair& pair, const RadialGrid& grid);

struct Eigenpair {
    double mu;
    RadialField phi;   // sup-normalized, positive on [0, R)
    int iterations;
    /// sup |-M+_h(D^2 phi) - mu phi| over nodes 0..M-1.
    double residual;
};

/// Inverse power iteration phi <- solve_radial(phi / |phi|). Stops when the
/// eigenvalue estimate changes by less than tol relative and the
/// normalized iterate moves by less than tol in sup-norm.
Eigenpair principal_eigenpair(const EllipticityPair& pair, const RadialGrid& grid, double tol, int max_iter = 500);

/// mu f_i(u_1(r_k), ..., u_n(r_k)) for every node k.
std::vector<double> system_load(const SystemSpec& spec, double mu, const SystemState& u, std::size_t i);

/// psi_i = solve_radial(mu f_i(d, ..., d)); the components decouple.
SystemState solve_auxiliary_system(const SystemSpec& spec, double mu, const RadialField& d);

/// CSV with header "r,value,derivative", 17 significant digits.
void write_csv(std::ostream& os, const RadialField& field);
/// CSV with header "r,u1,...,un".
void write_csv(std::ostream& os, const SystemState& state);

}  // namespace pucci
