#pragma once

// Wide-stencil monotone scheme for -M+(D^2 u) = g on a masked 2D grid.
//
// At an interior node x the operator is
//   max_k [ G(delta_{v_k} u) + G(delta_{v_k^perp} u) ],   G(t) = Lambda t (t >= 0), lambda t (t < 0)
// where v_k is the lattice vector (components at most K) closest in angle
// to k pi / (2K), v_k^perp its exact rotation, and
//   delta_v u(x) = (u(x + v h) + u(x - v h) - 2 u(x)) / (|v|^2 h^2).
// Every pair whose four endpoints lie in the domain is used; the axis pair
// is always used, reading the Dirichlet value 0 outside the mask.

#include "pucci/nonlinearity.hpp"
#include "pucci/pucci_core.hpp"
#include "pucci/radial.hpp"
#include "pucci/subsuper.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace pucci {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct LatticePair {
    int p, q;   // v = (p, q); the partner is (-q, p)
};

/// Direction pairs for stencil width K (angles k pi / (2K), k = 0..K-1).
std::vector<LatticePair> stencil_directions(int K);

class Grid2D {
public:
    /// Node (i, j) sits at origin + (i h, j h); mask is row-major (index j nx + i).
    Grid2D(int nx, int ny, double h, Point origin, std::vector<std::uint8_t> mask, int K);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double h() const { return h_; }
    int stencil_width() const { return K_; }
    Point origin() const { return origin_; }
    std::size_t size() const { return mask_.size(); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
    bool interior(int i, int j) const { return mask_[index(i, j)] != 0; }
    Point node(int i, int j) const { return {origin_.x + i * h_, origin_.y + j * h_}; }
    const std::vector<std::uint8_t>& mask() const { return mask_; }
    std::size_t interior_count() const;

    const std::vector<LatticePair>& directions() const { return dirs_; }
    /// Bit k set when direction pair k is used at node index idx.
    std::uint32_t active_pairs(std::size_t idx) const { return active_[idx]; }
    /// Largest |v| h among pairs used anywhere.
    double reach() const;

private:
    int nx_, ny_;
    double h_;
    Point origin_;
    std::vector<std::uint8_t> mask_;
    int K_;
    std::vector<LatticePair> dirs_;
    std::vector<std::uint32_t> active_;
};

/// Named shapes padded by K exterior nodes: "disc" (unit disc at the
/// origin), "square" ([0,1]^2), "lshape" ([0,1]^2 union [1,2]x[0,1/2]).
Grid2D make_shape(const std::string& shape, double h, int K);

/// Mask text file: "nx ny" then ny rows of nx characters, '1' or '#' for
/// interior, '0' or '.' for exterior, first row j = 0. The array is padded
/// by K exterior nodes on every side; node (0, 0) of the file is at the origin.
Grid2D load_mask(const std::string& path, double h, int K);
Grid2D make_grid(const GridDomain& domain);

struct GridField {
    std::shared_ptr<const Grid2D> grid;
    std::vector<double> values;

    explicit GridField(std::shared_ptr<const Grid2D> g, double fill = 0.0);
    GridField(std::shared_ptr<const Grid2D> g, std::vector<double> v);

    double& at(int i, int j) { return values[grid->index(i, j)]; }
    double at(int i, int j) const { return values[grid->index(i, j)]; }
    double sup_norm() const;
};

/// M+_h(D^2 u) at interior nodes, 0 elsewhere.
GridField pucci_wide_stencil(const GridField& u, const EllipticityPair& pair);

enum class Solver2D { GaussSeidel, PseudoTime };

struct Solve2DOptions {
    double tol = 1e-9;   // on max |M+_h(D^2 u) + g| / (1 + |g|_inf)
    int max_iter = 200000;
    Solver2D method = Solver2D::GaussSeidel;
    double omega = 1.0;   // relaxation for GaussSeidel
};

struct Solve2DReport {
    GridField solution;
    int iterations;
    double residual;
};

/// Solves -M+_h(D^2 u) = g on the mask with u = 0 outside. g must be
/// nonnegative and finite on the mask. Methods:
///   GaussSeidel: nonlinear Gauss-Seidel with exact local solves (the node
///     value is the largest root over the direction pairs), i.e. pseudo-time
///     with the largest monotone local step.
///   PseudoTime: explicit u += dt (M+_h(D^2 u) + g), dt = h^2/(4 Lambda).
/// Both stop on the residual. Growth of the update over 1000 consecutive
/// sweeps raises NumericalError.
Solve2DReport solve_2d_report(const GridField& g, const EllipticityPair& pair, const Solve2DOptions& options = {});
GridField solve_2d(const GridField& g, const EllipticityPair& pair, double tol = 1e-9);

struct InscribedBall {
    Point center;
    double radius;
    int i, j;
};

/// Vector-propagation distance transform to the nearest exterior node;
/// R = that distance - h/2 at the maximizing node.
InscribedBall inscribed_ball(const Grid2D& grid);

/// f(|x - center|) inside the ball of radius f.grid.radius(), 0 elsewhere.
/// Every node strictly inside the ball must be interior.
GridField extend_by_zero(const RadialField& f, Point center, std::shared_ptr<const Grid2D> grid);

struct Shell {
    Point center;
    double radius;
    double half_width;
};

struct GridCertificate {
    CertificateKind kind;
    bool pass;
    double worst_margin;
    std::size_t checked;
    std::size_t excluded;
    std::size_t violations;
    double tolerance;
};

/// Residual sign check of -M+_h(D^2 u_i) - mu f_i(u) at interior nodes,
/// skipping nodes with ||x - center| - radius| <= half_width. Non-strict kinds
/// use the tolerance certificate_tol (1 + |mu f(u)|_inf); strict kinds need margin > 0.
GridCertificate certify_2d(const std::vector<GridField>& u, const SystemSpec& spec, double mu, CertificateKind kind,
                           const Shell* shell = nullptr);

/// "x,y,value" rows for every node, 17 significant digits.
void write_csv(std::ostream& os, const GridField& field);
/// Header "nx ny h", then ny rows of nx values.
void write_float_grid(std::ostream& os, const GridField& field);
/// Reads a float grid written by write_float_grid onto a grid of matching shape.
GridField read_float_grid(std::istream& is, std::shared_ptr<const Grid2D> grid);

}  // namespace pucci
