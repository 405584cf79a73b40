#include "pucci/grid2d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

namespace pucci {

std::vector<LatticePair> stencil_directions(int K) {
    if (K < 1 || K > 16) throw PreconditionError("stencil width K must be in [1, 16]");
    std::vector<LatticePair> out;
    for (int k = 0; k < K; ++k) {
        const double theta = k * std::numbers::pi / (2.0 * K);
        LatticePair best{1, 0};
        double best_err = std::numeric_limits<double>::infinity();
        int best_len = 0;
        for (int p = 0; p <= K; ++p) {
            for (int q = 0; q <= K; ++q) {
                if (p == 0 && q == 0) continue;
                if (std::gcd(p, q) != 1) continue;
                const double err = std::abs(std::atan2(q, p) - theta);
                const int len = p * p + q * q;
                if (err < best_err - 1e-12 || (err < best_err + 1e-12 && len < best_len)) {
                    best = {p, q};
                    best_err = err;
                    best_len = len;
                }
            }
        }
        out.push_back(best);
    }
    return out;
}

Grid2D::Grid2D(int nx, int ny, double h, Point origin, std::vector<std::uint8_t> mask, int K)
    : nx_(nx), ny_(ny), h_(h), origin_(origin), mask_(std::move(mask)), K_(K), dirs_(stencil_directions(K)) {
    if (nx < 16 || ny < 16) throw PreconditionError("grid needs nx, ny >= 16");
    if (!(h > 0.0)) throw PreconditionError("grid needs h > 0");
    if (mask_.size() != static_cast<std::size_t>(nx) * ny) throw PreconditionError("mask size does not match nx * ny");

    active_.assign(mask_.size(), 0);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (!interior(i, j)) continue;
            if (i < K || j < K || i >= nx - K || j >= ny - K) {
                throw PreconditionError("mask too thin for the stencil: interior node (" + std::to_string(i) + ", " +
                                        std::to_string(j) + ") is within K = " + std::to_string(K) + " of the array edge");
            }
            std::uint32_t bits = 1;
            for (std::size_t k = 1; k < dirs_.size(); ++k) {
                const auto [p, q] = dirs_[k];
                const bool inside = interior(i + p, j + q) && interior(i - p, j - q) && interior(i - q, j + p) &&
                                    interior(i + q, j - p);
                if (inside) bits |= 1u << k;
            }
            active_[index(i, j)] = bits;
        }
    }
}

std::size_t Grid2D::interior_count() const {
    return static_cast<std::size_t>(std::count_if(mask_.begin(), mask_.end(), [](std::uint8_t m) { return m != 0; }));
}

double Grid2D::reach() const {
    std::uint32_t used = 0;
    for (auto bits : active_) used |= bits;
    double r = 0.0;
    for (std::size_t k = 0; k < dirs_.size(); ++k) {
        if (used & (1u << k)) r = std::max(r, std::hypot(dirs_[k].p, dirs_[k].q) * h_);
    }
    return r;
}

Grid2D make_shape(const std::string& shape, double h, int K) {
    if (!(h > 0.0 && h < 0.5)) throw PreconditionError("grid spacing must be in (0, 1/2)");
    const int n = static_cast<int>(std::ceil(1.0 / h - 1e-9));
    constexpr double kEps = 1e-12;
    int lo_i, hi_i, lo_j, hi_j;
    std::function<bool(double, double)> inside;
    if (shape == "disc") {
        lo_i = lo_j = -(n + K);
        hi_i = hi_j = n + K;
        inside = [](double x, double y) { return x * x + y * y < 1.0 - kEps; };
    } else if (shape == "square") {
        lo_i = lo_j = -K;
        hi_i = hi_j = n + K;
        inside = [](double x, double y) { return x > kEps && x < 1.0 - kEps && y > kEps && y < 1.0 - kEps; };
    } else if (shape == "lshape") {
        lo_i = lo_j = -K;
        hi_i = 2 * n + K;
        hi_j = n + K;
        inside = [](double x, double y) {
            const bool square = x > kEps && x < 1.0 - kEps && y > kEps && y < 1.0 - kEps;
            const bool arm = x > kEps && x < 2.0 - kEps && y > kEps && y < 0.5 - kEps;
            return square || arm;
        };
    } else {
        throw PreconditionError("unknown shape '" + shape + "' (expected disc, square or lshape)");
    }
    const int nx = hi_i - lo_i + 1;
    const int ny = hi_j - lo_j + 1;
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(nx) * ny, 0);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) mask[static_cast<std::size_t>(j) * nx + i] = inside((lo_i + i) * h, (lo_j + j) * h);
    }
    return Grid2D(nx, ny, h, {lo_i * h, lo_j * h}, std::move(mask), K);
}

Grid2D load_mask(const std::string& path, double h, int K) {
    std::ifstream in(path);
    if (!in) throw PreconditionError("cannot open mask file '" + path + "'");
    int fx = 0, fy = 0;
    if (!(in >> fx >> fy) || fx < 1 || fy < 1) throw PreconditionError("mask file '" + path + "': bad header");
    const int nx = fx + 2 * K;
    const int ny = fy + 2 * K;
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(nx) * ny, 0);
    for (int j = 0; j < fy; ++j) {
        std::string row;
        if (!(in >> row) || static_cast<int>(row.size()) != fx) {
            throw PreconditionError("mask file '" + path + "': row " + std::to_string(j) + " must have " +
                                    std::to_string(fx) + " characters");
        }
        for (int i = 0; i < fx; ++i) {
            const char c = row[i];
            if (c != '0' && c != '1' && c != '#' && c != '.') {
                throw PreconditionError("mask file '" + path + "': unexpected character '" + std::string(1, c) + "'");
            }
            mask[static_cast<std::size_t>(j + K) * nx + (i + K)] = (c == '1' || c == '#');
        }
    }
    return Grid2D(nx, ny, h, {-K * h, -K * h}, std::move(mask), K);
}

Grid2D make_grid(const GridDomain& domain) {
    if (!domain.mask_file.empty()) return load_mask(domain.mask_file, domain.h, domain.stencil_width);
    return make_shape(domain.shape, domain.h, domain.stencil_width);
}

GridField::GridField(std::shared_ptr<const Grid2D> g, double fill) : grid(std::move(g)), values(grid->size(), fill) {}

GridField::GridField(std::shared_ptr<const Grid2D> g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid->size()) throw PreconditionError("grid field size does not match its grid");
}

double GridField::sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

namespace {

inline double G(double t, const EllipticityPair& pair) { return t >= 0.0 ? pair.upper * t : pair.lower * t; }

struct Stencil {
    const Grid2D& grid;
    std::vector<std::ptrdiff_t> off_v, off_w;   // index offsets of v and v_perp
    std::vector<double> inv;                    // 1 / (|v|^2 h^2)

    explicit Stencil(const Grid2D& g) : grid(g) {
        for (const auto& d : g.directions()) {
            off_v.push_back(static_cast<std::ptrdiff_t>(d.q) * g.nx() + d.p);
            off_w.push_back(static_cast<std::ptrdiff_t>(d.p) * g.nx() - d.q);
            inv.push_back(1.0 / ((d.p * d.p + d.q * d.q) * g.h() * g.h()));
        }
    }

    double apply(const double* u, std::size_t idx, const EllipticityPair& pair) const {
        const std::uint32_t bits = grid.active_pairs(idx);
        const double c = u[idx];
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < inv.size(); ++k) {
            if (!(bits & (1u << k))) continue;
            const double a = (u[idx + off_v[k]] + u[idx - off_v[k]] - 2.0 * c) * inv[k];
            const double b = (u[idx + off_w[k]] + u[idx - off_w[k]] - 2.0 * c) * inv[k];
            best = std::max(best, G(a, pair) + G(b, pair));
        }
        return best;
    }

    // Value t of u[idx] with max_k [G(.) + G(.)] = -g, neighbours fixed.
    double local_solve(const double* u, std::size_t idx, double g, const EllipticityPair& pair) const {
        const std::uint32_t bits = grid.active_pairs(idx);
        const double target = -g;
        const double L = pair.upper;
        const double l = pair.lower;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < inv.size(); ++k) {
            if (!(bits & (1u << k))) continue;
            const double s1 = u[idx + off_v[k]] + u[idx - off_v[k]];
            const double s2 = u[idx + off_w[k]] + u[idx - off_w[k]];
            const double c = 2.0 * inv[k];
            const double lo = 0.5 * std::min(s1, s2);
            const double hi = 0.5 * std::max(s1, s2);
            // G(inv (s1 - 2t)) + G(inv (s2 - 2t)) is decreasing with kinks at lo, hi
            const double at_lo = L * c * (hi - lo);
            const double at_hi = l * c * (lo - hi);
            double t;
            if (target >= at_lo) {
                t = 0.5 * (lo + hi) - target / (2.0 * L * c);
            } else if (target <= at_hi) {
                t = 0.5 * (lo + hi) - target / (2.0 * l * c);
            } else {
                t = (L * hi + l * lo - target / c) / (L + l);
            }
            best = std::max(best, t);
        }
        return best;
    }
};

void check_load(const GridField& g) {
    const Grid2D& grid = *g.grid;
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        if (!grid.mask()[idx]) continue;
        if (!std::isfinite(g.values[idx]) || g.values[idx] < 0.0) {
            throw PreconditionError("solve_2d: load must be finite and nonnegative on the mask (node " +
                                    std::to_string(idx) + ")");
        }
    }
}

double max_residual(const Stencil& st, const std::vector<double>& u, const GridField& g, const EllipticityPair& pair) {
    const Grid2D& grid = *g.grid;
    double r = 0.0;
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        if (!grid.mask()[idx]) continue;
        r = std::max(r, std::abs(st.apply(u.data(), idx, pair) + g.values[idx]));
    }
    return r;
}


}  // namespace

GridField pucci_wide_stencil(const GridField& u, const EllipticityPair& pair) {
    const Grid2D& grid = *u.grid;
    const Stencil st(grid);
    GridField out(u.grid);
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        if (grid.mask()[idx]) out.values[idx] = st.apply(u.values.data(), idx, pair);
    }
    return out;
}

Solve2DReport solve_2d_report(const GridField& g, const EllipticityPair& pair, const Solve2DOptions& options) {
    check_load(g);
    const Grid2D& grid = *g.grid;
    const double gnorm = g.sup_norm();
    const double target = options.tol * (1.0 + gnorm);
    std::vector<double> u(grid.size(), 0.0);
    if (grid.interior_count() == 0 || gnorm == 0.0) return {GridField(g.grid, std::move(u)), 0, 0.0};
    if (!(options.omega > 0.0 && options.omega < 2.0)) throw PreconditionError("solve_2d: omega must be in (0, 2)");

    std::vector<std::size_t> nodes;
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        if (grid.mask()[idx]) nodes.push_back(idx);
    }
    const Stencil st(grid);
    const double omega = options.omega;
    const double dt = grid.h() * grid.h() / (4.0 * pair.upper);
    std::vector<double> next;
    double last_update = std::numeric_limits<double>::infinity();
    int growth = 0;
    constexpr int kCheckEvery = 10;
    for (int it = 1; it <= options.max_iter; ++it) {
        double update = 0.0;
        if (options.method == Solver2D::GaussSeidel) {
            for (std::size_t idx : nodes) {
                const double t = st.local_solve(u.data(), idx, g.values[idx], pair);
                const double step = omega * (t - u[idx]);
                u[idx] += step;
                update = std::max(update, std::abs(step));
            }
        } else {
            next = u;
            for (std::size_t idx : nodes) {
                const double step = dt * (st.apply(u.data(), idx, pair) + g.values[idx]);
                next[idx] += step;
                update = std::max(update, std::abs(step));
            }
            u.swap(next);
        }
        if (!std::isfinite(update)) throw NumericalError("solve_2d: non-finite update at sweep " + std::to_string(it));
        growth = update > last_update ? growth + 1 : 0;
        last_update = update;
        if (growth >= 1000) {
            throw NumericalError("solve_2d diverged: update grew for 1000 consecutive sweeps (sweep " + std::to_string(it) + ")");
        }
        if (it % kCheckEvery == 0 || update == 0.0) {
            const double res = max_residual(st, u, g, pair);
            if (res < target) return {GridField(g.grid, std::move(u)), it, res};
        }
    }
    throw NumericalError("solve_2d: no convergence in " + std::to_string(options.max_iter) + " sweeps (residual " +
                         std::to_string(max_residual(st, u, g, pair)) + ")");
}

GridField solve_2d(const GridField& g, const EllipticityPair& pair, double tol) {
    Solve2DOptions opt;
    opt.tol = tol;
    return solve_2d_report(g, pair, opt).solution;
}

InscribedBall inscribed_ball(const Grid2D& grid) {
    const int nx = grid.nx();
    const int ny = grid.ny();
    if (grid.interior_count() == 0) throw PreconditionError("inscribed_ball: empty mask");
    constexpr int kFar = 1 << 20;
    std::vector<int> dx(grid.size(), kFar), dy(grid.size(), kFar);
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        if (!grid.mask()[idx]) dx[idx] = dy[idx] = 0;
    }
    auto d2 = [&](std::size_t idx) { return static_cast<long long>(dx[idx]) * dx[idx] + static_cast<long long>(dy[idx]) * dy[idx]; };
    auto relax = [&](int i, int j, int oi, int oj) {
        const int si = i + oi, sj = j + oj;
        if (si < 0 || sj < 0 || si >= nx || sj >= ny) return;
        const std::size_t src = grid.index(si, sj);
        const std::size_t dst = grid.index(i, j);
        if (dx[src] == kFar) return;
        // (dx, dy) points from a node to its nearest exterior node
        const int nxv = dx[src] + oi;
        const int nyv = dy[src] + oj;
        const long long cand = static_cast<long long>(nxv) * nxv + static_cast<long long>(nyv) * nyv;
        if (cand < d2(dst)) {
            dx[dst] = nxv;
            dy[dst] = nyv;
        }
    };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            relax(i, j, -1, 0), relax(i, j, 0, -1), relax(i, j, -1, -1), relax(i, j, 1, -1);
        }
        for (int i = nx - 1; i >= 0; --i) relax(i, j, 1, 0);
    }
    for (int j = ny - 1; j >= 0; --j) {
        for (int i = nx - 1; i >= 0; --i) {
            relax(i, j, 1, 0), relax(i, j, 0, 1), relax(i, j, 1, 1), relax(i, j, -1, 1);
        }
        for (int i = 0; i < nx; ++i) relax(i, j, -1, 0);
    }
    long long best = -1;
    InscribedBall ball{};
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const std::size_t idx = grid.index(i, j);
            if (grid.mask()[idx] && d2(idx) > best) {
                best = d2(idx);
                ball.i = i;
                ball.j = j;
            }
        }
    }
    ball.center = grid.node(ball.i, ball.j);
    ball.radius = std::sqrt(static_cast<double>(best)) * grid.h() - 0.5 * grid.h();
    return ball;
}

GridField extend_by_zero(const RadialField& f, Point center, std::shared_ptr<const Grid2D> grid) {
    const double R = f.grid.radius();
    GridField out(grid);
    for (int j = 0; j < grid->ny(); ++j) {
        for (int i = 0; i < grid->nx(); ++i) {
            const Point p = grid->node(i, j);
            const double r = std::hypot(p.x - center.x, p.y - center.y);
            if (r >= R) continue;
            if (!grid->interior(i, j)) {
                throw PreconditionError("extend_by_zero: the ball of radius " + std::to_string(R) +
                                        " leaves the mask at node (" + std::to_string(i) + ", " + std::to_string(j) + ")");
            }
            out.at(i, j) = f.at(r);
        }
    }
    return out;
}

GridCertificate certify_2d(const std::vector<GridField>& u, const SystemSpec& spec, double mu, CertificateKind kind,
                           const Shell* shell) {
    const std::size_t n = spec.size();
    if (u.size() != n) throw PreconditionError("certify_2d: state has wrong number of components");
    const auto& grid = u.front().grid;
    for (const auto& f : u) {
        if (f.grid != grid) throw PreconditionError("certify_2d: components live on different grids");
    }
    const bool strict = kind == CertificateKind::StrictSub || kind == CertificateKind::StrictSup;
    const bool sub = kind == CertificateKind::Sub || kind == CertificateKind::StrictSub;
    const Stencil st(*grid);

    std::vector<double> x(n);
    std::vector<std::vector<double>> loads(n, std::vector<double>(grid->size(), 0.0));
    double load_norm = 0.0;
    for (std::size_t idx = 0; idx < grid->size(); ++idx) {
        if (!grid->mask()[idx]) continue;
        for (std::size_t j = 0; j < n; ++j) x[j] = u[j].values[idx];
        for (std::size_t i = 0; i < n; ++i) {
            loads[i][idx] = mu * (*spec.f)(i, x);
            load_norm = std::max(load_norm, loads[i][idx]);
        }
    }

    GridCertificate cert{kind, true, std::numeric_limits<double>::infinity(), 0, 0, 0, spec.certificate_tol * (1.0 + load_norm)};
    for (int j = 0; j < grid->ny(); ++j) {
        for (int i = 0; i < grid->nx(); ++i) {
            if (!grid->interior(i, j)) continue;
            if (shell) {
                const Point p = grid->node(i, j);
                const double r = std::hypot(p.x - shell->center.x, p.y - shell->center.y);
                if (std::abs(r - shell->radius) <= shell->half_width) {
                    ++cert.excluded;
                    continue;
                }
            }
            ++cert.checked;
            const std::size_t idx = grid->index(i, j);
            for (std::size_t c = 0; c < n; ++c) {
                const double residual = -st.apply(u[c].values.data(), idx, spec.pairs[c]) - loads[c][idx];
                const double margin = sub ? -residual : residual;
                cert.worst_margin = std::min(cert.worst_margin, margin);
                const bool ok = strict ? margin > 0.0 : margin >= -cert.tolerance;
                if (!ok) ++cert.violations;
            }
        }
    }
    cert.pass = cert.violations == 0;
    return cert;
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_csv(std::ostream& os, const GridField& field) {
    const Grid2D& g = *field.grid;
    os << "x,y,value\n";
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            const Point p = g.node(i, j);
            os << fmt17(p.x) << ',' << fmt17(p.y) << ',' << fmt17(field.at(i, j)) << '\n';
        }
    }
}

void write_float_grid(std::ostream& os, const GridField& field) {
    const Grid2D& g = *field.grid;
    os << g.nx() << ' ' << g.ny() << ' ' << fmt17(g.h()) << '\n';
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) os << (i ? " " : "") << fmt17(field.at(i, j));
        os << '\n';
    }
}

GridField read_float_grid(std::istream& is, std::shared_ptr<const Grid2D> grid) {
    int nx = 0, ny = 0;
    double h = 0.0;
    if (!(is >> nx >> ny >> h)) throw PreconditionError("float grid: bad header");
    if (nx != grid->nx() || ny != grid->ny() || std::abs(h - grid->h()) > 1e-15 * grid->h()) {
        throw PreconditionError("float grid: header does not match the target grid");
    }
    std::vector<double> v(grid->size());
    for (double& x : v) {
        if (!(is >> x)) throw PreconditionError("float grid: truncated data");
    }
    return GridField(std::move(grid), std::move(v));
}

}  // namespace pucci
