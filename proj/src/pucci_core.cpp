#include "pucci/pucci_core.hpp"

#include "pucci/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pucci {

EllipticityPair::EllipticityPair(double lower_, double upper_) : lower(lower_), upper(upper_) {
    if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower > 0.0) || !(lower <= upper)) {
        throw PreconditionError("ellipticity pair requires 0 < lambda <= Lambda, got (" +
                                std::to_string(lower) + ", " + std::to_string(upper) + ")");
    }
}

SymMatrix::SymMatrix(std::size_t dimension) : dim_(dimension), a_(dimension * dimension, 0.0) {
    validate();
}

SymMatrix::SymMatrix(std::initializer_list<std::initializer_list<double>> rows) : dim_(rows.size()) {
    a_.reserve(dim_ * dim_);
    for (const auto& row : rows) {
        if (row.size() != dim_) throw PreconditionError("SymMatrix rows must form a square array");
        a_.insert(a_.end(), row.begin(), row.end());
    }
    validate();
}

SymMatrix::SymMatrix(std::size_t dimension, std::vector<double> row_major)
    : dim_(dimension), a_(std::move(row_major)) {
    if (a_.size() != dim_ * dim_) throw PreconditionError("SymMatrix storage size mismatch");
    validate();
}

SymMatrix SymMatrix::identity(std::size_t dimension) {
    SymMatrix m(dimension);
    for (std::size_t i = 0; i < dimension; ++i) m.a_[i * dimension + i] = 1.0;
    return m;
}

SymMatrix SymMatrix::diagonal(const std::vector<double>& entries) {
    SymMatrix m(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) m.a_[i * m.dim_ + i] = entries[i];
    return m;
}

void SymMatrix::validate() const {
    if (dim_ < 1 || dim_ > kMaxDimension) {
        throw PreconditionError("SymMatrix dimension must be in 1.." + std::to_string(kMaxDimension));
    }
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = i + 1; j < dim_; ++j) {
            if (a_[i * dim_ + j] != a_[j * dim_ + i]) {
                throw PreconditionError("matrix is not symmetric at (" + std::to_string(i) + ", " +
                                        std::to_string(j) + ")");
            }
        }
    }
}

void SymMatrix::set(std::size_t i, std::size_t j, double value) {
    a_[i * dim_ + j] = value;
    a_[j * dim_ + i] = value;
}

SymMatrix SymMatrix::operator+(const SymMatrix& other) const {
    if (other.dim_ != dim_) throw PreconditionError("SymMatrix dimension mismatch");
    SymMatrix out(*this);
    for (std::size_t k = 0; k < a_.size(); ++k) out.a_[k] += other.a_[k];
    return out;
}

SymMatrix SymMatrix::operator*(double c) const {
    SymMatrix out(*this);
    for (double& v : out.a_) v *= c;
    return out;
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += a_[i * dim_ + i];
    return t;
}

namespace {

std::vector<double> jacobi_eigenvalues(const SymMatrix& m) {
    const std::size_t n = m.dimension();
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] = m(i, j);

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += a[i * n + j] * a[i * n + j];
        return s;
    };
    double scale = 0.0;
    for (double v : a) scale += v * v;

    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        if (off_norm() <= 1e-30 * scale || scale == 0.0) {
            std::vector<double> ev(n);
            for (std::size_t i = 0; i < n; ++i) ev[i] = a[i * n + i];
            std::sort(ev.begin(), ev.end());
            return ev;
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k];
                    const double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    throw NumericalError("Jacobi eigenvalue iteration did not converge");
}

}  // namespace

std::vector<double> eigenvalues(const SymMatrix& m) {
    const std::size_t n = m.dimension();
    if (n == 1) return {m(0, 0)};
    if (n == 2) {
        const double mean = 0.5 * (m(0, 0) + m(1, 1));
        const double half_diff = 0.5 * (m(0, 0) - m(1, 1));
        const double radius = std::hypot(half_diff, m(0, 1));
        return {mean - radius, mean + radius};
    }
    return jacobi_eigenvalues(m);
}

double pucci_plus(const SymMatrix& m, const EllipticityPair& pair) {
    double value = 0.0;
    for (double e : eigenvalues(m)) value += e > 0.0 ? pair.upper * e : pair.lower * e;
    return value;
}

double pucci_minus(const SymMatrix& m, const EllipticityPair& pair) {
    double value = 0.0;
    for (double e : eigenvalues(m)) value += e > 0.0 ? pair.lower * e : pair.upper * e;
    return value;
}

}  // namespace pucci
