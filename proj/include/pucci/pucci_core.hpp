#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace pucci {

/// Ellipticity constants 0 < lower <= upper of one Pucci operator
/// (lambda and Lambda in the usual notation).
struct EllipticityPair {
    double lower = 1.0;
    double upper = 1.0;

    EllipticityPair() = default;
    /// Throws PreconditionError unless 0 < lower <= upper (both finite).
    EllipticityPair(double lower, double upper);

    bool operator==(const EllipticityPair&) const = default;
};

/// Dense symmetric matrix of dimension 1..kMaxDimension, row-major.
class SymMatrix {
public:
    static constexpr std::size_t kMaxDimension = 8;

    /// Zero matrix.
    explicit SymMatrix(std::size_t dimension);
    /// Rows must be square and exactly symmetric, otherwise PreconditionError.
    SymMatrix(std::initializer_list<std::initializer_list<double>> rows);
    SymMatrix(std::size_t dimension, std::vector<double> row_major);

    static SymMatrix identity(std::size_t dimension);
    static SymMatrix diagonal(const std::vector<double>& entries);

    std::size_t dimension() const { return dim_; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * dim_ + j]; }
    /// Writes both (i,j) and (j,i).
    void set(std::size_t i, std::size_t j, double value);

    SymMatrix operator+(const SymMatrix& other) const;
    SymMatrix operator*(double c) const;
    SymMatrix operator-() const { return *this * -1.0; }
    double trace() const;

private:
    void validate() const;

    std::size_t dim_;
    std::vector<double> a_;
};

/// Eigenvalues in ascending order. Closed form for N <= 2, cyclic Jacobi above.
/// Throws NumericalError if Jacobi fails to converge.
std::vector<double> eigenvalues(const SymMatrix& m);

/// upper * (sum of positive eigenvalues) + lower * (sum of negative eigenvalues).
double pucci_plus(const SymMatrix& m, const EllipticityPair& pair);
/// lower * (sum of positive eigenvalues) + upper * (sum of negative eigenvalues).
double pucci_minus(const SymMatrix& m, const EllipticityPair& pair);

/// Branch weight of the radial reduction: upper for s >= 0, lower for s < 0.
inline double theta(double s, const EllipticityPair& pair) {
    return s >= 0.0 ? pair.upper : pair.lower;
}

/// theta(s) * s, the strictly increasing piecewise-linear map appearing in
/// the radial operator.
inline double theta_times(double s, const EllipticityPair& pair) {
    return theta(s, pair) * s;
}

/// Inverse of theta_times: the unique s with theta(s) * s == t.
inline double theta_solve(double t, const EllipticityPair& pair) {
    return t >= 0.0 ? t / pair.upper : t / pair.lower;
}

}  // namespace pucci
