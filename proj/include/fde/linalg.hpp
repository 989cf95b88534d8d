#ifndef FDE_LINALG_HPP
#define FDE_LINALG_HPP

// Small sparse linear algebra kernels used by the implicit solver.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace fde::linalg {

class SolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Compressed sparse row matrix.
struct CsrMatrix {
    std::size_t rows = 0;
    std::vector<std::size_t> row_start;  ///< size rows+1
    std::vector<std::size_t> col;
    std::vector<double> val;

    void multiply(std::span<const double> x, std::span<double> y) const;
    double at(std::size_t i, std::size_t j) const;
    std::vector<double> diagonal() const;
};

/// Thomas algorithm: lower[i] couples row i to i-1, upper[i] couples row i to i+1.
/// lower[0] and upper[n-1] are ignored.
std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs);

/// Periodic tridiagonal system: lower[0] couples row 0 to row n-1 and upper[n-1]
/// couples row n-1 to row 0. Sherman-Morrison on top of the Thomas solve.
std::vector<double> solve_periodic_tridiagonal(std::span<const double> lower,
                                               std::span<const double> diag,
                                               std::span<const double> upper,
                                               std::span<const double> rhs);

struct IterativeResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for a symmetric positive definite matrix.
IterativeResult conjugate_gradient(const CsrMatrix& a, std::span<const double> rhs,
                                   double rel_tol, int max_iter);

/// Jacobi-preconditioned BiCGSTAB for general nonsingular matrices.
IterativeResult bicgstab(const CsrMatrix& a, std::span<const double> rhs, double rel_tol,
                         int max_iter);

}  // namespace fde::linalg

#endif  // FDE_LINALG_HPP
