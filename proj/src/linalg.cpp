#include "fde/linalg.hpp"

#include <cmath>
#include <numeric>

namespace fde::linalg {

namespace {

double dot(std::span<const double> a, std::span<const double> b)
{
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const
{
    for (std::size_t i = 0; i < rows; ++i) {
        double s = 0.0;
        for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

double CsrMatrix::at(std::size_t i, std::size_t j) const
{
    double s = 0.0;
    for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k)
        if (col[k] == j) s += val[k];
    return s;
}

std::vector<double> CsrMatrix::diagonal() const
{
    std::vector<double> d(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) d[i] = at(i, i);
    return d;
}

std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs)
{
    const std::size_t n = diag.size();
    if (n == 0) return {};
    std::vector<double> c(n), d(n), x(n);
    double beta = diag[0];
    if (beta == 0.0) throw SolveError("singular tridiagonal system");
    c[0] = n > 1 ? upper[0] / beta : 0.0;
    d[0] = rhs[0] / beta;
    for (std::size_t i = 1; i < n; ++i) {
        beta = diag[i] - lower[i] * c[i - 1];
        if (beta == 0.0 || !std::isfinite(beta)) throw SolveError("singular tridiagonal system");
        c[i] = i + 1 < n ? upper[i] / beta : 0.0;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / beta;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

std::vector<double> solve_periodic_tridiagonal(std::span<const double> lower,
                                               std::span<const double> diag,
                                               std::span<const double> upper,
                                               std::span<const double> rhs)
{
    const std::size_t n = diag.size();
    if (n < 3) throw SolveError("periodic tridiagonal system needs at least 3 rows");
    // A = B + u v^T with u = (gamma, 0, .., 0, upper[n-1]), v = (1, 0, .., 0, lower[0]/gamma)
    const double gamma = -diag[0];
    std::vector<double> bd(diag.begin(), diag.end());
    bd[0] -= gamma;
    bd[n - 1] -= upper[n - 1] * lower[0] / gamma;
    std::vector<double> y = solve_tridiagonal(lower, bd, upper, rhs);
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = upper[n - 1];
    std::vector<double> z = solve_tridiagonal(lower, bd, upper, u);
    const double vy = y[0] + lower[0] / gamma * y[n - 1];
    const double vz = z[0] + lower[0] / gamma * z[n - 1];
    const double denom = 1.0 + vz;
    if (denom == 0.0) throw SolveError("singular periodic tridiagonal system");
    const double f = vy / denom;
    for (std::size_t i = 0; i < n; ++i) y[i] -= f * z[i];
    return y;
}

IterativeResult conjugate_gradient(const CsrMatrix& a, std::span<const double> rhs,
                                   double rel_tol, int max_iter)
{
    const std::size_t n = a.rows;
    const std::vector<double> diag = a.diagonal();
    IterativeResult res;
    res.x.assign(n, 0.0);
    std::vector<double> r(rhs.begin(), rhs.end()), z(n), p(n), q(n);
    const double bnorm = norm(rhs);
    if (bnorm == 0.0) return res;
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_iter; ++it) {
        a.multiply(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0)) throw SolveError("conjugate gradient: matrix not positive definite");
        const double alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            res.x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        res.iterations = it;
        res.relative_residual = norm(r) / bnorm;
        if (res.relative_residual < rel_tol) return res;
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolveError("conjugate gradient did not converge");
}

IterativeResult bicgstab(const CsrMatrix& a, std::span<const double> rhs, double rel_tol,
                         int max_iter)
{
    const std::size_t n = a.rows;
    const std::vector<double> diag = a.diagonal();
    IterativeResult res;
    res.x.assign(n, 0.0);
    const double bnorm = norm(rhs);
    if (bnorm == 0.0) return res;
    std::vector<double> r(rhs.begin(), rhs.end()), r0 = r, p(n, 0.0), v(n, 0.0), s(n), t(n),
        phat(n), shat(n);
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    for (int it = 1; it <= max_iter; ++it) {
        const double rho_new = dot(r0, r);
        if (rho_new == 0.0) throw SolveError("bicgstab breakdown");
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        for (std::size_t i = 0; i < n; ++i) phat[i] = p[i] / diag[i];
        a.multiply(phat, v);
        alpha = rho / dot(r0, v);
        for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        res.iterations = it;
        if (norm(s) / bnorm < rel_tol) {
            for (std::size_t i = 0; i < n; ++i) res.x[i] += alpha * phat[i];
            res.relative_residual = norm(s) / bnorm;
            return res;
        }
        for (std::size_t i = 0; i < n; ++i) shat[i] = s[i] / diag[i];
        a.multiply(shat, t);
        omega = dot(t, s) / dot(t, t);
        for (std::size_t i = 0; i < n; ++i) {
            res.x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        res.relative_residual = norm(r) / bnorm;
        if (res.relative_residual < rel_tol) return res;
        if (omega == 0.0) throw SolveError("bicgstab stagnated");
    }
    throw SolveError("bicgstab did not converge");
}

}  // namespace fde::linalg
