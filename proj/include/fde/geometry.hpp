#ifndef FDE_GEOMETRY_HPP
#define FDE_GEOMETRY_HPP

/**
 * @file geometry.hpp
 * @brief Grids on the periodic cylinder and the axisymmetric sphere, and the
 *        finite-volume Laplace-Beltrami operator with drift.
 *
 * Node layout for tensor grids is rho-major: index = i_rho * n_theta + j_theta.
 * Polar nodes sit at cell centers theta_j = (j + 1/2) pi / N, so cot(theta) is
 * never evaluated at a pole. Every quadrature weight is the exact volume of
 * the node's cell, which makes constants integrate to the manifold volume
 * exactly and gives the correct divergence at the pole cells.
 */

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

#include "fde/constants.hpp"
#include "fde/linalg.hpp"

namespace fde {

/// Nodal values of a scalar function on a Grid.
using Field = std::vector<double>;

enum class GridKind { PeriodicLine, PolarArc, TensorProduct };

std::string to_string(GridKind k);

struct Resolution {
    int n_rho = 0;
    int n_theta = 0;
};

inline constexpr int kMinResolution = 16;

struct Grid {
    GridKind kind = GridKind::PolarArc;
    int n = 4;            ///< ambient dimension; the sphere factor is S^{n-1}
    double ell = 0.0;
    int n_rho = 1;
    int n_theta = 1;
    double d_rho = 0.0;
    double d_theta = 0.0;
    std::vector<double> rho;      ///< n_rho entries (a single 0 for PolarArc)
    std::vector<double> theta;    ///< n_theta entries (a single 0 for PeriodicLine)
    std::vector<double> weights;  ///< cell volumes, one per node
    double total_volume = 0.0;

    std::size_t size() const { return weights.size(); }
    std::size_t index(int i_rho, int j_theta) const
    {
        return static_cast<std::size_t>(i_rho) * static_cast<std::size_t>(n_theta) +
               static_cast<std::size_t>(j_theta);
    }
    double rho_at(std::size_t k) const { return rho[k / static_cast<std::size_t>(n_theta)]; }
    double theta_at(std::size_t k) const { return theta[k % static_cast<std::size_t>(n_theta)]; }
    bool has_rho() const { return kind != GridKind::PolarArc; }
    bool has_theta() const { return kind != GridKind::PeriodicLine; }
};

Grid make_periodic_line(int n, double ell, int n_rho);
Grid make_polar_arc(int n, int n_theta);
Grid make_tensor_grid(int n, double ell, int n_rho, int n_theta);

/// Grid matching the geometry of spec; unused axes of resolution are ignored.
Grid build_grid(const ProblemSpec& spec, Resolution resolution);

nlohmann::json to_json(const Grid& grid);
Grid grid_from_json(const nlohmann::json& j);

/// Quadrature of a nodal field over the manifold.
double integrate(const Grid& grid, std::span<const double> field);

/// Samples f(rho, theta) at every node.
template <class F>
Field sample(const Grid& grid, F&& f)
{
    Field out(grid.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = f(grid.rho_at(k), grid.theta_at(k));
    return out;
}

enum class DriftScheme { Central, Upwind };

/// Conductance between two neighbouring cells; the discrete Laplacian is
/// (Lap v)_i = (1 / w_i) sum_faces c_f (v_j - v_i).
struct Face {
    std::size_t i = 0;
    std::size_t j = 0;
    double conductance = 0.0;
};

enum class OperatorStructure { Tridiagonal, PeriodicTridiagonal, Sparse };

/**
 * @brief Discrete Laplace-Beltrami operator plus drift a d/drho and zeroth
 *        order term b. Immutable after assembly.
 */
class DiscreteOperator {
public:
    DiscreteOperator(std::shared_ptr<const Grid> grid, double a, double b,
                     DriftScheme drift = DriftScheme::Central);

    const Grid& grid() const { return *grid_; }
    std::shared_ptr<const Grid> grid_ptr() const { return grid_; }
    double a() const { return a_; }
    double b() const { return b_; }
    OperatorStructure structure() const { return structure_; }
    const std::vector<Face>& faces() const { return faces_; }

    /// out = Lap v + a v_rho + b v
    void apply(std::span<const double> v, std::span<double> out) const;
    Field apply(std::span<const double> v) const;

    /// Pure Laplacian part.
    Field laplacian(std::span<const double> v) const;

    /// sum_f c_f (v_i - v_j)^2, the discrete integral of |grad v|^2.
    double dirichlet_energy(std::span<const double> v) const;

    /// Matrix of the full operator acting on nodal values.
    const linalg::CsrMatrix& matrix() const { return matrix_; }

    /**
     * @brief Solves (diag(shift) - A) x = rhs where A is this operator.
     *
     * 1D structures use a direct (periodic) tridiagonal solve. Tensor grids use
     * CG on the weight-symmetrized system when a = 0 and BiCGSTAB otherwise.
     */
    Field solve_shifted(std::span<const double> shift, std::span<const double> rhs) const;

private:
    std::shared_ptr<const Grid> grid_;
    double a_;
    double b_;
    DriftScheme drift_;
    OperatorStructure structure_;
    std::vector<Face> faces_;
    linalg::CsrMatrix matrix_;
};

}  // namespace fde

#endif  // FDE_GEOMETRY_HPP
