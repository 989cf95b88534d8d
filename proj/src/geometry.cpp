#include "fde/geometry.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

namespace fde {

namespace {

void check_resolution(int count, const char* axis)
{
    if (count < kMinResolution)
        throw DomainError(std::string("resolution along ") + axis + " must be at least " +
                          std::to_string(kMinResolution));
}

// Exact cell volumes |S^{n-2}| * int sin^{n-2} over each polar cell.
std::vector<double> polar_cell_volumes(int n, int n_theta, double d_theta)
{
    const double s = sphere_area(n - 2);
    std::vector<double> w(static_cast<std::size_t>(n_theta));
    for (int j = 0; j < n_theta; ++j) {
        const double lo = j * d_theta;
        const double hi = (j + 1) * d_theta;
        w[static_cast<std::size_t>(j)] =
            s * boost::math::quadrature::gauss<double, 15>::integrate(
                    [n](double t) { return std::pow(std::sin(t), n - 2); }, lo, hi);
    }
    return w;
}

double polar_face_conductance(int n, double theta_face, double d_theta)
{
    return sphere_area(n - 2) * std::pow(std::sin(theta_face), n - 2) / d_theta;
}

}  // namespace

std::string to_string(GridKind k)
{
    switch (k) {
    case GridKind::PeriodicLine: return "periodic_line";
    case GridKind::PolarArc: return "polar_arc";
    case GridKind::TensorProduct: return "tensor_product";
    }
    return "unknown";
}

Grid make_periodic_line(int n, double ell, int n_rho)
{
    if (n < 3) throw DomainError("n must be at least 3");
    if (!(ell > 0.0)) throw DomainError("ell must be positive");
    check_resolution(n_rho, "rho");
    Grid g;
    g.kind = GridKind::PeriodicLine;
    g.n = n;
    g.ell = ell;
    g.n_rho = n_rho;
    g.n_theta = 1;
    g.d_rho = ell / n_rho;
    g.rho.resize(static_cast<std::size_t>(n_rho));
    for (int i = 0; i < n_rho; ++i) g.rho[static_cast<std::size_t>(i)] = i * g.d_rho;
    g.theta = {0.0};
    const double area = sphere_area(n - 1);
    g.weights.assign(static_cast<std::size_t>(n_rho), g.d_rho * area);
    g.total_volume = ell * area;
    return g;
}

Grid make_polar_arc(int n, int n_theta)
{
    if (n < 3) throw DomainError("n must be at least 3");
    check_resolution(n_theta, "theta");
    Grid g;
    g.kind = GridKind::PolarArc;
    g.n = n;
    g.n_rho = 1;
    g.n_theta = n_theta;
    g.d_theta = std::numbers::pi / n_theta;
    g.rho = {0.0};
    g.theta.resize(static_cast<std::size_t>(n_theta));
    for (int j = 0; j < n_theta; ++j) g.theta[static_cast<std::size_t>(j)] = (j + 0.5) * g.d_theta;
    g.weights = polar_cell_volumes(n, n_theta, g.d_theta);
    g.total_volume = sphere_area(n - 1);
    return g;
}

Grid make_tensor_grid(int n, double ell, int n_rho, int n_theta)
{
    Grid line = make_periodic_line(n, ell, n_rho);
    Grid arc = make_polar_arc(n, n_theta);
    Grid g;
    g.kind = GridKind::TensorProduct;
    g.n = n;
    g.ell = ell;
    g.n_rho = n_rho;
    g.n_theta = n_theta;
    g.d_rho = line.d_rho;
    g.d_theta = arc.d_theta;
    g.rho = line.rho;
    g.theta = arc.theta;
    g.weights.resize(static_cast<std::size_t>(n_rho) * static_cast<std::size_t>(n_theta));
    for (int i = 0; i < n_rho; ++i)
        for (int j = 0; j < n_theta; ++j)
            g.weights[g.index(i, j)] = g.d_rho * arc.weights[static_cast<std::size_t>(j)];
    g.total_volume = ell * arc.total_volume;
    return g;
}

Grid build_grid(const ProblemSpec& spec, Resolution resolution)
{
    switch (spec.geometry) {
    case Geometry::CylinderRho: return make_periodic_line(spec.n, spec.ell, resolution.n_rho);
    case Geometry::SphereAxisym: return make_polar_arc(spec.n, resolution.n_theta);
    case Geometry::CylinderFull:
        return make_tensor_grid(spec.n, spec.ell, resolution.n_rho, resolution.n_theta);
    }
    throw DomainError("unknown geometry");
}

nlohmann::json to_json(const Grid& grid)
{
    nlohmann::json j;
    j["kind"] = to_string(grid.kind);
    j["n"] = grid.n;
    if (grid.has_rho()) {
        j["ell"] = grid.ell;
        j["n_rho"] = grid.n_rho;
    }
    if (grid.has_theta()) j["n_theta"] = grid.n_theta;
    j["total_volume"] = grid.total_volume;
    return j;
}

Grid grid_from_json(const nlohmann::json& j)
{
    const std::string kind = j.at("kind").get<std::string>();
    const int n = j.at("n").get<int>();
    if (kind == "periodic_line")
        return make_periodic_line(n, j.at("ell").get<double>(), j.at("n_rho").get<int>());
    if (kind == "polar_arc") return make_polar_arc(n, j.at("n_theta").get<int>());
    if (kind == "tensor_product")
        return make_tensor_grid(n, j.at("ell").get<double>(), j.at("n_rho").get<int>(),
                                j.at("n_theta").get<int>());
    throw DomainError("unknown grid kind '" + kind + "'");
}

double integrate(const Grid& grid, std::span<const double> field)
{
    if (field.size() != grid.size())
        throw DomainError("field size " + std::to_string(field.size()) +
                          " does not match grid size " + std::to_string(grid.size()));
    double s = 0.0;
    for (std::size_t k = 0; k < field.size(); ++k) s += grid.weights[k] * field[k];
    return s;
}

DiscreteOperator::DiscreteOperator(std::shared_ptr<const Grid> grid, double a, double b,
                                   DriftScheme drift)
    : grid_(std::move(grid)), a_(a), b_(b), drift_(drift)
{
    const Grid& g = *grid_;
    if (g.size() == 0) throw DomainError("empty grid");
    switch (g.kind) {
    case GridKind::PeriodicLine: structure_ = OperatorStructure::PeriodicTridiagonal; break;
    case GridKind::PolarArc: structure_ = OperatorStructure::Tridiagonal; break;
    case GridKind::TensorProduct: structure_ = OperatorStructure::Sparse; break;
    }

    if (g.has_rho()) {
        for (int j = 0; j < g.n_theta; ++j) {
            const double w_theta = g.weights[g.index(0, j)] / g.d_rho;
            for (int i = 0; i < g.n_rho; ++i) {
                const int ip = (i + 1) % g.n_rho;
                faces_.push_back({g.index(i, j), g.index(ip, j), w_theta / g.d_rho});
            }
        }
    }
    if (g.has_theta()) {
        const double rho_len = g.has_rho() ? g.d_rho : 1.0;
        for (int i = 0; i < g.n_rho; ++i)
            for (int j = 0; j + 1 < g.n_theta; ++j) {
                const double c = rho_len * polar_face_conductance(g.n, (j + 1) * g.d_theta, g.d_theta);
                faces_.push_back({g.index(i, j), g.index(i, j + 1), c});
            }
    }

    std::vector<std::map<std::size_t, double>> rows(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) rows[k][k] += b_;
    for (const Face& f : faces_) {
        rows[f.i][f.j] += f.conductance / g.weights[f.i];
        rows[f.i][f.i] -= f.conductance / g.weights[f.i];
        rows[f.j][f.i] += f.conductance / g.weights[f.j];
        rows[f.j][f.j] -= f.conductance / g.weights[f.j];
    }
    if (g.has_rho() && a_ != 0.0) {
        for (int i = 0; i < g.n_rho; ++i)
            for (int j = 0; j < g.n_theta; ++j) {
                const std::size_t k = g.index(i, j);
                const std::size_t kp = g.index((i + 1) % g.n_rho, j);
                const std::size_t km = g.index((i + g.n_rho - 1) % g.n_rho, j);
                if (drift_ == DriftScheme::Central) {
                    rows[k][kp] += a_ / (2.0 * g.d_rho);
                    rows[k][km] -= a_ / (2.0 * g.d_rho);
                } else if (a_ > 0.0) {
                    rows[k][kp] += a_ / g.d_rho;
                    rows[k][k] -= a_ / g.d_rho;
                } else {
                    rows[k][k] += a_ / g.d_rho;
                    rows[k][km] -= a_ / g.d_rho;
                }
            }
    }
    matrix_.rows = g.size();
    matrix_.row_start.assign(g.size() + 1, 0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        for (const auto& [c, v] : rows[k]) {
            matrix_.col.push_back(c);
            matrix_.val.push_back(v);
        }
        matrix_.row_start[k + 1] = matrix_.col.size();
    }
}

void DiscreteOperator::apply(std::span<const double> v, std::span<double> out) const
{
    if (v.size() != grid_->size() || out.size() != grid_->size())
        throw DomainError("field size does not match operator");
    matrix_.multiply(v, out);
}

Field DiscreteOperator::apply(std::span<const double> v) const
{
    Field out(v.size());
    apply(v, out);
    return out;
}

Field DiscreteOperator::laplacian(std::span<const double> v) const
{
    if (v.size() != grid_->size()) throw DomainError("field size does not match operator");
    Field out(v.size(), 0.0);
    for (const Face& f : faces_) {
        const double flux = f.conductance * (v[f.j] - v[f.i]);
        out[f.i] += flux;
        out[f.j] -= flux;
    }
    for (std::size_t k = 0; k < out.size(); ++k) out[k] /= grid_->weights[k];
    return out;
}

double DiscreteOperator::dirichlet_energy(std::span<const double> v) const
{
    if (v.size() != grid_->size()) throw DomainError("field size does not match operator");
    double s = 0.0;
    for (const Face& f : faces_) {
        const double d = v[f.j] - v[f.i];
        s += f.conductance * d * d;
    }
    return s;
}

Field DiscreteOperator::solve_shifted(std::span<const double> shift,
                                      std::span<const double> rhs) const
{
    const std::size_t n = grid_->size();
    if (shift.size() != n || rhs.size() != n) throw DomainError("size mismatch in solve");
    const linalg::CsrMatrix& m = matrix_;

    if (structure_ != OperatorStructure::Sparse) {
        std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = m.row_start[i]; k < m.row_start[i + 1]; ++k) {
                const std::size_t c = m.col[k];
                const double v = -m.val[k];
                if (c == i) diag[i] += v;
                else if (c == (i + 1) % n) upper[i] += v;
                else if (c == (i + n - 1) % n) lower[i] += v;
                else throw linalg::SolveError("operator is not tridiagonal");
            }
            diag[i] += shift[i];
        }
        if (structure_ == OperatorStructure::Tridiagonal)
            return linalg::solve_tridiagonal(lower, diag, upper, rhs);
        return linalg::solve_periodic_tridiagonal(lower, diag, upper, rhs);
    }

    linalg::CsrMatrix sys = m;
    const bool symmetric = a_ == 0.0;
    std::vector<double> b(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < n; ++i) {
        const double scale = symmetric ? grid_->weights[i] : 1.0;
        for (std::size_t k = sys.row_start[i]; k < sys.row_start[i + 1]; ++k) {
            sys.val[k] = -sys.val[k];
            if (sys.col[k] == i) sys.val[k] += shift[i];
            sys.val[k] *= scale;
        }
        b[i] *= scale;
    }
    const int max_iter = static_cast<int>(10 * n + 100);
    auto res = symmetric ? linalg::conjugate_gradient(sys, b, 1e-13, max_iter)
                         : linalg::bicgstab(sys, b, 1e-13, max_iter);
    return res.x;
}

}  // namespace fde
