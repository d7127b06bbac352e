#include "ddmr/mesh_fem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "ddmr/error.hpp"

namespace ddmr {

Mesh build_mesh(int n)
{
  if (n < 2 || (n & (n - 1)) != 0) {
    std::ostringstream msg;
    msg << "mesh size n must be a power of two >= 2, got " << n;
    throw ConfigError(msg.str());
  }

  Mesh mesh;
  mesh.n = n;
  mesh.h = 1.0 / n;
  const int side = n + 1;
  mesh.nodes.reserve(static_cast<std::size_t>(side) * side);
  mesh.is_boundary.assign(static_cast<std::size_t>(side) * side, 0);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      mesh.nodes.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
      if (i == 0 || j == 0 || i == n || j == n) {
        const int k = mesh.node_index(i, j);
        mesh.is_boundary[k] = 1;
        mesh.boundary_nodes.push_back(k);
      }
    }
  }

  mesh.triangles.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = mesh.node_index(i, j);
      const int v10 = mesh.node_index(i + 1, j);
      const int v01 = mesh.node_index(i, j + 1);
      const int v11 = mesh.node_index(i + 1, j + 1);
      if ((i + j) % 2 == 0) {
        mesh.triangles.push_back({v00, v10, v11});
        mesh.triangles.push_back({v00, v11, v01});
      } else {
        mesh.triangles.push_back({v00, v10, v01});
        mesh.triangles.push_back({v10, v11, v01});
      }
    }
  }
  return mesh;
}

ElementGeometry element_geometry(const Mesh& mesh, int t)
{
  const auto& tri = mesh.triangles[t];
  const Eigen::Vector2d& p0 = mesh.nodes[tri[0]];
  const Eigen::Vector2d& p1 = mesh.nodes[tri[1]];
  const Eigen::Vector2d& p2 = mesh.nodes[tri[2]];

  const double det = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
  ElementGeometry g;
  g.area = 0.5 * det;
  const double inv = 1.0 / det;
  g.grad(0, 0) = (p1.y() - p2.y()) * inv;
  g.grad(0, 1) = (p2.x() - p1.x()) * inv;
  g.grad(1, 0) = (p2.y() - p0.y()) * inv;
  g.grad(1, 1) = (p0.x() - p2.x()) * inv;
  g.grad(2, 0) = (p0.y() - p1.y()) * inv;
  g.grad(2, 1) = (p1.x() - p0.x()) * inv;
  g.diameter = std::max({(p1 - p0).norm(), (p2 - p1).norm(), (p0 - p2).norm()});
  return g;
}

ElementSystem diffusion_element(const ElementGeometry& g, double a, double forcing)
{
  ElementSystem e;
  e.K.noalias() = (a * g.area) * (g.grad * g.grad.transpose());
  e.f.setConstant(forcing * g.area / 3.0);
  return e;
}

double supg_delta(double bnorm, double diameter, double eps, double scale)
{
  if (bnorm <= 0.0)
    return 0.0;
  const double peclet = bnorm * diameter / (2.0 * eps);
  return peclet > 1.0 ? scale * diameter / (2.0 * bnorm) : 0.0;
}

ElementSystem supg_element(const ElementGeometry& g, double bx, double by, double eps,
                           double forcing, double delta_scale)
{
  // streamline derivative of each basis function: b . grad(phi_i)
  const Eigen::Vector3d bgrad = g.grad.col(0) * bx + g.grad.col(1) * by;

  ElementSystem e;
  e.K.noalias() = (eps * g.area) * (g.grad * g.grad.transpose());
  // (b . grad phi_j, phi_i) = (b . grad phi_j) * area / 3
  e.K += Eigen::Vector3d::Constant(g.area / 3.0) * bgrad.transpose();
  e.f.setConstant(forcing * g.area / 3.0);

  const double delta = supg_delta(std::hypot(bx, by), g.diameter, eps, delta_scale);
  if (delta != 0.0) {
    e.K += (delta * g.area) * (bgrad * bgrad.transpose());
    e.f += (delta * g.area * forcing) * bgrad;
  }
  return e;
}

ElementSystem PdeForm::element(const ElementGeometry& g, double eta) const
{
  const double z = field_scale * eta;
  if (kind == ProblemKind::diffusion)
    return diffusion_element(g, std::exp(z), forcing);
  return supg_element(g, std::cos(z), std::sin(z), eps, forcing, supg_scale);
}

bool convection_inflow(const Eigen::Vector2d& x)
{
  return (x.x() == 0.0 && x.y() <= 0.5) || x.y() == 0.0;
}

DirichletData dirichlet_data(const Mesh& mesh,
                             const std::function<bool(const Eigen::Vector2d&)>& inflow)
{
  DirichletData d;
  d.fixed = mesh.is_boundary;
  d.values = Eigen::VectorXd::Zero(mesh.num_nodes());
  if (inflow) {
    for (int k : mesh.boundary_nodes)
      if (inflow(mesh.nodes[k]))
        d.values[k] = 1.0;
  }
  return d;
}

DirichletData dirichlet_data(const Mesh& mesh, ProblemKind kind)
{
  if (kind == ProblemKind::convection)
    return dirichlet_data(mesh, convection_inflow);
  return dirichlet_data(mesh, nullptr);
}

CellField triangle_field_from_cells(const Mesh& mesh, const Eigen::VectorXd& cell_values)
{
  if (cell_values.size() != mesh.num_cells())
    throw ConfigError("cell field length does not match the mesh cell count");
  CellField field;
  field.values.resize(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    field.values[t] = cell_values[Mesh::cell_of_triangle(t)];
  return field;
}

namespace {

template <class ElementFn>
FemSystem assemble_with(const Mesh& mesh, ElementFn&& element_of, DirichletData dirichlet,
                        bool symmetric)
{
  const int J = mesh.num_nodes();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(9 * static_cast<std::size_t>(mesh.num_triangles()));
  Eigen::VectorXd f = Eigen::VectorXd::Zero(J);

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementSystem e = element_of(t, element_geometry(mesh, t));
    const auto& tri = mesh.triangles[t];
    for (int a = 0; a < 3; ++a) {
      f[tri[a]] += e.f[a];
      for (int b = 0; b < 3; ++b)
        triplets.emplace_back(tri[a], tri[b], e.K(a, b));
    }
  }

  FemSystem sys;
  sys.A.resize(J, J);
  sys.A.setFromTriplets(triplets.begin(), triplets.end());
  sys.f = std::move(f);
  sys.dirichlet = std::move(dirichlet);
  sys.symmetric = symmetric;
  return sys;
}

void check_length(const Mesh& mesh, Eigen::Index len, const char* what)
{
  if (len != mesh.num_triangles()) {
    std::ostringstream msg;
    msg << what << " has " << len << " values, mesh has " << mesh.num_triangles() << " triangles";
    throw ConfigError(msg.str());
  }
}

} // namespace

FemSystem assemble(const Mesh& mesh, const PdeForm& form, const CellField& eta)
{
  check_length(mesh, eta.values.size(), "random field");
  if (form.kind == ProblemKind::convection && !(form.eps > 0.0))
    throw ConfigError("convection-diffusion requires eps > 0");
  return assemble_with(
    mesh, [&](int t, const ElementGeometry& g) { return form.element(g, eta.values[t]); },
    dirichlet_data(mesh, form.kind), form.symmetric());
}

FemSystem assemble_diffusion(const Mesh& mesh, const CellField& a, double f_const)
{
  check_length(mesh, a.values.size(), "diffusion coefficient");
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (!(a.values[t] > 0.0)) {
      std::ostringstream msg;
      msg << "diffusion coefficient must be positive; triangle " << t << " has " << a.values[t];
      throw ConfigError(msg.str());
    }
  }
  return assemble_with(
    mesh, [&](int t, const ElementGeometry& g) { return diffusion_element(g, a.values[t], f_const); },
    dirichlet_data(mesh, nullptr), true);
}

FemSystem assemble_supg(const Mesh& mesh, const VelocityField& b, double eps, double f_const,
                        const std::function<bool(const Eigen::Vector2d&)>& inflow,
                        double delta_scale)
{
  if (!(eps > 0.0))
    throw ConfigError("convection-diffusion requires eps > 0");
  check_length(mesh, b.bx.size(), "velocity x-component");
  check_length(mesh, b.by.size(), "velocity y-component");
  return assemble_with(
    mesh,
    [&](int t, const ElementGeometry& g) {
      return supg_element(g, b.bx[t], b.by[t], eps, f_const, delta_scale);
    },
    dirichlet_data(mesh, inflow), false);
}

struct FullSolver::Impl
{
  std::vector<int> free_of_node;  // -1 for Dirichlet nodes
  std::vector<int> node_of_free;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  bool ldlt_analyzed = false;
  bool lu_analyzed = false;
};

FullSolver::FullSolver(const Mesh& mesh) : FullSolver(mesh.is_boundary) {}

FullSolver::FullSolver(const std::vector<char>& fixed) : impl_(std::make_unique<Impl>())
{
  const int J = static_cast<int>(fixed.size());
  impl_->free_of_node.assign(J, -1);
  for (int k = 0; k < J; ++k) {
    if (!fixed[k]) {
      impl_->free_of_node[k] = static_cast<int>(impl_->node_of_free.size());
      impl_->node_of_free.push_back(k);
    }
  }
}

FullSolver::~FullSolver() = default;

NodalVector FullSolver::solve(const FemSystem& sys)
{
  const auto& free_of = impl_->free_of_node;
  const auto& node_of = impl_->node_of_free;
  const int J = static_cast<int>(free_of.size());
  if (sys.A.rows() != J || sys.f.size() != J)
    throw ConfigError("system size does not match the solver mesh");
  for (int k = 0; k < J; ++k)
    if ((free_of[k] < 0) != static_cast<bool>(sys.dirichlet.fixed[k]))
      throw ConfigError("Dirichlet nodes differ from the solver's elimination pattern");

  const int nf = static_cast<int>(node_of.size());
  NodalVector u = sys.dirichlet.values;
  if (nf == 0)
    return u;

  Eigen::VectorXd rhs(nf);
  for (int i = 0; i < nf; ++i)
    rhs[i] = sys.f[node_of[i]];

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(sys.A.nonZeros());
  for (int col = 0; col < sys.A.outerSize(); ++col) {
    const int fc = free_of[col];
    const double ud = sys.dirichlet.values[col];
    for (SparseMatrix::InnerIterator it(sys.A, col); it; ++it) {
      const int fr = free_of[it.row()];
      if (fr < 0)
        continue;
      if (fc >= 0)
        triplets.emplace_back(fr, fc, it.value());
      else if (ud != 0.0)
        rhs[fr] -= it.value() * ud;
    }
  }
  SparseMatrix Aff(nf, nf);
  Aff.setFromTriplets(triplets.begin(), triplets.end());

  const auto start = std::chrono::steady_clock::now();
  Eigen::VectorXd x;
  bool ok = false;
  if (sys.symmetric) {
    if (!impl_->ldlt_analyzed) {
      impl_->ldlt.analyzePattern(Aff);
      impl_->ldlt_analyzed = true;
    }
    impl_->ldlt.factorize(Aff);
    if (impl_->ldlt.info() == Eigen::Success) {
      x = impl_->ldlt.solve(rhs);
      ok = impl_->ldlt.info() == Eigen::Success;
    }
  } else {
    if (!impl_->lu_analyzed) {
      impl_->lu.analyzePattern(Aff);
      impl_->lu_analyzed = true;
    }
    impl_->lu.factorize(Aff);
    if (impl_->lu.info() == Eigen::Success) {
      x = impl_->lu.solve(rhs);
      ok = impl_->lu.info() == Eigen::Success;
    }
  }
  last_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const double rhs_norm = rhs.norm();
  const double residual = ok ? (Aff * x - rhs).norm() : std::numeric_limits<double>::infinity();
  const double scale = rhs_norm > 0.0 ? rhs_norm : 1.0;
  if (!ok || !std::isfinite(residual) || residual > 1e-8 * scale) {
    std::ostringstream msg;
    msg << "full FE solve failed, residual norm " << residual << " (rhs norm " << rhs_norm << ")";
    throw SolverError(msg.str());
  }

  for (int i = 0; i < nf; ++i)
    u[node_of[i]] = x[i];
  return u;
}

NodalVector solve_full(const FemSystem& sys)
{
  FullSolver solver(sys.dirichlet.fixed);
  return solver.solve(sys);
}

} // namespace ddmr
