#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace ddmr {

using NodalVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Structured triangulation of the unit square.
///
/// Node (i, j) sits at (i/n, j/n) and has index j*(n+1) + i. Cell (i, j) is
/// the square [i/n, (i+1)/n] x [j/n, (j+1)/n] with index j*n + i and owns
/// triangles 2c and 2c+1. Diagonals alternate with the parity of i+j
/// (criss-cross pattern), so every block partition with S | n is embedded.
struct Mesh
{
  int n = 0;
  double h = 0.0;
  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> boundary_nodes;
  std::vector<char> is_boundary;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  int num_cells() const { return n * n; }
  int node_index(int i, int j) const { return j * (n + 1) + i; }
  static int cell_of_triangle(int t) { return t / 2; }
};

/// Rejects n < 2 and n not a power of two.
Mesh build_mesh(int n);

/// Piecewise-constant field, one value per triangle.
struct CellField
{
  Eigen::VectorXd values;
};

/// Piecewise-constant velocity, one (b1, b2) pair per triangle.
struct VelocityField
{
  Eigen::VectorXd bx;
  Eigen::VectorXd by;
};

struct DirichletData
{
  std::vector<char> fixed;  // per node
  Eigen::VectorXd values;   // per node, zero where not fixed
};

/// Assembled system before boundary elimination. A and f cover all J nodes;
/// rows of Dirichlet nodes are kept so that local/global consistency can be
/// checked entrywise.
struct FemSystem
{
  SparseMatrix A;
  Eigen::VectorXd f;
  DirichletData dirichlet;
  bool symmetric = false;
};

enum class ProblemKind { diffusion, convection };

struct ElementGeometry
{
  double area = 0.0;
  double diameter = 0.0;
  Eigen::Matrix<double, 3, 2> grad;  // gradients of the barycentric basis
};

struct ElementSystem
{
  Eigen::Matrix3d K;  // K(i, j) = form(phi_j, phi_i)
  Eigen::Vector3d f;
};

ElementGeometry element_geometry(const Mesh& mesh, int t);

ElementSystem diffusion_element(const ElementGeometry& g, double a, double forcing);

/// SUPG stabilization parameter: h/(2|b|) scaled by `scale` when the local
/// Peclet number |b| h / (2 eps) exceeds one, zero otherwise.
double supg_delta(double bnorm, double diameter, double eps, double scale);

/// Galerkin convection-diffusion element plus the streamline term. P1 shape
/// functions have zero Laplacian inside a triangle, so the -eps*Lap(u) part of
/// the residual vanishes.
ElementSystem supg_element(const ElementGeometry& g, double bx, double by, double eps,
                           double forcing, double delta_scale);

/// Maps a scalar random field eta to PDE coefficients:
///   diffusion:  a = exp(field_scale * eta)
///   convection: b = (cos(field_scale * eta), sin(field_scale * eta))
struct PdeForm
{
  ProblemKind kind = ProblemKind::diffusion;
  double eps = 1.0;
  double forcing = 100.0;
  double field_scale = 0.2;
  double supg_scale = 1.0;

  ElementSystem element(const ElementGeometry& g, double eta) const;
  bool symmetric() const { return kind == ProblemKind::diffusion; }
};

/// Inflow part of the convection boundary: {x1 = 0, x2 <= 1/2} U {x2 = 0}.
bool convection_inflow(const Eigen::Vector2d& x);

DirichletData dirichlet_data(const Mesh& mesh, ProblemKind kind);

DirichletData dirichlet_data(const Mesh& mesh,
                             const std::function<bool(const Eigen::Vector2d&)>& inflow);

/// Expands one value per cell into one value per triangle.
CellField triangle_field_from_cells(const Mesh& mesh, const Eigen::VectorXd& cell_values);

FemSystem assemble(const Mesh& mesh, const PdeForm& form, const CellField& eta);

/// Homogeneous Dirichlet data; throws ConfigError naming the first triangle
/// with a nonpositive coefficient.
FemSystem assemble_diffusion(const Mesh& mesh, const CellField& a, double f_const);

FemSystem assemble_supg(const Mesh& mesh, const VelocityField& b, double eps, double f_const,
                        const std::function<bool(const Eigen::Vector2d&)>& inflow,
                        double delta_scale = 1.0);

/// Direct solver for the eliminated system; the symbolic analysis is reused
/// across systems that share the mesh.
class FullSolver
{
public:
  explicit FullSolver(const Mesh& mesh);
  explicit FullSolver(const std::vector<char>& fixed);
  ~FullSolver();
  FullSolver(const FullSolver&) = delete;
  FullSolver& operator=(const FullSolver&) = delete;

  NodalVector solve(const FemSystem& sys);

  /// Seconds spent in the most recent factorization + solve.
  double last_solve_seconds() const { return last_seconds_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double last_seconds_ = 0.0;
};

/// Eliminates Dirichlet rows/columns, solves, and re-imposes the boundary
/// values. Throws SolverError with the residual norm on failure.
NodalVector solve_full(const FemSystem& sys);

} // namespace ddmr
