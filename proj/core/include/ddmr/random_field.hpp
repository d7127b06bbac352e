#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "ddmr/mesh_fem.hpp"
#include "ddmr/partition.hpp"

namespace ddmr {

using Rng = std::mt19937_64;

/// Independent, reproducible stream for (seed, stream, index). Streams are
/// keyed by index rather than drawn sequentially so parallel loops produce the
/// same numbers regardless of scheduling.
Rng rng_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

Eigen::VectorXd standard_normal(Rng& rng, int size);

/// Uniform rectangle of nx x ny cells; cell (i, j) has index j*nx + i.
struct CellGrid
{
  int nx = 0;
  int ny = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  double dx = 0.0;
  double dy = 0.0;

  int num_cells() const { return nx * ny; }
  double cell_area() const { return dx * dy; }
  Eigen::Vector2d centroid(int c) const;
  /// Cell containing x; points on the far edges map to the last cell.
  int cell_at(const Eigen::Vector2d& x) const;
};

/// Cell grid of the mesh squares, n x n over the unit square.
CellGrid mesh_cell_grid(const Mesh& mesh);

/// Cell grid of one subdomain block, in global coordinates.
CellGrid subdomain_cell_grid(const Mesh& mesh, const DomainPartition& partition, int s);

/// Truncated Karhunen-Loeve basis of the Gaussian kernel exp(-|x-x'|^2/L^2)
/// discretized on piecewise constants over a cell grid.
///
/// modes(:, k) is L2-orthonormal under the cell-area inner product, and
/// eta(c) = sum_k sqrt(lambdas[k]) * modes(c, k) * y_k.
struct KLBasis
{
  CellGrid grid;
  double corr_length = 0.0;
  Eigen::VectorXd lambdas;  // descending, >= 0
  Eigen::MatrixXd modes;    // cells x N
  double total_variance = 0.0;  // sum of every discrete eigenvalue

  // Tensor-product factorization (empty for the dense path):
  // modes(j*nx + i, k) = factor_x(i, pairs[k][0]) * factor_y(j, pairs[k][1]) / sqrt(dx*dy)
  Eigen::MatrixXd factor_x;
  Eigen::MatrixXd factor_y;
  std::vector<std::array<int, 2>> pairs;

  int size() const { return static_cast<int>(lambdas.size()); }

  /// Sum of the discrete eigenvalues beyond the first `count`.
  double tail(int count) const;

  /// Cell values of the truncated expansion for coefficient vector y.
  Eigen::VectorXd field(const Eigen::VectorXd& y) const;

  KLBasis truncated(int count) const;
};

/// Separable eigen-decomposition on a rectangular grid. Equal cell areas make
/// the weighted kernel matrix a Kronecker product of two 1D matrices, so the
/// top-N pairs are products of 1D eigenpairs.
KLBasis kl_decompose(const CellGrid& grid, double corr_length, int count);

/// Dense Galerkin eigen-decomposition for arbitrary cells (centroids, areas).
/// O(cells^3); used for small grids and as a cross-check.
KLBasis kl_decompose_dense(const std::vector<Eigen::Vector2d>& centroids,
                           const Eigen::VectorXd& areas, double corr_length, int count);

/// Rebuilds modes from the tensor factors after deserialization.
void rebuild_modes(KLBasis& kl);

/// Draws y ~ N(0, I_N) and returns (y, cell values of the expansion).
std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_global(const KLBasis& kl, Rng& rng);

/// Least-squares map from global KL coefficients to the local coefficients of
/// one subdomain, using T fixed sample points.
struct LocalProjector
{
  Eigen::MatrixXd points;         // T x 2
  Eigen::MatrixXd global_values;  // T x N,  sqrt(lambda_n) xi_n(x_i)
  Eigen::MatrixXd local_values;   // T x Ns, sqrt(lambda_{s,n}) xi_{s,n}(x_i)
  Eigen::MatrixXd normal_matrix;  // Ns x Ns

  int num_points() const { return static_cast<int>(points.rows()); }
  int local_dim() const { return static_cast<int>(local_values.cols()); }
  int global_dim() const { return static_cast<int>(global_values.cols()); }

  /// Solves (Xi^T Xi) y_s = Xi^T eta_N at the sample points.
  Eigen::VectorXd project(const Eigen::VectorXd& y) const;

  LocalProjector truncated(int local_dim) const;

  /// Recomputes the cached factorization; throws if the normal matrix is singular.
  void factorize();

private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// Default sample count max(10 * Ns, 50).
int default_projection_points(int local_dim);

/// Draws T uniform points inside the subdomain block and tabulates both
/// expansions there. `local` is defined on a grid starting at the origin
/// and is shifted to the block's corner `block_origin`.
LocalProjector make_projector(const KLBasis& global, const KLBasis& local,
                              const Eigen::Vector2d& block_origin, int points, Rng& rng);

/// One-shot projection (fresh sample points each call).
Eigen::VectorXd project_local(const KLBasis& global, const KLBasis& local,
                              const Eigen::Vector2d& block_origin, const Eigen::VectorXd& y,
                              int points, Rng& rng);

/// Piecewise-constant random field with one value per block of a wx x wy grid.
struct WhiteNoisePartition
{
  int wx = 1;
  int wy = 1;
  double sigma = 1.0;
  std::vector<int> piece_of_triangle;

  int size() const { return wx * wy; }
};

WhiteNoisePartition make_white_noise(const Mesh& mesh, int wx, int wy, double sigma);

/// Field with value y[k] on piece k.
CellField white_noise_field(const WhiteNoisePartition& wn, const Eigen::VectorXd& y);

/// True when every subdomain is exactly one piece with the same index.
bool aligned_with(const WhiteNoisePartition& wn, const DomainPartition& partition);

} // namespace ddmr
