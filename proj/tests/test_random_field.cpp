#include <cmath>

#include <gtest/gtest.h>

#include "ddmr/error.hpp"
#include "ddmr/random_field.hpp"

using namespace ddmr;

namespace {

CellGrid unit_grid(int n)
{
  return {n, n, 0.0, 0.0, 1.0 / n, 1.0 / n};
}

std::vector<Eigen::Vector2d> centroids(const CellGrid& g)
{
  std::vector<Eigen::Vector2d> out;
  for (int c = 0; c < g.num_cells(); ++c) out.push_back(g.centroid(c));
  return out;
}

double kernel(const Eigen::Vector2d& a, const Eigen::Vector2d& b, double L)
{
  return std::exp(-(a - b).squaredNorm() / (L * L));
}

double l2_sq(const CellGrid& g, const Eigen::VectorXd& v)
{
  return g.cell_area() * v.squaredNorm();
}

} // namespace

TEST(KL, LongCorrelationIsRankOne)
{
  auto kl = kl_decompose(unit_grid(16), 1e6, 4);
  EXPECT_NEAR(kl.lambdas[0], 1.0, 1e-9);
  EXPECT_LT(kl.lambdas.tail(3).maxCoeff(), 1e-9);
  EXPECT_NEAR(kl.modes.col(0).minCoeff(), 1.0, 1e-6);
}

TEST(KL, EigenvaluesDescendAndSumToArea)
{
  auto kl = kl_decompose(unit_grid(32), 0.25, 50);
  for (int k = 1; k < kl.size(); ++k) EXPECT_LE(kl.lambdas[k], kl.lambdas[k - 1]);
  EXPECT_NEAR(kl.total_variance, 1.0, 1e-12);
  EXPECT_GT(kl.lambdas.minCoeff(), 0.0);
}

TEST(KL, SeparableMatchesDenseOracle)
{
  const CellGrid grid = unit_grid(16);
  const int count = 40;
  auto sep = kl_decompose(grid, 0.25, count);
  auto dense = kl_decompose_dense(centroids(grid), Eigen::VectorXd::Constant(grid.num_cells(), grid.cell_area()),
                                  0.25, count + 1);
  for (int k = 0; k < count; ++k)
    EXPECT_NEAR(sep.lambdas[k], dense.lambdas[k], 1e-12) << k;
  EXPECT_NEAR(sep.total_variance, dense.total_variance, 1e-12);

  // Compare spectral projectors at every gap so degenerate pairs do not matter.
  for (int m = 1; m <= count; ++m) {
    if (dense.lambdas[m - 1] - dense.lambdas[m] < 1e-8 * dense.lambdas[0]) continue;
    Eigen::MatrixXd ps = sep.modes.leftCols(m) * sep.modes.leftCols(m).transpose();
    Eigen::MatrixXd pd = dense.modes.leftCols(m) * dense.modes.leftCols(m).transpose();
    EXPECT_LT((ps - pd).norm() / pd.norm(), 1e-8) << m;
  }
}

TEST(KL, ModesAreOrthonormalInL2)
{
  const CellGrid grid = unit_grid(32);
  auto kl = kl_decompose(grid, 0.25, 30);
  Eigen::MatrixXd gram = grid.cell_area() * kl.modes.transpose() * kl.modes;
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(30, 30)).norm(), 1e-10);
}

TEST(KL, FullExpansionReproducesKernel)
{
  const CellGrid grid = unit_grid(12);
  const int all = grid.num_cells();
  auto kl = kl_decompose(grid, 0.3, all);
  Eigen::MatrixXd cov = kl.modes * kl.lambdas.asDiagonal() * kl.modes.transpose();
  for (int i = 0; i < all; i += 7)
    for (int j = 0; j < all; j += 5)
      EXPECT_NEAR(cov(i, j), kernel(grid.centroid(i), grid.centroid(j), 0.3), 1e-9);
}

TEST(KL, SampleCovarianceMatchesKernel)
{
  const CellGrid grid = unit_grid(16);
  auto kl = kl_decompose(grid, 0.25, grid.num_cells());
  const int samples = 4000;
  const int a = 0, b = 17, c = 200;
  double vaa = 0, vab = 0, vac = 0;
  for (int k = 0; k < samples; ++k) {
    Rng rng = rng_stream(11, 0, k);
    auto [y, eta] = sample_global(kl, rng);
    vaa += eta[a] * eta[a];
    vab += eta[a] * eta[b];
    vac += eta[a] * eta[c];
  }
  EXPECT_NEAR(vaa / samples, 1.0, 0.08);
  EXPECT_NEAR(vab / samples, kernel(grid.centroid(a), grid.centroid(b), 0.25), 0.08);
  EXPECT_NEAR(vac / samples, kernel(grid.centroid(a), grid.centroid(c), 0.25), 0.08);
}

TEST(KL, TailMatchesTruncationError)
{
  const CellGrid grid = unit_grid(16);
  auto full = kl_decompose(grid, 0.25, grid.num_cells());
  const int N = 8;
  double err = 0.0;
  const int samples = 2000;
  for (int k = 0; k < samples; ++k) {
    Rng rng = rng_stream(3, 0, k);
    auto [y, eta] = sample_global(full, rng);
    Eigen::VectorXd head = full.truncated(N).field(y.head(N));
    err += l2_sq(grid, eta - head);
  }
  err /= samples;
  EXPECT_NEAR(err, full.tail(N), 0.05 * full.tail(N));
}

TEST(KL, LocalDecaysFasterThanGlobal)
{
  auto global = kl_decompose(unit_grid(64), 0.25, 10);
  auto local = kl_decompose(CellGrid{8, 8, 0.0, 0.0, 1.0 / 64, 1.0 / 64}, 0.25, 10);
  EXPECT_NEAR(local.total_variance, 1.0 / 64, 1e-12);
  for (int k = 1; k <= 5; ++k)
    EXPECT_LT(local.lambdas[k] / local.lambdas[0], global.lambdas[k] / global.lambdas[0]) << k;
}

TEST(KL, RejectsBadRequests)
{
  EXPECT_THROW(kl_decompose(unit_grid(4), 0.0, 3), ConfigError);
  EXPECT_THROW(kl_decompose(unit_grid(4), 0.25, 17), ConfigError);
  EXPECT_THROW(kl_decompose(unit_grid(4), 0.25, 0), ConfigError);
  auto kl = kl_decompose(unit_grid(4), 0.25, 3);
  EXPECT_THROW(kl.field(Eigen::VectorXd::Zero(2)), ConfigError);
  EXPECT_THROW(kl.truncated(4), ConfigError);
}

TEST(KL, RebuildModesRoundTrips)
{
  auto kl = kl_decompose(unit_grid(16), 0.25, 12);
  KLBasis copy = kl;
  copy.modes.resize(0, 0);
  rebuild_modes(copy);
  EXPECT_EQ(copy.modes, kl.modes);
}

TEST(Projection, ExactWhenLocalIsGlobal)
{
  auto global = kl_decompose(unit_grid(16), 0.25, 20);
  auto local = global.truncated(6);
  Rng rng = rng_stream(1, 1, 0);
  auto proj = make_projector(global, local, {0.0, 0.0}, 80, rng);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(20);
  y.head(6) << 0.3, -1.2, 0.7, 2.0, -0.4, 1.1;
  EXPECT_LT((proj.project(y) - y.head(6)).norm(), 1e-10);
}

TEST(Projection, IsLinear)
{
  const CellGrid grid = unit_grid(32);
  auto global = kl_decompose(grid, 0.25, 30);
  auto local = kl_decompose(CellGrid{8, 8, 0.0, 0.0, 1.0 / 32, 1.0 / 32}, 0.25, 4);
  Rng rng = rng_stream(1, 1, 0);
  auto proj = make_projector(global, local, {0.25, 0.5}, 60, rng);
  Rng r2 = rng_stream(2, 0, 0);
  Eigen::VectorXd a = standard_normal(r2, 30), b = standard_normal(r2, 30);
  EXPECT_LT((proj.project(2.0 * a - b) - (2.0 * proj.project(a) - proj.project(b))).norm(), 1e-12);
}

TEST(Projection, ErrorWithinTruncationBound)
{
  const int n = 32, S = 4, Ns = 6, N = 50;
  const CellGrid grid = unit_grid(n);
  auto full = kl_decompose(grid, 0.25, grid.num_cells());
  auto global = full.truncated(N);
  const int m = n / S;
  auto local_full = kl_decompose(CellGrid{m, m, 0.0, 0.0, 1.0 / n, 1.0 / n}, 0.25, m * m);
  auto local = local_full.truncated(Ns);
  Rng prng = rng_stream(5, 1, 0);
  const Eigen::Vector2d origin(1.0 / S, 2.0 / S);
  auto proj = make_projector(global, local, origin, default_projection_points(Ns), prng);

  double err = 0.0;
  const int samples = 300;
  for (int k = 0; k < samples; ++k) {
    Rng rng = rng_stream(5, 2, k);
    auto [y, eta] = sample_global(full, rng);
    Eigen::VectorXd lf = local.field(proj.project(y.head(N)));
    for (int c = 0; c < m * m; ++c) {
      const int gc = grid.cell_at(origin + local.grid.centroid(c));
      err += grid.cell_area() * std::pow(eta[gc] - lf[c], 2);
    }
  }
  err /= samples;
  EXPECT_LE(err, 1.1 * (full.tail(N) + local_full.tail(Ns)));
}

TEST(Projection, RejectsTooFewPoints)
{
  auto global = kl_decompose(unit_grid(8), 0.25, 10);
  auto local = global.truncated(6);
  Rng rng = rng_stream(1, 1, 0);
  EXPECT_THROW(make_projector(global, local, {0.0, 0.0}, 6, rng), ConfigError);
  auto proj = make_projector(global, local, {0.0, 0.0}, 60, rng);
  EXPECT_THROW(proj.project(Eigen::VectorXd::Zero(3)), ConfigError);
  EXPECT_THROW(proj.truncated(7), ConfigError);
  EXPECT_EQ(proj.truncated(3).local_dim(), 3);
  EXPECT_EQ(default_projection_points(6), 60);
  EXPECT_EQ(default_projection_points(2), 50);
}

TEST(Rng, StreamsAreReproducibleAndDistinct)
{
  Rng a = rng_stream(7, 2, 5), b = rng_stream(7, 2, 5), c = rng_stream(7, 2, 6), d = rng_stream(7, 3, 5);
  const auto va = standard_normal(a, 16), vb = standard_normal(b, 16);
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, standard_normal(c, 16));
  EXPECT_NE(va, standard_normal(d, 16));
}

TEST(WhiteNoise, PiecesFollowBlocks)
{
  Mesh mesh = build_mesh(16);
  auto wn = make_white_noise(mesh, 4, 2, 0.1);
  EXPECT_EQ(wn.size(), 8);
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(8, 0.0, 7.0);
  auto field = white_noise_field(wn, y);
  const auto grid = mesh_cell_grid(mesh);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto x = grid.centroid(Mesh::cell_of_triangle(t));
    const int piece = static_cast<int>(x.y() * 2) * 4 + static_cast<int>(x.x() * 4);
    EXPECT_EQ(field.values[t], y[piece]);
  }
  EXPECT_TRUE(aligned_with(wn, build_partition(mesh, 4, 2)));
  EXPECT_FALSE(aligned_with(wn, build_partition(mesh, 2, 4)));
  EXPECT_THROW(white_noise_field(wn, Eigen::VectorXd::Zero(3)), ConfigError);
  EXPECT_THROW(make_white_noise(mesh, 3, 2, 0.1), ConfigError);
  EXPECT_THROW(make_white_noise(mesh, 2, 2, -1.0), ConfigError);
}
