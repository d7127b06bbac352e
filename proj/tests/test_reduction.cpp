#include <cmath>

#include <gtest/gtest.h>

#include "ddmr/error.hpp"
#include "ddmr/random_field.hpp"
#include "ddmr/reduction.hpp"

using namespace ddmr;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed)
{
  Rng rng = rng_stream(seed, 0, 0);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) m.col(j) = standard_normal(rng, rows);
  return m;
}

// rows x cols matrix with singular values 2^-k.
Eigen::MatrixXd graded_matrix(int rows, int cols, std::uint64_t seed)
{
  Eigen::HouseholderQR<Eigen::MatrixXd> qu(random_matrix(rows, cols, seed));
  Eigen::HouseholderQR<Eigen::MatrixXd> qv(random_matrix(cols, cols, seed + 1));
  Eigen::MatrixXd U = qu.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  Eigen::MatrixXd V = qv.householderQ() * Eigen::MatrixXd::Identity(cols, cols);
  Eigen::VectorXd s(cols);
  for (int k = 0; k < cols; ++k) s[k] = std::pow(2.0, -k);
  return U * s.asDiagonal() * V.transpose();
}

SolutionSnapshots diffusion_snapshots(const Mesh& mesh, const DomainPartition& part, int count)
{
  auto kl = kl_decompose(mesh_cell_grid(mesh), 0.25, 20);
  auto snaps = allocate_snapshots(part, count);
  PdeForm form;
  FullSolver solver(mesh);
  for (int k = 0; k < count; ++k) {
    Rng rng = rng_stream(9, 2, k);
    auto [y, cells] = sample_global(kl, rng);
    store_snapshot(part, solver.solve(assemble(mesh, form, triangle_field_from_cells(mesh, cells))), k, snaps);
  }
  return snaps;
}

} // namespace

TEST(Svd, VertexGroupBasisIsPlusOne)
{
  Eigen::MatrixXd x(1, 5);
  x << -0.3, -0.1, -0.2, -0.5, -0.4;
  auto b = svd_basis(x, RankRule{3, 0.0});
  ASSERT_EQ(b.rank(), 1);
  EXPECT_DOUBLE_EQ(b.vectors(0, 0), 1.0);
}

TEST(Svd, MatchesJacobiOracle)
{
  Eigen::MatrixXd x = random_matrix(40, 25, 1);
  auto b = svd_basis(x, RankRule{10, 0.0});
  Eigen::JacobiSVD<Eigen::MatrixXd> oracle(x, Eigen::ComputeThinU);
  EXPECT_LT((b.singular_values - oracle.singularValues()).norm(), 1e-10);
  for (int k = 0; k < 10; ++k)
    EXPECT_NEAR(std::abs(b.vectors.col(k).dot(oracle.matrixU().col(k))), 1.0, 1e-9);
  EXPECT_NEAR(x.squaredNorm(), b.singular_values.squaredNorm(), 1e-9 * x.squaredNorm());
}

TEST(Svd, ColumnsAreOrthonormalWithPositiveLeadingEntry)
{
  auto b = svd_basis(random_matrix(30, 20, 2), RankRule{8, 0.0});
  EXPECT_LT((b.vectors.transpose() * b.vectors - Eigen::MatrixXd::Identity(8, 8)).norm(), 1e-12);
  for (int k = 0; k < 8; ++k) {
    Eigen::Index arg;
    b.vectors.col(k).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(b.vectors(arg, k), 0.0);
  }
}

TEST(Svd, ProjectionErrorEqualsDiscardedEnergy)
{
  Eigen::MatrixXd x = graded_matrix(50, 12, 3);
  double previous = x.squaredNorm();
  for (int r = 1; r <= 12; ++r) {
    auto b = svd_basis(x, RankRule{r, 0.0});
    const double err = (x - b.vectors * (b.vectors.transpose() * x)).squaredNorm();
    EXPECT_NEAR(err, b.singular_values.tail(12 - r).squaredNorm(), 1e-12);
    EXPECT_LE(err, previous);
    previous = err;
  }
}

TEST(Svd, EnergyRuleSelectsSmallestRank)
{
  Eigen::MatrixXd x = graded_matrix(40, 10, 4);
  auto b = svd_basis(x, RankRule{0, 1e-3});
  const double total = b.singular_values.squaredNorm();
  const double kept = b.singular_values.head(b.rank()).squaredNorm();
  EXPECT_GE(kept, (1 - 1e-3) * total);
  EXPECT_LT(b.singular_values.head(b.rank() - 1).squaredNorm(), (1 - 1e-3) * total);
}

TEST(Svd, RankRules)
{
  Eigen::MatrixXd x = random_matrix(4, 10, 5);
  EXPECT_THROW(svd_basis(x, RankRule{11, 0.0}), ConfigError);
  EXPECT_EQ(svd_basis(x, RankRule{8, 0.0}).rank(), 4);
  EXPECT_THROW(svd_basis(Eigen::MatrixXd(4, 0), RankRule{0, 1e-6}), ConfigError);
  EXPECT_EQ(svd_basis(Eigen::MatrixXd::Constant(6, 5, 2.0), RankRule{0, 1e-12}).rank(), 1);
}

TEST(Svd, RandomizedMatchesDenseOnLargeRows)
{
  Eigen::MatrixXd x = graded_matrix(2500, 30, 6);
  auto fast = svd_basis(x, RankRule{6, 0.0}, 17);
  Eigen::BDCSVD<Eigen::MatrixXd> dense(x, Eigen::ComputeThinU);
  Eigen::MatrixXd pf = fast.vectors * fast.vectors.transpose();
  Eigen::MatrixXd pd = dense.matrixU().leftCols(6) * dense.matrixU().leftCols(6).transpose();
  EXPECT_LT((pf - pd).norm(), 1e-8);
  EXPECT_LT((fast.singular_values.head(6) - dense.singularValues().head(6)).norm(), 1e-10);
}

TEST(Snapshots, StoreAndBasisShapes)
{
  Mesh mesh = build_mesh(16);
  auto part = build_partition(mesh, 2, 2);
  auto snaps = diffusion_snapshots(mesh, part, 12);
  auto basis = build_reduced_basis(snaps, RankRule{3, 0.0}, RankRule{5, 0.0});
  ASSERT_EQ(basis.group_bases.size(), part.groups.size());
  for (std::size_t g = 0; g < part.groups.size(); ++g)
    EXPECT_EQ(basis.group_rank(static_cast<int>(g)), std::min(3, part.groups[g].size()));
  EXPECT_EQ(basis.interior_rank(0), 5);
  EXPECT_EQ(basis.local_interface_rank(part, 0), 3 + 3 + 1);
  auto vb = basis.interface_basis(part, 0);
  EXPECT_EQ(vb.rows(), part.subdomains[0].num_interface());
  EXPECT_LT((vb.transpose() * vb - Eigen::MatrixXd::Identity(7, 7)).norm(), 1e-12);
  EXPECT_EQ(basis.reduced_interface_size(), 4 * 3 + 1);

  // Shared groups get the same global reduced coordinates from both sides.
  auto m0 = basis.local_to_global(part, 0);
  auto m1 = basis.local_to_global(part, 1);
  EXPECT_EQ(m0[0], m1[3]);
  EXPECT_THROW(store_snapshot(part, Eigen::VectorXd::Zero(mesh.num_nodes()), 12, snaps), ConfigError);
}

TEST(Snapshots, FinerBlocksDecayFaster)
{
  Mesh mesh = build_mesh(64);
  auto coarse = build_partition(mesh, 4, 4);
  auto fine = build_partition(mesh, 8, 8);
  auto sc = diffusion_snapshots(mesh, coarse, 40);
  auto sf = diffusion_snapshots(mesh, fine, 40);
  auto bc = svd_basis(sc.interiors[coarse.subdomain_index(1, 1)], RankRule{0, 1e-12});
  auto bf = svd_basis(sf.interiors[fine.subdomain_index(2, 2)], RankRule{0, 1e-12});
  const double rc = bc.singular_values[6] / bc.singular_values[0];
  const double rf = bf.singular_values[6] / bf.singular_values[0];
  EXPECT_LT(rf, rc);
}

TEST(Reduce, IdentityBasesReproduceBlocks)
{
  Mesh mesh = build_mesh(8);
  auto part = build_partition(mesh, 2, 2);
  auto eta = CellField{Eigen::VectorXd::Constant(mesh.num_triangles(), 0.3)};
  auto loc = assemble_local(mesh, part, PdeForm{}, eta, 0);
  const int ni = part.subdomains[0].num_interior(), nb = part.subdomains[0].num_interface();
  auto blocks = reduce_matrices(loc, Eigen::MatrixXd::Identity(ni, ni), Eigen::MatrixXd::Identity(nb, nb));
  reduce_loads(loc, Eigen::MatrixXd::Identity(ni, ni), Eigen::MatrixXd::Identity(nb, nb), blocks);
  EXPECT_EQ(blocks.a00, Eigen::MatrixXd(loc.a00));
  EXPECT_EQ(blocks.a0b, Eigen::MatrixXd(loc.a0b));
  EXPECT_EQ(blocks.abb, Eigen::MatrixXd(loc.abb));
  EXPECT_EQ(blocks.f0, loc.f0);
  EXPECT_THROW(reduce_matrices(loc, Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(nb, nb)),
               ConfigError);
}

TEST(Reduce, DiffusionBlocksStaySymmetric)
{
  Mesh mesh = build_mesh(16);
  auto part = build_partition(mesh, 2, 2);
  auto snaps = diffusion_snapshots(mesh, part, 10);
  auto basis = build_reduced_basis(snaps, RankRule{4, 0.0}, RankRule{6, 0.0});
  auto eta = CellField{Eigen::VectorXd::Constant(mesh.num_triangles(), -0.7)};
  auto loc = assemble_local(mesh, part, PdeForm{}, eta, 2);
  auto blocks = reduce_matrices(loc, basis.interior_bases[2], basis.interface_basis(part, 2));
  EXPECT_LT((blocks.a00 - blocks.a00.transpose()).norm(), 1e-12 * blocks.a00.norm());
  EXPECT_LT((blocks.a0b - blocks.ab0.transpose()).norm(), 1e-12 * blocks.a0b.norm());
}

TEST(Reduce, TruncationKeepsLeadingColumns)
{
  Mesh mesh = build_mesh(16);
  auto part = build_partition(mesh, 2, 2);
  auto basis = build_reduced_basis(diffusion_snapshots(mesh, part, 10), RankRule{5, 0.0}, RankRule{8, 0.0});
  auto t = basis.truncated(2, 3);
  EXPECT_EQ(t.group_bases[0], basis.group_bases[0].leftCols(2));
  EXPECT_EQ(t.interior_bases[1], basis.interior_bases[1].leftCols(3));
  EXPECT_THROW(basis.truncated(0, 3), ConfigError);
}
