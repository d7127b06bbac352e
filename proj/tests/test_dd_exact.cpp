#include <cmath>

#include <gtest/gtest.h>

#include "ddmr/dd_exact.hpp"
#include "ddmr/error.hpp"

using namespace ddmr;

namespace {

CellField wavy_field(const Mesh& mesh, double amplitude)
{
  Eigen::VectorXd eta(mesh.num_triangles());
  for (int t = 0; t < eta.size(); ++t)
    eta[t] = amplitude * std::sin(0.13 * t) * std::cos(0.007 * t);
  return CellField{eta};
}

SparseMatrix sparse(const Eigen::MatrixXd& m)
{
  return m.sparseView(0.0, 0.0);
}

double rel(const NodalVector& a, const NodalVector& b)
{
  return (a - b).norm() / b.norm();
}

} // namespace

TEST(Schur, ScalarToyComplement)
{
  LocalSystem loc;
  loc.a00 = sparse(Eigen::MatrixXd::Constant(1, 1, 2.0));
  loc.a0b = sparse(Eigen::MatrixXd::Constant(1, 1, 1.0));
  loc.ab0 = sparse(Eigen::MatrixXd::Constant(1, 1, 1.0));
  loc.abb = sparse(Eigen::MatrixXd::Constant(1, 1, 3.0));
  loc.f0 = Eigen::VectorXd::Constant(1, 4.0);
  loc.fb = Eigen::VectorXd::Constant(1, 1.0);
  auto s = local_schur(loc, true);
  EXPECT_DOUBLE_EQ(s.B(0, 0), 2.5);
  EXPECT_DOUBLE_EQ(s.g[0], -1.0);
}

TEST(Schur, DecoupledInteriorLeavesInterfaceBlock)
{
  LocalSystem loc;
  loc.a00 = sparse(Eigen::MatrixXd::Identity(3, 3));
  loc.a0b = SparseMatrix(3, 2);
  loc.ab0 = SparseMatrix(2, 3);
  Eigen::MatrixXd abb(2, 2);
  abb << 4, 1, 1, 3;
  loc.abb = sparse(abb);
  loc.f0 = Eigen::VectorXd::Ones(3);
  loc.fb = Eigen::Vector2d(1, 2);
  auto s = local_schur(loc, false);
  EXPECT_EQ(s.B, abb);
  EXPECT_EQ(s.g, loc.fb);
}

TEST(Schur, DiffusionComplementIsSymmetricPositive)
{
  Mesh mesh = build_mesh(16);
  auto part = build_partition(mesh, 2, 2);
  auto loc = assemble_local(mesh, part, PdeForm{}, wavy_field(mesh, 3.0), 0);
  auto s = local_schur(loc, true);
  EXPECT_LT((s.B - s.B.transpose()).norm(), 1e-12 * s.B.norm());
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s.B).eigenvalues().minCoeff(), 0.0);
}

TEST(Schur, SingularInteriorNamesSubdomain)
{
  LocalSystem loc;
  loc.a00 = sparse(Eigen::MatrixXd::Zero(2, 2));
  loc.a0b = SparseMatrix(2, 1);
  loc.ab0 = SparseMatrix(1, 2);
  loc.abb = sparse(Eigen::MatrixXd::Identity(1, 1));
  loc.f0 = Eigen::VectorXd::Zero(2);
  loc.fb = Eigen::VectorXd::Zero(1);
  try {
    local_schur(loc, true, 3);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("subdomain 3"), std::string::npos);
  }
}

TEST(Condensed, MatchesSumOfScatteredComplements)
{
  Mesh mesh = build_mesh(16);
  auto part = build_partition(mesh, 4, 2);
  PdeForm form;
  std::vector<LocalSchur> locals;
  for (int s = 0; s < part.num_subdomains(); ++s)
    locals.push_back(local_schur(assemble_local(mesh, part, form, wavy_field(mesh, 1.0), s), true, s));
  auto sys = assemble_condensed(part, locals);

  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(part.interface_size, part.interface_size);
  for (int s = 0; s < part.num_subdomains(); ++s) {
    const int m = part.subdomains[s].num_interface();
    Eigen::MatrixXd T(part.interface_size, m);
    for (int k = 0; k < m; ++k) T.col(k) = part.scatter(s, Eigen::VectorXd::Unit(m, k));
    B += T * locals[s].B * T.transpose();
  }
  EXPECT_LT((B - sys.B).norm(), 1e-12 * B.norm());
  EXPECT_THROW(assemble_condensed(part, std::vector<LocalSchur>(locals.begin(), locals.end() - 1)), ConfigError);
}

TEST(DdSolve, DiffusionMatchesFullSolve)
{
  Mesh mesh = build_mesh(32);
  PdeForm form;
  for (auto [sx, sy] : {std::pair{4, 4}, std::pair{2, 8}, std::pair{1, 1}}) {
    auto part = build_partition(mesh, sx, sy);
    auto eta = wavy_field(mesh, 4.0);
    EXPECT_LT(rel(dd_solve(mesh, part, form, eta), solve_full(assemble(mesh, form, eta))), 1e-10);
  }
}

TEST(DdSolve, SupgMatchesFullSolve)
{
  Mesh mesh = build_mesh(32);
  for (double eps : {1.0, 1e-2, 1e-4}) {
    PdeForm form{ProblemKind::convection, eps, 0.0, 0.2, 1.0};
    auto part = build_partition(mesh, 4, 4);
    auto eta = wavy_field(mesh, 5.0);
    EXPECT_LT(rel(dd_solve(mesh, part, form, eta), solve_full(assemble(mesh, form, eta))), 1e-9) << eps;
  }
}

TEST(DdSolve, InterfaceValuesSolveCondensedSystem)
{
  Mesh mesh = build_mesh(16);
  auto part = build_partition(mesh, 2, 2);
  PdeForm form;
  auto eta = wavy_field(mesh, 2.0);
  NodalVector u = solve_full(assemble(mesh, form, eta));
  std::vector<LocalSchur> locals;
  for (int s = 0; s < 4; ++s) locals.push_back(local_schur(assemble_local(mesh, part, form, eta, s), true));
  auto sys = assemble_condensed(part, locals);
  Eigen::VectorXd ub(part.interface_size);
  for (const auto& g : part.groups)
    for (int k = 0; k < g.size(); ++k) ub[g.offset + k] = u[g.nodes[k]];
  EXPECT_LT((sys.B * ub - sys.g).norm(), 1e-10 * sys.g.norm());
  EXPECT_LT((solve_condensed(sys) - ub).norm(), 1e-10 * ub.norm());
}

TEST(DdSolve, WrongSystemCountThrows)
{
  Mesh mesh = build_mesh(8);
  auto part = build_partition(mesh, 2, 2);
  EXPECT_THROW(dd_solve(mesh, part, std::vector<LocalSystem>(3), ProblemKind::diffusion), ConfigError);
}
