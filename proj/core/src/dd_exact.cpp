#include "ddmr/dd_exact.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "ddmr/error.hpp"
#include "ddmr/parallel.hpp"

namespace ddmr {

struct InteriorFactor::Impl
{
  bool symmetric = false;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
};

InteriorFactor::InteriorFactor(const SparseMatrix& a00, bool symmetric, int subdomain)
  : impl_(std::make_unique<Impl>()), size_(static_cast<int>(a00.rows()))
{
  impl_->symmetric = symmetric;
  if (size_ == 0)
    return;
  bool ok = false;
  if (symmetric) {
    impl_->ldlt.compute(a00);
    ok = impl_->ldlt.info() == Eigen::Success;
    if (ok) {
      const Eigen::VectorXd d = impl_->ldlt.vectorD();
      ok = d.cwiseAbs().minCoeff() > 1e-14 * d.cwiseAbs().maxCoeff();
    }
  } else {
    SparseMatrix a = a00;
    a.makeCompressed();
    impl_->lu.compute(a);
    ok = impl_->lu.info() == Eigen::Success;
  }
  if (!ok) {
    std::ostringstream msg;
    msg << "interior block of subdomain " << subdomain << " is singular";
    throw SolverError(msg.str());
  }
}

InteriorFactor::~InteriorFactor() = default;
InteriorFactor::InteriorFactor(InteriorFactor&&) noexcept = default;
InteriorFactor& InteriorFactor::operator=(InteriorFactor&&) noexcept = default;

Eigen::MatrixXd InteriorFactor::solve(const Eigen::MatrixXd& rhs) const
{
  if (size_ == 0)
    return Eigen::MatrixXd(0, rhs.cols());
  if (impl_->symmetric)
    return impl_->ldlt.solve(rhs);
  return impl_->lu.solve(rhs);
}

Eigen::VectorXd InteriorFactor::solve(const Eigen::VectorXd& rhs) const
{
  if (size_ == 0)
    return Eigen::VectorXd(0);
  if (impl_->symmetric)
    return impl_->ldlt.solve(rhs);
  return impl_->lu.solve(rhs);
}

LocalSchur local_schur(const LocalSystem& local, const InteriorFactor& factor)
{
  const Eigen::MatrixXd x = factor.solve(Eigen::MatrixXd(local.a0b));
  const Eigen::VectorXd z = factor.solve(local.f0);
  LocalSchur out;
  out.B = Eigen::MatrixXd(local.abb) - local.ab0 * x;
  out.g = local.fb - local.ab0 * z;
  return out;
}

LocalSchur local_schur(const LocalSystem& local, bool symmetric, int subdomain)
{
  return local_schur(local, InteriorFactor(local.a00, symmetric, subdomain));
}

CondensedSystem assemble_condensed(const DomainPartition& partition,
                                   const std::vector<LocalSchur>& locals)
{
  if (static_cast<int>(locals.size()) != partition.num_subdomains())
    throw ConfigError("one local Schur complement per subdomain is required");
  CondensedSystem sys;
  sys.B = Eigen::MatrixXd::Zero(partition.interface_size, partition.interface_size);
  sys.g = Eigen::VectorXd::Zero(partition.interface_size);
  for (int s = 0; s < partition.num_subdomains(); ++s) {
    const auto& map = partition.subdomains[s].interface_map;
    const auto& loc = locals[s];
    if (loc.B.rows() != static_cast<Eigen::Index>(map.size()))
      throw ConfigError("local Schur complement does not match the subdomain interface");
    for (std::size_t j = 0; j < map.size(); ++j) {
      sys.g[map[j]] += loc.g[j];
      for (std::size_t i = 0; i < map.size(); ++i)
        sys.B(map[i], map[j]) += loc.B(i, j);
    }
  }
  return sys;
}

Eigen::VectorXd solve_condensed(const CondensedSystem& sys)
{
  if (sys.B.rows() == 0)
    return Eigen::VectorXd(0);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.B);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-15)) {
    std::ostringstream msg;
    msg << "condensed interface matrix is singular (rcond " << rcond << ")";
    throw SolverError(msg.str());
  }
  return lu.solve(sys.g);
}

NodalVector dd_solve(const Mesh& mesh, const DomainPartition& partition,
                     const std::vector<LocalSystem>& systems, ProblemKind kind)
{
  const int S = partition.num_subdomains();
  if (static_cast<int>(systems.size()) != S)
    throw ConfigError("one local system per subdomain is required");
  const bool symmetric = kind == ProblemKind::diffusion;

  std::vector<std::unique_ptr<InteriorFactor>> factors(S);
  std::vector<LocalSchur> schur(S);
  parallel_for(S, [&](std::size_t s) {
    factors[s] = std::make_unique<InteriorFactor>(systems[s].a00, symmetric, static_cast<int>(s));
    schur[s] = local_schur(systems[s], *factors[s]);
  });

  const Eigen::VectorXd ub = solve_condensed(assemble_condensed(partition, schur));

  NodalVector u = dirichlet_data(mesh, kind).values;
  for (int s = 0; s < S; ++s) {
    const Subdomain& sub = partition.subdomains[s];
    const Eigen::VectorXd ub_s = partition.gather(s, ub);
    const Eigen::VectorXd u0 = factors[s]->solve(Eigen::VectorXd(systems[s].f0 - systems[s].a0b * ub_s));
    for (int k = 0; k < sub.num_interior(); ++k)
      u[sub.interior_nodes[k]] = u0[k];
    for (int k = 0; k < sub.num_interface(); ++k)
      u[sub.interface_nodes[k]] = ub_s[k];
  }
  return u;
}

NodalVector dd_solve(const Mesh& mesh, const DomainPartition& partition, const PdeForm& form,
                     const CellField& eta)
{
  const LocalAssembler assembler(mesh, partition, form);
  std::vector<LocalSystem> systems(partition.num_subdomains());
  parallel_for(systems.size(), [&](std::size_t s) { systems[s] = assembler.assemble(static_cast<int>(s), eta); });
  return dd_solve(mesh, partition, systems, form.kind);
}

} // namespace ddmr
