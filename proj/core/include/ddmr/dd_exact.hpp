#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "ddmr/mesh_fem.hpp"
#include "ddmr/partition.hpp"

namespace ddmr {

/// Sparse factorization of an interior block A^{00}; Cholesky-type for
/// symmetric forms, LU otherwise.
class InteriorFactor
{
public:
  /// Throws SolverError naming `subdomain` when the block is singular.
  InteriorFactor(const SparseMatrix& a00, bool symmetric, int subdomain = -1);
  ~InteriorFactor();
  InteriorFactor(InteriorFactor&&) noexcept;
  InteriorFactor& operator=(InteriorFactor&&) noexcept;

  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  int size() const { return size_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int size_ = 0;
};

struct LocalSchur
{
  Eigen::MatrixXd B;  // interface x interface
  Eigen::VectorXd g;
};

/// B = A^{bb} - A^{b0} (A^{00})^{-1} A^{0b},  g = f^b - A^{b0} (A^{00})^{-1} f^0.
LocalSchur local_schur(const LocalSystem& local, bool symmetric = false, int subdomain = -1);
LocalSchur local_schur(const LocalSystem& local, const InteriorFactor& factor);

struct CondensedSystem
{
  Eigen::MatrixXd B;
  Eigen::VectorXd g;
};

/// Sums the scattered local contributions into the global interface system.
CondensedSystem assemble_condensed(const DomainPartition& partition,
                                   const std::vector<LocalSchur>& locals);

/// Solves the condensed system densely; throws SolverError if it is singular.
Eigen::VectorXd solve_condensed(const CondensedSystem& sys);

/// Exact substructured solve from pre-assembled local systems. Dirichlet
/// values of `mesh` for `kind` are imposed on the returned field.
NodalVector dd_solve(const Mesh& mesh, const DomainPartition& partition,
                     const std::vector<LocalSystem>& systems, ProblemKind kind);

/// Assembles every local system for `eta` and solves.
NodalVector dd_solve(const Mesh& mesh, const DomainPartition& partition, const PdeForm& form,
                     const CellField& eta);

} // namespace ddmr
