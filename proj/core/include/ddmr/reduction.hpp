#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ddmr/partition.hpp"
#include "ddmr/surrogate.hpp"

namespace ddmr {

/// Fixed rank when rank > 0; otherwise the smallest rank whose retained
/// energy fraction reaches 1 - energy_tol.
struct RankRule
{
  int rank = 0;
  double energy_tol = 1e-10;
};

struct SvdBasis
{
  Eigen::MatrixXd vectors;          // rows x retained, orthonormal columns
  Eigen::VectorXd singular_values;  // every computed singular value, descending
  int rank() const { return static_cast<int>(vectors.cols()); }
};

/// Leading left singular vectors of `snapshots`, sign-normalized so the
/// entry of largest magnitude in each column is positive. Exact dense SVD up
/// to 2000 rows, randomized range finding above that for fixed ranks. A
/// fixed rank larger than the row count is clamped to it; one larger than the
/// column count is an error.
SvdBasis svd_basis(const Eigen::MatrixXd& snapshots, const RankRule& rule, std::uint64_t seed = 0);

/// Per-slot solution snapshots: one matrix per interface group and one per
/// subdomain interior, columns are samples.
struct SolutionSnapshots
{
  std::vector<Eigen::MatrixXd> groups;
  std::vector<Eigen::MatrixXd> interiors;
  int samples = 0;
};

SolutionSnapshots allocate_snapshots(const DomainPartition& partition, int count);

/// Writes nodal solution `u` into column k of every slot matrix.
void store_snapshot(const DomainPartition& partition, const Eigen::VectorXd& u, int k,
                    SolutionSnapshots& out);

/// Interface bases are shared by the subdomains touching a group.
struct ReducedBasis
{
  std::vector<Eigen::MatrixXd> group_bases;      // per global group
  std::vector<Eigen::MatrixXd> interior_bases;   // per subdomain
  std::vector<Eigen::VectorXd> group_singular_values;
  std::vector<Eigen::VectorXd> interior_singular_values;

  int group_rank(int g) const { return static_cast<int>(group_bases[g].cols()); }
  int interior_rank(int s) const { return static_cast<int>(interior_bases[s].cols()); }

  /// First reduced coordinate of each group in the global reduced interface vector.
  std::vector<int> group_offsets() const;
  int reduced_interface_size() const;

  /// Reduced interface size of subdomain s (sum of its groups' ranks).
  int local_interface_rank(const DomainPartition& partition, int s) const;

  /// Global reduced indices of the local reduced interface coordinates of s.
  std::vector<int> local_to_global(const DomainPartition& partition, int s) const;

  /// Block-diagonal interface basis of s over its interface nodes.
  Eigen::MatrixXd interface_basis(const DomainPartition& partition, int s) const;

  /// Keeps at most `interface_rank` columns per group and `interior_rank` per subdomain.
  ReducedBasis truncated(int interface_rank, int interior_rank) const;
};

/// Builds the reduced basis from solution snapshots.
ReducedBasis build_reduced_basis(const SolutionSnapshots& snapshots, const RankRule& interface_rule,
                                 const RankRule& interior_rule, std::uint64_t seed = 0);

/// V0^T A00 V0, V0^T A0b Vb, Vb^T Ab0 V0, Vb^T Abb Vb.
ReducedBlocks reduce_matrices(const LocalSystem& local, const Eigen::MatrixXd& interior_basis,
                              const Eigen::MatrixXd& interface_basis);

/// Sets f0, fb of `blocks` to V0^T f0 and Vb^T fb.
void reduce_loads(const LocalSystem& local, const Eigen::MatrixXd& interior_basis,
                  const Eigen::MatrixXd& interface_basis, ReducedBlocks& blocks);

} // namespace ddmr
