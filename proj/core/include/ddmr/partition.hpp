#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ddmr/mesh_fem.hpp"

namespace ddmr {

enum class GroupKind { edge, vertex };

/// A set of interface nodes shared by the subdomains that touch it. Edge
/// groups hold the open segment between two cross points; vertex groups hold
/// a single interior cross point.
struct InterfaceGroup
{
  GroupKind kind = GroupKind::edge;
  std::vector<int> nodes;  // ascending global node index
  int offset = 0;          // first column in the condensed interface system
  int size() const { return static_cast<int>(nodes.size()); }
};

struct Subdomain
{
  int bx = 0;
  int by = 0;
  std::vector<int> triangles;       // global ids, cell row-major inside the block
  std::vector<int> interior_nodes;  // ascending
  std::vector<int> groups;          // edges S,E,N,W then vertices SW,SE,NE,NW (absent ones skipped)
  std::vector<int> interface_nodes; // concatenation of the group node lists
  std::vector<int> interface_map;   // local interface slot -> condensed index

  /// Slot of each closed-block node (row-major over (mx+1) x (my+1)):
  /// >= 0 interior slot, <= -2 interface slot -(slot+2), -1 Dirichlet.
  std::vector<int> block_slot;

  int num_interior() const { return static_cast<int>(interior_nodes.size()); }
  int num_interface() const { return static_cast<int>(interface_nodes.size()); }
  int num_groups() const { return static_cast<int>(groups.size()); }
};

/// Non-overlapping Sx x Sy block decomposition embedded in a Mesh.
struct DomainPartition
{
  int n = 0;
  int sx = 1;
  int sy = 1;
  int mx = 0;  // cells per block along x
  int my = 0;
  std::vector<Subdomain> subdomains;
  std::vector<InterfaceGroup> groups;
  int interface_size = 0;

  int num_subdomains() const { return static_cast<int>(subdomains.size()); }
  int subdomain_index(int bx, int by) const { return by * sx + bx; }

  /// Local interface vector of s -> condensed vector (fresh, zero elsewhere).
  Eigen::VectorXd scatter(int s, const Eigen::VectorXd& local) const;
  void scatter_add(int s, const Eigen::VectorXd& local, Eigen::VectorXd& global) const;
  Eigen::VectorXd gather(int s, const Eigen::VectorXd& global) const;
};

/// Requires sx | n and sy | n.
DomainPartition build_partition(const Mesh& mesh, int sx, int sy);

/// Local 2x2 block system of one subdomain. Dirichlet nodes are eliminated and
/// their lifted contribution is moved into f0/fb.
struct LocalSystem
{
  SparseMatrix a00;
  SparseMatrix a0b;
  SparseMatrix ab0;
  SparseMatrix abb;
  Eigen::VectorXd f0;
  Eigen::VectorXd fb;
};

/// Assembles local systems from triangles of a single subdomain. Element
/// geometry and Dirichlet values are cached, so repeated assembly for many
/// parameter samples only re-evaluates coefficients.
class LocalAssembler
{
public:
  LocalAssembler(const Mesh& mesh, const DomainPartition& partition, const PdeForm& form);

  /// eta_local holds one field value per triangle of s, in Subdomain::triangles order.
  LocalSystem assemble(int s, std::span<const double> eta_local) const;

  /// Same, reading the values of s from a field over the whole mesh.
  LocalSystem assemble(int s, const CellField& eta) const;

  const PdeForm& form() const { return form_; }

private:
  const Mesh& mesh_;
  const DomainPartition& partition_;
  PdeForm form_;
  DirichletData dirichlet_;
};

LocalSystem assemble_local(const Mesh& mesh, const DomainPartition& partition, const PdeForm& form,
                           const CellField& eta, int s);

} // namespace ddmr
