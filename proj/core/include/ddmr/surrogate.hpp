#pragma once

#include <vector>

#include <Eigen/Dense>

namespace ddmr {

/// Downward-closed anisotropic total-degree set {nu : sum_i weights[i] * nu_i <= order}.
struct IndexSet
{
  int dim = 0;
  int order = 0;
  Eigen::VectorXd weights;
  std::vector<std::vector<int>> indices;  // indices[0] is the zero multi-index

  int size() const { return static_cast<int>(indices.size()); }
  int max_degree(int i) const;
};

IndexSet isotropic_index_set(int dim, int order);

IndexSet weighted_index_set(int dim, int order, const Eigen::VectorXd& weights);

/// Weights from the decay of the local eigenvalues:
///   w_i = max(1, c * log(l_1 / l_i) / log(l_1 / l_dim)),
/// falling back to isotropic weights when the eigenvalues are flat.
IndexSet build_index_set(int dim, int order, const Eigen::VectorXd& local_lambdas,
                         double anisotropy);

/// Default anisotropy strength c.
inline constexpr double kDefaultAnisotropy = 3.05;

/// Orthonormal Legendre polynomial sqrt(2k+1) P_k(t) for k = 0..degree.
Eigen::VectorXd legendre_1d(int degree, double t);

/// Tensorized orthonormal Legendre values of every multi-index at t in [-1, 1]^dim.
Eigen::VectorXd legendre_eval(const IndexSet& set, const Eigen::VectorXd& t);

/// Symmetric box [-half_width, half_width]^dim mapped affinely onto [-1, 1]^dim.
struct ParameterBox
{
  double half_width = 5.0;

  /// Maps y into [-1, 1]^dim, clamping outside coordinates; returns how many were clamped.
  int to_unit(const Eigen::VectorXd& y, Eigen::VectorXd& t) const;
};

/// Shapes of the reduced local blocks of one subdomain and their packing into
/// one entry vector: A00, A0b, Ab0, Abb (column-major), then f0, fb when loads
/// depend on the parameter.
struct BlockLayout
{
  int interior = 0;
  int interface = 0;
  bool with_loads = false;

  int offset_00() const { return 0; }
  int offset_0b() const { return interior * interior; }
  int offset_b0() const { return offset_0b() + interior * interface; }
  int offset_bb() const { return offset_b0() + interface * interior; }
  int offset_f0() const { return offset_bb() + interface * interface; }
  int offset_fb() const { return offset_f0() + interior; }
  int entries() const { return offset_f0() + (with_loads ? interior + interface : 0); }
};

struct ReducedBlocks
{
  Eigen::MatrixXd a00;
  Eigen::MatrixXd a0b;
  Eigen::MatrixXd ab0;
  Eigen::MatrixXd abb;
  Eigen::VectorXd f0;
  Eigen::VectorXd fb;
};

void pack_blocks(const ReducedBlocks& blocks, const BlockLayout& layout, Eigen::Ref<Eigen::VectorXd> out);
ReducedBlocks unpack_blocks(const Eigen::VectorXd& entries, const BlockLayout& layout);

/// Least-squares coefficients of one subdomain: coefficients(m, e) multiplies
/// basis function m for packed entry e.
struct SubdomainSurrogate
{
  BlockLayout layout;
  Eigen::MatrixXd coefficients;  // M x entries

  int num_terms() const { return static_cast<int>(coefficients.rows()); }

  /// Packed entries at basis values phi.
  Eigen::VectorXd evaluate(const Eigen::VectorXd& phi) const;

  /// Keeps the leading `interior` interior coordinates and, per interface
  /// group, the leading columns selected by `interface_keep` (indices into
  /// the old interface coordinates).
  SubdomainSurrogate sliced(int interior, const std::vector<int>& interface_keep) const;
};

/// Fits every packed entry at once. `design` is K x M (basis values per
/// sample), `data` is K x entries. Throws SolverError if the design is rank
/// deficient and ConfigError if K < 2M.
Eigen::MatrixXd fit_dls(const Eigen::MatrixXd& design, const Eigen::MatrixXd& data);

SubdomainSurrogate fit_surrogate(const IndexSet& set, const BlockLayout& layout,
                                 const Eigen::MatrixXd& unit_samples, const Eigen::MatrixXd& data);

/// Design matrix for samples already mapped to [-1, 1]^dim (one per row).
Eigen::MatrixXd design_matrix(const IndexSet& set, const Eigen::MatrixXd& unit_samples);

} // namespace ddmr
