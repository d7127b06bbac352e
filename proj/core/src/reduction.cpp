#include "ddmr/reduction.hpp"

#include <algorithm>
#include <sstream>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "ddmr/error.hpp"
#include "ddmr/parallel.hpp"
#include "ddmr/random_field.hpp"

namespace ddmr {

namespace {

constexpr Eigen::Index kDenseSvdRows = 2000;

void normalize_signs(Eigen::MatrixXd& v)
{
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    Eigen::Index arg = 0;
    v.col(k).cwiseAbs().maxCoeff(&arg);
    if (v(arg, k) < 0.0)
      v.col(k) = -v.col(k);
  }
}

int energy_rank(const Eigen::VectorXd& sv, double tol)
{
  const double total = sv.squaredNorm();
  if (total <= 0.0)
    return 1;
  double kept = 0.0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    kept += sv[k] * sv[k];
    if (kept >= (1.0 - tol) * total)
      return static_cast<int>(k + 1);
  }
  return static_cast<int>(sv.size());
}

// Randomized range finder with two power iterations.
SvdBasis randomized_svd(const Eigen::MatrixXd& x, int rank, std::uint64_t seed)
{
  const int sketch = std::min<int>(rank + 10, static_cast<int>(x.cols()));
  Rng rng = rng_stream(seed, 0x5bd1, static_cast<std::uint64_t>(x.rows()));
  Eigen::MatrixXd omega(x.cols(), sketch);
  for (int j = 0; j < sketch; ++j)
    omega.col(j) = standard_normal(rng, static_cast<int>(x.cols()));

  auto orthonormal = [](const Eigen::MatrixXd& a) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols()));
  };
  Eigen::MatrixXd q = orthonormal(x * omega);
  for (int it = 0; it < 2; ++it)
    q = orthonormal(x * orthonormal(x.transpose() * q));

  Eigen::BDCSVD<Eigen::MatrixXd> svd(q.transpose() * x, Eigen::ComputeThinU);
  SvdBasis out;
  out.vectors = q * svd.matrixU().leftCols(rank);
  out.singular_values = svd.singularValues();
  return out;
}

} // namespace

SvdBasis svd_basis(const Eigen::MatrixXd& snapshots, const RankRule& rule, std::uint64_t seed)
{
  const Eigen::Index rows = snapshots.rows();
  const Eigen::Index cols = snapshots.cols();
  if (rows == 0)
    return {Eigen::MatrixXd(0, 0), Eigen::VectorXd(0)};
  if (rule.rank > cols) {
    std::ostringstream msg;
    msg << "requested rank " << rule.rank << " exceeds the " << cols << " available snapshots";
    throw ConfigError(msg.str());
  }
  if (cols == 0)
    throw ConfigError("cannot build a basis from zero snapshots");

  SvdBasis out;
  if (rule.rank > 0 && rows > kDenseSvdRows) {
    out = randomized_svd(snapshots, std::min<int>(rule.rank, static_cast<int>(rows)), seed);
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(snapshots, Eigen::ComputeThinU);
    const int available = static_cast<int>(svd.matrixU().cols());
    const int r = rule.rank > 0 ? std::min(rule.rank, available)
                                : energy_rank(svd.singularValues(), rule.energy_tol);
    out.vectors = svd.matrixU().leftCols(r);
    out.singular_values = svd.singularValues();
  }
  normalize_signs(out.vectors);
  return out;
}

SolutionSnapshots allocate_snapshots(const DomainPartition& partition, int count)
{
  SolutionSnapshots out;
  out.samples = count;
  for (const auto& g : partition.groups)
    out.groups.emplace_back(g.size(), count);
  for (const auto& sub : partition.subdomains)
    out.interiors.emplace_back(sub.num_interior(), count);
  return out;
}

void store_snapshot(const DomainPartition& partition, const Eigen::VectorXd& u, int k,
                    SolutionSnapshots& out)
{
  if (k < 0 || k >= out.samples)
    throw ConfigError("snapshot index out of range");
  for (std::size_t g = 0; g < partition.groups.size(); ++g) {
    const auto& nodes = partition.groups[g].nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      out.groups[g](static_cast<Eigen::Index>(i), k) = u[nodes[i]];
  }
  for (std::size_t s = 0; s < partition.subdomains.size(); ++s) {
    const auto& nodes = partition.subdomains[s].interior_nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      out.interiors[s](static_cast<Eigen::Index>(i), k) = u[nodes[i]];
  }
}

std::vector<int> ReducedBasis::group_offsets() const
{
  std::vector<int> offsets(group_bases.size());
  int offset = 0;
  for (std::size_t g = 0; g < group_bases.size(); ++g) {
    offsets[g] = offset;
    offset += group_rank(static_cast<int>(g));
  }
  return offsets;
}

int ReducedBasis::reduced_interface_size() const
{
  int total = 0;
  for (std::size_t g = 0; g < group_bases.size(); ++g)
    total += group_rank(static_cast<int>(g));
  return total;
}

int ReducedBasis::local_interface_rank(const DomainPartition& partition, int s) const
{
  int total = 0;
  for (int g : partition.subdomains.at(s).groups)
    total += group_rank(g);
  return total;
}

std::vector<int> ReducedBasis::local_to_global(const DomainPartition& partition, int s) const
{
  const std::vector<int> offsets = group_offsets();
  std::vector<int> map;
  for (int g : partition.subdomains.at(s).groups)
    for (int c = 0; c < group_rank(g); ++c)
      map.push_back(offsets[g] + c);
  return map;
}

Eigen::MatrixXd ReducedBasis::interface_basis(const DomainPartition& partition, int s) const
{
  const Subdomain& sub = partition.subdomains.at(s);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(sub.num_interface(), local_interface_rank(partition, s));
  int row = 0;
  int col = 0;
  for (int g : sub.groups) {
    const Eigen::MatrixXd& b = group_bases[g];
    if (b.rows() != partition.groups[g].size())
      throw ConfigError("interface basis does not match its group size");
    v.block(row, col, b.rows(), b.cols()) = b;
    row += static_cast<int>(b.rows());
    col += static_cast<int>(b.cols());
  }
  return v;
}

ReducedBasis ReducedBasis::truncated(int interface_rank, int interior_rank) const
{
  if (interface_rank < 1 || interior_rank < 1)
    throw ConfigError("truncated ranks must be positive");
  ReducedBasis out = *this;
  for (auto& b : out.group_bases)
    b = b.leftCols(std::min<Eigen::Index>(interface_rank, b.cols())).eval();
  for (auto& b : out.interior_bases)
    b = b.leftCols(std::min<Eigen::Index>(interior_rank, b.cols())).eval();
  return out;
}

ReducedBasis build_reduced_basis(const SolutionSnapshots& snapshots, const RankRule& interface_rule,
                                 const RankRule& interior_rule, std::uint64_t seed)
{
  ReducedBasis basis;
  const std::size_t G = snapshots.groups.size();
  const std::size_t S = snapshots.interiors.size();
  std::vector<SvdBasis> svd(G + S);
  parallel_for(G + S, [&](std::size_t k) {
    if (k < G)
      svd[k] = svd_basis(snapshots.groups[k], interface_rule, seed + k);
    else
      svd[k] = svd_basis(snapshots.interiors[k - G], interior_rule, seed + k);
  });
  for (std::size_t k = 0; k < G + S; ++k) {
    auto& target = k < G ? basis.group_bases : basis.interior_bases;
    auto& values = k < G ? basis.group_singular_values : basis.interior_singular_values;
    target.push_back(std::move(svd[k].vectors));
    values.push_back(std::move(svd[k].singular_values));
  }
  return basis;
}

ReducedBlocks reduce_matrices(const LocalSystem& local, const Eigen::MatrixXd& v0, const Eigen::MatrixXd& vb)
{
  if (v0.rows() != local.a00.rows() || vb.rows() != local.abb.rows()) {
    std::ostringstream msg;
    msg << "basis shapes (" << v0.rows() << ", " << vb.rows() << ") do not match the local blocks ("
        << local.a00.rows() << ", " << local.abb.rows() << ")";
    throw ConfigError(msg.str());
  }
  ReducedBlocks out;
  out.a00 = v0.transpose() * (local.a00 * v0);
  out.a0b = v0.transpose() * (local.a0b * vb);
  out.ab0 = vb.transpose() * (local.ab0 * v0);
  out.abb = vb.transpose() * (local.abb * vb);
  return out;
}

void reduce_loads(const LocalSystem& local, const Eigen::MatrixXd& v0, const Eigen::MatrixXd& vb,
                  ReducedBlocks& blocks)
{
  if (v0.rows() != local.f0.size() || vb.rows() != local.fb.size())
    throw ConfigError("basis shapes do not match the local loads");
  blocks.f0 = v0.transpose() * local.f0;
  blocks.fb = vb.transpose() * local.fb;
}

} // namespace ddmr
