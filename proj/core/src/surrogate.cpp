#include "ddmr/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <Eigen/QR>

#include "ddmr/error.hpp"

namespace ddmr {

int IndexSet::max_degree(int i) const
{
  int d = 0;
  for (const auto& nu : indices)
    d = std::max(d, nu[i]);
  return d;
}

IndexSet weighted_index_set(int dim, int order, const Eigen::VectorXd& weights)
{
  if (dim < 1)
    throw ConfigError("index set dimension must be at least 1");
  if (order < 0)
    throw ConfigError("polynomial order must be nonnegative");
  if (weights.size() != dim || weights.minCoeff() <= 0.0)
    throw ConfigError("index set weights must be positive, one per dimension");

  IndexSet set;
  set.dim = dim;
  set.order = order;
  set.weights = weights;
  const double budget = order * weights.minCoeff() + 1e-9;

  std::vector<int> nu(dim, 0);
  std::function<void(int, double)> visit = [&](int i, double used) {
    if (i == dim) {
      set.indices.push_back(nu);
      return;
    }
    for (int k = 0; used + k * weights[i] <= budget; ++k) {
      nu[i] = k;
      visit(i + 1, used + k * weights[i]);
    }
    nu[i] = 0;
  };
  visit(0, 0.0);

  auto cost = [&](const std::vector<int>& v) {
    double c = 0.0;
    for (int i = 0; i < dim; ++i)
      c += v[i] * weights[i];
    return c;
  };
  std::stable_sort(set.indices.begin(), set.indices.end(), [&](const auto& a, const auto& b) {
    const double ca = cost(a);
    const double cb = cost(b);
    if (std::abs(ca - cb) > 1e-12)
      return ca < cb;
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
  });
  return set;
}

IndexSet isotropic_index_set(int dim, int order)
{
  return weighted_index_set(dim, order, Eigen::VectorXd::Ones(dim));
}

IndexSet build_index_set(int dim, int order, const Eigen::VectorXd& local_lambdas, double anisotropy)
{
  if (local_lambdas.size() < dim)
    throw ConfigError("index set needs one local eigenvalue per dimension");
  Eigen::VectorXd w = Eigen::VectorXd::Ones(dim);
  const double first = local_lambdas[0];
  const double last = local_lambdas[dim - 1];
  if (dim > 1 && first > 0.0 && last > 0.0 && std::log(first / last) > 1e-8) {
    const double span = std::log(first / last);
    for (int i = 1; i < dim; ++i)
      w[i] = std::max(1.0, anisotropy * std::log(first / local_lambdas[i]) / span);
  }
  return weighted_index_set(dim, order, w);
}

Eigen::VectorXd legendre_1d(int degree, double t)
{
  Eigen::VectorXd p(degree + 1);
  p[0] = 1.0;
  if (degree >= 1)
    p[1] = t;
  for (int k = 1; k < degree; ++k)
    p[k + 1] = ((2 * k + 1) * t * p[k] - k * p[k - 1]) / (k + 1);
  for (int k = 0; k <= degree; ++k)
    p[k] *= std::sqrt(2.0 * k + 1.0);
  return p;
}

Eigen::VectorXd legendre_eval(const IndexSet& set, const Eigen::VectorXd& t)
{
  if (t.size() != set.dim) {
    std::ostringstream msg;
    msg << "Legendre evaluation expects " << set.dim << " coordinates, got " << t.size();
    throw ConfigError(msg.str());
  }
  std::vector<Eigen::VectorXd> table(set.dim);
  for (int i = 0; i < set.dim; ++i)
    table[i] = legendre_1d(set.order, t[i]);
  Eigen::VectorXd phi(set.size());
  for (int m = 0; m < set.size(); ++m) {
    double v = 1.0;
    for (int i = 0; i < set.dim; ++i)
      v *= table[i][set.indices[m][i]];
    phi[m] = v;
  }
  return phi;
}

int ParameterBox::to_unit(const Eigen::VectorXd& y, Eigen::VectorXd& t) const
{
  t.resize(y.size());
  int clamped = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (half_width <= 0.0) {
      t[i] = 0.0;
      clamped += y[i] != 0.0;
      continue;
    }
    const double v = y[i] / half_width;
    if (v > 1.0 || v < -1.0) {
      ++clamped;
      t[i] = std::clamp(v, -1.0, 1.0);
    } else {
      t[i] = v;
    }
  }
  return clamped;
}

void pack_blocks(const ReducedBlocks& b, const BlockLayout& layout, Eigen::Ref<Eigen::VectorXd> out)
{
  const int m0 = layout.interior;
  const int mb = layout.interface;
  if (b.a00.rows() != m0 || b.a00.cols() != m0 || b.a0b.rows() != m0 || b.a0b.cols() != mb
      || b.ab0.rows() != mb || b.ab0.cols() != m0 || b.abb.rows() != mb || b.abb.cols() != mb)
    throw ConfigError("reduced block shapes do not match the layout");
  if (out.size() != layout.entries())
    throw ConfigError("packed entry vector has the wrong length");
  out.segment(layout.offset_00(), m0 * m0) = b.a00.reshaped();
  out.segment(layout.offset_0b(), m0 * mb) = b.a0b.reshaped();
  out.segment(layout.offset_b0(), mb * m0) = b.ab0.reshaped();
  out.segment(layout.offset_bb(), mb * mb) = b.abb.reshaped();
  if (layout.with_loads) {
    if (b.f0.size() != m0 || b.fb.size() != mb)
      throw ConfigError("reduced load shapes do not match the layout");
    out.segment(layout.offset_f0(), m0) = b.f0;
    out.segment(layout.offset_fb(), mb) = b.fb;
  }
}

ReducedBlocks unpack_blocks(const Eigen::VectorXd& e, const BlockLayout& layout)
{
  if (e.size() != layout.entries())
    throw ConfigError("packed entry vector has the wrong length");
  const int m0 = layout.interior;
  const int mb = layout.interface;
  ReducedBlocks b;
  b.a00 = e.segment(layout.offset_00(), m0 * m0).reshaped(m0, m0);
  b.a0b = e.segment(layout.offset_0b(), m0 * mb).reshaped(m0, mb);
  b.ab0 = e.segment(layout.offset_b0(), mb * m0).reshaped(mb, m0);
  b.abb = e.segment(layout.offset_bb(), mb * mb).reshaped(mb, mb);
  if (layout.with_loads) {
    b.f0 = e.segment(layout.offset_f0(), m0);
    b.fb = e.segment(layout.offset_fb(), mb);
  }
  return b;
}

Eigen::VectorXd SubdomainSurrogate::evaluate(const Eigen::VectorXd& phi) const
{
  if (phi.size() != coefficients.rows())
    throw ConfigError("basis value vector does not match the surrogate");
  return coefficients.transpose() * phi;
}

SubdomainSurrogate SubdomainSurrogate::sliced(int interior, const std::vector<int>& keep) const
{
  const BlockLayout& old = layout;
  if (interior < 0 || interior > old.interior)
    throw ConfigError("cannot keep more interior coordinates than were trained");
  for (int k : keep)
    if (k < 0 || k >= old.interface)
      throw ConfigError("interface coordinate out of range");

  BlockLayout nl{interior, static_cast<int>(keep.size()), old.with_loads};
  std::vector<int> columns;
  columns.reserve(nl.entries());
  for (int j = 0; j < interior; ++j)
    for (int i = 0; i < interior; ++i)
      columns.push_back(old.offset_00() + j * old.interior + i);
  for (int j : keep)
    for (int i = 0; i < interior; ++i)
      columns.push_back(old.offset_0b() + j * old.interior + i);
  for (int j = 0; j < interior; ++j)
    for (int i : keep)
      columns.push_back(old.offset_b0() + j * old.interface + i);
  for (int j : keep)
    for (int i : keep)
      columns.push_back(old.offset_bb() + j * old.interface + i);
  if (old.with_loads) {
    for (int i = 0; i < interior; ++i)
      columns.push_back(old.offset_f0() + i);
    for (int i : keep)
      columns.push_back(old.offset_fb() + i);
  }

  SubdomainSurrogate out;
  out.layout = nl;
  out.coefficients = coefficients(Eigen::all, columns);
  return out;
}

Eigen::MatrixXd design_matrix(const IndexSet& set, const Eigen::MatrixXd& unit_samples)
{
  if (unit_samples.cols() != set.dim)
    throw ConfigError("sample dimension does not match the index set");
  Eigen::MatrixXd design(unit_samples.rows(), set.size());
  for (Eigen::Index k = 0; k < unit_samples.rows(); ++k)
    design.row(k) = legendre_eval(set, unit_samples.row(k).transpose()).transpose();
  return design;
}

Eigen::MatrixXd fit_dls(const Eigen::MatrixXd& design, const Eigen::MatrixXd& data)
{
  const Eigen::Index K = design.rows();
  const Eigen::Index M = design.cols();
  if (data.rows() != K)
    throw ConfigError("least-squares data needs one row per sample");
  if (K < 2 * M) {
    std::ostringstream msg;
    msg << "least-squares fit needs at least " << 2 * M << " samples for " << M
        << " basis functions, got " << K;
    throw ConfigError(msg.str());
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-12);
  if (qr.rank() < M) {
    std::ostringstream msg;
    msg << "least-squares design matrix is rank deficient (rank " << qr.rank() << " of " << M << ")";
    throw SolverError(msg.str());
  }
  return qr.solve(data);
}

SubdomainSurrogate fit_surrogate(const IndexSet& set, const BlockLayout& layout,
                                 const Eigen::MatrixXd& unit_samples, const Eigen::MatrixXd& data)
{
  if (data.cols() != layout.entries())
    throw ConfigError("training data does not match the block layout");
  SubdomainSurrogate out;
  out.layout = layout;
  out.coefficients = fit_dls(design_matrix(set, unit_samples), data);
  return out;
}

} // namespace ddmr
