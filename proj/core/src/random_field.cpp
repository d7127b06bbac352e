#include "ddmr/random_field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ddmr/error.hpp"

namespace ddmr {

Rng rng_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

Eigen::VectorXd standard_normal(Rng& rng, int size)
{
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i)
    v[i] = normal(rng);
  return v;
}

Eigen::Vector2d CellGrid::centroid(int c) const
{
  const int i = c % nx;
  const int j = c / nx;
  return {x0 + (i + 0.5) * dx, y0 + (j + 0.5) * dy};
}

int CellGrid::cell_at(const Eigen::Vector2d& x) const
{
  const int i = std::clamp(static_cast<int>(std::floor((x.x() - x0) / dx)), 0, nx - 1);
  const int j = std::clamp(static_cast<int>(std::floor((x.y() - y0) / dy)), 0, ny - 1);
  return j * nx + i;
}

CellGrid mesh_cell_grid(const Mesh& mesh)
{
  return {mesh.n, mesh.n, 0.0, 0.0, mesh.h, mesh.h};
}

CellGrid subdomain_cell_grid(const Mesh& mesh, const DomainPartition& partition, int s)
{
  const Subdomain& sub = partition.subdomains.at(s);
  return {partition.mx, partition.my, sub.bx * partition.mx * mesh.h, sub.by * partition.my * mesh.h,
          mesh.h, mesh.h};
}

double KLBasis::tail(int count) const
{
  const int k = std::clamp(count, 0, size());
  return std::max(0.0, total_variance - lambdas.head(k).sum());
}

Eigen::VectorXd KLBasis::field(const Eigen::VectorXd& y) const
{
  if (y.size() != size())
    throw ConfigError("KL coefficient vector has the wrong dimension");
  return modes * (lambdas.cwiseSqrt().cwiseProduct(y));
}

KLBasis KLBasis::truncated(int count) const
{
  if (count < 0 || count > size())
    throw ConfigError("cannot truncate a KL basis beyond its size");
  KLBasis out = *this;
  out.lambdas = lambdas.head(count);
  out.modes = modes.leftCols(count);
  if (!pairs.empty())
    out.pairs.resize(count);
  return out;
}

namespace {

// Makes the first entry of largest magnitude positive.
void fix_sign(Eigen::Ref<Eigen::VectorXd> v)
{
  Eigen::Index arg = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > best) {
      best = std::abs(v[i]);
      arg = i;
    }
  }
  if (v.size() > 0 && v[arg] < 0.0)
    v = -v;
}

void check_request(int available, double corr_length, int count)
{
  if (!(corr_length > 0.0))
    throw ConfigError("correlation length must be positive");
  if (count < 1 || count > available) {
    std::ostringstream msg;
    msg << "requested " << count << " KL terms but only " << available << " cells are available";
    throw ConfigError(msg.str());
  }
}

// Eigenpairs of the 1D weighted kernel matrix h * exp(-(x_i - x_j)^2 / L^2),
// sorted descending, clamped at zero, eigenvectors Euclidean-normalized.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> kernel_eigen_1d(int cells, double h, double corr_length)
{
  Eigen::MatrixXd K(cells, cells);
  for (int i = 0; i < cells; ++i)
    for (int j = 0; j < cells; ++j) {
      const double d = (i - j) * h / corr_length;
      K(i, j) = h * std::exp(-d * d);
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
  if (eig.info() != Eigen::Success)
    throw SolverError("1D covariance eigensolver did not converge");
  Eigen::VectorXd values = eig.eigenvalues().reverse().cwiseMax(0.0);
  Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();
  for (int k = 0; k < cells; ++k)
    fix_sign(vectors.col(k));
  return {values, vectors};
}

} // namespace

void rebuild_modes(KLBasis& kl)
{
  const CellGrid& g = kl.grid;
  const double scale = 1.0 / std::sqrt(g.cell_area());
  kl.modes.resize(g.num_cells(), static_cast<Eigen::Index>(kl.pairs.size()));
  for (std::size_t k = 0; k < kl.pairs.size(); ++k) {
    const auto fx = kl.factor_x.col(kl.pairs[k][0]);
    const auto fy = kl.factor_y.col(kl.pairs[k][1]);
    for (int j = 0; j < g.ny; ++j)
      kl.modes.col(static_cast<Eigen::Index>(k)).segment(j * g.nx, g.nx) = (scale * fy[j]) * fx;
  }
}

KLBasis kl_decompose(const CellGrid& grid, double corr_length, int count)
{
  check_request(grid.num_cells(), corr_length, count);
  auto [lx, vx] = kernel_eigen_1d(grid.nx, grid.dx, corr_length);
  auto [ly, vy] = kernel_eigen_1d(grid.ny, grid.dy, corr_length);

  struct Candidate
  {
    double value;
    int a;
    int b;
  };
  std::vector<Candidate> all;
  all.reserve(static_cast<std::size_t>(grid.nx) * grid.ny);
  for (int a = 0; a < grid.nx; ++a)
    for (int b = 0; b < grid.ny; ++b)
      all.push_back({lx[a] * ly[b], a, b});
  std::partial_sort(all.begin(), all.begin() + count, all.end(), [](const Candidate& p, const Candidate& q) {
    if (p.value != q.value)
      return p.value > q.value;
    if (p.a + p.b != q.a + q.b)
      return p.a + p.b < q.a + q.b;
    return p.a < q.a;
  });

  KLBasis kl;
  kl.grid = grid;
  kl.corr_length = corr_length;
  kl.total_variance = lx.sum() * ly.sum();
  kl.lambdas.resize(count);
  kl.pairs.resize(count);
  for (int k = 0; k < count; ++k) {
    kl.lambdas[k] = all[k].value;
    kl.pairs[k] = {all[k].a, all[k].b};
  }
  kl.factor_x = std::move(vx);
  kl.factor_y = std::move(vy);
  rebuild_modes(kl);
  return kl;
}

KLBasis kl_decompose_dense(const std::vector<Eigen::Vector2d>& centroids, const Eigen::VectorXd& areas,
                           double corr_length, int count)
{
  const int cells = static_cast<int>(centroids.size());
  if (areas.size() != cells)
    throw ConfigError("one area per cell centroid is required");
  check_request(cells, corr_length, count);

  const Eigen::VectorXd root = areas.cwiseSqrt();
  Eigen::MatrixXd K(cells, cells);
  for (int i = 0; i < cells; ++i)
    for (int j = 0; j < cells; ++j) {
      const double d2 = (centroids[i] - centroids[j]).squaredNorm() / (corr_length * corr_length);
      K(i, j) = root[i] * std::exp(-d2) * root[j];
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
  if (eig.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "dense covariance eigensolver did not converge for " << cells << " cells";
    throw SolverError(msg.str());
  }

  KLBasis kl;
  kl.corr_length = corr_length;
  const Eigen::VectorXd values = eig.eigenvalues().reverse().cwiseMax(0.0);
  kl.total_variance = values.sum();
  kl.lambdas = values.head(count);
  kl.modes.resize(cells, count);
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd v = eig.eigenvectors().col(cells - 1 - k).cwiseQuotient(root);
    fix_sign(v);
    kl.modes.col(k) = v;
  }
  return kl;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_global(const KLBasis& kl, Rng& rng)
{
  Eigen::VectorXd y = standard_normal(rng, kl.size());
  Eigen::VectorXd field = kl.field(y);
  return {std::move(y), std::move(field)};
}

Eigen::VectorXd LocalProjector::project(const Eigen::VectorXd& y) const
{
  if (y.size() != global_dim())
    throw ConfigError("global parameter vector has the wrong dimension for projection");
  const Eigen::VectorXd eta = global_values * y;
  return llt_.solve(local_values.transpose() * eta);
}

void LocalProjector::factorize()
{
  normal_matrix = local_values.transpose() * local_values;
  llt_.compute(normal_matrix);
  bool ok = llt_.info() == Eigen::Success;
  if (ok && normal_matrix.rows() > 0) {
    const Eigen::VectorXd d = llt_.matrixL().toDenseMatrix().diagonal();
    ok = d.minCoeff() > 1e-8 * d.maxCoeff();
  }
  if (!ok) {
    std::ostringstream msg;
    msg << "projection normal matrix is singular with " << num_points()
        << " points; use more projection points";
    throw SolverError(msg.str());
  }
}

LocalProjector LocalProjector::truncated(int dim) const
{
  if (dim < 1 || dim > local_dim())
    throw ConfigError("cannot truncate the projector beyond its local dimension");
  LocalProjector out;
  out.points = points;
  out.global_values = global_values;
  out.local_values = local_values.leftCols(dim);
  out.factorize();
  return out;
}

int default_projection_points(int local_dim)
{
  return std::max(10 * local_dim, 50);
}

LocalProjector make_projector(const KLBasis& global, const KLBasis& local,
                              const Eigen::Vector2d& block_origin, int points, Rng& rng)
{
  if (points <= local.size()) {
    std::ostringstream msg;
    msg << "projection needs more points (" << points << ") than local terms (" << local.size() << ")";
    throw ConfigError(msg.str());
  }
  const CellGrid& lg = local.grid;
  std::uniform_real_distribution<double> ux(0.0, lg.nx * lg.dx);
  std::uniform_real_distribution<double> uy(0.0, lg.ny * lg.dy);

  LocalProjector proj;
  proj.points.resize(points, 2);
  proj.global_values.resize(points, global.size());
  proj.local_values.resize(points, local.size());
  const Eigen::VectorXd gscale = global.lambdas.cwiseSqrt();
  const Eigen::VectorXd lscale = local.lambdas.cwiseSqrt();
  for (int i = 0; i < points; ++i) {
    const Eigen::Vector2d rel(ux(rng), uy(rng));
    const Eigen::Vector2d x = block_origin + rel;
    proj.points.row(i) = x.transpose();
    const int gc = global.grid.cell_at(x);
    const int lc = lg.cell_at(Eigen::Vector2d(lg.x0, lg.y0) + rel);
    proj.global_values.row(i) = global.modes.row(gc).cwiseProduct(gscale.transpose());
    proj.local_values.row(i) = local.modes.row(lc).cwiseProduct(lscale.transpose());
  }
  proj.factorize();
  return proj;
}

Eigen::VectorXd project_local(const KLBasis& global, const KLBasis& local,
                              const Eigen::Vector2d& block_origin, const Eigen::VectorXd& y,
                              int points, Rng& rng)
{
  return make_projector(global, local, block_origin, points, rng).project(y);
}

WhiteNoisePartition make_white_noise(const Mesh& mesh, int wx, int wy, double sigma)
{
  if (wx < 1 || wy < 1 || mesh.n % wx != 0 || mesh.n % wy != 0) {
    std::ostringstream msg;
    msg << "white-noise pieces " << wx << "x" << wy << " must divide the mesh size " << mesh.n;
    throw ConfigError(msg.str());
  }
  if (!(sigma >= 0.0))
    throw ConfigError("white-noise standard deviation must be nonnegative");
  WhiteNoisePartition wn;
  wn.wx = wx;
  wn.wy = wy;
  wn.sigma = sigma;
  wn.piece_of_triangle.resize(mesh.num_triangles());
  const int px = mesh.n / wx;
  const int py = mesh.n / wy;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const int c = Mesh::cell_of_triangle(t);
    const int i = c % mesh.n;
    const int j = c / mesh.n;
    wn.piece_of_triangle[t] = (j / py) * wx + (i / px);
  }
  return wn;
}

CellField white_noise_field(const WhiteNoisePartition& wn, const Eigen::VectorXd& y)
{
  if (y.size() != wn.size()) {
    std::ostringstream msg;
    msg << "white-noise field needs " << wn.size() << " values, got " << y.size();
    throw ConfigError(msg.str());
  }
  CellField field;
  field.values.resize(static_cast<Eigen::Index>(wn.piece_of_triangle.size()));
  for (std::size_t t = 0; t < wn.piece_of_triangle.size(); ++t)
    field.values[static_cast<Eigen::Index>(t)] = y[wn.piece_of_triangle[t]];
  return field;
}

bool aligned_with(const WhiteNoisePartition& wn, const DomainPartition& partition)
{
  if (wn.wx != partition.sx || wn.wy != partition.sy)
    return false;
  for (int s = 0; s < partition.num_subdomains(); ++s)
    for (int t : partition.subdomains[s].triangles)
      if (wn.piece_of_triangle[t] != s)
        return false;
  return true;
}

} // namespace ddmr
