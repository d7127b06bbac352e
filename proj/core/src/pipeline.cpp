#include "ddmr/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

#include "ddmr/error.hpp"
#include "ddmr/parallel.hpp"

namespace ddmr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Splits [0, count) into one contiguous range per worker.
template <class Body>
void for_ranges(int count, Body&& body)
{
  const int workers = std::max(1, std::min(thread_count(), count));
  parallel_for(workers, [&](std::size_t w) {
    const int begin = static_cast<int>(static_cast<long long>(count) * w / workers);
    const int end = static_cast<int>(static_cast<long long>(count) * (w + 1) / workers);
    body(begin, end);
  });
}

template <class Fn>
auto run_stage(const std::string& stage, Fn&& fn)
{
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

void note(std::ostream* log, TrainReport* report, const std::string& text)
{
  if (log)
    *log << "warning: " << text << "\n";
  if (report)
    report->warnings.push_back(text);
}

IndexSet model_index_set(const ReducedModel& model)
{
  const RunConfig& c = model.config;
  if (c.box_half_width() <= 0.0)
    return isotropic_index_set(c.local_dim(), 0);
  if (c.noise == NoiseKind::white)
    return isotropic_index_set(1, c.order);
  return build_index_set(c.local_dim(), c.order, model.local_kl.lambdas, c.anisotropy);
}

ReducedModel copy_without_surrogates(const ReducedModel& model)
{
  ReducedModel out;
  out.config = model.config;
  out.mesh = model.mesh;
  out.partition = model.partition;
  out.global_kl = model.global_kl;
  out.local_kl = model.local_kl;
  out.projectors = model.projectors;
  out.white_noise = model.white_noise;
  out.basis = model.basis;
  out.index_set = model.index_set;
  out.loads = model.loads;
  out.reduced_maps = model.reduced_maps;
  return out;
}

// Generates K_y local training samples for every subdomain and fits the surrogates.
void fit_all_surrogates(ReducedModel& model, TrainReport* report, std::ostream* log)
{
  const RunConfig& c = model.config;
  model.index_set = model_index_set(model);
  const int M = model.index_set.size();
  const int K = c.training_samples;
  if (K < 2 * M) {
    std::ostringstream msg;
    msg << "surrogate.samples = " << K << " is below twice the " << M << " basis functions";
    throw StageError("computing K̂", msg.str());
  }
  if (K < 3 * M) {
    std::ostringstream msg;
    msg << "surrogate.samples = " << K << " is below three times the " << M
        << " basis functions; the fit may be noisy";
    note(log, report, msg.str());
  }

  const int S = model.num_subdomains();
  const int dim = c.local_dim();
  const double half = c.box_half_width();
  const LocalAssembler assembler(model.mesh, model.partition, c.form());
  model.surrogates.assign(S, {});
  if (!model.loads_vary())
    model.loads.assign(S, {});

  std::vector<double> assemble_time(S, 0.0);
  std::vector<double> fit_time(S, 0.0);
  parallel_for(S, [&](std::size_t si) {
    const int s = static_cast<int>(si);
    auto start = Clock::now();
    Rng rng = stream_rng(c.seed, RngStream::training, si);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::MatrixXd t(K, dim);
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < dim; ++i)
        t(k, i) = unit(rng);
    if (half <= 0.0)
      t.setZero();

    const Eigen::MatrixXd v0 = model.basis.interior_bases[s];
    const Eigen::MatrixXd vb = model.basis.interface_basis(model.partition, s);
    const BlockLayout layout{static_cast<int>(v0.cols()), static_cast<int>(vb.cols()), model.loads_vary()};
    Eigen::MatrixXd data(K, layout.entries());
    Eigen::VectorXd row(layout.entries());
    for (int k = 0; k < K; ++k) {
      const Eigen::VectorXd ys = half * t.row(k).transpose();
      const LocalSystem local = assembler.assemble(s, local_field(model, ys, s));
      ReducedBlocks blocks = reduce_matrices(local, v0, vb);
      if (layout.with_loads || k == 0)
        reduce_loads(local, v0, vb, blocks);
      if (!layout.with_loads && k == 0) {
        model.loads[s].f0 = blocks.f0;
        model.loads[s].fb = blocks.fb;
      }
      pack_blocks(blocks, layout, row);
      data.row(k) = row.transpose();
    }
    assemble_time[s] = seconds_since(start);

    start = Clock::now();
    try {
      model.surrogates[s] = fit_surrogate(model.index_set, layout, t, data);
    } catch (const Error& e) {
      throw StageError("computing K̂", "subdomain " + std::to_string(s) + ": " + e.what());
    }
    fit_time[s] = seconds_since(start);
  });

  if (report) {
    double a = 0.0;
    double f = 0.0;
    for (int s = 0; s < S; ++s) {
      a += assemble_time[s];
      f += fit_time[s];
    }
    const double unit = report->fe_solve_seconds > 0.0 ? report->fe_solve_seconds : 1.0;
    report->stages.push_back({"assembling", a, a / unit});
    report->stages.push_back({"computing K̂", f, f / unit});
  }
}

} // namespace

Rng stream_rng(std::uint64_t seed, RngStream stream, std::uint64_t index)
{
  return rng_stream(seed, static_cast<std::uint64_t>(stream), index);
}

void ReducedModel::refresh_maps()
{
  reduced_maps.resize(partition.num_subdomains());
  for (int s = 0; s < partition.num_subdomains(); ++s)
    reduced_maps[s] = basis.local_to_global(partition, s);
}

ReducedModel build_model_skeleton(const RunConfig& config)
{
  config.validate();
  ReducedModel model;
  model.config = config;
  model.mesh = build_mesh(config.n);
  model.partition = build_partition(model.mesh, config.sx, config.sy);
  if (config.noise == NoiseKind::white) {
    model.white_noise = make_white_noise(model.mesh, config.sx, config.sy, config.sigma);
    return model;
  }

  model.global_kl = kl_decompose(mesh_cell_grid(model.mesh), config.corr_length, config.global_terms);
  model.local_kl = kl_decompose(subdomain_cell_grid(model.mesh, model.partition, 0), config.corr_length,
                                config.local_terms);
  const int points = config.projection_points > 0 ? config.projection_points
                                                  : default_projection_points(config.local_terms);
  const int S = model.partition.num_subdomains();
  model.projectors.resize(S);
  parallel_for(S, [&](std::size_t s) {
    const Subdomain& sub = model.partition.subdomains[s];
    const Eigen::Vector2d origin(sub.bx * model.partition.mx * model.mesh.h,
                                 sub.by * model.partition.my * model.mesh.h);
    Rng rng = stream_rng(config.seed, RngStream::projection, s);
    model.projectors[s] = make_projector(model.global_kl, model.local_kl, origin, points, rng);
  });
  return model;
}

ReducedModel offline_train(const RunConfig& config, TrainReport* report, const TrainOptions& options)
{
  TrainReport local_report;
  TrainReport& rep = report ? *report : local_report;
  rep = {};

  auto start = Clock::now();
  ReducedModel model = run_stage("KL expansion", [&] { return build_model_skeleton(config); });
  const double kl_seconds = seconds_since(start);

  const int Ku = config.snapshots;
  SolutionSnapshots snaps = allocate_snapshots(model.partition, Ku);
  start = Clock::now();
  std::vector<double> per_solve(Ku, 0.0);
  run_stage("FE solves", [&] {
    const PdeForm form = config.form();
    for_ranges(Ku, [&](int begin, int end) {
      FullSolver solver(model.mesh);
      for (int k = begin; k < end; ++k) {
        const auto t0 = Clock::now();
        Rng rng = stream_rng(config.seed, RngStream::snapshots, k);
        const Eigen::VectorXd y = draw_parameter(model, rng);
        try {
          const NodalVector u = solver.solve(assemble(model.mesh, form, parameter_field(model, y)));
          store_snapshot(model.partition, u, k, snaps);
        } catch (const Error& e) {
          throw SolverError("snapshot sample " + std::to_string(k) + ": " + e.what());
        }
        per_solve[k] = seconds_since(t0);
      }
    });
    return 0;
  });
  const double fe_seconds = seconds_since(start);
  double unit = 0.0;
  for (double t : per_solve)
    unit += t;
  unit /= Ku;
  rep.fe_solve_seconds = unit;
  rep.stages.push_back({"KL expansion", kl_seconds, kl_seconds / unit});
  rep.stages.push_back({"FE solves", fe_seconds, fe_seconds / unit});

  const RankRule interface_rule{config.energy_tol > 0.0 ? 0 : config.interface_rank, config.energy_tol};
  const RankRule interior_rule{config.energy_tol > 0.0 ? 0 : config.interior_rank, config.energy_tol};

  start = Clock::now();
  run_stage("SVD interfaces", [&] {
    const std::size_t G = snaps.groups.size();
    std::vector<SvdBasis> svd(G);
    parallel_for(G, [&](std::size_t g) { svd[g] = svd_basis(snaps.groups[g], interface_rule, config.seed + g); });
    for (auto& b : svd) {
      model.basis.group_bases.push_back(std::move(b.vectors));
      model.basis.group_singular_values.push_back(std::move(b.singular_values));
    }
    return 0;
  });
  double t = seconds_since(start);
  rep.stages.push_back({"SVD interfaces", t, t / unit});

  start = Clock::now();
  run_stage("SVD subdomains", [&] {
    const std::size_t S = snaps.interiors.size();
    std::vector<SvdBasis> svd(S);
    parallel_for(S, [&](std::size_t s) {
      svd[s] = svd_basis(snaps.interiors[s], interior_rule, config.seed + 0x10000 + s);
    });
    for (auto& b : svd) {
      model.basis.interior_bases.push_back(std::move(b.vectors));
      model.basis.interior_singular_values.push_back(std::move(b.singular_values));
    }
    return 0;
  });
  t = seconds_since(start);
  rep.stages.push_back({"SVD subdomains", t, t / unit});
  snaps = {};
  model.refresh_maps();

  if (options.fit_surrogates) {
    run_stage("assembling", [&] {
      fit_all_surrogates(model, &rep, options.log);
      return 0;
    });
  }
  return model;
}

ReducedModel retrain_surrogate(const ReducedModel& model, int local_terms, int order,
                               TrainReport* report, std::ostream* log)
{
  const RunConfig& c = model.config;
  if (order < 0)
    throw ConfigError("polynomial order must be nonnegative");
  if (c.noise == NoiseKind::white) {
    if (local_terms != 1)
      throw ConfigError("white noise has exactly one local term per subdomain");
  } else if (local_terms < 1 || local_terms > c.local_terms) {
    std::ostringstream msg;
    msg << "local terms " << local_terms << " outside the trained range [1, " << c.local_terms << "]";
    throw ConfigError(msg.str());
  }

  ReducedModel out = copy_without_surrogates(model);
  out.config.order = order;
  if (c.noise == NoiseKind::colored) {
    out.config.local_terms = local_terms;
    out.local_kl = model.local_kl.truncated(local_terms);
    for (auto& p : out.projectors)
      p = p.truncated(local_terms);
  }
  fit_all_surrogates(out, report, log);
  return out;
}

ReducedModel truncate_model(const ReducedModel& model, int interface_rank, int interior_rank)
{
  if (interface_rank < 1 || interior_rank < 1)
    throw ConfigError("truncated ranks must be positive");
  int max_interface = 0;
  int max_interior = 0;
  for (std::size_t g = 0; g < model.basis.group_bases.size(); ++g)
    max_interface = std::max(max_interface, model.basis.group_rank(static_cast<int>(g)));
  for (std::size_t s = 0; s < model.basis.interior_bases.size(); ++s)
    max_interior = std::max(max_interior, model.basis.interior_rank(static_cast<int>(s)));
  if (interface_rank > max_interface || interior_rank > max_interior) {
    std::ostringstream msg;
    msg << "requested ranks (" << interface_rank << ", " << interior_rank << ") exceed the trained maxima ("
        << max_interface << ", " << max_interior << ")";
    throw ConfigError(msg.str());
  }

  ReducedModel out = copy_without_surrogates(model);
  out.basis = model.basis.truncated(interface_rank, interior_rank);
  if (model.config.energy_tol == 0.0) {
    out.config.interface_rank = interface_rank;
    out.config.interior_rank = interior_rank;
  }
  out.refresh_maps();

  for (int s = 0; s < model.num_subdomains(); ++s) {
    std::vector<int> keep;
    int offset = 0;
    for (int g : model.partition.subdomains[s].groups) {
      for (int c = 0; c < out.basis.group_rank(g); ++c)
        keep.push_back(offset + c);
      offset += model.basis.group_rank(g);
    }
    const int m0 = out.basis.interior_rank(s);
    if (model.has_surrogates())
      out.surrogates.push_back(model.surrogates[s].sliced(m0, keep));
    if (!model.loads.empty()) {
      out.loads[s].f0 = model.loads[s].f0.head(m0).eval();
      out.loads[s].fb = model.loads[s].fb(keep).eval();
    }
  }
  return out;
}

Eigen::VectorXd draw_parameter(const ReducedModel& model, Rng& rng)
{
  if (model.config.noise == NoiseKind::white)
    return model.config.sigma * standard_normal(rng, model.parameter_dim());
  return standard_normal(rng, model.parameter_dim());
}

CellField parameter_field(const ReducedModel& model, const Eigen::VectorXd& y)
{
  if (y.size() != model.parameter_dim()) {
    std::ostringstream msg;
    msg << "parameter has " << y.size() << " entries, the model expects " << model.parameter_dim();
    throw ConfigError(msg.str());
  }
  if (model.config.noise == NoiseKind::white)
    return white_noise_field(model.white_noise, y);
  return triangle_field_from_cells(model.mesh, model.global_kl.field(y));
}

Eigen::VectorXd local_parameter(const ReducedModel& model, const Eigen::VectorXd& y, int s)
{
  if (y.size() != model.parameter_dim()) {
    std::ostringstream msg;
    msg << "parameter has " << y.size() << " entries, the model expects " << model.parameter_dim();
    throw ConfigError(msg.str());
  }
  if (model.config.noise == NoiseKind::white)
    return Eigen::VectorXd::Constant(1, y[s]);
  return model.projectors.at(s).project(y);
}

std::vector<double> local_field(const ReducedModel& model, const Eigen::VectorXd& ys, int s)
{
  const Subdomain& sub = model.partition.subdomains.at(s);
  std::vector<double> values(sub.triangles.size());
  if (model.config.noise == NoiseKind::white) {
    std::fill(values.begin(), values.end(), ys[0]);
    return values;
  }
  const Eigen::VectorXd cells = model.local_kl.field(ys);
  for (std::size_t lt = 0; lt < values.size(); ++lt)
    values[lt] = cells[static_cast<Eigen::Index>(lt / 2)];
  return values;
}

ReducedBlocks exact_local_blocks(const ReducedModel& model, const LocalAssembler& assembler,
                                 const Eigen::VectorXd& ys, int s)
{
  const LocalSystem local = assembler.assemble(s, local_field(model, ys, s));
  const Eigen::MatrixXd& v0 = model.basis.interior_bases.at(s);
  const Eigen::MatrixXd vb = model.basis.interface_basis(model.partition, s);
  ReducedBlocks blocks = reduce_matrices(local, v0, vb);
  reduce_loads(local, v0, vb, blocks);
  return blocks;
}

namespace {

// Reduced Schur assembly, interface solve and interior recovery.
void reduced_solve(const ReducedModel& model, const std::vector<ReducedBlocks>& blocks, SolveResult& result)
{
  const int S = model.num_subdomains();
  const int R = model.basis.reduced_interface_size();

  auto start = Clock::now();
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> interior(S);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(R, R);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(R);
  for (int s = 0; s < S; ++s) {
    const ReducedBlocks& b = blocks[s];
    const std::vector<int>& map = model.reduced_maps[s];
    Eigen::MatrixXd bs = b.abb;
    Eigen::VectorXd gs = b.fb;
    if (b.a00.rows() > 0) {
      interior[s].compute(b.a00);
      const double rcond = interior[s].rcond();
      if (!(rcond > 1e-14)) {
        std::ostringstream msg;
        msg << "reduced interior block of subdomain " << s << " is singular (rcond " << rcond << ")";
        throw SolverError(msg.str());
      }
      bs.noalias() -= b.ab0 * interior[s].solve(b.a0b);
      gs.noalias() -= b.ab0 * interior[s].solve(b.f0);
    }
    for (std::size_t j = 0; j < map.size(); ++j) {
      g[map[j]] += gs[j];
      for (std::size_t i = 0; i < map.size(); ++i)
        B(map[i], map[j]) += bs(i, j);
    }
  }
  result.timings.schur = seconds_since(start);

  start = Clock::now();
  if (R > 0) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-15)) {
      std::ostringstream msg;
      msg << "reduced interface system is singular (rcond " << rcond << ")";
      throw SolverError(msg.str());
    }
    result.interface_coeffs = lu.solve(g);
  } else {
    result.interface_coeffs.resize(0);
  }
  result.timings.solve = seconds_since(start);

  start = Clock::now();
  result.interior_coeffs.resize(S);
  for (int s = 0; s < S; ++s) {
    const ReducedBlocks& b = blocks[s];
    if (b.a00.rows() == 0) {
      result.interior_coeffs[s].resize(0);
      continue;
    }
    const std::vector<int>& map = model.reduced_maps[s];
    Eigen::VectorXd cb(map.size());
    for (std::size_t j = 0; j < map.size(); ++j)
      cb[j] = result.interface_coeffs[map[j]];
    result.interior_coeffs[s] = interior[s].solve(b.f0 - b.a0b * cb);
  }
  result.timings.recover = seconds_since(start);
}

void check_blocks(const ReducedModel& model, const std::vector<ReducedBlocks>& blocks)
{
  if (static_cast<int>(blocks.size()) != model.num_subdomains())
    throw ConfigError("one set of reduced blocks per subdomain is required");
  for (int s = 0; s < model.num_subdomains(); ++s) {
    const int m0 = model.basis.interior_rank(s);
    const int mb = static_cast<int>(model.reduced_maps[s].size());
    const ReducedBlocks& b = blocks[s];
    if (b.a00.rows() != m0 || b.abb.rows() != mb || b.f0.size() != m0 || b.fb.size() != mb)
      throw ConfigError("reduced blocks of subdomain " + std::to_string(s) + " do not match the model ranks");
  }
}

} // namespace

SolveResult solve_reduced(const ReducedModel& model, const std::vector<ReducedBlocks>& blocks)
{
  check_blocks(model, blocks);
  SolveResult result;
  result.fingerprint = model.fingerprint();
  reduced_solve(model, blocks, result);
  return result;
}

SolveResult online_solve(const ReducedModel& model, const Eigen::VectorXd& y)
{
  if (!model.has_surrogates())
    throw ConfigError("model has no fitted surrogates");
  if (y.size() != model.parameter_dim()) {
    std::ostringstream msg;
    msg << "parameter has " << y.size() << " entries, the model expects " << model.parameter_dim();
    throw ConfigError(msg.str());
  }
  const int S = model.num_subdomains();
  SolveResult result;
  result.fingerprint = model.fingerprint();

  auto start = Clock::now();
  std::vector<Eigen::VectorXd> ys(S);
  for (int s = 0; s < S; ++s)
    ys[s] = local_parameter(model, y, s);
  result.timings.project = seconds_since(start);

  start = Clock::now();
  const ParameterBox box{model.config.box_half_width()};
  std::vector<ReducedBlocks> blocks(S);
  Eigen::VectorXd t;
  for (int s = 0; s < S; ++s) {
    result.clamped += box.to_unit(ys[s], t);
    const SubdomainSurrogate& sur = model.surrogates[s];
    blocks[s] = unpack_blocks(sur.evaluate(legendre_eval(model.index_set, t)), sur.layout);
    if (!sur.layout.with_loads) {
      blocks[s].f0 = model.loads[s].f0;
      blocks[s].fb = model.loads[s].fb;
    }
  }
  result.timings.eval = seconds_since(start);

  reduced_solve(model, blocks, result);
  return result;
}

SolveResult online_solve_exact(const ReducedModel& model, const CellField& eta)
{
  const int S = model.num_subdomains();
  SolveResult result;
  result.fingerprint = model.fingerprint();
  auto start = Clock::now();
  const LocalAssembler assembler(model.mesh, model.partition, model.config.form());
  std::vector<ReducedBlocks> blocks(S);
  parallel_for(S, [&](std::size_t si) {
    const int s = static_cast<int>(si);
    const LocalSystem local = assembler.assemble(s, eta);
    const Eigen::MatrixXd& v0 = model.basis.interior_bases[s];
    const Eigen::MatrixXd vb = model.basis.interface_basis(model.partition, s);
    blocks[s] = reduce_matrices(local, v0, vb);
    reduce_loads(local, v0, vb, blocks[s]);
  });
  result.timings.eval = seconds_since(start);
  reduced_solve(model, blocks, result);
  return result;
}

NodalVector reconstruct(const ReducedModel& model, const SolveResult& result)
{
  if (result.fingerprint != model.fingerprint())
    throw ConfigError("solve result was produced by a different model (fingerprint "
                      + result.fingerprint + " vs " + model.fingerprint() + ")");
  const int S = model.num_subdomains();
  if (static_cast<int>(result.interior_coeffs.size()) != S
      || result.interface_coeffs.size() != model.basis.reduced_interface_size())
    throw ConfigError("solve result does not match the model ranks");

  NodalVector u = dirichlet_data(model.mesh, model.config.problem).values;
  const std::vector<int> offsets = model.basis.group_offsets();
  for (std::size_t g = 0; g < model.partition.groups.size(); ++g) {
    const Eigen::MatrixXd& v = model.basis.group_bases[g];
    const Eigen::VectorXd values = v * result.interface_coeffs.segment(offsets[g], v.cols());
    const auto& nodes = model.partition.groups[g].nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      u[nodes[i]] = values[static_cast<Eigen::Index>(i)];
  }
  for (int s = 0; s < S; ++s) {
    const Eigen::MatrixXd& v = model.basis.interior_bases[s];
    if (result.interior_coeffs[s].size() != v.cols())
      throw ConfigError("interior coefficients do not match the model ranks");
    const Eigen::VectorXd values = v * result.interior_coeffs[s];
    const auto& nodes = model.partition.subdomains[s].interior_nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      u[nodes[i]] = values[static_cast<Eigen::Index>(i)];
  }
  return u;
}

NodalVector reference_solution(const ReducedModel& model, const Eigen::VectorXd& y)
{
  return solve_full(assemble(model.mesh, model.config.form(), parameter_field(model, y)));
}

double relative_l2(const NodalVector& u, const NodalVector& reference)
{
  if (u.size() != reference.size())
    throw ConfigError("cannot compare nodal vectors of different length");
  const double denom = reference.norm();
  return denom > 0.0 ? (u - reference).norm() / denom : (u - reference).norm();
}

ValidationSet make_validation_set(const ReducedModel& model, int count, std::uint64_t seed)
{
  ValidationSet set;
  set.parameters.resize(count);
  set.references.resize(count);
  const PdeForm form = model.config.form();
  for_ranges(count, [&](int begin, int end) {
    FullSolver solver(model.mesh);
    for (int k = begin; k < end; ++k) {
      Rng rng = stream_rng(seed, RngStream::validation, k);
      set.parameters[k] = draw_parameter(model, rng);
      set.references[k] = solver.solve(assemble(model.mesh, form, parameter_field(model, set.parameters[k])));
    }
  });
  return set;
}

ErrorStats validation_error(const ReducedModel& model, const ValidationSet& set)
{
  std::vector<double> errors(set.size());
  std::vector<int> clamped(set.size());
  parallel_for(set.size(), [&](std::size_t k) {
    const SolveResult r = online_solve(model, set.parameters[k]);
    errors[k] = relative_l2(reconstruct(model, r), set.references[k]);
    clamped[k] = r.clamped;
  });
  ErrorStats stats;
  for (int k = 0; k < set.size(); ++k) {
    stats.mean += errors[k];
    stats.max = std::max(stats.max, errors[k]);
    stats.clamped += clamped[k];
  }
  if (set.size() > 0)
    stats.mean /= set.size();
  return stats;
}

SweepKnob parse_knob(const std::string& name)
{
  if (name == "ns")
    return SweepKnob::local_terms;
  if (name == "msj")
    return SweepKnob::interface_rank;
  if (name == "ms")
    return SweepKnob::interior_rank;
  if (name == "p")
    return SweepKnob::order;
  throw ConfigError("unknown sweep knob '" + name + "' (expected ns, msj, ms or p)");
}

std::string knob_name(SweepKnob knob)
{
  switch (knob) {
  case SweepKnob::local_terms:
    return "ns";
  case SweepKnob::interface_rank:
    return "msj";
  case SweepKnob::interior_rank:
    return "ms";
  case SweepKnob::order:
    return "p";
  }
  return "?";
}

std::vector<int> default_sweep_values(const ReducedModel& model, SweepKnob knob)
{
  const RunConfig& c = model.config;
  std::vector<int> values;
  switch (knob) {
  case SweepKnob::local_terms:
    for (int v = 1; v <= c.local_dim(); ++v)
      values.push_back(v);
    break;
  case SweepKnob::interface_rank:
    for (int v = 1; v <= c.interface_rank; ++v)
      values.push_back(v);
    break;
  case SweepKnob::interior_rank:
    values.push_back(1);
    for (int v = 4; v < c.interior_rank; v += 5)
      values.push_back(v);
    if (values.back() != c.interior_rank)
      values.push_back(c.interior_rank);
    break;
  case SweepKnob::order:
    for (int v = c.order % 2; v <= c.order; v += 2)
      values.push_back(v);
    break;
  }
  return values;
}

std::vector<SweepPoint> run_sweep(const ReducedModel& model, const ValidationSet& set, SweepKnob knob,
                                  const std::vector<int>& values, std::ostream* log)
{
  const RunConfig& c = model.config;
  std::vector<SweepPoint> points;
  for (int v : values) {
    SweepPoint point;
    point.value = v;
    switch (knob) {
    case SweepKnob::local_terms:
      point.error = validation_error(retrain_surrogate(model, v, c.order, nullptr, log), set);
      break;
    case SweepKnob::order:
      if (v > c.order)
        throw ConfigError("order " + std::to_string(v) + " exceeds the trained order " + std::to_string(c.order));
      point.error = validation_error(retrain_surrogate(model, c.local_dim(), v, nullptr, log), set);
      break;
    case SweepKnob::interface_rank:
      point.error = validation_error(truncate_model(model, v, c.interior_rank), set);
      break;
    case SweepKnob::interior_rank:
      point.error = validation_error(truncate_model(model, c.interface_rank, v), set);
      break;
    }
    if (log)
      *log << knob_name(knob) << "=" << v << " mean=" << point.error.mean << " max=" << point.error.max << "\n";
    points.push_back(point);
  }
  return points;
}

} // namespace ddmr
