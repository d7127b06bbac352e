#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ddmr/config.hpp"
#include "ddmr/mesh_fem.hpp"
#include "ddmr/partition.hpp"
#include "ddmr/random_field.hpp"
#include "ddmr/reduction.hpp"
#include "ddmr/surrogate.hpp"

namespace ddmr {

inline constexpr int kModelFormatVersion = 1;

/// Stream ids for rng_stream, so each consumer draws independent numbers.
enum class RngStream : std::uint64_t {
  projection = 1,
  snapshots = 2,
  training = 3,
  validation = 4,
  solve = 5,
  held_out = 6,
};

Rng stream_rng(std::uint64_t seed, RngStream stream, std::uint64_t index);

/// Offline output: everything the online phase needs, plus the mesh and
/// partition (rebuilt deterministically from the config) for reconstruction.
struct ReducedModel
{
  RunConfig config;
  Mesh mesh;
  DomainPartition partition;

  KLBasis global_kl;  // colored noise only
  KLBasis local_kl;   // one block shape anchored at the origin, N_s terms
  std::vector<LocalProjector> projectors;
  WhiteNoisePartition white_noise;  // white noise only

  ReducedBasis basis;
  IndexSet index_set;
  std::vector<SubdomainSurrogate> surrogates;  // empty until fitted
  std::vector<ReducedBlocks> loads;            // constant reduced loads (diffusion only)

  std::vector<std::vector<int>> reduced_maps;  // local reduced interface -> global reduced index

  bool loads_vary() const { return config.problem == ProblemKind::convection; }
  bool has_surrogates() const { return !surrogates.empty(); }
  int parameter_dim() const { return config.parameter_dim(); }
  int num_subdomains() const { return partition.num_subdomains(); }
  std::string fingerprint() const { return config.fingerprint(); }

  /// Recomputes reduced_maps after the basis changes.
  void refresh_maps();
};

struct StageCost
{
  std::string stage;
  double wall_seconds = 0.0;
  double fe_units = 0.0;
};

struct TrainReport
{
  std::vector<StageCost> stages;
  double fe_solve_seconds = 0.0;  // wall time of one full FE simulation
  std::vector<std::string> warnings;
};

struct TrainOptions
{
  bool fit_surrogates = true;
  std::ostream* log = nullptr;
};

/// Mesh, partition and random-field model for `config`; no snapshots yet.
ReducedModel build_model_skeleton(const RunConfig& config);

/// Runs the whole offline phase. Failures are rethrown as StageError.
ReducedModel offline_train(const RunConfig& config, TrainReport* report = nullptr,
                           const TrainOptions& options = {});

/// Refits surrogates for fewer local terms and/or another polynomial order.
ReducedModel retrain_surrogate(const ReducedModel& model, int local_terms, int order,
                               TrainReport* report = nullptr, std::ostream* log = nullptr);

/// Restricts bases and surrogates to leading columns without refitting.
ReducedModel truncate_model(const ReducedModel& model, int interface_rank, int interior_rank);

/// Draws a global parameter: N(0, I_N) for colored noise, N(0, sigma^2 I) per piece for white noise.
Eigen::VectorXd draw_parameter(const ReducedModel& model, Rng& rng);

/// Per-triangle field eta for a global parameter.
CellField parameter_field(const ReducedModel& model, const Eigen::VectorXd& y);

/// Local parameter of subdomain s.
Eigen::VectorXd local_parameter(const ReducedModel& model, const Eigen::VectorXd& y, int s);

/// Per-triangle field of subdomain s for a local parameter, in Subdomain::triangles order.
std::vector<double> local_field(const ReducedModel& model, const Eigen::VectorXd& ys, int s);

/// Exact reduced blocks (and loads) of subdomain s at local parameter ys.
ReducedBlocks exact_local_blocks(const ReducedModel& model, const LocalAssembler& assembler,
                                 const Eigen::VectorXd& ys, int s);

struct SolveTimings
{
  double project = 0.0;
  double eval = 0.0;
  double schur = 0.0;
  double solve = 0.0;
  double recover = 0.0;
  double total() const { return project + eval + schur + solve + recover; }
};

struct SolveResult
{
  Eigen::VectorXd interface_coeffs;
  std::vector<Eigen::VectorXd> interior_coeffs;
  SolveTimings timings;
  int clamped = 0;  // local coordinates pulled back into the parameter box
  std::string fingerprint;
};

/// Online phase: projection, surrogate evaluation, reduced Schur assembly,
/// interface solve and interior recovery. Never touches mesh-sized arrays.
SolveResult online_solve(const ReducedModel& model, const Eigen::VectorXd& y);

/// Same reduced solve with blocks computed exactly from `eta` on the mesh.
SolveResult online_solve_exact(const ReducedModel& model, const CellField& eta);

/// Reduced solve for given per-subdomain blocks (loads must be filled).
SolveResult solve_reduced(const ReducedModel& model, const std::vector<ReducedBlocks>& blocks);

/// Nodal field from reduced coefficients, with Dirichlet values imposed.
NodalVector reconstruct(const ReducedModel& model, const SolveResult& result);

/// Full FE solve for the field of y on the model's mesh.
NodalVector reference_solution(const ReducedModel& model, const Eigen::VectorXd& y);

double relative_l2(const NodalVector& u, const NodalVector& reference);

struct ValidationSet
{
  std::vector<Eigen::VectorXd> parameters;
  std::vector<NodalVector> references;
  int size() const { return static_cast<int>(parameters.size()); }
};

ValidationSet make_validation_set(const ReducedModel& model, int count, std::uint64_t seed);

struct ErrorStats
{
  double mean = 0.0;
  double max = 0.0;
  int clamped = 0;
};

ErrorStats validation_error(const ReducedModel& model, const ValidationSet& set);

enum class SweepKnob { local_terms, interface_rank, interior_rank, order };

SweepKnob parse_knob(const std::string& name);
std::string knob_name(SweepKnob knob);

/// Default sweep values, bounded by what the model was trained with.
std::vector<int> default_sweep_values(const ReducedModel& model, SweepKnob knob);

struct SweepPoint
{
  int value = 0;
  ErrorStats error;
};

/// Re-truncates or refits one knob at a time, holding the others at the model's values.
std::vector<SweepPoint> run_sweep(const ReducedModel& model, const ValidationSet& set, SweepKnob knob,
                                  const std::vector<int>& values, std::ostream* log = nullptr);

void save_model(const ReducedModel& model, const std::string& path);
ReducedModel load_model(const std::string& path);

/// In-memory forms of the model file.
std::string serialize_model(const ReducedModel& model);
ReducedModel deserialize_model(const std::string& bytes);

} // namespace ddmr
