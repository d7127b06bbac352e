#pragma once

#include <cstdint>
#include <string>

#include "ddmr/mesh_fem.hpp"

namespace ddmr {

enum class NoiseKind { colored, white };

/// Everything offline training needs. Parsed from an INI-style file with the
/// sections [problem] [noise] [mesh] [partition] [reduction] [surrogate]
/// [seeds] [output]; unknown sections or keys are rejected.
struct RunConfig
{
  ProblemKind problem = ProblemKind::diffusion;
  double eps = 1e-2;
  double forcing = 100.0;
  double field_scale = 0.2;
  double supg_scale = 1.0;

  NoiseKind noise = NoiseKind::colored;
  double corr_length = 0.25;
  int global_terms = 100;  // N
  int local_terms = 6;     // N_s (forced to 1 for white noise)
  double sigma = 0.1;
  double box_scale = 5.0;  // half-width of the parameter box in standard deviations

  int n = 64;
  int sx = 8;
  int sy = 8;

  int snapshots = 500;        // K_u
  int interface_rank = 6;     // M_{s,j}
  int interior_rank = 19;     // M_s
  double energy_tol = 0.0;    // > 0 selects ranks by retained energy instead

  int training_samples = 1000;  // K_y
  int order = 9;                // p
  double anisotropy = 3.05;
  int projection_points = 0;    // 0 picks max(10 N_s, 50)

  std::uint64_t seed = 1;

  std::string model_path;
  std::string costs_path;

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;

  /// Sorted key=value text of every setting except [output]; round-trips through parse().
  std::string canonical() const;

  /// Hex checksum of canonical().
  std::string fingerprint() const;

  PdeForm form() const;

  /// Global parameter dimension: N for colored noise, Sx*Sy for white noise.
  int parameter_dim() const;
  int local_dim() const { return noise == NoiseKind::white ? 1 : local_terms; }
  double box_half_width() const { return noise == NoiseKind::white ? box_scale * sigma : box_scale; }
};

} // namespace ddmr
