#include "ddmr/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <zlib.h>

#include "ddmr/error.hpp"

namespace ddmr {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys()
{
  static const std::map<std::string, std::set<std::string>> keys = {
    {"problem", {"kind", "eps", "forcing", "field_scale", "supg_scale"}},
    {"noise", {"kind", "corr_length", "global_terms", "local_terms", "sigma", "box_scale"}},
    {"mesh", {"n"}},
    {"partition", {"sx", "sy"}},
    {"reduction", {"snapshots", "interface_rank", "interior_rank", "energy_tol"}},
    {"surrogate", {"samples", "order", "anisotropy", "projection_points"}},
    {"seeds", {"seed"}},
    {"output", {"model", "costs"}},
  };
  return keys;
}

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& raw)
{
  const std::string text = trim(raw);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ConfigError("invalid value for " + key + ": '" + raw + "'");
  return value;
}

std::string format_double(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

RunConfig RunConfig::parse(const std::string& text)
{
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }

  RunConfig cfg;
  bool forcing_set = false;
  for (const auto& [section, body] : tree) {
    const auto known = known_keys().find(section);
    if (known == known_keys().end())
      throw ConfigError("unknown config section [" + section + "]");
    if (body.empty() && !body.data().empty())
      throw ConfigError("config key '" + section + "' must appear inside a section");
    for (const auto& [key, node] : body) {
      const std::string name = section + "." + key;
      if (!known->second.count(key))
        throw ConfigError("unknown config key " + name);
      const std::string value = trim(node.data());
      if (name == "problem.kind") {
        if (value == "diffusion")
          cfg.problem = ProblemKind::diffusion;
        else if (value == "convection")
          cfg.problem = ProblemKind::convection;
        else
          throw ConfigError("problem.kind must be diffusion or convection, got '" + value + "'");
      } else if (name == "problem.eps") {
        cfg.eps = parse_number<double>(name, value);
      } else if (name == "problem.forcing") {
        cfg.forcing = parse_number<double>(name, value);
        forcing_set = true;
      } else if (name == "problem.field_scale") {
        cfg.field_scale = parse_number<double>(name, value);
      } else if (name == "problem.supg_scale") {
        cfg.supg_scale = parse_number<double>(name, value);
      } else if (name == "noise.kind") {
        if (value == "colored")
          cfg.noise = NoiseKind::colored;
        else if (value == "white")
          cfg.noise = NoiseKind::white;
        else
          throw ConfigError("noise.kind must be colored or white, got '" + value + "'");
      } else if (name == "noise.corr_length") {
        cfg.corr_length = parse_number<double>(name, value);
      } else if (name == "noise.global_terms") {
        cfg.global_terms = parse_number<int>(name, value);
      } else if (name == "noise.local_terms") {
        cfg.local_terms = parse_number<int>(name, value);
      } else if (name == "noise.sigma") {
        cfg.sigma = parse_number<double>(name, value);
      } else if (name == "noise.box_scale") {
        cfg.box_scale = parse_number<double>(name, value);
      } else if (name == "mesh.n") {
        cfg.n = parse_number<int>(name, value);
      } else if (name == "partition.sx") {
        cfg.sx = parse_number<int>(name, value);
      } else if (name == "partition.sy") {
        cfg.sy = parse_number<int>(name, value);
      } else if (name == "reduction.snapshots") {
        cfg.snapshots = parse_number<int>(name, value);
      } else if (name == "reduction.interface_rank") {
        cfg.interface_rank = parse_number<int>(name, value);
      } else if (name == "reduction.interior_rank") {
        cfg.interior_rank = parse_number<int>(name, value);
      } else if (name == "reduction.energy_tol") {
        cfg.energy_tol = parse_number<double>(name, value);
      } else if (name == "surrogate.samples") {
        cfg.training_samples = parse_number<int>(name, value);
      } else if (name == "surrogate.order") {
        cfg.order = parse_number<int>(name, value);
      } else if (name == "surrogate.anisotropy") {
        cfg.anisotropy = parse_number<double>(name, value);
      } else if (name == "surrogate.projection_points") {
        cfg.projection_points = parse_number<int>(name, value);
      } else if (name == "seeds.seed") {
        cfg.seed = parse_number<std::uint64_t>(name, value);
      } else if (name == "output.model") {
        cfg.model_path = value;
      } else if (name == "output.costs") {
        cfg.costs_path = value;
      }
    }
  }
  if (!forcing_set && cfg.problem == ProblemKind::convection)
    cfg.forcing = 0.0;
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

void RunConfig::validate() const
{
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (n < 2 || (n & (n - 1)) != 0)
    fail("mesh.n must be a power of two >= 2, got " + std::to_string(n));
  if (sx < 1 || sy < 1 || n % sx != 0 || n % sy != 0)
    fail("partition " + std::to_string(sx) + "x" + std::to_string(sy) + " must divide mesh.n = "
         + std::to_string(n) + " (require Sx | n and Sy | n)");
  if (problem == ProblemKind::convection && !(eps > 0.0))
    fail("problem.eps must be positive");
  if (!(field_scale >= 0.0) || !(supg_scale >= 0.0))
    fail("problem.field_scale and problem.supg_scale must be nonnegative");
  if (noise == NoiseKind::colored) {
    if (!(corr_length > 0.0))
      fail("noise.corr_length must be positive");
    if (global_terms < 1 || global_terms > n * n)
      fail("noise.global_terms must lie in [1, n*n]");
    const int block_cells = (n / sx) * (n / sy);
    if (local_terms < 1 || local_terms > block_cells)
      fail("noise.local_terms must lie in [1, cells per subdomain]");
  } else if (!(sigma >= 0.0)) {
    fail("noise.sigma must be nonnegative");
  }
  if (!(box_scale > 0.0))
    fail("noise.box_scale must be positive");
  if (snapshots < 1)
    fail("reduction.snapshots must be at least 1");
  if (interface_rank < 1 || interior_rank < 1)
    fail("reduction ranks must be at least 1");
  if (energy_tol < 0.0 || energy_tol >= 1.0)
    fail("reduction.energy_tol must lie in [0, 1)");
  if (energy_tol == 0.0 && (interface_rank > snapshots || interior_rank > snapshots))
    fail("reduction ranks cannot exceed reduction.snapshots");
  if (training_samples < 1)
    fail("surrogate.samples must be at least 1");
  if (order < 0)
    fail("surrogate.order must be nonnegative");
  if (!(anisotropy > 0.0))
    fail("surrogate.anisotropy must be positive");
  if (projection_points != 0 && projection_points <= local_dim())
    fail("surrogate.projection_points must exceed noise.local_terms");
}

std::string RunConfig::canonical() const
{
  std::map<std::string, std::string> kv;
  kv["problem.kind"] = problem == ProblemKind::diffusion ? "diffusion" : "convection";
  kv["problem.eps"] = format_double(eps);
  kv["problem.forcing"] = format_double(forcing);
  kv["problem.field_scale"] = format_double(field_scale);
  kv["problem.supg_scale"] = format_double(supg_scale);
  kv["noise.kind"] = noise == NoiseKind::colored ? "colored" : "white";
  kv["noise.corr_length"] = format_double(corr_length);
  kv["noise.global_terms"] = std::to_string(global_terms);
  kv["noise.local_terms"] = std::to_string(local_terms);
  kv["noise.sigma"] = format_double(sigma);
  kv["noise.box_scale"] = format_double(box_scale);
  kv["mesh.n"] = std::to_string(n);
  kv["partition.sx"] = std::to_string(sx);
  kv["partition.sy"] = std::to_string(sy);
  kv["reduction.snapshots"] = std::to_string(snapshots);
  kv["reduction.interface_rank"] = std::to_string(interface_rank);
  kv["reduction.interior_rank"] = std::to_string(interior_rank);
  kv["reduction.energy_tol"] = format_double(energy_tol);
  kv["surrogate.samples"] = std::to_string(training_samples);
  kv["surrogate.order"] = std::to_string(order);
  kv["surrogate.anisotropy"] = format_double(anisotropy);
  kv["surrogate.projection_points"] = std::to_string(projection_points);
  kv["seeds.seed"] = std::to_string(seed);

  std::ostringstream out;
  std::string section;
  for (const auto& [name, value] : kv) {
    const auto dot = name.find('.');
    const std::string sec = name.substr(0, dot);
    if (sec != section) {
      out << "[" << sec << "]\n";
      section = sec;
    }
    out << name.substr(dot + 1) << " = " << value << "\n";
  }
  return out.str();
}

std::string RunConfig::fingerprint() const
{
  const std::string text = canonical();
  const uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(text.data()), static_cast<uInt>(text.size()));
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

PdeForm RunConfig::form() const
{
  PdeForm f;
  f.kind = problem;
  f.eps = eps;
  f.forcing = forcing;
  f.field_scale = field_scale;
  f.supg_scale = supg_scale;
  return f;
}

int RunConfig::parameter_dim() const
{
  return noise == NoiseKind::white ? sx * sy : global_terms;
}

} // namespace ddmr
