#include "cli.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ddmr/error.hpp"
#include "ddmr/pipeline.hpp"

namespace ddmr {

namespace {

std::string fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_csv(const std::string& path, const std::string& fingerprint, std::uint64_t seed)
{
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw Error("cannot open " + path + " for writing");
  out << "# fingerprint=" << fingerprint << " seed=" << seed << "\n";
  return out;
}

std::string quote(const std::string& field)
{
  if (field.find_first_of(",\"\n") == std::string::npos)
    return field;
  std::string q = "\"";
  for (char c : field) {
    if (c == '"')
      q += '"';
    q += c;
  }
  return q + "\"";
}

void write_nodal(const std::string& path, const NodalVector& u)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error("cannot open " + path + " for writing");
  static_assert(std::endian::native == std::endian::little, "nodal dumps are written little-endian");
  out.write(reinterpret_cast<const char*>(u.data()), static_cast<std::streamsize>(u.size() * sizeof(double)));
}

struct TrainArgs
{
  std::string config;
  std::string out;
  std::string costs;
};

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err)
{
  RunConfig config = RunConfig::load(args.config);
  const std::string model_path = !args.out.empty() ? args.out : config.model_path;
  const std::string costs_path = !args.costs.empty() ? args.costs : config.costs_path;
  if (model_path.empty())
    throw ConfigError("no model output path (use --out or [output] model)");

  TrainReport report;
  TrainOptions options;
  options.log = &err;
  const ReducedModel model = offline_train(config, &report, options);
  save_model(model, model_path);

  if (!costs_path.empty()) {
    std::ofstream csv = open_csv(costs_path, model.fingerprint(), config.seed);
    csv << "stage,wall_seconds,fe_units\n";
    for (const auto& s : report.stages)
      csv << quote(s.stage) << "," << fmt(s.wall_seconds) << "," << fmt(s.fe_units) << "\n";
  }

  out << "model " << model_path << " fingerprint " << model.fingerprint() << "\n";
  out << "one FE solve: " << report.fe_solve_seconds << " s\n";
  for (const auto& s : report.stages)
    out << "  " << s.stage << ": " << s.wall_seconds << " s (" << s.fe_units << " FE units)\n";
  return 0;
}

struct SolveArgs
{
  std::string model;
  int samples = 1;
  std::uint64_t seed = 1;
  std::string out;
  std::string reconstruct;
  std::string coeffs;
};

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream&)
{
  const ReducedModel model = load_model(args.model);
  if (args.samples < 1)
    throw ConfigError("--samples must be at least 1");
  if (!args.reconstruct.empty())
    std::filesystem::create_directories(args.reconstruct);

  std::ofstream csv = open_csv(args.out, model.fingerprint(), args.seed);
  csv << "sample,t_project,t_eval,t_schur,t_solve,t_recover,clamped\n";
  std::ofstream coeffs;
  if (!args.coeffs.empty()) {
    coeffs = open_csv(args.coeffs, model.fingerprint(), args.seed);
    coeffs << "sample,kind,index,coefficient\n";
  }

  double total = 0.0;
  int clamped = 0;
  for (int k = 0; k < args.samples; ++k) {
    Rng rng = stream_rng(args.seed, RngStream::solve, k);
    const Eigen::VectorXd y = draw_parameter(model, rng);
    const SolveResult r = online_solve(model, y);
    const SolveTimings& t = r.timings;
    csv << k << "," << fmt(t.project) << "," << fmt(t.eval) << "," << fmt(t.schur) << "," << fmt(t.solve) << ","
        << fmt(t.recover) << "," << r.clamped << "\n";
    total += t.total();
    clamped += r.clamped;
    if (coeffs.is_open()) {
      for (Eigen::Index i = 0; i < r.interface_coeffs.size(); ++i)
        coeffs << k << ",interface," << i << "," << fmt(r.interface_coeffs[i]) << "\n";
      for (std::size_t s = 0; s < r.interior_coeffs.size(); ++s)
        for (Eigen::Index i = 0; i < r.interior_coeffs[s].size(); ++i)
          coeffs << k << ",interior_" << s << "," << i << "," << fmt(r.interior_coeffs[s][i]) << "\n";
    }
    if (!args.reconstruct.empty()) {
      char name[32];
      std::snprintf(name, sizeof name, "sample_%05d.bin", k);
      write_nodal((std::filesystem::path(args.reconstruct) / name).string(), reconstruct(model, r));
    }
  }
  out << args.samples << " samples, mean online time " << total / args.samples << " s, " << clamped
      << " clamped coordinates\n";
  return 0;
}

struct ValidateArgs
{
  std::string model;
  int samples = 200;
  std::uint64_t seed = 1;
  std::string sweep;
  std::vector<int> values;
  std::string out;
};

int cmd_validate(const ValidateArgs& args, std::ostream& out, std::ostream& err)
{
  const ReducedModel model = load_model(args.model);
  if (args.samples < 1)
    throw ConfigError("--samples must be at least 1");
  const ValidationSet set = make_validation_set(model, args.samples, args.seed);

  std::vector<std::pair<std::string, SweepPoint>> rows;
  if (args.sweep.empty()) {
    rows.push_back({"reference", {0, validation_error(model, set)}});
  } else {
    const SweepKnob knob = parse_knob(args.sweep);
    const std::vector<int> values = args.values.empty() ? default_sweep_values(model, knob) : args.values;
    for (const SweepPoint& p : run_sweep(model, set, knob, values, &err))
      rows.push_back({knob_name(knob), p});
  }

  std::ofstream csv;
  if (!args.out.empty()) {
    csv = open_csv(args.out, model.fingerprint(), args.seed);
    csv << "knob,value,mean_rel_l2,max_rel_l2,clamped\n";
  }
  for (const auto& [knob, p] : rows) {
    out << knob << " " << p.value << ": mean " << p.error.mean << ", max " << p.error.max << "\n";
    if (csv.is_open())
      csv << knob << "," << p.value << "," << fmt(p.error.mean) << "," << fmt(p.error.max) << "," << p.error.clamped
          << "\n";
  }
  return 0;
}

struct BenchArgs
{
  std::string model;
  int samples = 20;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream&)
{
  using Clock = std::chrono::steady_clock;
  const ReducedModel model = load_model(args.model);
  if (args.samples < 1)
    throw ConfigError("--samples must be at least 1");

  FullSolver solver(model.mesh);
  std::vector<double> fe;
  std::vector<double> online;
  SolveTimings sum;
  const PdeForm form = model.config.form();
  for (int k = 0; k < args.samples; ++k) {
    Rng rng = stream_rng(args.seed, RngStream::solve, k);
    const Eigen::VectorXd y = draw_parameter(model, rng);
    const auto start = Clock::now();
    solver.solve(assemble(model.mesh, form, parameter_field(model, y)));
    fe.push_back(std::chrono::duration<double>(Clock::now() - start).count());
    const SolveResult r = online_solve(model, y);
    online.push_back(r.timings.total());
    sum.project += r.timings.project;
    sum.eval += r.timings.eval;
    sum.schur += r.timings.schur;
    sum.solve += r.timings.solve;
    sum.recover += r.timings.recover;
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  };
  const double n = args.samples;
  const double unit = median(fe);
  const std::vector<std::pair<std::string, double>> rows = {
    {"fe_solve_seconds", unit},
    {"online_median_seconds", median(online)},
    {"online_fe_units", median(online) / unit},
    {"online_project_seconds", sum.project / n},
    {"online_eval_seconds", sum.eval / n},
    {"online_schur_seconds", sum.schur / n},
    {"online_solve_seconds", sum.solve / n},
    {"online_recover_seconds", sum.recover / n},
    {"mesh_nodes", static_cast<double>(model.mesh.num_nodes())},
    {"reduced_interface_size", static_cast<double>(model.basis.reduced_interface_size())},
    {"surrogate_terms", static_cast<double>(model.index_set.size())},
  };
  std::ofstream csv;
  if (!args.out.empty()) {
    csv = open_csv(args.out, model.fingerprint(), args.seed);
    csv << "metric,value\n";
  }
  for (const auto& [name, value] : rows) {
    out << name << " " << value << "\n";
    if (csv.is_open())
      csv << name << "," << fmt(value) << "\n";
  }
  return 0;
}

} // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Domain-decomposition model reduction for random convection-diffusion problems"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Run the offline phase and write a model file");
  train_cmd->add_option("config", train.config, "Configuration file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train.out, "Model output path");
  train_cmd->add_option("--costs", train.costs, "Stage cost CSV path");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Answer random online queries with a trained model");
  solve_cmd->add_option("--model", solve.model, "Model file")->required();
  solve_cmd->add_option("--samples", solve.samples, "Number of random parameters");
  solve_cmd->add_option("--seed", solve.seed, "Sample seed");
  solve_cmd->add_option("--out", solve.out, "Per-sample timing CSV")->required();
  solve_cmd->add_option("--reconstruct", solve.reconstruct, "Directory for nodal field dumps");
  solve_cmd->add_option("--coeffs", solve.coeffs, "Reduced coefficient CSV");

  ValidateArgs validate;
  auto* validate_cmd = app.add_subcommand("validate", "Compare online solutions against full FE solves");
  validate_cmd->add_option("--model", validate.model, "Model file")->required();
  validate_cmd->add_option("--samples", validate.samples, "Number of validation parameters");
  validate_cmd->add_option("--seed", validate.seed, "Validation seed");
  validate_cmd->add_option("--sweep", validate.sweep, "Knob to sweep")->check(CLI::IsMember({"ns", "msj", "ms", "p"}));
  validate_cmd->add_option("--values", validate.values, "Knob values (default: trained range)")->delimiter(',');
  validate_cmd->add_option("--out", validate.out, "Error CSV");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time online solves against full FE solves");
  bench_cmd->add_option("--model", bench.model, "Model file")->required();
  bench_cmd->add_option("--samples", bench.samples, "Number of timed samples");
  bench_cmd->add_option("--seed", bench.seed, "Sample seed");
  bench_cmd->add_option("--out", bench.out, "Metric CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train_cmd)
      return cmd_train(train, out, err);
    if (*solve_cmd)
      return cmd_solve(solve, out, err);
    if (*validate_cmd)
      return cmd_validate(validate, out, err);
    return cmd_bench(bench, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const StageError& e) {
    err << "error: training failed in stage '" << e.stage() << "': " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

} // namespace ddmr
