#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run
{
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args)
{
  args.insert(args.begin(), "ddmr");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  Run r;
  r.code = ddmr::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text)
{
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// Drops the timing columns (all but the first and last) of the solve CSV.
std::string without_timings(const std::string& csv)
{
  std::string out;
  for (const auto& l : lines(csv)) {
    if (l.starts_with("#") || l.starts_with("sample")) {
      out += l + "\n";
      continue;
    }
    out += l.substr(0, l.find(',')) + "," + l.substr(l.rfind(',') + 1) + "\n";
  }
  return out;
}

class Cli : public ::testing::Test
{
protected:
  static void SetUpTestSuite()
  {
    dir_ = fs::temp_directory_path() / "ddmr_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(dir_ / "small.ini") << "[mesh]\nn = 16\n[partition]\nsx = 2\nsy = 2\n"
                                         "[noise]\nglobal_terms = 20\nlocal_terms = 2\n"
                                         "[reduction]\nsnapshots = 20\ninterface_rank = 3\ninterior_rank = 8\n"
                                         "[surrogate]\nsamples = 30\norder = 2\n[seeds]\nseed = 3\n";
    ASSERT_EQ(run({"train", (dir_ / "small.ini").string(), "--out", (dir_ / "a.ddmr").string(), "--costs",
                   (dir_ / "costs.csv").string()})
                .code,
              0);
  }

  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static fs::path dir_;
};

fs::path Cli::dir_;

} // namespace

TEST_F(Cli, TrainWritesCostCsv)
{
  auto rows = lines(slurp(dir_ / "costs.csv"));
  ASSERT_GE(rows.size(), 8u);
  EXPECT_TRUE(rows[0].starts_with("# fingerprint="));
  EXPECT_EQ(rows[1], "stage,wall_seconds,fe_units");
  EXPECT_TRUE(rows[2].starts_with("KL expansion,"));
  EXPECT_TRUE(rows[7].starts_with("computing K̂,"));
}

TEST_F(Cli, TrainingTwiceGivesIdenticalModel)
{
  ASSERT_EQ(run({"train", (dir_ / "small.ini").string(), "--out", (dir_ / "b.ddmr").string()}).code, 0);
  EXPECT_EQ(slurp(dir_ / "a.ddmr"), slurp(dir_ / "b.ddmr"));
}

TEST_F(Cli, SolveCsvSchemaAndDeterminism)
{
  const auto model = (dir_ / "a.ddmr").string();
  auto r1 = run({"solve", "--model", model, "--samples", "3", "--seed", "4", "--out", (dir_ / "s1.csv").string(),
                 "--coeffs", (dir_ / "c1.csv").string(), "--reconstruct", (dir_ / "fields").string()});
  ASSERT_EQ(r1.code, 0) << r1.err;
  auto r2 = run({"solve", "--model", model, "--samples", "3", "--seed", "4", "--out", (dir_ / "s2.csv").string(),
                 "--coeffs", (dir_ / "c2.csv").string()});
  ASSERT_EQ(r2.code, 0) << r2.err;

  auto rows = lines(slurp(dir_ / "s1.csv"));
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[1], "sample,t_project,t_eval,t_schur,t_solve,t_recover,clamped");
  EXPECT_EQ(without_timings(slurp(dir_ / "s1.csv")), without_timings(slurp(dir_ / "s2.csv")));
  EXPECT_EQ(slurp(dir_ / "c1.csv"), slurp(dir_ / "c2.csv"));
  EXPECT_EQ(lines(slurp(dir_ / "c1.csv"))[1], "sample,kind,index,coefficient");
  EXPECT_EQ(fs::file_size(dir_ / "fields" / "sample_00002.bin"), 17u * 17u * sizeof(double));
}

TEST_F(Cli, ValidateSweepCsv)
{
  auto r = run({"validate", "--model", (dir_ / "a.ddmr").string(), "--samples", "2", "--sweep", "ms", "--values",
                "1,8", "--out", (dir_ / "v.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = lines(slurp(dir_ / "v.csv"));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1], "knob,value,mean_rel_l2,max_rel_l2,clamped");
  EXPECT_TRUE(rows[2].starts_with("ms,1,"));
  EXPECT_TRUE(rows[3].starts_with("ms,8,"));
}

TEST_F(Cli, BenchCsv)
{
  auto r = run({"bench", "--model", (dir_ / "a.ddmr").string(), "--samples", "2", "--out",
                (dir_ / "bench.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = lines(slurp(dir_ / "bench.csv"));
  EXPECT_EQ(rows[1], "metric,value");
  EXPECT_TRUE(rows[2].starts_with("fe_solve_seconds,"));
}

TEST_F(Cli, ExitCodes)
{
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"solve"}).code, 2);
  EXPECT_EQ(run({"validate", "--model", "x", "--sweep", "rank"}).code, 2);

  std::ofstream(dir_ / "bad.ini") << "[mesh]\nn = 16\n[partition]\nsx = 3\n";
  auto bad = run({"train", (dir_ / "bad.ini").string(), "--out", (dir_ / "bad.ddmr").string()});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("Sx | n"), std::string::npos);

  std::ofstream(dir_ / "few.ini") << "[mesh]\nn = 16\n[partition]\nsx = 2\nsy = 2\n[noise]\nglobal_terms = 20\n"
                                     "local_terms = 2\n[reduction]\nsnapshots = 20\ninterior_rank = 8\n"
                                     "[surrogate]\nsamples = 3\norder = 2\n";
  auto few = run({"train", (dir_ / "few.ini").string(), "--out", (dir_ / "few.ddmr").string()});
  EXPECT_EQ(few.code, 1);
  EXPECT_NE(few.err.find("stage"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "few.ddmr"));

  std::ofstream(dir_ / "junk.ddmr") << "junk";
  EXPECT_EQ(run({"solve", "--model", (dir_ / "junk.ddmr").string(), "--out", (dir_ / "j.csv").string()}).code, 1);
}
