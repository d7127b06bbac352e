#include <gtest/gtest.h>

#include "ddmr/config.hpp"
#include "ddmr/error.hpp"

using namespace ddmr;

TEST(Config, DefaultsAreValid)
{
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.parameter_dim(), 100);
  EXPECT_EQ(c.local_dim(), 6);
  EXPECT_DOUBLE_EQ(c.box_half_width(), 5.0);
}

TEST(Config, ParsesSections)
{
  auto c = RunConfig::parse(R"(
[problem]
kind = convection
eps = 1e-4

[noise]
kind = white
sigma = 0.1

[mesh]
n = 32

[partition]
sx = 4
sy = 2

[surrogate]
order = 5

[seeds]
seed = 42

[output]
model = out.ddmr
)");
  EXPECT_EQ(c.problem, ProblemKind::convection);
  EXPECT_DOUBLE_EQ(c.eps, 1e-4);
  EXPECT_EQ(c.noise, NoiseKind::white);
  EXPECT_EQ(c.n, 32);
  EXPECT_EQ(c.sx, 4);
  EXPECT_EQ(c.sy, 2);
  EXPECT_EQ(c.order, 5);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.model_path, "out.ddmr");
  EXPECT_EQ(c.parameter_dim(), 8);
  EXPECT_EQ(c.local_dim(), 1);
  EXPECT_DOUBLE_EQ(c.box_half_width(), 0.5);
  EXPECT_EQ(c.form().kind, ProblemKind::convection);
}

TEST(Config, RejectsUnknownKeysAndBadValues)
{
  EXPECT_THROW(RunConfig::parse("[mesh]\nsize = 8\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse("[grid]\nn = 8\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse("[mesh]\nn = eight\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse("[mesh]\nn = 8x\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse("[problem]\nkind = wave\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse("[mesh]\nn = 48\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse("[reduction]\nsnapshots = 5\n"), ConfigError);
  EXPECT_THROW(RunConfig::load("/nonexistent/config.ini"), ConfigError);
}

TEST(Config, PartitionErrorStatesDivisibility)
{
  try {
    RunConfig::parse("[mesh]\nn = 16\n[partition]\nsx = 3\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("Sx | n"), std::string::npos);
  }
}

TEST(Config, CanonicalRoundTripsAndIgnoresOutput)
{
  auto a = RunConfig::parse("[problem]\neps = 0.1\n[mesh]\nn = 16\n[partition]\nsx = 2\nsy = 2\n"
                            "[noise]\nlocal_terms = 3\n[output]\nmodel = a.bin\n");
  auto b = RunConfig::parse(a.canonical());
  EXPECT_EQ(a.canonical(), b.canonical());
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  EXPECT_EQ(a.fingerprint().size(), 8u);

  b.model_path = "elsewhere";
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  b.seed = 2;
  EXPECT_NE(a.fingerprint(), b.fingerprint());
}

TEST(Config, DoublesSurviveCanonicalText)
{
  RunConfig a;
  a.eps = 0.1 + 0.2;
  a.corr_length = 1.0 / 3.0;
  auto b = RunConfig::parse(a.canonical());
  EXPECT_EQ(a.eps, b.eps);
  EXPECT_EQ(a.corr_length, b.corr_length);
}
