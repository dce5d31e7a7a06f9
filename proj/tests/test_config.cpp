#include <gtest/gtest.h>

#include "billiard/config.hpp"

using namespace billiard;

TEST(Config, EmptyDocumentGivesFigureOneDefaults) {
  const auto c = parse_config("");
  EXPECT_EQ(c.epsilon, 0.05);
  EXPECT_EQ(c.kappa, 0.1);
  EXPECT_DOUBLE_EQ(c.gamma, 0.5);
  EXPECT_DOUBLE_EQ(c.t_end, 50.0);
  EXPECT_EQ(c.hbar, 1.0);
  EXPECT_EQ(c.initial, (ModeIndex{0, 1}));
  ASSERT_EQ(c.targets.size(), 4u);
  EXPECT_EQ(c.targets[3], (ModeIndex{1, 4}));
  EXPECT_EQ(c.task, Task::populations);
}

TEST(Config, NegativeEpsilonNamesKeyAndLine) {
  try {
    parse_config("# header\nepsilon = -0.1\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "epsilon");
    EXPECT_EQ(e.line(), 2);
    EXPECT_NE(std::string(e.what()).find("epsilon"), std::string::npos);
  }
}

TEST(Config, TaskAndInitialMode) {
  const auto c = parse_config("task = populations\ninitial = 0 1");
  EXPECT_EQ(c.task, Task::populations);
  EXPECT_EQ(c.initial, (ModeIndex{0, 1}));
}

TEST(Config, CommentsWhitespaceAndTargets) {
  const auto c = parse_config("  kappa=0.2   # faster\n\n\ttargets = 1 1, -1 1 ,2 3\n");
  EXPECT_EQ(c.kappa, 0.2);
  EXPECT_DOUBLE_EQ(c.gamma, 1.0);
  EXPECT_DOUBLE_EQ(c.t_end, 25.0);
  ASSERT_EQ(c.targets.size(), 3u);
  EXPECT_EQ(c.targets[2], (ModeIndex{2, 3}));
}

TEST(Config, UnknownKeyRejectedWithLine) {
  try {
    parse_config("mu = 1\nfoo = 3\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.key(), "foo");
  }
}

TEST(Config, MalformedLinesRejected) {
  EXPECT_THROW(parse_config("kappa 0.1"), ConfigError);
  EXPECT_THROW(parse_config("kappa = fast"), ConfigError);
  EXPECT_THROW(parse_config("nr = 12.5"), ConfigError);
  EXPECT_THROW(parse_config("kappa = 0.1\nkappa = 0.2"), ConfigError);
  EXPECT_THROW(parse_config("initial = 0"), ConfigError);
  EXPECT_THROW(parse_config("targets = 1 1,,1 2"), ConfigError);
  EXPECT_THROW(parse_config("task = dance"), ConfigError);
  EXPECT_THROW(parse_config("ntheta = 63"), ConfigError);
}

TEST(Config, Guards) {
  EXPECT_THROW(parse_config("t_end = 1001"), ConfigError);
  EXPECT_NO_THROW(parse_config("t_end = 1000"));
  EXPECT_THROW(parse_config("kappa = 0"), ConfigError);
  EXPECT_NO_THROW(parse_config("kappa = 0\ngamma = 1\nt_end = 10"));
  EXPECT_THROW(parse_config("mu = 0"), ConfigError);
  EXPECT_THROW(parse_config("initial = 1 0"), ConfigError);
}

TEST(Config, FigureTwoPreset) {
  const auto c = parse_config("preset = fig2");
  EXPECT_EQ(c.initial, (ModeIndex{2, 1}));
  ASSERT_EQ(c.targets.size(), 4u);
  EXPECT_EQ(c.targets[0], (ModeIndex{3, 1}));
  EXPECT_EQ(c.targets[3], (ModeIndex{1, 2}));
  // explicit keys win over the preset regardless of order
  const auto d = parse_config("initial = 0 1\npreset = fig2");
  EXPECT_EQ(d.initial, (ModeIndex{0, 1}));
}

TEST(Config, ExplicitGammaKept) {
  EXPECT_EQ(parse_config("gamma = 0.25").gamma, 0.25);
}
