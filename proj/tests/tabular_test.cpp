#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "skilllab/tabular.hpp"

namespace skilllab::tabular {
namespace {

// N skills over 2N + 1 states: skill z owns states 2z and 2z+1, the last
// state is never visited.
TabularSkillModel disjoint(int n) {
  TabularSkillModel m;
  m.rho = Eigen::MatrixXd::Zero(n, 2 * n + 1);
  for (int z = 0; z < n; ++z) {
    m.rho(z, 2 * z) = 0.5;
    m.rho(z, 2 * z + 1) = 0.5;
  }
  return m;
}

TabularSkillModel random_model(std::mt19937_64& rng, int n, int states) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TabularSkillModel m;
  m.rho = Eigen::MatrixXd::Zero(n, states);
  for (int z = 0; z < n; ++z) {
    for (int s = 0; s < states; ++s) {
      // Sparse supports so unseen and exclusive states both occur.
      if (u(rng) < 0.4) m.rho(z, s) = u(rng);
    }
    if (m.rho.row(z).sum() == 0) m.rho(z, 0) = 1.0;
    m.rho.row(z) /= m.rho.row(z).sum();
  }
  return m;
}

TEST(Posterior, OneHotUniformAndSymmetric) {
  TabularSkillModel m;
  m.rho = Eigen::MatrixXd::Zero(3, 4);
  m.rho(0, 0) = 1.0;
  m.rho(1, 1) = 0.5;
  m.rho(1, 2) = 0.5;
  m.rho(2, 1) = 0.5;
  m.rho(2, 2) = 0.5;
  m.validate();
  EXPECT_EQ(exact_posterior(m, 0), Eigen::Vector3d(1, 0, 0));
  EXPECT_LT((exact_posterior(m, 3) - Eigen::Vector3d::Constant(1.0 / 3)).norm(), 1e-15);
  EXPECT_LT((exact_posterior(m, 1) - Eigen::Vector3d(0, 0.5, 0.5)).norm(), 1e-15);
  EXPECT_THROW(exact_posterior(m, 4), std::out_of_range);
}

TEST(Model, RowsMustBeDistributions) {
  TabularSkillModel m;
  m.rho = Eigen::MatrixXd::Constant(2, 2, 0.4);
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m.rho(0, 0) = -0.2;
  m.rho(0, 1) = 1.2;
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(ReverseReward, MaximumIsLogN) {
  for (int n : {2, 5, 10}) {
    const auto m = disjoint(n);
    for (int z = 0; z < n; ++z) {
      const auto r = reverse_reward_exact(m, 2 * z, z);
      ASSERT_FALSE(r.negative_infinity);
      EXPECT_NEAR(r.value, std::log(static_cast<double>(n)), 1e-9);
    }
  }
  EXPECT_NEAR(std::log(10.0), 2.302585, 1e-6);
}

TEST(ReverseReward, UnseenStateIsZero) {
  for (int n : {2, 5, 10}) {
    const auto m = disjoint(n);
    for (int z = 0; z < n; ++z) {
      const auto r = reverse_reward_exact(m, 2 * n, z);
      EXPECT_FALSE(r.negative_infinity);
      EXPECT_NEAR(r.value, 0.0, 1e-12);
    }
  }
}

TEST(ReverseReward, OtherSkillsStateIsMinusInfinity) {
  const auto m = disjoint(3);
  EXPECT_TRUE(reverse_reward_exact(m, 0, 1).negative_infinity);
}

TEST(BackgroundReward, UnseenIsSentinelAndKnownIsLogN) {
  const auto m = disjoint(10);
  EXPECT_TRUE(reverse_reward_background(m, 20, 3).negative_infinity);
  EXPECT_NEAR(reverse_reward_background(m, 6, 3).value, std::log(10.0), 1e-9);
}

TEST(BackgroundReward, TinyPosterior) {
  TabularSkillModel m;
  m.rho = Eigen::MatrixXd::Zero(10, 2);
  // Posterior of skill 0 at state 0 is 1e-9.
  m.rho(0, 0) = 1e-9;
  m.rho(0, 1) = 1 - 1e-9;
  for (int z = 1; z < 10; ++z) {
    m.rho(z, 0) = (1 - 1e-9) / 9;
    m.rho(z, 1) = 1 - m.rho(z, 0);
  }
  const auto r = reverse_reward_background(m, 0, 0);
  EXPECT_NEAR(r.value, std::log(1e-9) + std::log(10.0), 1e-6);
  EXPECT_NEAR(r.value, -18.42, 0.01);
}

TEST(ForwardReward, DisjointUnseenAndMixed) {
  const auto m = disjoint(5);
  EXPECT_NEAR(forward_reward_exact(m, 4, 2, 0.0).value, std::log(5.0), 1e-12);
  const auto unseen = forward_reward_exact(m, 10, 1, 0.0);
  EXPECT_FALSE(unseen.negative_infinity);
  EXPECT_EQ(unseen.value, 0.0);
  EXPECT_NEAR(forward_reward_exact(m, 10, 1, 1e-3).value, 0.0, 1e-12);

  TabularSkillModel two;
  two.rho = Eigen::MatrixXd::Zero(2, 3);
  two.rho(0, 0) = 0.5;
  two.rho(0, 1) = 0.5;
  two.rho(1, 0) = 0.25;
  two.rho(1, 2) = 0.75;
  EXPECT_NEAR(forward_reward_exact(two, 0, 0, 0.0).value, std::log(4.0 / 3.0), 1e-12);
  EXPECT_NEAR(std::log(4.0 / 3.0), 0.2877, 1e-4);
  EXPECT_TRUE(forward_reward_exact(two, 2, 0, 0.0).negative_infinity);
}

TEST(ForwardReward, EpsilonConvergesMonotonicallyToLimit) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_model(rng, 4, 9);
    for (int s = 0; s < m.states(); ++s) {
      for (int z = 0; z < m.skills(); ++z) {
        const auto limit = forward_reward_exact(m, s, z, 0.0);
        if (limit.negative_infinity) continue;
        double prev = INFINITY;
        for (int k = 3; k <= 12; ++k) {
          const double gap =
              std::abs(forward_reward_exact(m, s, z, std::pow(10.0, -k)).value - limit.value);
          EXPECT_LE(gap, prev + 1e-15);
          prev = gap;
        }
        EXPECT_LT(prev, 1e-6);
      }
    }
  }
}

TEST(Landscapes, ForwardEqualsReverseOnRandomModels) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 5;
    const auto m = random_model(rng, n, 12);
    for (int s = 0; s < m.states(); ++s) {
      for (int z = 0; z < n; ++z) {
        const auto r = reverse_reward_exact(m, s, z);
        const auto f = forward_reward_exact(m, s, z, 0.0);
        ASSERT_EQ(r.negative_infinity, f.negative_infinity);
        if (!r.negative_infinity) {
          EXPECT_NEAR(r.value, f.value, 1e-9);
          EXPECT_LE(r.value, std::log(static_cast<double>(n)) + 1e-12);
        }
      }
    }
  }
}

TEST(Gridworld, TwoSkillHalfSplitFigure) {
  const env::GridWorldSpec spec = env::default_gridworld();
  const auto m = sector_split_model(spec, 2);
  m.validate();
  const auto fig = gridworld_figure_export(m, spec);
  ASSERT_EQ(fig.skills, 2);
  double best = -INFINITY;
  int unseen = 0;
  for (int z = 0; z < 2; ++z) {
    for (std::size_t c = 0; c < fig.reverse_reward[z].size(); ++c) {
      if (fig.wall[c]) continue;
      const auto& r = fig.reverse_reward[z][c];
      const auto& f = fig.forward_reward[z][c];
      ASSERT_EQ(r.negative_infinity, f.negative_infinity);
      if (r.negative_infinity) continue;
      EXPECT_NEAR(r.value, f.value, 1e-9);
      best = std::max(best, r.value);
      const bool visited = fig.rho[0][c] > 0 || fig.rho[1][c] > 0;
      if (!visited) {
        EXPECT_NEAR(r.value, 0.0, 1e-12);
        ++unseen;
      } else if (fig.rho[z][c] > 0 && fig.rho[1 - z][c] == 0) {
        EXPECT_NEAR(r.value, std::log(2.0), 1e-9);
      }
    }
  }
  EXPECT_GT(unseen, 0);
  EXPECT_NEAR(best, std::log(2.0), 1e-12);
}

TEST(Gridworld, SkillsSplitLeftRight) {
  const env::GridWorldSpec spec = env::default_gridworld();
  const auto m = sector_split_model(spec, 2);
  const auto states = env::grid_states(spec);
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (m.rho(0, s) > 0 && m.rho(1, s) > 0) {
      EXPECT_EQ(states[s].col, spec.start.col);
    }
  }
}

TEST(Gridworld, ExportJsonShape) {
  const env::GridWorldSpec spec = env::default_gridworld();
  const auto fig = gridworld_figure_export(sector_split_model(spec, 5), spec);
  const auto j = fig.to_json("reverse");
  EXPECT_EQ(j.at("rows"), spec.rows);
  EXPECT_EQ(j.at("cols"), spec.cols);
  EXPECT_EQ(j.at("skills"), 5);
  EXPECT_EQ(j.at("form"), "reverse");
  EXPECT_EQ(j.at("reward").size(), 5u);
  EXPECT_EQ(j.at("reward")[0].size(), static_cast<std::size_t>(spec.rows));
  EXPECT_EQ(j.at("reward")[0][0].size(), static_cast<std::size_t>(spec.cols));
  EXPECT_EQ(fig.to_json("forward").at("form"), "forward");
}

TEST(ExtendedReward, SentinelSerializesAsString) {
  EXPECT_EQ(ExtendedReward::minus_infinity().to_json(), "-inf");
  EXPECT_EQ(ExtendedReward::finite(1.5).to_json(), 1.5);
  EXPECT_NO_THROW(nlohmann::json::parse(ExtendedReward::minus_infinity().to_json().dump()));
}

}  // namespace
}  // namespace skilllab::tabular
