#include <gtest/gtest.h>

#include <cmath>

#include "skilllab/numeric/mlp.hpp"
#include "skilllab/numeric/normalizer.hpp"
#include "skilllab/numeric/optim.hpp"
#include "test_util.hpp"

namespace skilllab::nn {
namespace {

Var quadratic(const Var& x) { return square(add_scalar(x, -4.0)); }

TEST(Adam, ConvergesOnShiftedQuadratic) {
  Var x = Var::parameter(Matrix::Zero(1, 1));
  Adam opt({x}, {.lr = 0.1});
  int steps = 0;
  for (; steps < 1000 && std::abs(x.value()(0, 0) - 4.0) >= 1e-3; ++steps) {
    opt.zero_grad();
    backward(quadratic(x));
    opt.step();
  }
  EXPECT_LT(std::abs(x.value()(0, 0) - 4.0), 1e-3);
  EXPECT_LE(steps, 1000);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  Var x = Var::parameter(Matrix::Constant(2, 3, 0.7));
  Adam opt({x}, {});
  opt.zero_grad();
  opt.step();
  EXPECT_TRUE((x.value().array() == 0.7).all());
  EXPECT_EQ(opt.state().step, 1);
}

TEST(Adam, FirstStepMovesByLrAgainstGradientSign) {
  Var x = Var::parameter((Matrix(1, 3) << 1.0, -2.0, 0.5).finished());
  const Matrix before = x.value();
  Adam opt({x}, {.lr = 0.01});
  opt.zero_grad();
  // grad = (3, -1, 0.002)
  backward(sum(x * Var::constant((Matrix(1, 3) << 3.0, -1.0, 0.002).finished())));
  opt.step();
  const Matrix delta = x.value() - before;
  EXPECT_NEAR(delta(0, 0), -0.01, 1e-8);
  EXPECT_NEAR(delta(0, 1), 0.01, 1e-8);
  EXPECT_NEAR(delta(0, 2), -0.01, 1e-7);
}

TEST(Adam, NonFiniteGradientIsRejected) {
  Var x = Var::parameter(Matrix::Constant(1, 2, 1.0));
  Adam opt({x}, {});
  opt.zero_grad();
  backward(sum(log(x - 1.0)));  // 1/0 gradient
  EXPECT_THROW(opt.step(), NonFiniteError);
  EXPECT_TRUE((x.value().array() == 1.0).all());
  EXPECT_EQ(opt.state().step, 0);
  EXPECT_TRUE((opt.state().first_moment[0].array() == 0.0).all());
}

TEST(Adam, StepCounterStrictlyIncreases) {
  Var x = Var::parameter(Matrix::Ones(1, 1));
  Adam opt({x}, {});
  for (long i = 1; i <= 5; ++i) {
    opt.zero_grad();
    backward(square(x));
    opt.step();
    EXPECT_EQ(opt.state().step, i);
    EXPECT_EQ(opt.state().first_moment[0].rows(), x.rows());
  }
}

TEST(Adam, MonotoneOnConvexQuadraticAfterBurnIn) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix target = testing::random_matrix(1, 4, rng, -3, 3);
    Var x = Var::parameter(Matrix::Zero(1, 4));
    Adam opt({x}, {.lr = 0.01});
    double prev = INFINITY;
    for (int step = 0; step < 200; ++step) {
      opt.zero_grad();
      Var loss = sum(square(x - Var::constant(target)));
      if (step >= 10) {
        EXPECT_LE(loss.item(), prev) << "trial " << trial << " step " << step;
      }
      prev = loss.item();
      backward(loss);
      opt.step();
    }
  }
}

TEST(ClipGradNorm, RescalesToMaxNorm) {
  Var a = Var::parameter(Matrix::Zero(1, 1));
  Var b = Var::parameter(Matrix::Zero(1, 1));
  backward(a * 3.0 + b * 4.0);
  std::vector<Var> ps = {a, b};
  EXPECT_NEAR(clip_grad_norm(ps, 1.0), 5.0, 1e-12);
  EXPECT_NEAR(a.grad()(0, 0), 0.6, 1e-12);
  EXPECT_NEAR(b.grad()(0, 0), 0.8, 1e-12);
  EXPECT_NEAR(clip_grad_norm(ps, 10.0), 1.0, 1e-12);
  EXPECT_NEAR(a.grad()(0, 0), 0.6, 1e-12);
}

TEST(Normalizer, TwoPointExample) {
  RunningNormalizer n(1);
  n.observe(Eigen::VectorXd::Constant(1, 0.0));
  n.observe(Eigen::VectorXd::Constant(1, 2.0));
  EXPECT_NEAR(n.normalize(Eigen::VectorXd::Constant(1, 2.0))(0), 1.0, 1e-6);
}

TEST(Normalizer, EmptyIsIdentity) {
  RunningNormalizer n(3);
  const Eigen::VectorXd x = Eigen::Vector3d(1.5, -2.0, 7.0);
  EXPECT_EQ(n.normalize(x), x);
  EXPECT_EQ(n.denormalize(x), x);
}

TEST(Normalizer, ConstantStreamMapsToZero) {
  RunningNormalizer n(2);
  for (int i = 0; i < 50; ++i) n.observe(Eigen::Vector2d(3.0, -1.0));
  const Eigen::VectorXd z = n.normalize(Eigen::Vector2d(3.0, -1.0));
  EXPECT_NEAR(z.norm(), 0.0, 1e-12);
}

TEST(Normalizer, RoundTripAndNonNegativeVariance) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    RunningNormalizer n(3);
    n.observe_rows(testing::random_matrix(1 + trial, 3, rng, -50, 50));
    EXPECT_TRUE((n.variance().array() >= 0).all());
    const Matrix x = testing::random_matrix(10, 3, rng, -100, 100);
    EXPECT_LT((n.denormalize_rows(n.normalize_rows(x)) - x).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Normalizer, MatchesBatchStatistics) {
  std::mt19937_64 rng(9);
  const Matrix x = testing::random_matrix(500, 2, rng, -5, 9);
  RunningNormalizer n(2);
  n.observe_rows(x);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::RowVectorXd var = (x.rowwise() - mean).array().square().colwise().mean();
  EXPECT_LT((n.mean() - mean.transpose()).norm(), 1e-12);
  EXPECT_LT((n.variance() - var.transpose()).norm(), 1e-10);
  EXPECT_EQ(n.count(), 500);
}

TEST(Normalizer, DimensionMismatchThrows) {
  RunningNormalizer n(2);
  EXPECT_ANY_THROW(n.observe(Eigen::VectorXd::Zero(3)));
}

TEST(Checkpoint, RoundTripRestoresParametersAndNormalizer) {
  Rng rng(1);
  Mlp a(3, {5}, 2, rng);
  RunningNormalizer na(3);
  std::mt19937_64 data(2);
  na.observe_rows(testing::random_matrix(7, 3, data));
  NamedParams pa;
  a.append_named(pa, "net");
  const nlohmann::json j = nlohmann::json::parse(save_checkpoint(pa, {{"in", &na}}).dump());

  Rng other(99);
  Mlp b(3, {5}, 2, other);
  RunningNormalizer nb(3);
  NamedParams pb;
  b.append_named(pb, "net");
  load_checkpoint(j, pb, {{"in", &nb}});
  EXPECT_EQ(parameter_checksum(a.parameters()), parameter_checksum(b.parameters()));
  EXPECT_EQ(na.mean(), nb.mean());
  EXPECT_EQ(na.count(), nb.count());
  EXPECT_TRUE(j.contains(kNormalizerKey));
  const auto& first = j.at(pa.front().first);
  EXPECT_EQ(first.at("shape").size(), 2u);
}

TEST(Checkpoint, ShapeMismatchIsRejected) {
  Rng rng(1);
  Mlp a(3, {5}, 2, rng);
  Mlp b(3, {6}, 2, rng);
  NamedParams pa, pb;
  a.append_named(pa, "net");
  b.append_named(pb, "net");
  EXPECT_ANY_THROW(load_checkpoint(save_checkpoint(pa), pb));
}

TEST(Mlp, CloneIsIndependent) {
  Rng rng(4);
  Mlp a(2, {4}, 1, rng);
  Mlp b = a.clone();
  EXPECT_EQ(parameter_checksum(a.parameters()), parameter_checksum(b.parameters()));
  b.parameters()[0].mutable_value()(0, 0) += 1.0;
  EXPECT_NE(parameter_checksum(a.parameters()), parameter_checksum(b.parameters()));
}

}  // namespace
}  // namespace skilllab::nn
