#include <cmath>
#include <cstring>
#include <sstream>

#include <gtest/gtest.h>

#include "mlpalg/algebra.hpp"
#include "mlpalg/errors.hpp"
#include "mlpalg/experiments.hpp"
#include "mlpalg/train.hpp"
#include "gradcheck.hpp"
#include "support.hpp"

namespace mlpalg {
namespace {

using testing::Engine;

const Eigen::Vector2d kOrigin = Eigen::Vector2d::Zero();

bool bit_identical(const Mlp& a, const Mlp& b) {
  if (a.layer_dims() != b.layer_dims()) return false;
  for (int i = 0; i < a.num_maps(); ++i) {
    const auto nw = sizeof(double) * static_cast<std::size_t>(a.weights(i).size());
    const auto nt = sizeof(double) * static_cast<std::size_t>(a.thresholds(i).size());
    if (std::memcmp(a.weights(i).data(), b.weights(i).data(), nw) != 0) return false;
    if (std::memcmp(a.thresholds(i).data(), b.thresholds(i).data(), nt) != 0) return false;
    if (a.activations(i) != b.activations(i)) return false;
  }
  return true;
}

TEST(Gradient, MatchesFiniteDifferencesSmallNet) {
  const auto check = testing::gradient_check({2, 3, 1}, Loss::Bce, false, 1);
  EXPECT_LE(check.worst, 1e-6);
  EXPECT_LE(check.worst_loss, 1e-12);
}

TEST(Gradient, MatchesFiniteDifferencesMixedActivations) {
  EXPECT_LE(testing::gradient_check({4, 5, 3, 1}, Loss::Bce, false, 2).worst, 1e-6);
  EXPECT_LE(testing::gradient_check({4, 5, 3, 1}, Loss::Mse, false, 3).worst, 1e-6);
  EXPECT_LE(testing::gradient_check({3, 4, 2}, Loss::Mse, true, 4).worst, 1e-6);
}

TEST(InitMlp, ShapesAndDeterminism) {
  const Mlp a = init_mlp({2, 3, 1}, 7);
  EXPECT_EQ(a.weights(0).rows(), 3);
  EXPECT_EQ(a.weights(0).cols(), 2);
  EXPECT_EQ(a.weights(1).rows(), 1);
  EXPECT_EQ(a.weights(1).cols(), 3);
  EXPECT_TRUE(bit_identical(a, init_mlp({2, 3, 1}, 7)));
  EXPECT_FALSE(a == init_mlp({2, 3, 1}, 8));
  EXPECT_LE(a.weights(0).cwiseAbs().maxCoeff(), 0.5);
  const Mlp wide = init_mlp({2, 3, 1}, 7, 2.0);
  EXPECT_LE(wide.weights(0).cwiseAbs().maxCoeff(), 2.0);
  EXPECT_THROW(init_mlp({2}, 1), ValidationError);
  EXPECT_THROW(init_mlp({2, 0, 1}, 1), ValidationError);
}

class DiskTraining : public ::testing::Test {
 protected:
  GeometricShape disk = GeometricShape::ball(kOrigin, 1.0);
  LabeledDataset data = make_characteristic_dataset(disk, Epsilon(0.1), 500, 500, 1);
};

TEST_F(DiskTraining, ZeroEpochsIsIdentity) {
  const Mlp net = init_mlp({2, 3, 1}, 3);
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_TRUE(bit_identical(train_sgd(net, data, cfg).net, net));
  EXPECT_TRUE(bit_identical(fine_tune(net, data, cfg).net, net));
}

TEST_F(DiskTraining, ConvergesOnUnitDisk) {
  const Mlp net = init_mlp({2, 3, 1}, 3);
  const MlpParams before = net.params();
  const auto result = train_sgd(net, data, TrainConfig{});
  EXPECT_GE(result.report.accuracy, 0.97);
  EXPECT_EQ(result.report.total, 1000);
  EXPECT_EQ(result.report.loss_history.size(), 2000u);
  EXPECT_LT(result.report.loss_history.back().second, result.report.loss_history.front().second);
  EXPECT_TRUE(bit_identical(net, Mlp(before)));
  EXPECT_EQ(result.net.provenance().op, "trained");
}

TEST_F(DiskTraining, Deterministic) {
  TrainConfig cfg;
  cfg.epochs = 50;
  const Mlp net = init_mlp({2, 3, 1}, 3);
  EXPECT_TRUE(bit_identical(train_sgd(net, data, cfg).net, train_sgd(net, data, cfg).net));
  cfg.seed = 1;
  EXPECT_FALSE(train_sgd(net, data, cfg).net == train_sgd(net, data, TrainConfig{.epochs = 50}).net);
}

TEST_F(DiskTraining, DivergenceIsReported) {
  TrainConfig cfg;
  cfg.learning_rate = 100.0;
  cfg.epochs = kFineTuneEpochs;
  const Mlp net = init_mlp({2, 3, 1}, 3);
  try {
    fine_tune(net, data, cfg);
    FAIL() << "expected divergence";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST_F(DiskTraining, RejectsDimensionMismatch) {
  EXPECT_THROW(train_sgd(init_mlp({3, 3, 1}, 1), data, TrainConfig{}), ValidationError);
  EXPECT_THROW(train_sgd(init_mlp({2, 3, 2}, 1), data, TrainConfig{}), ValidationError);
  TrainConfig bad;
  bad.batch_size = 0;
  EXPECT_THROW(train_sgd(init_mlp({2, 3, 1}, 1), data, bad), ValidationError);
}

TEST(FineTune, DoesNotRegressComposedSum) {
  const auto left = GeometricShape::ball(Eigen::Vector2d(-1.5, 0.0), 1.0);
  const auto right = GeometricShape::ball(Eigen::Vector2d(1.5, 0.0), 1.0);
  TrainConfig quick;
  quick.epochs = 40;
  const Mlp a = train_characteristic(left, Epsilon(0.1), quick, 300).net;
  quick.seed = 1;
  const Mlp b = train_characteristic(right, Epsilon(0.1), quick, 300).net;
  const Mlp composed = sum(a, b);
  const auto u = GeometricShape::union_of({left, right});
  const auto data = make_characteristic_dataset(u, Epsilon(0.1), 600, 600, 5);
  const double before = accuracy_scalar(composed, data).accuracy;
  TrainConfig cfg;
  cfg.epochs = kFineTuneEpochs;
  cfg.learning_rate = 0.1;
  const auto tuned = fine_tune(composed, data, cfg);
  EXPECT_GE(tuned.report.accuracy, before);
  EXPECT_EQ(tuned.net.provenance().op, "fine_tuned");
  EXPECT_EQ(tuned.net.provenance().operands.at(0).op, "sum");
}

TEST(Accuracy, ScalarExamples) {
  EXPECT_EQ(score_scalar(Eigen::Vector2d(0.9, 0.2), Eigen::Vector2d(1, 0)).accuracy, 1.0);
  EXPECT_EQ(score_scalar(Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Constant(1, 1.0)).correct, 1);
  EXPECT_EQ(score_scalar(Eigen::VectorXd::Constant(1, 0.4), Eigen::VectorXd::Constant(1, 1.0)).accuracy, 0.0);
  EXPECT_THROW(score_scalar(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 1)), ValidationError);
}

TEST(Accuracy, ArgmaxExamples) {
  EXPECT_EQ(score_argmax(Eigen::RowVector3d(0.1, 0.8, 0.3), Eigen::RowVector3d(0, 1, 0)).correct, 1);
  EXPECT_EQ(score_argmax(Eigen::RowVector2d(0.5, 0.5), Eigen::RowVector2d(1, 0)).correct, 1);
  EXPECT_EQ(score_argmax(Eigen::RowVector2d(0.5, 0.5), Eigen::RowVector2d(0, 1)).correct, 0);
  EXPECT_THROW(score_argmax(Eigen::MatrixXd::Zero(1, 3), Eigen::MatrixXd::Zero(1, 2)), ValidationError);
}

TEST(Accuracy, UniformOutputsScoreOneOverK) {
  Engine rng(21);
  for (int k : {2, 3, 5, 10}) {
    const Eigen::Index m = 10000;
    Eigen::MatrixXd labels = Eigen::MatrixXd::Zero(m, k);
    for (Eigen::Index i = 0; i < m; ++i) labels(i, static_cast<Eigen::Index>(rng() % static_cast<unsigned>(k))) = 1.0;
    const auto r = score_argmax(Eigen::MatrixXd::Constant(m, k, 0.3), labels);
    EXPECT_NEAR(r.accuracy, 1.0 / k, 0.03) << "k=" << k;
  }
}

TEST(Accuracy, AgreesWithReferenceLoop) {
  Engine rng(22);
  for (int batch = 0; batch < 10; ++batch) {
    const Eigen::Index m = 1000;
    Eigen::MatrixXd out(m, 1);
    Eigen::MatrixXd lab(m, 1);
    for (Eigen::Index i = 0; i < m; ++i) {
      // Coarse grid so exact 0.5 outputs show up.
      out(i, 0) = static_cast<double>(rng() % 11) / 10.0;
      lab(i, 0) = static_cast<double>(rng() & 1U);
    }
    EXPECT_EQ(score_scalar(out, lab).correct, testing::ref_count_scalar(out, lab));
    const int k = 2 + batch % 4;
    Eigen::MatrixXd outk(m, k);
    Eigen::MatrixXd labk = Eigen::MatrixXd::Zero(m, k);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (int j = 0; j < k; ++j) outk(i, j) = static_cast<double>(rng() % 4);
      labk(i, static_cast<Eigen::Index>(rng() % static_cast<unsigned>(k))) = 1.0;
    }
    EXPECT_EQ(score_argmax(outk, labk).correct, testing::ref_count_argmax(outk, labk));
  }
}

TEST(Accuracy, OProductArgmaxMatchesOperandComparison) {
  Engine rng(23);
  const Mlp a = testing::random_net({2, 4, 1}, rng);
  const Mlp b = testing::random_net({2, 3, 1}, rng);
  const auto data = make_multiclass_dataset(
      {GeometricShape::ball(Eigen::Vector2d(-1, 0), 1.0), GeometricShape::ball(Eigen::Vector2d(1, 0), 1.0)},
      2000, 4);
  long expected = 0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd x = data.data().row(i).transpose();
    const int predicted = forward(a, x)(0) >= forward(b, x)(0) ? 0 : 1;
    if (predicted == data.class_of(i)) ++expected;
  }
  EXPECT_EQ(accuracy_argmax(o_product(a, b), data).correct, expected);
}

TEST(Report, CsvLayout) {
  EvalReport r = score_scalar(Eigen::Vector3d(0.9, 0.1, 0.7), Eigen::Vector3d(1, 0, 0));
  std::ostringstream os;
  write_report_csv(os, r);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("metric,value\ncorrect,2\ntotal,3\n", 0), 0u);
  r.loss_history = {{1, 0.5}, {2, 0.25}};
  std::ostringstream ls;
  write_loss_csv(ls, r);
  EXPECT_EQ(ls.str(), "epoch,loss\n1,0.5\n2,0.25\n");
}

}  // namespace
}  // namespace mlpalg
