#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mlpalg/core.hpp"
#include "mlpalg/data.hpp"

namespace mlpalg {

enum class Loss { Bce, Mse };

std::string_view to_string(Loss loss);
Loss parse_loss(std::string_view name);

struct TrainConfig {
  double learning_rate = 0.5;
  int epochs = 2000;
  int batch_size = 32;
  Loss loss = Loss::Bce;
  double init_scale = 0.5;
  std::uint64_t seed = 0;

  // Throws ValidationError when a field is out of range.
  void validate() const;
};

inline constexpr int kFineTuneEpochs = 200;

struct EvalReport {
  long correct = 0;
  long total = 0;
  double accuracy = 0.0;
  // Indexed by class: {negative, positive} for the scalar rule, one entry per
  // label for argmax.
  std::vector<long> per_class_correct;
  std::vector<long> per_class_total;
  std::vector<std::pair<int, double>> loss_history;  // (epoch, mean loss)
};

struct TrainResult {
  Mlp net;
  EvalReport report;
};

// Weights and thresholds uniform in [-init_scale, init_scale], sigmoid everywhere.
Mlp init_mlp(const std::vector<int>& layer_dims, std::uint64_t seed, double init_scale = 0.5);

// Per-sample loss for one output/target pair. BCE is summed over output
// coordinates and evaluates only the term selected by the 0/1 target, so a
// confidently wrong saturated output yields +inf. MSE is 0.5 * ||a - y||^2.
double sample_loss(const Eigen::Ref<const Eigen::VectorXd>& output,
                   const Eigen::Ref<const Eigen::VectorXd>& target, Loss loss);

struct Gradient {
  double loss = 0.0;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> thresholds;
};

// Backpropagated gradient of sample_loss for one point. ReLU's derivative at 0 is 0.
Gradient loss_gradient(const Mlp& net, const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y, Loss loss);

// Mini-batch SGD. Throws NumericError naming the epoch if the mean loss or any
// parameter becomes non-finite.
TrainResult train_sgd(const Mlp& net, const LabeledDataset& data, const TrainConfig& cfg);

// train_sgd for nets that were composed rather than trained; callers normally
// pass a config with epochs = kFineTuneEpochs.
TrainResult fine_tune(const Mlp& net, const LabeledDataset& data, const TrainConfig& cfg);

// Decision rules over precomputed outputs. Scalar: positive iff output >= 0.5.
// Argmax: lowest index wins ties.
EvalReport score_scalar(const Eigen::Ref<const Eigen::MatrixXd>& outputs,
                        const Eigen::Ref<const Eigen::MatrixXd>& labels);
EvalReport score_argmax(const Eigen::Ref<const Eigen::MatrixXd>& outputs,
                        const Eigen::Ref<const Eigen::MatrixXd>& labels);

EvalReport accuracy_scalar(const Mlp& net, const LabeledDataset& data);
EvalReport accuracy_argmax(const Mlp& net, const LabeledDataset& data);

// metric,value rows: correct, total, accuracy, class<i>_correct, class<i>_total.
void write_report_csv(std::ostream& out, const EvalReport& report);
// epoch,loss rows.
void write_loss_csv(std::ostream& out, const EvalReport& report);

}  // namespace mlpalg
