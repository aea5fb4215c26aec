#include "mlpalg/train.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mlpalg/errors.hpp"
#include "mlpalg/format.hpp"
#include "mlpalg/random.hpp"

namespace mlpalg {

std::string_view to_string(Loss loss) { return loss == Loss::Bce ? "bce" : "mse"; }

Loss parse_loss(std::string_view name) {
  if (name == "bce") return Loss::Bce;
  if (name == "mse") return Loss::Mse;
  throw ValidationError("unknown loss '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning_rate must be positive");
  }
  if (epochs < 0) throw ValidationError("epochs must be nonnegative");
  if (batch_size < 1) throw ValidationError("batch_size must be positive");
  if (!(init_scale > 0.0) || !std::isfinite(init_scale)) {
    throw ValidationError("init_scale must be positive");
  }
}

Mlp init_mlp(const std::vector<int>& layer_dims, std::uint64_t seed, double init_scale) {
  if (layer_dims.size() < 2) throw ValidationError("init_mlp: need at least 2 layers");
  if (!(init_scale > 0.0)) throw ValidationError("init_mlp: init_scale must be positive");
  MlpParams p;
  p.layer_dims = layer_dims;
  Rng rng = make_rng(seed);
  for (std::size_t i = 0; i + 1 < layer_dims.size(); ++i) {
    const int rows = layer_dims[i + 1];
    const int cols = layer_dims[i];
    if (rows <= 0 || cols <= 0) throw ValidationError("init_mlp: layer dimensions must be positive");
    Eigen::MatrixXd W(rows, cols);
    Eigen::VectorXd theta(rows);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) W(r, c) = uniform(rng, -init_scale, init_scale);
    }
    for (int r = 0; r < rows; ++r) theta(r) = uniform(rng, -init_scale, init_scale);
    p.weights.push_back(std::move(W));
    p.thresholds.push_back(std::move(theta));
    p.activations.push_back(uniform_activation(rows, Activation::Sigmoid));
  }
  p.provenance.op = "init";
  p.provenance.params = {{"seed", std::to_string(seed)}};
  return Mlp(std::move(p));
}

namespace {

constexpr double kClamp = 1e-12;

double activation_derivative(Activation tag, double z, double a) {
  if (tag == Activation::Sigmoid) return a * (1.0 - a);
  return z > 0.0 ? 1.0 : 0.0;
}

// Forward/backward buffers over a mutable parameter set.
class Backprop {
 public:
  explicit Backprop(const MlpParams& p) : p_(p) {
    const auto L = p.layer_dims.size();
    a_.resize(L);
    z_.resize(L);
    delta_.resize(L);
    for (std::size_t k = 0; k < L; ++k) {
      a_[k].resize(p.layer_dims[k]);
      z_[k].resize(p.layer_dims[k]);
      delta_[k].resize(p.layer_dims[k]);
    }
  }

  const Eigen::VectorXd& forward(const Eigen::Ref<const Eigen::VectorXd>& x) {
    a_[0] = x;
    for (std::size_t i = 0; i < p_.weights.size(); ++i) {
      const auto& W = p_.weights[i];
      for (Eigen::Index j = 0; j < W.rows(); ++j) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < W.cols(); ++k) s += W(j, k) * a_[i](k);
        const double z = s - p_.thresholds[i](j);
        z_[i + 1](j) = z;
        a_[i + 1](j) = activate(p_.activations[i][static_cast<std::size_t>(j)], z);
      }
    }
    return a_.back();
  }

  // Accumulates the gradient of the last forward() into grad; returns the loss.
  double backward(const Eigen::Ref<const Eigen::VectorXd>& y, Loss loss, Gradient& grad) {
    const std::size_t last = a_.size() - 1;
    const auto& act = p_.activations.back();
    const auto& a = a_[last];
    const auto& z = z_[last];
    for (Eigen::Index j = 0; j < a.size(); ++j) {
      const Activation tag = act[static_cast<std::size_t>(j)];
      if (loss == Loss::Bce && tag == Activation::Sigmoid) {
        delta_[last](j) = a(j) - y(j);
      } else if (loss == Loss::Bce) {
        const double ac = std::clamp(a(j), kClamp, 1.0 - kClamp);
        delta_[last](j) = (ac - y(j)) / (ac * (1.0 - ac)) * activation_derivative(tag, z(j), a(j));
      } else {
        delta_[last](j) = (a(j) - y(j)) * activation_derivative(tag, z(j), a(j));
      }
    }
    for (std::size_t i = p_.weights.size(); i-- > 0;) {
      const auto& W = p_.weights[i];
      grad.weights[i].noalias() += delta_[i + 1] * a_[i].transpose();
      grad.thresholds[i] -= delta_[i + 1];
      if (i == 0) break;
      delta_[i].noalias() = W.transpose() * delta_[i + 1];
      for (Eigen::Index k = 0; k < delta_[i].size(); ++k) {
        delta_[i](k) *= activation_derivative(p_.activations[i - 1][static_cast<std::size_t>(k)],
                                              z_[i](k), a_[i](k));
      }
    }
    return sample_loss(a, y, loss);
  }

 private:
  const MlpParams& p_;
  std::vector<Eigen::VectorXd> a_;
  std::vector<Eigen::VectorXd> z_;
  std::vector<Eigen::VectorXd> delta_;
};

Gradient zero_gradient(const MlpParams& p) {
  Gradient g;
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    g.weights.push_back(Eigen::MatrixXd::Zero(p.weights[i].rows(), p.weights[i].cols()));
    g.thresholds.push_back(Eigen::VectorXd::Zero(p.thresholds[i].size()));
  }
  return g;
}

void reset(Gradient& g) {
  for (auto& w : g.weights) w.setZero();
  for (auto& t : g.thresholds) t.setZero();
}

void check_shapes(const Mlp& net, const LabeledDataset& data) {
  if (net.input_dim() != data.dim()) {
    throw ValidationError("network input dimension " + std::to_string(net.input_dim()) +
                          " does not match data dimension " + std::to_string(data.dim()));
  }
  if (net.output_dim() != data.label_width()) {
    throw ValidationError("network output dimension " + std::to_string(net.output_dim()) +
                          " does not match label width " + std::to_string(data.label_width()));
  }
}

Provenance trained_node(const std::string& op, const Mlp& net, const TrainConfig& cfg) {
  Provenance p;
  p.op = op;
  p.params = {{"lr", format_shortest(cfg.learning_rate)},
              {"epochs", std::to_string(cfg.epochs)},
              {"batch", std::to_string(cfg.batch_size)},
              {"loss", std::string(to_string(cfg.loss))},
              {"seed", std::to_string(cfg.seed)}};
  if (net.provenance().op == "init") {
    for (const auto& kv : net.provenance().params) p.params.push_back({"init_" + kv.first, kv.second});
  } else {
    p.operands.push_back(net.provenance());
  }
  return p;
}

TrainResult run_sgd(const std::string& op, const Mlp& net, const LabeledDataset& data,
                    const TrainConfig& cfg) {
  cfg.validate();
  check_shapes(net, data);
  MlpParams p = net.params();
  p.provenance = trained_node(op, net, cfg);
  EvalReport history;
  if (data.size() == 0 || cfg.epochs == 0) {
    Mlp out(std::move(p));
    auto report = out.output_dim() == 1 ? accuracy_scalar(out, data) : accuracy_argmax(out, data);
    return {std::move(out), std::move(report)};
  }

  Backprop bp(p);
  Gradient grad = zero_gradient(p);
  Rng rng = make_rng(cfg.seed, 7);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto m = order.size();
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  Eigen::VectorXd x(data.dim());
  Eigen::VectorXd y(data.label_width());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total_loss = 0.0;
    for (std::size_t start = 0; start < m; start += bs) {
      const std::size_t end = std::min(m, start + bs);
      reset(grad);
      for (std::size_t s = start; s < end; ++s) {
        x = data.data().row(order[s]).transpose();
        y = data.labels().row(order[s]).transpose();
        bp.forward(x);
        total_loss += bp.backward(y, cfg.loss, grad);
      }
      const double step = cfg.learning_rate / static_cast<double>(end - start);
      for (std::size_t i = 0; i < p.weights.size(); ++i) {
        p.weights[i] -= step * grad.weights[i];
        p.thresholds[i] -= step * grad.thresholds[i];
      }
    }
    const double mean = total_loss / static_cast<double>(m);
    bool finite = std::isfinite(mean);
    for (std::size_t i = 0; finite && i < p.weights.size(); ++i) {
      finite = p.weights[i].allFinite() && p.thresholds[i].allFinite();
    }
    if (!finite) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                         " (non-finite loss or parameters)");
    }
    history.loss_history.emplace_back(epoch, mean);
  }

  Mlp out(std::move(p));
  auto report = out.output_dim() == 1 ? accuracy_scalar(out, data) : accuracy_argmax(out, data);
  report.loss_history = std::move(history.loss_history);
  return {std::move(out), std::move(report)};
}

}  // namespace

double sample_loss(const Eigen::Ref<const Eigen::VectorXd>& output,
                   const Eigen::Ref<const Eigen::VectorXd>& target, Loss loss) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < output.size(); ++j) {
    const double a = output(j);
    const double y = target(j);
    if (loss == Loss::Mse) {
      total += 0.5 * (a - y) * (a - y);
    } else if (y == 1.0) {
      total -= std::log(a);
    } else if (y == 0.0) {
      total -= std::log1p(-a);
    } else {
      total -= y * std::log(a) + (1.0 - y) * std::log1p(-a);
    }
  }
  return total;
}

Gradient loss_gradient(const Mlp& net, const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y, Loss loss) {
  if (x.size() != net.input_dim() || y.size() != net.output_dim()) {
    throw ValidationError("loss_gradient: point or target has the wrong dimension");
  }
  Backprop bp(net.params());
  Gradient g = zero_gradient(net.params());
  bp.forward(x);
  g.loss = bp.backward(y, loss, g);
  return g;
}

TrainResult train_sgd(const Mlp& net, const LabeledDataset& data, const TrainConfig& cfg) {
  return run_sgd("trained", net, data, cfg);
}

TrainResult fine_tune(const Mlp& net, const LabeledDataset& data, const TrainConfig& cfg) {
  return run_sgd("fine_tuned", net, data, cfg);
}

namespace {

void finish(EvalReport& r) {
  r.accuracy = r.total > 0 ? static_cast<double>(r.correct) / static_cast<double>(r.total) : 0.0;
}

}  // namespace

EvalReport score_scalar(const Eigen::Ref<const Eigen::MatrixXd>& outputs,
                        const Eigen::Ref<const Eigen::MatrixXd>& labels) {
  if (outputs.cols() != 1 || labels.cols() != 1) {
    throw ValidationError("scalar rule needs 1 output and 1 label column, got " +
                          std::to_string(outputs.cols()) + " and " + std::to_string(labels.cols()));
  }
  if (outputs.rows() != labels.rows()) throw ValidationError("scalar rule: row count mismatch");
  EvalReport r;
  r.per_class_correct.assign(2, 0);
  r.per_class_total.assign(2, 0);
  for (Eigen::Index i = 0; i < outputs.rows(); ++i) {
    const int predicted = outputs(i, 0) >= 0.5 ? 1 : 0;
    const int actual = labels(i, 0) == 1.0 ? 1 : 0;
    ++r.per_class_total[static_cast<std::size_t>(actual)];
    if (predicted == actual) {
      ++r.correct;
      ++r.per_class_correct[static_cast<std::size_t>(actual)];
    }
  }
  r.total = static_cast<long>(outputs.rows());
  finish(r);
  return r;
}

EvalReport score_argmax(const Eigen::Ref<const Eigen::MatrixXd>& outputs,
                        const Eigen::Ref<const Eigen::MatrixXd>& labels) {
  if (outputs.cols() != labels.cols() || outputs.cols() < 2) {
    throw ValidationError("argmax rule needs matching output/label widths >= 2, got " +
                          std::to_string(outputs.cols()) + " and " + std::to_string(labels.cols()));
  }
  if (outputs.rows() != labels.rows()) throw ValidationError("argmax rule: row count mismatch");
  const auto k = static_cast<std::size_t>(outputs.cols());
  EvalReport r;
  r.per_class_correct.assign(k, 0);
  r.per_class_total.assign(k, 0);
  for (Eigen::Index i = 0; i < outputs.rows(); ++i) {
    Eigen::Index predicted = 0;
    Eigen::Index actual = 0;
    for (Eigen::Index c = 1; c < outputs.cols(); ++c) {
      if (outputs(i, c) > outputs(i, predicted)) predicted = c;
      if (labels(i, c) > labels(i, actual)) actual = c;
    }
    ++r.per_class_total[static_cast<std::size_t>(actual)];
    if (predicted == actual) {
      ++r.correct;
      ++r.per_class_correct[static_cast<std::size_t>(actual)];
    }
  }
  r.total = static_cast<long>(outputs.rows());
  finish(r);
  return r;
}

EvalReport accuracy_scalar(const Mlp& net, const LabeledDataset& data) {
  if (net.output_dim() != 1 || !data.is_scalar()) {
    throw ValidationError("scalar rule needs a 1-output net and scalar labels (net has " +
                          std::to_string(net.output_dim()) + " outputs)");
  }
  return score_scalar(forward_batch(net, data.data()), data.labels());
}

EvalReport accuracy_argmax(const Mlp& net, const LabeledDataset& data) {
  if (net.output_dim() != data.label_width() || net.output_dim() < 2) {
    throw ValidationError("argmax rule needs net outputs (" + std::to_string(net.output_dim()) +
                          ") to equal label width (" + std::to_string(data.label_width()) +
                          ") and be at least 2");
  }
  return score_argmax(forward_batch(net, data.data()), data.labels());
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "metric,value\n";
  out << "correct," << report.correct << "\n";
  out << "total," << report.total << "\n";
  out << "accuracy," << std::setprecision(17) << report.accuracy << "\n";
  for (std::size_t c = 0; c < report.per_class_correct.size(); ++c) {
    out << "class" << c << "_correct," << report.per_class_correct[c] << "\n";
    out << "class" << c << "_total," << report.per_class_total[c] << "\n";
  }
}

void write_loss_csv(std::ostream& out, const EvalReport& report) {
  out << "epoch,loss\n" << std::setprecision(17);
  for (const auto& [epoch, loss] : report.loss_history) out << epoch << "," << loss << "\n";
}

}  // namespace mlpalg
