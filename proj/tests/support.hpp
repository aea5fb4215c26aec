#pragma once

// Test-side oracles. Nothing here calls into the forward pass, the composition
// operators or the scorers under test.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mlpalg/core.hpp"

namespace mlpalg::testing {

using Engine = std::mt19937_64;

inline double uniform_in(Engine& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

template <typename T = double>
T ref_sigmoid(T z) {
  return T(1) / (T(1) + std::exp(-z));
}

template <typename T = double>
T ref_activate(Activation tag, T z) {
  return tag == Activation::Sigmoid ? ref_sigmoid(z) : std::max(z, T(0));
}

// Plain scalar recurrence over the stored parameters, evaluated in T.
template <typename T = double>
std::vector<T> ref_forward(const MlpParams& p, const std::vector<double>& x) {
  std::vector<T> a(x.begin(), x.end());
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    const auto& W = p.weights[i];
    std::vector<T> next(static_cast<std::size_t>(W.rows()));
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      T s = 0;
      for (Eigen::Index c = 0; c < W.cols(); ++c) s += T(W(r, c)) * a[static_cast<std::size_t>(c)];
      next[static_cast<std::size_t>(r)] =
          ref_activate<T>(p.activations[i][static_cast<std::size_t>(r)], s - T(p.thresholds[i](r)));
    }
    a = std::move(next);
  }
  return a;
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

enum class Mix { AllSigmoid, Mixed };

// Random valid parameters. With Mix::Mixed hidden units get random tags; the
// final layer stays sigmoid unless `relu_final` is set.
inline MlpParams random_params(const std::vector<int>& dims, Engine& rng, Mix mix = Mix::AllSigmoid,
                               double scale = 2.0, bool relu_final = false) {
  MlpParams p;
  p.layer_dims = dims;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    Eigen::MatrixXd W(dims[i + 1], dims[i]);
    Eigen::VectorXd t(dims[i + 1]);
    for (Eigen::Index k = 0; k < W.size(); ++k) W.data()[k] = uniform_in(rng, -scale, scale);
    for (Eigen::Index k = 0; k < t.size(); ++k) t(k) = uniform_in(rng, -scale, scale);
    const bool last = i + 2 == dims.size();
    LayerActivation act;
    for (int u = 0; u < dims[i + 1]; ++u) {
      if (last) {
        act.push_back(relu_final ? Activation::Relu : Activation::Sigmoid);
      } else if (mix == Mix::Mixed && (rng() & 1U)) {
        act.push_back(Activation::Relu);
      } else {
        act.push_back(Activation::Sigmoid);
      }
    }
    p.weights.push_back(std::move(W));
    p.thresholds.push_back(std::move(t));
    p.activations.push_back(std::move(act));
  }
  return p;
}

inline Mlp random_net(const std::vector<int>& dims, Engine& rng, Mix mix = Mix::AllSigmoid,
                      double scale = 2.0) {
  return Mlp(random_params(dims, rng, mix, scale));
}

inline std::vector<int> random_dims(Engine& rng, int input, int output, int min_depth, int max_depth,
                                    int max_width = 5) {
  const int depth = std::uniform_int_distribution<int>(min_depth, max_depth)(rng);
  std::vector<int> dims{input};
  for (int k = 1; k + 1 < depth; ++k) dims.push_back(std::uniform_int_distribution<int>(1, max_width)(rng));
  dims.push_back(output);
  return dims;
}

inline Eigen::VectorXd random_point(Engine& rng, int dim, double lo = -3.0, double hi = 3.0) {
  Eigen::VectorXd x(dim);
  for (int i = 0; i < dim; ++i) x(i) = uniform_in(rng, lo, hi);
  return x;
}

// Depth-3 scalar net on R^1 whose output is exactly sigmoid(logit(v)) ~ v for
// every input.
inline Mlp constant_net(double v) {
  MlpParams p;
  p.layer_dims = {1, 1, 1};
  p.weights = {Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1)};
  p.thresholds = {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, -std::log(v / (1.0 - v)))};
  p.activations = {uniform_activation(1, Activation::Sigmoid), uniform_activation(1, Activation::Sigmoid)};
  return Mlp(std::move(p));
}

// Central differences of `f` around each parameter; same layout as the net.
// The divisor is the step actually taken after rounding the perturbed value.
template <typename F>
void central_differences(MlpParams p, double h, F&& f, std::vector<Eigen::MatrixXd>& dW,
                         std::vector<Eigen::VectorXd>& dt) {
  dW.clear();
  dt.clear();
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    Eigen::MatrixXd gw(p.weights[i].rows(), p.weights[i].cols());
    for (Eigen::Index k = 0; k < gw.size(); ++k) {
      double& w = p.weights[i].data()[k];
      const double w0 = w;
      w = w0 + h;
      const long double up = f(p);
      const long double step = static_cast<long double>(w) - (w0 - h);
      w = w0 - h;
      const long double down = f(p);
      w = w0;
      gw.data()[k] = static_cast<double>((up - down) / step);
    }
    Eigen::VectorXd gt(p.thresholds[i].size());
    for (Eigen::Index k = 0; k < gt.size(); ++k) {
      double& t = p.thresholds[i](k);
      const double t0 = t;
      t = t0 + h;
      const long double up = f(p);
      const long double step = static_cast<long double>(t) - (t0 - h);
      t = t0 - h;
      const long double down = f(p);
      t = t0;
      gt(k) = static_cast<double>((up - down) / step);
    }
    dW.push_back(std::move(gw));
    dt.push_back(std::move(gt));
  }
}

// Pre-activations of every hidden and output unit, for steering clear of
// ReLU kinks in derivative checks.
inline double min_abs_relu_preactivation(const MlpParams& p, std::vector<double> a) {
  double best = INFINITY;
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    const auto& W = p.weights[i];
    std::vector<double> next(static_cast<std::size_t>(W.rows()));
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      double s = 0.0;
      for (Eigen::Index c = 0; c < W.cols(); ++c) s += W(r, c) * a[static_cast<std::size_t>(c)];
      const double z = s - p.thresholds[i](r);
      const auto tag = p.activations[i][static_cast<std::size_t>(r)];
      if (tag == Activation::Relu) best = std::min(best, std::abs(z));
      next[static_cast<std::size_t>(r)] = ref_activate(tag, z);
    }
    a = std::move(next);
  }
  return best;
}

// Reference counting loops for the two decision rules.
inline long ref_count_scalar(const Eigen::MatrixXd& out, const Eigen::MatrixXd& labels) {
  long correct = 0;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const int predicted = out(i, 0) >= 0.5 ? 1 : 0;
    const int truth = labels(i, 0) >= 0.5 ? 1 : 0;
    if (predicted == truth) ++correct;
  }
  return correct;
}

inline long ref_count_argmax(const Eigen::MatrixXd& out, const Eigen::MatrixXd& labels) {
  long correct = 0;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    Eigen::Index best = 0;
    Eigen::Index truth = 0;
    for (Eigen::Index j = 1; j < out.cols(); ++j) {
      if (out(i, j) > out(i, best)) best = j;
      if (labels(i, j) > labels(i, truth)) truth = j;
    }
    if (best == truth) ++correct;
  }
  return correct;
}

}  // namespace mlpalg::testing
