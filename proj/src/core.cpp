#include "mlpalg/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mlpalg/errors.hpp"

namespace mlpalg {

double sigmoid(double z) {
  if (z < -500.0) return 0.0;
  if (z > 500.0) return 1.0;
  return 1.0 / (1.0 + std::exp(-z));
}

double relu(double z) { return z > 0.0 ? z : 0.0; }

double activate(Activation tag, double z) {
  return tag == Activation::Sigmoid ? sigmoid(z) : relu(z);
}

std::string_view to_string(Activation tag) {
  return tag == Activation::Sigmoid ? "sigmoid" : "relu";
}

Activation parse_activation(std::string_view name) {
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "relu") return Activation::Relu;
  throw ValidationError("unknown activation tag '" + std::string(name) + "'");
}

LayerActivation uniform_activation(int units, Activation tag) {
  return LayerActivation(static_cast<std::size_t>(std::max(units, 0)), tag);
}

bool is_uniform(const LayerActivation& layer, Activation tag) {
  return std::all_of(layer.begin(), layer.end(), [tag](Activation a) { return a == tag; });
}

std::string Provenance::describe() const {
  std::string out = op.empty() ? "net" : op;
  if (operands.empty()) return out;
  out += '(';
  for (std::size_t i = 0; i < operands.size(); ++i) {
    if (i > 0) out += ", ";
    out += operands[i].describe();
  }
  out += ')';
  return out;
}

namespace {

std::string shape_str(Eigen::Index rows, Eigen::Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

}  // namespace

std::vector<Violation> validate(const MlpParams& p) {
  std::vector<Violation> out;
  const auto L = p.layer_dims.size();
  if (L < 2) {
    out.push_back({0, "need at least 2 layers, got " + std::to_string(L)});
    return out;
  }
  for (std::size_t k = 0; k < L; ++k) {
    if (p.layer_dims[k] <= 0) {
      out.push_back({0, "layer " + std::to_string(k + 1) + " has non-positive dimension " +
                            std::to_string(p.layer_dims[k])});
    }
  }
  const auto maps = L - 1;
  if (p.weights.size() != maps || p.thresholds.size() != maps || p.activations.size() != maps) {
    out.push_back({0, "expected " + std::to_string(maps) + " weights/thresholds/activations, got " +
                          std::to_string(p.weights.size()) + "/" +
                          std::to_string(p.thresholds.size()) + "/" +
                          std::to_string(p.activations.size())});
    return out;
  }
  for (std::size_t i = 0; i < maps; ++i) {
    const int layer = static_cast<int>(i) + 1;
    const Eigen::Index rows = p.layer_dims[i + 1];
    const Eigen::Index cols = p.layer_dims[i];
    const auto& W = p.weights[i];
    if (W.rows() != rows || W.cols() != cols) {
      out.push_back({layer, "weights: expected " + shape_str(rows, cols) + ", got " +
                                shape_str(W.rows(), W.cols())});
    }
    if (p.thresholds[i].size() != rows) {
      out.push_back({layer, "thresholds: expected length " + std::to_string(rows) + ", got " +
                                std::to_string(p.thresholds[i].size())});
    }
    if (static_cast<Eigen::Index>(p.activations[i].size()) != rows) {
      out.push_back({layer, "activations: expected " + std::to_string(rows) + " tags, got " +
                                std::to_string(p.activations[i].size())});
    }
    if (!W.allFinite() || !p.thresholds[i].allFinite()) {
      out.push_back({layer, "non-finite entry"});
    }
  }
  return out;
}

Mlp::Mlp(MlpParams params) : p_(std::move(params)) {
  const auto violations = validate(p_);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "invalid network:";
    for (const auto& v : violations) msg << " [layer " << v.layer << "] " << v.message << ";";
    throw ValidationError(msg.str());
  }
}

int Mlp::parameter_count() const {
  Eigen::Index n = 0;
  for (int i = 0; i < num_maps(); ++i) n += p_.weights[i].size() + p_.thresholds[i].size();
  return static_cast<int>(n);
}

Mlp Mlp::with_provenance(Provenance provenance) const {
  MlpParams copy = p_;
  copy.provenance = std::move(provenance);
  return Mlp(std::move(copy));
}

bool Mlp::operator==(const Mlp& other) const {
  if (p_.layer_dims != other.p_.layer_dims || p_.activations != other.p_.activations) return false;
  for (int i = 0; i < num_maps(); ++i) {
    if (p_.weights[i] != other.p_.weights[i] || p_.thresholds[i] != other.p_.thresholds[i]) {
      return false;
    }
  }
  return true;
}

int layer_space(const Mlp& net, LayerIndex k) {
  if (k.value() < 1 || k.value() > net.depth()) {
    throw ValidationError("layer index " + std::to_string(k.value()) + " outside 1.." +
                          std::to_string(net.depth()));
  }
  return net.layer_dims()[static_cast<std::size_t>(k.value() - 1)];
}

// Plain loops keep the summation order fixed: the algebra's exact identities
// (component, o_product, identical_extension) rely on zero-padded blocks
// reproducing operand sums bit for bit.
void apply_map(const Mlp& net, int map, std::span<const double> in, std::span<double> pre,
               std::span<double> out) {
  const auto& W = net.weights(map);
  const auto& theta = net.thresholds(map);
  const auto& act = net.activations(map);
  const Eigen::Index rows = W.rows();
  const Eigen::Index cols = W.cols();
  for (Eigen::Index j = 0; j < rows; ++j) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < cols; ++k) s += W(j, k) * in[static_cast<std::size_t>(k)];
    const double z = s - theta(j);
    if (!pre.empty()) pre[static_cast<std::size_t>(j)] = z;
    out[static_cast<std::size_t>(j)] = activate(act[static_cast<std::size_t>(j)], z);
  }
}

namespace {

void forward_into(const Mlp& net, std::span<const double> x, std::vector<double>& a,
                  std::vector<double>& b) {
  a.assign(x.begin(), x.end());
  for (int i = 0; i < net.num_maps(); ++i) {
    b.resize(static_cast<std::size_t>(net.layer_dims()[static_cast<std::size_t>(i) + 1]));
    apply_map(net, i, a, {}, b);
    std::swap(a, b);
  }
}

}  // namespace

Eigen::VectorXd forward(const Mlp& net, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != net.input_dim()) {
    throw ValidationError("input has dimension " + std::to_string(x.size()) +
                          ", network expects " + std::to_string(net.input_dim()));
  }
  std::vector<double> a;
  std::vector<double> b;
  forward_into(net, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), a, b);
  return Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
}

Eigen::MatrixXd forward_batch(const Mlp& net, const Eigen::Ref<const Eigen::MatrixXd>& X) {
  if (X.cols() != net.input_dim()) {
    throw ValidationError("data has " + std::to_string(X.cols()) + " columns, network expects " +
                          std::to_string(net.input_dim()));
  }
  Eigen::MatrixXd out(X.rows(), net.output_dim());
  std::vector<double> row(static_cast<std::size_t>(X.cols()));
  std::vector<double> a;
  std::vector<double> b;
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    for (Eigen::Index c = 0; c < X.cols(); ++c) row[static_cast<std::size_t>(c)] = X(r, c);
    forward_into(net, row, a, b);
    for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) = a[static_cast<std::size_t>(c)];
  }
  return out;
}

}  // namespace mlpalg
