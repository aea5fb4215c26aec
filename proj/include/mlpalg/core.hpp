#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mlpalg {

enum class Activation { Sigmoid, Relu };

// Saturates to exactly 0 / 1 beyond |z| > 500.
double sigmoid(double z);
double relu(double z);
double activate(Activation tag, double z);

std::string_view to_string(Activation tag);
// Accepts "sigmoid" and "relu"; throws ValidationError otherwise.
Activation parse_activation(std::string_view name);

// Tags for one connecting map, one entry per output unit. Nets built by
// training carry uniform layers; aligned composites may mix tags.
using LayerActivation = std::vector<Activation>;

LayerActivation uniform_activation(int units, Activation tag);
bool is_uniform(const LayerActivation& layer, Activation tag);

// Operation tree recorded by the algebra and training code. Never consulted
// during evaluation.
struct Provenance {
  std::string op;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<Provenance> operands;

  // Compact rendering such as "i_product(set_difference(trained, trained), ...)".
  std::string describe() const;
  bool operator==(const Provenance&) const = default;
};

// 1-based index of a layer space b^k.
class LayerIndex {
 public:
  explicit constexpr LayerIndex(int k) : k_(k) {}
  constexpr int value() const { return k_; }

 private:
  int k_;
};

// Raw, possibly inconsistent network parameters. Thresholds are subtracted:
// unit j of map i computes act(sum_k W[i](j,k) a[k] - thresholds[i](j)).
struct MlpParams {
  std::vector<int> layer_dims;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> thresholds;
  std::vector<LayerActivation> activations;
  Provenance provenance;
};

struct Violation {
  int layer;  // 1-based connecting-map index, 0 for whole-net problems
  std::string message;
};

// Empty result means the parameters form a valid network.
std::vector<Violation> validate(const MlpParams& params);

// Immutable, validated multilayer perceptron.
class Mlp {
 public:
  // Throws ValidationError listing every violation.
  explicit Mlp(MlpParams params);

  int depth() const { return static_cast<int>(p_.layer_dims.size()); }
  int num_maps() const { return depth() - 1; }
  int input_dim() const { return p_.layer_dims.front(); }
  int output_dim() const { return p_.layer_dims.back(); }

  const std::vector<int>& layer_dims() const { return p_.layer_dims; }
  // Map accessors are 0-based: map i connects layer i+1 to layer i+2.
  const Eigen::MatrixXd& weights(int map) const { return p_.weights.at(map); }
  const Eigen::VectorXd& thresholds(int map) const { return p_.thresholds.at(map); }
  const LayerActivation& activations(int map) const { return p_.activations.at(map); }
  const Provenance& provenance() const { return p_.provenance; }
  const MlpParams& params() const { return p_; }

  int parameter_count() const;
  Mlp with_provenance(Provenance provenance) const;

  bool operator==(const Mlp& other) const;

 private:
  MlpParams p_;
};

// Dimension of b^k. Throws ValidationError when k is outside 1..L.
int layer_space(const Mlp& net, LayerIndex k);

// Evaluates one connecting map. `pre` receives pre-activations and may be
// empty when not needed.
void apply_map(const Mlp& net, int map, std::span<const double> in, std::span<double> pre,
               std::span<double> out);

Eigen::VectorXd forward(const Mlp& net, const Eigen::Ref<const Eigen::VectorXd>& x);

// Row i of the result is forward(net, row i of X).
Eigen::MatrixXd forward_batch(const Mlp& net, const Eigen::Ref<const Eigen::MatrixXd>& X);

}  // namespace mlpalg
