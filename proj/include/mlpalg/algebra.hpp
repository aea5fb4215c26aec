#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mlpalg/core.hpp"

namespace mlpalg {

// Gain on the combining output row of sum/product nets.
class Sharpness {
 public:
  static constexpr double kDefault = 20.0;

  constexpr Sharpness() = default;
  // Throws ValidationError unless lambda is positive and finite.
  explicit Sharpness(double lambda);

  constexpr double value() const { return lambda_; }

 private:
  double lambda_ = kDefault;
};

struct ComposeReport {
  std::string operation;
  std::vector<std::vector<int>> operand_dims;
  std::vector<int> result_dims;
  double lambda = 0.0;  // 0 when the operation takes none
};

ComposeReport describe_composition(const std::string& operation, const std::vector<Mlp>& operands,
                                   const Mlp& result, double lambda = 0.0);

// Negates the final weight matrix and threshold vector, so the result computes
// 1 - net(x) coordinate-wise. Requires L >= 3 and a sigmoid output layer.
Mlp complement(const Mlp& net);

// Shared-input soft OR: sigma(lambda * (n1(x) + n2(x)) - 0.5 lambda). L+1 layers.
Mlp sum(const Mlp& n1, const Mlp& n2, Sharpness lambda = {});
Mlp multi_sum(const std::vector<Mlp>& nets, Sharpness lambda = {});

// sum(n1, complement(n2)): soft OR(n1, NOT n2). This is the literal difference
// construction; for "inside n1 but not n2" use set_difference.
Mlp difference(const Mlp& n1, const Mlp& n2, Sharpness lambda = {});

// Shared-input soft AND: final threshold 1.5 lambda.
Mlp conjunction(const Mlp& n1, const Mlp& n2, Sharpness lambda = {});

// conjunction(n1, complement(n2)): fires iff n1 fires and n2 does not.
Mlp set_difference(const Mlp& n1, const Mlp& n2, Sharpness lambda = {});

// Soft AND over a concatenated input x1 ++ x2; every map is block-diagonal.
Mlp i_product(const Mlp& n1, const Mlp& n2, Sharpness lambda = {});
// m-way AND with final threshold (m - 0.5) lambda.
Mlp multi_i_product(const std::vector<Mlp>& nets, Sharpness lambda = {});

// Scalar net computing coordinate l (1-based) of net's output.
Mlp component(const Mlp& net, int l);

// Shared-input pairing: result(x) = (n1(x), n2(x)), same depth as the operands.
Mlp o_product(const Mlp& n1, const Mlp& n2);
Mlp multi_o_product(const std::vector<Mlp>& nets);

// Appends an identity ReLU layer; output is unchanged because sigmoid and
// ReLU outputs are both nonnegative.
Mlp identical_extension(const Mlp& net);

// Extends the shallower net until both have equal depth.
std::pair<Mlp, Mlp> align_depths(const Mlp& n1, const Mlp& n2);

}  // namespace mlpalg
