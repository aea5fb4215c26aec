#include "mlpalg/algebra.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "mlpalg/errors.hpp"
#include "mlpalg/format.hpp"

namespace mlpalg {

Sharpness::Sharpness(double lambda) : lambda_(lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("lambda must be positive and finite");
  }
}

ComposeReport describe_composition(const std::string& operation, const std::vector<Mlp>& operands,
                                   const Mlp& result, double lambda) {
  ComposeReport r;
  r.operation = operation;
  for (const auto& n : operands) r.operand_dims.push_back(n.layer_dims());
  r.result_dims = result.layer_dims();
  r.lambda = lambda;
  return r;
}

namespace {

enum class InputMode { Shared, Concatenated };

Provenance node(std::string op, const std::vector<Mlp>& operands,
                std::vector<std::pair<std::string, std::string>> params = {}) {
  Provenance p;
  p.op = std::move(op);
  p.params = std::move(params);
  for (const auto& n : operands) p.operands.push_back(n.provenance());
  return p;
}

void require(bool ok, const std::string& op, const std::string& what) {
  if (!ok) throw ValidationError(op + ": " + what);
}

std::string dims_str(const std::vector<int>& dims) {
  std::string s = "(";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i > 0) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + ")";
}

void check_operands(const std::string& op, const std::vector<Mlp>& nets, InputMode mode,
                    bool scalar_outputs) {
  require(!nets.empty(), op, "needs at least one operand");
  const auto& first = nets.front();
  for (std::size_t i = 0; i < nets.size(); ++i) {
    const auto& n = nets[i];
    if (n.depth() != first.depth()) {
      throw ValidationError(op + ": depth mismatch " + dims_str(first.layer_dims()) + " vs " +
                            dims_str(n.layer_dims()) + " (use align_depths)");
    }
    if (mode == InputMode::Shared && n.input_dim() != first.input_dim()) {
      throw ValidationError(op + ": input dimension mismatch " + std::to_string(first.input_dim()) +
                            " vs " + std::to_string(n.input_dim()));
    }
    if (scalar_outputs && n.output_dim() != 1) {
      throw ValidationError(op + ": operand " + std::to_string(i + 1) + " has " +
                            std::to_string(n.output_dim()) + " outputs, expected 1");
    }
  }
}

// Runs the operands side by side: hidden and output layers concatenate, the
// first map is stacked (shared input) or block-diagonal (concatenated input),
// every later map is block-diagonal.
MlpParams parallel(const std::vector<Mlp>& nets, InputMode mode) {
  const int L = nets.front().depth();
  MlpParams p;
  p.layer_dims.assign(static_cast<std::size_t>(L), 0);
  for (const auto& n : nets) {
    for (int k = 0; k < L; ++k) p.layer_dims[static_cast<std::size_t>(k)] += n.layer_dims()[static_cast<std::size_t>(k)];
  }
  if (mode == InputMode::Shared) p.layer_dims[0] = nets.front().input_dim();

  for (int i = 0; i < L - 1; ++i) {
    const auto rows = p.layer_dims[static_cast<std::size_t>(i) + 1];
    const auto cols = p.layer_dims[static_cast<std::size_t>(i)];
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(rows, cols);
    Eigen::VectorXd theta(rows);
    LayerActivation act;
    act.reserve(static_cast<std::size_t>(rows));
    Eigen::Index r0 = 0;
    Eigen::Index c0 = 0;
    const bool stacked = (i == 0 && mode == InputMode::Shared);
    for (const auto& n : nets) {
      const auto& Wn = n.weights(i);
      W.block(r0, stacked ? 0 : c0, Wn.rows(), Wn.cols()) = Wn;
      theta.segment(r0, Wn.rows()) = n.thresholds(i);
      act.insert(act.end(), n.activations(i).begin(), n.activations(i).end());
      r0 += Wn.rows();
      c0 += Wn.cols();
    }
    p.weights.push_back(std::move(W));
    p.thresholds.push_back(std::move(theta));
    p.activations.push_back(std::move(act));
  }
  return p;
}

// Appends the sigmoid row lambda*(1,...,1) with threshold offset*lambda.
Mlp with_combiner(MlpParams p, int inputs, double lambda, double offset, Provenance prov) {
  p.layer_dims.push_back(1);
  p.weights.push_back(Eigen::MatrixXd::Constant(1, inputs, lambda));
  p.thresholds.push_back(Eigen::VectorXd::Constant(1, offset * lambda));
  p.activations.push_back(uniform_activation(1, Activation::Sigmoid));
  p.provenance = std::move(prov);
  return Mlp(std::move(p));
}

Mlp combine(const std::string& op, const std::vector<Mlp>& nets, InputMode mode, double offset,
            Sharpness lambda) {
  check_operands(op, nets, mode, true);
  const int m = static_cast<int>(nets.size());
  return with_combiner(parallel(nets, mode), m, lambda.value(), offset,
                       node(op, nets, {{"lambda", format_shortest(lambda.value())}}));
}

}  // namespace

Mlp complement(const Mlp& net) {
  require(net.depth() >= 3, "complement", "needs at least 3 layers, got " + std::to_string(net.depth()));
  const int last = net.num_maps() - 1;
  require(is_uniform(net.activations(last), Activation::Sigmoid), "complement",
          "final activation must be sigmoid");
  MlpParams p = net.params();
  p.weights[static_cast<std::size_t>(last)] = -p.weights[static_cast<std::size_t>(last)];
  p.thresholds[static_cast<std::size_t>(last)] = -p.thresholds[static_cast<std::size_t>(last)];
  p.provenance = node("complement", {net});
  return Mlp(std::move(p));
}

Mlp sum(const Mlp& n1, const Mlp& n2, Sharpness lambda) {
  return combine("sum", {n1, n2}, InputMode::Shared, 0.5, lambda);
}

Mlp multi_sum(const std::vector<Mlp>& nets, Sharpness lambda) {
  return combine("multi_sum", nets, InputMode::Shared, 0.5, lambda);
}

Mlp difference(const Mlp& n1, const Mlp& n2, Sharpness lambda) {
  const auto c = complement(n2);
  check_operands("difference", {n1, c}, InputMode::Shared, true);
  MlpParams p = sum(n1, c, lambda).params();
  p.provenance = node("difference", {n1, n2}, {{"lambda", format_shortest(lambda.value())}});
  return Mlp(std::move(p));
}

Mlp conjunction(const Mlp& n1, const Mlp& n2, Sharpness lambda) {
  return combine("conjunction", {n1, n2}, InputMode::Shared, 1.5, lambda);
}

Mlp set_difference(const Mlp& n1, const Mlp& n2, Sharpness lambda) {
  MlpParams p = conjunction(n1, complement(n2), lambda).params();
  p.provenance = node("set_difference", {n1, n2}, {{"lambda", format_shortest(lambda.value())}});
  return Mlp(std::move(p));
}

Mlp i_product(const Mlp& n1, const Mlp& n2, Sharpness lambda) {
  return combine("i_product", {n1, n2}, InputMode::Concatenated, 1.5, lambda);
}

Mlp multi_i_product(const std::vector<Mlp>& nets, Sharpness lambda) {
  const double m = static_cast<double>(nets.size());
  return combine("multi_i_product", nets, InputMode::Concatenated, m - 0.5, lambda);
}

Mlp component(const Mlp& net, int l) {
  if (l < 1 || l > net.output_dim()) {
    throw ValidationError("component: index " + std::to_string(l) + " outside 1.." +
                          std::to_string(net.output_dim()));
  }
  MlpParams p = net.params();
  const auto last = p.weights.size() - 1;
  const Eigen::Index row = l - 1;
  p.layer_dims.back() = 1;
  p.weights[last] = Eigen::MatrixXd(p.weights[last].row(row));
  p.thresholds[last] = Eigen::VectorXd::Constant(1, p.thresholds[last](row));
  p.activations[last] = LayerActivation{p.activations[last][static_cast<std::size_t>(row)]};
  p.provenance = node("component", {net}, {{"index", std::to_string(l)}});
  return Mlp(std::move(p));
}

Mlp o_product(const Mlp& n1, const Mlp& n2) {
  check_operands("o_product", {n1, n2}, InputMode::Shared, true);
  MlpParams p = parallel({n1, n2}, InputMode::Shared);
  p.provenance = node("o_product", {n1, n2});
  return Mlp(std::move(p));
}

Mlp multi_o_product(const std::vector<Mlp>& nets) {
  require(nets.size() >= 2, "multi_o_product", "needs at least 2 operands");
  check_operands("multi_o_product", nets, InputMode::Shared, true);
  MlpParams p = parallel(nets, InputMode::Shared);
  p.provenance = node("multi_o_product", nets);
  return Mlp(std::move(p));
}

namespace {

bool is_extension_layer(const Mlp& net) {
  const int last = net.num_maps() - 1;
  const auto& W = net.weights(last);
  return W.rows() == W.cols() && W.isIdentity(0.0) && net.thresholds(last).isZero(0.0) &&
         is_uniform(net.activations(last), Activation::Relu);
}

}  // namespace

Mlp identical_extension(const Mlp& net) {
  // A ReLU output is only passed through unchanged when it is already
  // nonnegative, which holds for sigmoid outputs and for earlier extensions.
  require(is_uniform(net.activations(net.num_maps() - 1), Activation::Sigmoid) ||
              is_extension_layer(net),
          "identical_extension", "final activation must be sigmoid");
  MlpParams p = net.params();
  const int n = net.output_dim();
  p.layer_dims.push_back(n);
  p.weights.push_back(Eigen::MatrixXd::Identity(n, n));
  p.thresholds.push_back(Eigen::VectorXd::Zero(n));
  p.activations.push_back(uniform_activation(n, Activation::Relu));
  p.provenance = node("extend", {net});
  return Mlp(std::move(p));
}

std::pair<Mlp, Mlp> align_depths(const Mlp& n1, const Mlp& n2) {
  Mlp a = n1;
  Mlp b = n2;
  while (a.depth() < b.depth()) a = identical_extension(a);
  while (b.depth() < a.depth()) b = identical_extension(b);
  return {std::move(a), std::move(b)};
}

}  // namespace mlpalg
