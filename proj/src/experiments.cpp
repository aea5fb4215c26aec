#include "mlpalg/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "mlpalg/errors.hpp"
#include "mlpalg/random.hpp"

namespace mlpalg {

namespace {

std::vector<int> default_dims(int n) { return {n, n + 1, 1}; }

TrainResult train_on(const LabeledDataset& data, std::vector<int> dims, const TrainConfig& cfg) {
  const Mlp init = init_mlp(dims, derive_seed(cfg.seed, 12), cfg.init_scale);
  return train_sgd(init, data, cfg);
}

TrainConfig reseeded(TrainConfig cfg, std::uint64_t seed) {
  cfg.seed = seed;
  return cfg;
}

LabeledDataset training_set(const GeometricShape& shape, Epsilon eps, Eigen::Index per_class,
                            std::uint64_t seed) {
  return make_characteristic_dataset(shape, eps, per_class, per_class, derive_seed(seed, 11));
}

ClauseReport clause(std::string name, std::string op, const Mlp& composed, const Mlp& direct,
                    const LabeledDataset& eval) {
  ClauseReport r;
  r.clause = std::move(name);
  r.composed_op = std::move(op);
  r.composed_accuracy = accuracy_scalar(composed, eval).accuracy;
  r.direct_accuracy = accuracy_scalar(direct, eval).accuracy;
  r.gap = std::abs(r.composed_accuracy - r.direct_accuracy);
  r.composed_dims = composed.layer_dims();
  r.direct_dims = direct.layer_dims();
  return r;
}

}  // namespace

TrainResult train_characteristic(const GeometricShape& shape, Epsilon eps, const TrainConfig& cfg,
                                 Eigen::Index per_class, std::vector<int> dims) {
  if (dims.empty()) dims = default_dims(shape.dimension());
  return train_on(training_set(shape, eps, per_class, cfg.seed), std::move(dims), cfg);
}

Theorem1Report verify_theorem1(const Theorem1Config& cfg) {
  if (cfg.first.dimension() != cfg.second.dimension()) {
    throw ValidationError("composition check: both shapes must live in the same space");
  }
  const std::uint64_t s = cfg.seed;
  const Eigen::Index half = cfg.eval_points / 2;
  const int n = cfg.first.dimension();

  const auto train1 = training_set(cfg.first, cfg.eps, cfg.train_per_class, derive_seed(s, 1));
  const auto train2 = training_set(cfg.second, cfg.eps, cfg.train_per_class, derive_seed(s, 2));
  const Mlp net1 = train_on(train1, default_dims(n), reseeded(cfg.train, derive_seed(s, 3))).net;
  const Mlp net2 = train_on(train2, default_dims(n), reseeded(cfg.train, derive_seed(s, 4))).net;

  Theorem1Report report;

  {
    const auto eval = complement_labels(
        make_characteristic_dataset(cfg.first, cfg.eps, half, half, derive_seed(s, 10)));
    const Mlp direct =
        train_on(complement_labels(train1), default_dims(n), reseeded(cfg.train, derive_seed(s, 5))).net;
    report.clauses.push_back(clause("complement", "complement", complement(net1), direct, eval));
  }

  {
    const auto u = GeometricShape::union_of({cfg.first, cfg.second});
    const auto eval = make_characteristic_dataset(u, cfg.eps, half, half, derive_seed(s, 20));
    const Mlp composed = sum(net1, net2, cfg.lambda);
    const auto train_u = training_set(u, cfg.eps, 2 * cfg.train_per_class, derive_seed(s, 21));
    const Mlp direct = train_on(train_u, cfg.union_direct_dims, reseeded(cfg.train, derive_seed(s, 22))).net;
    report.clauses.push_back(clause("union", "sum", composed, direct, eval));
  }

  {
    const auto e1 = make_characteristic_dataset(cfg.first, cfg.eps, half, half, derive_seed(s, 30));
    const auto e2 = make_characteristic_dataset(cfg.second, cfg.eps, half, half, derive_seed(s, 31));
    const auto eval = product_dataset(e1, e2, derive_seed(s, 32), cfg.eval_points);
    const Mlp composed = i_product(net1, net2, cfg.lambda);
    const auto train_p = product_dataset(train1, train2, derive_seed(s, 33), cfg.product_train_pairs);
    const Mlp direct = train_on(train_p, cfg.product_direct_dims, reseeded(cfg.train, derive_seed(s, 34))).net;
    report.clauses.push_back(clause("product", "i_product", composed, direct, eval));
  }
  return report;
}

TorusResult run_torus_demo(const TorusConfig& cfg) {
  if (!(cfg.inner_radius > 0.0 && cfg.inner_radius < cfg.outer_radius)) {
    throw ValidationError("torus demo needs 0 < r < R");
  }
  if (cfg.inner_radius - cfg.eps.value() <= 0.0) {
    throw ValidationError("torus demo needs eps < r");
  }
  const std::uint64_t s = cfg.seed;
  const Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  const auto outer_shape = GeometricShape::ball(origin, cfg.outer_radius);
  const auto inner_shape = GeometricShape::ball(origin, cfg.inner_radius);

  auto outer = train_characteristic(outer_shape, cfg.eps, reseeded(cfg.train, derive_seed(s, 1)),
                                    cfg.train_per_class, cfg.disk_dims);
  auto inner = train_characteristic(inner_shape, cfg.eps, reseeded(cfg.train, derive_seed(s, 2)),
                                    cfg.train_per_class, cfg.disk_dims);

  const auto [big, small] = align_depths(outer.net, inner.net);
  const Mlp annulus_sd = set_difference(big, small, cfg.lambda);
  const Mlp annulus_lit = difference(big, small, cfg.lambda);
  const Mlp torus_sd = i_product(annulus_sd, annulus_sd, cfg.lambda);
  const Mlp torus_lit = i_product(annulus_lit, annulus_lit, cfg.lambda);

  const auto ring = GeometricShape::annulus(origin, cfg.inner_radius, cfg.outer_radius);
  const Eigen::Index per_class = std::max<Eigen::Index>(cfg.eval_points / 2, 1);
  const auto e1 = make_characteristic_dataset(ring, cfg.eps, per_class, per_class, derive_seed(s, 3));
  const auto e2 = make_characteristic_dataset(ring, cfg.eps, per_class, per_class, derive_seed(s, 4));
  auto eval = product_dataset(e1, e2, derive_seed(s, 5), cfg.eval_points);

  const auto core = GeometricShape::ball(origin, cfg.inner_radius - cfg.eps.value());
  auto probe = LabeledDataset(
      sample_positive(GeometricShape::product(core, core), cfg.probe_points, derive_seed(s, 6)),
      Eigen::MatrixXd::Zero(cfg.probe_points, 1));

  auto eval_sd = accuracy_scalar(torus_sd, eval);
  auto eval_lit = accuracy_scalar(torus_lit, eval);
  auto probe_sd = accuracy_scalar(torus_sd, probe);
  auto probe_lit = accuracy_scalar(torus_lit, probe);
  return TorusResult{
      .outer_disk = std::move(outer.net),
      .inner_disk = std::move(inner.net),
      .annulus_set_difference = annulus_sd,
      .annulus_literal = annulus_lit,
      .torus_set_difference = torus_sd,
      .torus_literal = torus_lit,
      .outer_train = std::move(outer.report),
      .inner_train = std::move(inner.report),
      .eval_set_difference = std::move(eval_sd),
      .eval_literal = std::move(eval_lit),
      .probe_set_difference = std::move(probe_sd),
      .probe_literal = std::move(probe_lit),
      .eval_set = std::move(eval),
      .probe_set = std::move(probe),
  };
}

std::vector<GeometricShape> default_multilabel_shapes() {
  return {GeometricShape::ball(Eigen::Vector2d(-1.5, 0.0), 0.6),
          GeometricShape::ball(Eigen::Vector2d(0.0, 0.0), 0.6),
          GeometricShape::ball(Eigen::Vector2d(1.5, 0.0), 0.6)};
}

MultilabelResult run_multilabel_demo(const MultilabelConfig& cfg) {
  if (cfg.shapes.size() < 2) throw ValidationError("multi-label demo needs at least 2 shapes");
  const int n = cfg.shapes.front().dimension();
  for (const auto& shape : cfg.shapes) {
    if (shape.dimension() != n) throw ValidationError("multi-label demo: shapes differ in dimension");
  }
  const std::uint64_t s = cfg.seed;
  std::vector<Mlp> nets;
  for (std::size_t i = 0; i < cfg.shapes.size(); ++i) {
    nets.push_back(train_characteristic(cfg.shapes[i], cfg.eps,
                                        reseeded(cfg.train, derive_seed(s, 100 + i)),
                                        cfg.train_per_class)
                       .net);
  }
  int depth = 0;
  for (const auto& net : nets) depth = std::max(depth, net.depth());
  std::vector<Mlp> aligned;
  for (const auto& net : nets) {
    Mlp a = net;
    while (a.depth() < depth) a = identical_extension(a);
    aligned.push_back(std::move(a));
  }
  Mlp combined = multi_o_product(aligned);

  const auto eval = make_multiclass_dataset(cfg.shapes, cfg.eval_per_class, derive_seed(s, 1));
  auto argmax = accuracy_argmax(combined, eval);

  std::vector<EvalReport> components;
  for (std::size_t i = 0; i < cfg.shapes.size(); ++i) {
    const auto check = make_characteristic_dataset(cfg.shapes[i], cfg.eps, cfg.eval_per_class,
                                                   cfg.eval_per_class, derive_seed(s, 200 + i));
    components.push_back(accuracy_scalar(component(combined, static_cast<int>(i) + 1), check));
  }
  return {std::move(nets), std::move(combined), std::move(argmax), std::move(components)};
}

}  // namespace mlpalg
