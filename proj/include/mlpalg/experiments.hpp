#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlpalg/algebra.hpp"
#include "mlpalg/core.hpp"
#include "mlpalg/data.hpp"
#include "mlpalg/train.hpp"

namespace mlpalg {

// Trains an n x (n+1) x 1 (or `dims`) characteristic net for a shape on a
// balanced dataset of 2 * per_class points.
TrainResult train_characteristic(const GeometricShape& shape, Epsilon eps, const TrainConfig& cfg,
                                 Eigen::Index per_class, std::vector<int> dims = {});

// ---------------------------------------------------------------------------
// Accuracy equivalences for characteristic nets: complement, union via sum,
// Cartesian product via i_product. Each clause compares the composed net with
// a net trained directly on the combined set.

struct Theorem1Config {
  GeometricShape first = GeometricShape::ball(Eigen::Vector2d(-1.5, 0.0), 1.0);
  GeometricShape second = GeometricShape::ball(Eigen::Vector2d(1.5, 0.0), 1.0);
  Epsilon eps{0.1};
  Sharpness lambda{};
  TrainConfig train{};
  Eigen::Index train_per_class = 500;
  Eigen::Index eval_points = 2000;
  // Architectures of the directly trained reference nets. The complement
  // clause reuses n x (n+1) x 1.
  std::vector<int> union_direct_dims{2, 12, 1};
  std::vector<int> product_direct_dims{4, 12, 1};
  Eigen::Index product_train_pairs = 8000;
  std::uint64_t seed = 0;
};

struct ClauseReport {
  std::string clause;
  std::string composed_op;
  double composed_accuracy = 0.0;
  double direct_accuracy = 0.0;
  double gap = 0.0;  // |composed - direct|
  std::vector<int> composed_dims;
  std::vector<int> direct_dims;
};

struct Theorem1Report {
  std::vector<ClauseReport> clauses;  // complement, union, product
};

Theorem1Report verify_theorem1(const Theorem1Config& cfg);

// ---------------------------------------------------------------------------
// Torus in R^4 as (disk_R minus disk_r) x (disk_R minus disk_r).

struct TorusConfig {
  double outer_radius = 1.0;
  double inner_radius = 0.5;
  Epsilon eps{0.05};
  Sharpness lambda{};
  TrainConfig train{};
  std::vector<int> disk_dims{2, 3, 1};
  Eigen::Index train_per_class = 500;
  Eigen::Index eval_points = 4000;
  Eigen::Index probe_points = 1000;
  std::uint64_t seed = 0;
};

struct TorusResult {
  Mlp outer_disk;
  Mlp inner_disk;
  Mlp annulus_set_difference;
  Mlp annulus_literal;
  Mlp torus_set_difference;
  Mlp torus_literal;
  EvalReport outer_train;
  EvalReport inner_train;
  EvalReport eval_set_difference;
  EvalReport eval_literal;
  // Points whose two planar projections both lie inside the inner disk (shrunk
  // by eps); all are off the torus.
  EvalReport probe_set_difference;
  EvalReport probe_literal;
  LabeledDataset eval_set;
  LabeledDataset probe_set;
};

// Throws ValidationError unless 0 < inner_radius < outer_radius.
TorusResult run_torus_demo(const TorusConfig& cfg);

// ---------------------------------------------------------------------------
// Multi-label classifier from per-label characteristic nets.

struct MultilabelConfig {
  std::vector<GeometricShape> shapes;
  Epsilon eps{};
  TrainConfig train{};
  Eigen::Index train_per_class = 500;
  Eigen::Index eval_per_class = 1000;
  std::uint64_t seed = 0;
};

std::vector<GeometricShape> default_multilabel_shapes();

struct MultilabelResult {
  std::vector<Mlp> nets;
  Mlp combined;
  EvalReport argmax;
  std::vector<EvalReport> components;  // component i scored on shape i's characteristic set
};

// Throws ValidationError for fewer than 2 shapes.
MultilabelResult run_multilabel_demo(const MultilabelConfig& cfg);

}  // namespace mlpalg
