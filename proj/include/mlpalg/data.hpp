#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace mlpalg {

class GeometricShape;

// Open ball ||p - center|| < radius.
struct Ball {
  Eigen::VectorXd center;
  double radius;
};

// Open annulus r_inner < ||p - center|| < r_outer.
struct Annulus {
  Eigen::VectorXd center;
  double r_inner;
  double r_outer;
};

// Open box min < p < max coordinate-wise.
struct Box {
  Eigen::VectorXd min;
  Eigen::VectorXd max;
};

// Cartesian product; points are left ++ right.
struct Product {
  std::shared_ptr<const GeometricShape> left;
  std::shared_ptr<const GeometricShape> right;
};

// Union of shapes living in the same space.
struct Union {
  std::vector<std::shared_ptr<const GeometricShape>> parts;
};

struct BoundingBox {
  Eigen::VectorXd min;
  Eigen::VectorXd max;
};

// Analytic membership and distance oracle. Immutable; the factories validate.
class GeometricShape {
 public:
  using Variant = std::variant<Ball, Annulus, Box, Product, Union>;

  static GeometricShape ball(Eigen::VectorXd center, double radius);
  static GeometricShape annulus(Eigen::VectorXd center, double r_inner, double r_outer);
  static GeometricShape box(Eigen::VectorXd min, Eigen::VectorXd max);
  static GeometricShape product(GeometricShape left, GeometricShape right);
  static GeometricShape union_of(std::vector<GeometricShape> parts);

  const Variant& variant() const { return v_; }
  int dimension() const;

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& p) const;
  // Euclidean distance to the closure; PRODUCT takes the max of its factors'
  // distances, UNION the min over its parts.
  double distance(const Eigen::Ref<const Eigen::VectorXd>& p) const;
  BoundingBox bounding_box() const;

  // Renders in the CLI shape grammar, e.g. "prod(ball:0,0:1,ball:0,0:1)".
  std::string to_spec() const;

 private:
  explicit GeometricShape(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

// Throws ValidationError on dimension mismatch.
bool membership(const GeometricShape& shape, const Eigen::Ref<const Eigen::VectorXd>& p);

// Parses "ball:c1,c2:r", "annulus:c1,c2:rin:rout", "box:lo1,lo2:hi1,hi2",
// "prod(<spec>,<spec>)" and "union(<spec>,<spec>,...)".
GeometricShape parse_shape(const std::string& spec);

class Epsilon {
 public:
  static constexpr double kDefault = 0.1;

  constexpr Epsilon() = default;
  explicit Epsilon(double eps);
  constexpr double value() const { return eps_; }

 private:
  double eps_ = kDefault;
};

inline constexpr double kDefaultBBoxMargin = 1.0;

// Data matrix plus label matrix. Labels are a single {0,1} column or one-hot rows.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  // Throws ValidationError when the invariants fail.
  LabeledDataset(Eigen::MatrixXd data, Eigen::MatrixXd labels);

  const Eigen::MatrixXd& data() const { return data_; }
  const Eigen::MatrixXd& labels() const { return labels_; }
  Eigen::Index size() const { return data_.rows(); }
  Eigen::Index dim() const { return data_.cols(); }
  Eigen::Index label_width() const { return labels_.cols(); }
  bool is_scalar() const { return labels_.cols() == 1; }
  // Class index per row: the scalar label, or the one-hot position (0-based).
  int class_of(Eigen::Index row) const;

  bool operator==(const LabeledDataset& other) const;

 private:
  Eigen::MatrixXd data_;
  Eigen::MatrixXd labels_;
};

// Uniform over the shape by rejection from its bounding box. Throws
// NumericError if the acceptance rate drops below 1e-4.
Eigen::MatrixXd sample_positive(const GeometricShape& shape, Eigen::Index count, std::uint64_t seed);

// Uniform over (bounding box inflated by bbox_margin) minus the
// eps-neighbourhood of the shape.
Eigen::MatrixXd sample_negative(const GeometricShape& shape, Epsilon eps, double bbox_margin,
                                Eigen::Index count, std::uint64_t seed);

LabeledDataset make_characteristic_dataset(const GeometricShape& shape, Epsilon eps,
                                           Eigen::Index n_pos, Eigen::Index n_neg,
                                           std::uint64_t seed,
                                           double bbox_margin = kDefaultBBoxMargin);

// One-hot dataset with per_class points sampled from each shape.
LabeledDataset make_multiclass_dataset(const std::vector<GeometricShape>& shapes,
                                       Eigen::Index per_class, std::uint64_t seed);

inline constexpr Eigen::Index kMaxProductPairs = 1'000'000;

// Rows are d1 row ++ d2 row, labelled with the AND of the two labels. Uses the
// full cross product, d1 index varying fastest, when it has at most max_pairs
// rows; otherwise max_pairs distinct pairs drawn with the seed.
LabeledDataset product_dataset(const LabeledDataset& d1, const LabeledDataset& d2,
                               std::uint64_t seed = 0, Eigen::Index max_pairs = kMaxProductPairs);

// Scalar labels flipped: the characteristic dataset of the complement.
LabeledDataset complement_labels(const LabeledDataset& d);

LabeledDataset shuffled(const LabeledDataset& d, std::uint64_t seed);

// CSV with header x1,...,xn,label (or label1..labelk); 17 significant digits.
void write_dataset_csv(std::ostream& out, const LabeledDataset& d);
LabeledDataset read_dataset_csv(std::istream& in);

}  // namespace mlpalg
