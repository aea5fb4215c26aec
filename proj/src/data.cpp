#include "mlpalg/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "mlpalg/errors.hpp"
#include "mlpalg/format.hpp"
#include "mlpalg/random.hpp"

namespace mlpalg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

std::string fmt_vector(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) s += ",";
    s += format_shortest(v(i));
  }
  return s;
}

}  // namespace

GeometricShape GeometricShape::ball(Eigen::VectorXd center, double radius) {
  require(center.size() > 0, "ball: empty center");
  require(center.allFinite(), "ball: non-finite center");
  require(radius > 0.0 && std::isfinite(radius), "ball: radius must be positive");
  return GeometricShape(Ball{std::move(center), radius});
}

GeometricShape GeometricShape::annulus(Eigen::VectorXd center, double r_inner, double r_outer) {
  require(center.size() > 0, "annulus: empty center");
  require(center.allFinite(), "annulus: non-finite center");
  require(r_inner > 0.0 && r_inner < r_outer && std::isfinite(r_outer),
          "annulus: need 0 < r_inner < r_outer");
  return GeometricShape(Annulus{std::move(center), r_inner, r_outer});
}

GeometricShape GeometricShape::box(Eigen::VectorXd min, Eigen::VectorXd max) {
  require(min.size() > 0 && min.size() == max.size(), "box: corner dimensions differ");
  require(min.allFinite() && max.allFinite(), "box: non-finite corner");
  require((min.array() < max.array()).all(), "box: need min < max in every coordinate");
  return GeometricShape(Box{std::move(min), std::move(max)});
}

GeometricShape GeometricShape::product(GeometricShape left, GeometricShape right) {
  return GeometricShape(Product{std::make_shared<const GeometricShape>(std::move(left)),
                                std::make_shared<const GeometricShape>(std::move(right))});
}

GeometricShape GeometricShape::union_of(std::vector<GeometricShape> parts) {
  require(!parts.empty(), "union: no parts");
  const int dim = parts.front().dimension();
  Union u;
  for (auto& s : parts) {
    require(s.dimension() == dim, "union: parts differ in dimension");
    u.parts.push_back(std::make_shared<const GeometricShape>(std::move(s)));
  }
  return GeometricShape(std::move(u));
}

int GeometricShape::dimension() const {
  return std::visit(
      overloaded{
          [](const Ball& b) { return static_cast<int>(b.center.size()); },
          [](const Annulus& a) { return static_cast<int>(a.center.size()); },
          [](const Box& b) { return static_cast<int>(b.min.size()); },
          [](const Product& p) { return p.left->dimension() + p.right->dimension(); },
          [](const Union& u) { return u.parts.front()->dimension(); },
      },
      v_);
}

bool GeometricShape::contains(const Eigen::Ref<const Eigen::VectorXd>& p) const {
  return std::visit(
      overloaded{
          [&](const Ball& b) { return (p - b.center).norm() < b.radius; },
          [&](const Annulus& a) {
            const double r = (p - a.center).norm();
            return r > a.r_inner && r < a.r_outer;
          },
          [&](const Box& b) { return (p.array() > b.min.array()).all() && (p.array() < b.max.array()).all(); },
          [&](const Product& pr) {
            const int n = pr.left->dimension();
            return pr.left->contains(p.head(n)) && pr.right->contains(p.tail(p.size() - n));
          },
          [&](const Union& u) {
            return std::any_of(u.parts.begin(), u.parts.end(),
                               [&](const auto& s) { return s->contains(p); });
          },
      },
      v_);
}

double GeometricShape::distance(const Eigen::Ref<const Eigen::VectorXd>& p) const {
  return std::visit(
      overloaded{
          [&](const Ball& b) { return std::max(0.0, (p - b.center).norm() - b.radius); },
          [&](const Annulus& a) {
            const double r = (p - a.center).norm();
            if (r < a.r_inner) return a.r_inner - r;
            if (r > a.r_outer) return r - a.r_outer;
            return 0.0;
          },
          [&](const Box& b) {
            const Eigen::ArrayXd below = (b.min.array() - p.array()).max(0.0);
            const Eigen::ArrayXd above = (p.array() - b.max.array()).max(0.0);
            return (below + above).matrix().norm();
          },
          [&](const Product& pr) {
            const int n = pr.left->dimension();
            return std::max(pr.left->distance(p.head(n)), pr.right->distance(p.tail(p.size() - n)));
          },
          [&](const Union& u) {
            double d = std::numeric_limits<double>::infinity();
            for (const auto& s : u.parts) d = std::min(d, s->distance(p));
            return d;
          },
      },
      v_);
}

BoundingBox GeometricShape::bounding_box() const {
  return std::visit(
      overloaded{
          [](const Ball& b) {
            return BoundingBox{(b.center.array() - b.radius).matrix(), (b.center.array() + b.radius).matrix()};
          },
          [](const Annulus& a) {
            return BoundingBox{(a.center.array() - a.r_outer).matrix(), (a.center.array() + a.r_outer).matrix()};
          },
          [](const Box& b) { return BoundingBox{b.min, b.max}; },
          [](const Product& pr) {
            const auto l = pr.left->bounding_box();
            const auto r = pr.right->bounding_box();
            BoundingBox out{Eigen::VectorXd(l.min.size() + r.min.size()),
                            Eigen::VectorXd(l.max.size() + r.max.size())};
            out.min << l.min, r.min;
            out.max << l.max, r.max;
            return out;
          },
          [](const Union& u) {
            auto out = u.parts.front()->bounding_box();
            for (const auto& s : u.parts) {
              const auto b = s->bounding_box();
              out.min = out.min.cwiseMin(b.min);
              out.max = out.max.cwiseMax(b.max);
            }
            return out;
          },
      },
      v_);
}

std::string GeometricShape::to_spec() const {
  return std::visit(
      overloaded{
          [](const Ball& b) { return "ball:" + fmt_vector(b.center) + ":" + format_shortest(b.radius); },
          [](const Annulus& a) {
            return "annulus:" + fmt_vector(a.center) + ":" + format_shortest(a.r_inner) + ":" +
                   format_shortest(a.r_outer);
          },
          [](const Box& b) { return "box:" + fmt_vector(b.min) + ":" + fmt_vector(b.max); },
          [](const Product& p) {
            return "prod(" + p.left->to_spec() + "," + p.right->to_spec() + ")";
          },
          [](const Union& u) {
            std::string s = "union(";
            for (std::size_t i = 0; i < u.parts.size(); ++i) {
              if (i > 0) s += ",";
              s += u.parts[i]->to_spec();
            }
            return s + ")";
          },
      },
      v_);
}

bool membership(const GeometricShape& shape, const Eigen::Ref<const Eigen::VectorXd>& p) {
  if (p.size() != shape.dimension()) {
    throw ValidationError("point has dimension " + std::to_string(p.size()) + ", shape has " +
                          std::to_string(shape.dimension()));
  }
  return shape.contains(p);
}

// ---------------------------------------------------------------------------
// Shape grammar

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& text, const std::string& spec) {
  const auto t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size() || !std::isfinite(v)) {
    throw ValidationError("bad number '" + text + "' in shape spec '" + spec + "'");
  }
  return v;
}

Eigen::VectorXd parse_vector(const std::string& text, const std::string& spec) {
  const auto parts = split(text, ',');
  Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_number(parts[i], spec);
  return v;
}

// Splits at depth-0 commas that start a new shape (next char is a letter);
// commas inside coordinate lists are followed by digits or signs.
std::vector<std::string> split_operands(const std::string& inner) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < inner.size(); ++i) {
    const char c = inner[i];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      std::size_t j = i + 1;
      while (j < inner.size() && inner[j] == ' ') ++j;
      if (j < inner.size() && std::isalpha(static_cast<unsigned char>(inner[j]))) {
        out.push_back(inner.substr(start, i - start));
        start = i + 1;
      }
    }
  }
  out.push_back(inner.substr(start));
  return out;
}

}  // namespace

GeometricShape parse_shape(const std::string& raw) {
  const std::string spec = trim(raw);
  auto composite = [&](const std::string& head) -> std::optional<std::vector<std::string>> {
    if (spec.rfind(head + "(", 0) != 0) return std::nullopt;
    if (spec.back() != ')') throw ValidationError("unbalanced parentheses in '" + spec + "'");
    return split_operands(spec.substr(head.size() + 1, spec.size() - head.size() - 2));
  };
  if (auto ops = composite("prod")) {
    if (ops->size() != 2) throw ValidationError("prod needs exactly 2 shapes in '" + spec + "'");
    return GeometricShape::product(parse_shape((*ops)[0]), parse_shape((*ops)[1]));
  }
  if (auto ops = composite("union")) {
    std::vector<GeometricShape> parts;
    for (const auto& o : *ops) parts.push_back(parse_shape(o));
    return GeometricShape::union_of(std::move(parts));
  }
  const auto fields = split(spec, ':');
  const auto& kind = fields.front();
  if (kind == "ball" && fields.size() == 3) {
    return GeometricShape::ball(parse_vector(fields[1], spec), parse_number(fields[2], spec));
  }
  if (kind == "annulus" && fields.size() == 4) {
    return GeometricShape::annulus(parse_vector(fields[1], spec), parse_number(fields[2], spec),
                                   parse_number(fields[3], spec));
  }
  if (kind == "box" && fields.size() == 3) {
    return GeometricShape::box(parse_vector(fields[1], spec), parse_vector(fields[2], spec));
  }
  throw ValidationError("unrecognized shape spec '" + spec + "'");
}

Epsilon::Epsilon(double eps) : eps_(eps) {
  require(eps > 0.0 && std::isfinite(eps), "epsilon must be positive");
}

// ---------------------------------------------------------------------------
// Datasets

LabeledDataset::LabeledDataset(Eigen::MatrixXd data, Eigen::MatrixXd labels)
    : data_(std::move(data)), labels_(std::move(labels)) {
  require(data_.rows() == labels_.rows(),
          "dataset: " + std::to_string(data_.rows()) + " data rows vs " +
              std::to_string(labels_.rows()) + " label rows");
  require(labels_.cols() >= 1, "dataset: no label columns");
  require(data_.allFinite(), "dataset: non-finite data entry");
  for (Eigen::Index r = 0; r < labels_.rows(); ++r) {
    if (labels_.cols() == 1) {
      require(labels_(r, 0) == 0.0 || labels_(r, 0) == 1.0,
              "dataset: scalar label at row " + std::to_string(r) + " is not 0 or 1");
    } else {
      int ones = 0;
      for (Eigen::Index c = 0; c < labels_.cols(); ++c) {
        const double v = labels_(r, c);
        require(v == 0.0 || v == 1.0, "dataset: one-hot entry not 0/1 at row " + std::to_string(r));
        ones += v == 1.0 ? 1 : 0;
      }
      require(ones == 1, "dataset: row " + std::to_string(r) + " is not one-hot");
    }
  }
}

int LabeledDataset::class_of(Eigen::Index row) const {
  if (is_scalar()) return labels_(row, 0) == 1.0 ? 1 : 0;
  Eigen::Index idx = 0;
  labels_.row(row).maxCoeff(&idx);
  return static_cast<int>(idx);
}

bool LabeledDataset::operator==(const LabeledDataset& other) const {
  return data_.rows() == other.data_.rows() && data_.cols() == other.data_.cols() &&
         labels_.cols() == other.labels_.cols() && data_ == other.data_ &&
         labels_ == other.labels_;
}

namespace {

constexpr double kMinAcceptance = 1e-4;
constexpr long long kAcceptanceWindow = 10'000;

template <class Accept>
Eigen::MatrixXd rejection_sample(const BoundingBox& window, Eigen::Index count, std::uint64_t seed,
                                 Accept accept, const char* what) {
  const Eigen::Index n = window.min.size();
  Eigen::MatrixXd out(count, n);
  if (count == 0) return out;
  Rng rng = make_rng(seed);
  Eigen::VectorXd p(n);
  long long attempts = 0;
  Eigen::Index accepted = 0;
  while (accepted < count) {
    for (Eigen::Index i = 0; i < n; ++i) p(i) = uniform(rng, window.min(i), window.max(i));
    ++attempts;
    if (accept(p)) out.row(accepted++) = p.transpose();
    if (attempts >= kAcceptanceWindow &&
        static_cast<double>(accepted) < kMinAcceptance * static_cast<double>(attempts)) {
      throw NumericError(std::string(what) + ": rejection acceptance rate below 1e-4");
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd sample_positive(const GeometricShape& shape, Eigen::Index count, std::uint64_t seed) {
  require(count >= 0, "sample_positive: negative count");
  return rejection_sample(
      shape.bounding_box(), count, seed, [&](const Eigen::VectorXd& p) { return shape.contains(p); },
      "sample_positive");
}

Eigen::MatrixXd sample_negative(const GeometricShape& shape, Epsilon eps, double bbox_margin,
                                Eigen::Index count, std::uint64_t seed) {
  require(count >= 0, "sample_negative: negative count");
  require(bbox_margin > eps.value(), "sample_negative: bbox_margin must exceed eps");
  auto window = shape.bounding_box();
  window.min.array() -= bbox_margin;
  window.max.array() += bbox_margin;
  return rejection_sample(
      window, count, seed,
      [&](const Eigen::VectorXd& p) { return shape.distance(p) > eps.value(); },
      "sample_negative");
}

LabeledDataset shuffled(const LabeledDataset& d, std::uint64_t seed) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(d.size()));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Rng rng = make_rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd data(d.size(), d.dim());
  Eigen::MatrixXd labels(d.size(), d.label_width());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    data.row(r) = d.data().row(perm[i]);
    labels.row(r) = d.labels().row(perm[i]);
  }
  return {std::move(data), std::move(labels)};
}

LabeledDataset make_characteristic_dataset(const GeometricShape& shape, Epsilon eps,
                                           Eigen::Index n_pos, Eigen::Index n_neg,
                                           std::uint64_t seed, double bbox_margin) {
  require(n_pos >= 1 && n_neg >= 1, "characteristic dataset needs n_pos, n_neg >= 1");
  const auto pos = sample_positive(shape, n_pos, derive_seed(seed, 1));
  const auto neg = sample_negative(shape, eps, bbox_margin, n_neg, derive_seed(seed, 2));
  Eigen::MatrixXd data(n_pos + n_neg, shape.dimension());
  data << pos, neg;
  Eigen::MatrixXd labels(n_pos + n_neg, 1);
  labels.topRows(n_pos).setOnes();
  labels.bottomRows(n_neg).setZero();
  return shuffled(LabeledDataset(std::move(data), std::move(labels)), derive_seed(seed, 3));
}

LabeledDataset make_multiclass_dataset(const std::vector<GeometricShape>& shapes,
                                       Eigen::Index per_class, std::uint64_t seed) {
  require(shapes.size() >= 2, "multiclass dataset needs at least 2 shapes");
  require(per_class >= 1, "multiclass dataset needs per_class >= 1");
  const auto k = static_cast<Eigen::Index>(shapes.size());
  const int n = shapes.front().dimension();
  Eigen::MatrixXd data(k * per_class, n);
  Eigen::MatrixXd labels = Eigen::MatrixXd::Zero(k * per_class, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto& s = shapes[static_cast<std::size_t>(c)];
    require(s.dimension() == n, "multiclass dataset: shapes differ in dimension");
    data.middleRows(c * per_class, per_class) =
        sample_positive(s, per_class, derive_seed(seed, static_cast<std::uint64_t>(c) + 1));
    labels.block(c * per_class, c, per_class, 1).setOnes();
  }
  return shuffled(LabeledDataset(std::move(data), std::move(labels)), derive_seed(seed, 0));
}

LabeledDataset product_dataset(const LabeledDataset& d1, const LabeledDataset& d2,
                               std::uint64_t seed, Eigen::Index max_pairs) {
  require(d1.is_scalar() && d2.is_scalar(), "product_dataset: operands must have scalar labels");
  require(max_pairs >= 1, "product_dataset: max_pairs must be positive");
  const Eigen::Index total = d1.size() * d2.size();
  std::vector<Eigen::Index> pairs;
  if (total <= max_pairs) {
    pairs.resize(static_cast<std::size_t>(total));
    std::iota(pairs.begin(), pairs.end(), Eigen::Index{0});
  } else {
    Rng rng = make_rng(seed);
    std::unordered_set<Eigen::Index> seen;
    while (static_cast<Eigen::Index>(pairs.size()) < max_pairs) {
      const auto idx = static_cast<Eigen::Index>(uniform01(rng) * static_cast<double>(total));
      if (seen.insert(idx).second) pairs.push_back(idx);
    }
    std::sort(pairs.begin(), pairs.end());
  }
  const auto m = static_cast<Eigen::Index>(pairs.size());
  Eigen::MatrixXd data(m, d1.dim() + d2.dim());
  Eigen::MatrixXd labels(m, 1);
  for (Eigen::Index r = 0; r < m; ++r) {
    // The first operand's row index varies fastest.
    const Eigen::Index i = pairs[static_cast<std::size_t>(r)] % d1.size();
    const Eigen::Index j = pairs[static_cast<std::size_t>(r)] / d1.size();
    data.row(r) << d1.data().row(i), d2.data().row(j);
    labels(r, 0) = (d1.labels()(i, 0) == 1.0 && d2.labels()(j, 0) == 1.0) ? 1.0 : 0.0;
  }
  return {std::move(data), std::move(labels)};
}

LabeledDataset complement_labels(const LabeledDataset& d) {
  require(d.is_scalar(), "complement_labels: dataset must have scalar labels");
  return {d.data(), (1.0 - d.labels().array()).matrix()};
}

void write_dataset_csv(std::ostream& out, const LabeledDataset& d) {
  for (Eigen::Index c = 0; c < d.dim(); ++c) out << "x" << c + 1 << ",";
  if (d.is_scalar()) {
    out << "label\n";
  } else {
    for (Eigen::Index c = 0; c < d.label_width(); ++c) {
      out << "label" << c + 1 << (c + 1 < d.label_width() ? "," : "\n");
    }
  }
  out << std::setprecision(17);
  for (Eigen::Index r = 0; r < d.size(); ++r) {
    for (Eigen::Index c = 0; c < d.dim(); ++c) out << d.data()(r, c) << ",";
    for (Eigen::Index c = 0; c < d.label_width(); ++c) {
      out << d.labels()(r, c) << (c + 1 < d.label_width() ? "," : "\n");
    }
  }
}

LabeledDataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("dataset csv: missing header");
  const auto header = split(trim(line), ',');
  Eigen::Index n = 0;
  Eigen::Index c = 0;
  for (const auto& h : header) {
    const auto t = trim(h);
    if (t.rfind("label", 0) == 0) {
      ++c;
    } else if (t.rfind("x", 0) == 0 && c == 0) {
      ++n;
    } else {
      throw ValidationError("dataset csv: unexpected header column '" + t + "'");
    }
  }
  if (n == 0 || c == 0) throw ValidationError("dataset csv: header needs x and label columns");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    if (static_cast<Eigen::Index>(cells.size()) != n + c) {
      throw ValidationError("dataset csv: row " + std::to_string(rows.size() + 1) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(n + c));
    }
    std::vector<double> row;
    for (const auto& cell : cells) row.push_back(parse_number(cell, line));
    rows.push_back(std::move(row));
  }
  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd data(m, n);
  Eigen::MatrixXd labels(m, c);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index k = 0; k < n; ++k) data(r, k) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)];
    for (Eigen::Index k = 0; k < c; ++k) labels(r, k) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(n + k)];
  }
  return {std::move(data), std::move(labels)};
}

}  // namespace mlpalg
