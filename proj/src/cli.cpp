#include "mlpalg/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "mlpalg/algebra.hpp"
#include "mlpalg/core.hpp"
#include "mlpalg/data.hpp"
#include "mlpalg/experiments.hpp"
#include "mlpalg/format.hpp"
#include "mlpalg/network_file.hpp"
#include "mlpalg/random.hpp"
#include "mlpalg/train.hpp"

namespace mlpalg::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kShapeHelp =
    "Shape grammar: ball:<c1,c2,...>:<r> | annulus:<c1,...>:<r_in>:<r_out> | "
    "box:<lo1,...>:<hi1,...> | prod(<shape>,<shape>) | union(<shape>,<shape>,...)";

std::string dims_str(const std::vector<int>& dims) {
  std::string s = "(";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i > 0) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + ")";
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string accuracy_line(const EvalReport& r) {
  return "accuracy " + fixed(r.accuracy) + " (" + std::to_string(r.correct) + "/" +
         std::to_string(r.total) + ")";
}

GeometricShape shape_arg(const std::string& spec) {
  try {
    return parse_shape(spec);
  } catch (const ValidationError& e) {
    throw UsageError(std::string("bad --shape: ") + e.what() + "\n" + kShapeHelp);
  }
}

std::vector<int> dims_arg(const std::string& text) {
  std::vector<int> dims;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      dims.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("bad --dims '" + text + "': expected positive integers like 2,3,1");
    }
  }
  if (dims.size() < 2) throw UsageError("--dims needs at least 2 layers");
  return dims;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

template <class Fn>
std::string to_text(Fn fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

void save(const fs::path& path, const Mlp& net) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_network(path, net);
}

fs::path sibling(const fs::path& path, const std::string& suffix) {
  fs::path p = path;
  p.replace_extension(suffix);
  return p;
}

struct TrainFlags {
  TrainConfig cfg;
  std::string loss = "bce";

  void add(CLI::App* app) {
    app->add_option("--epochs", cfg.epochs, "SGD epochs")->capture_default_str();
    app->add_option("--lr", cfg.learning_rate, "learning rate")->capture_default_str();
    app->add_option("--batch", cfg.batch_size, "mini-batch size")->capture_default_str();
    app->add_option("--loss", loss, "bce or mse")->capture_default_str();
    app->add_option("--init-scale", cfg.init_scale, "uniform init half-width")->capture_default_str();
  }

  TrainConfig resolve(std::uint64_t seed) {
    if (loss != "bce" && loss != "mse") throw UsageError("--loss must be bce or mse");
    cfg.loss = parse_loss(loss);
    cfg.seed = seed;
    try {
      cfg.validate();
    } catch (const ValidationError& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }
};

void print_provenance(std::ostream& out, const Provenance& p, int indent) {
  out << std::string(static_cast<std::size_t>(indent) * 2, ' ') << (p.op.empty() ? "net" : p.op);
  if (!p.params.empty()) {
    out << " [";
    for (std::size_t i = 0; i < p.params.size(); ++i) {
      out << (i > 0 ? ", " : "") << p.params[i].first << "=" << p.params[i].second;
    }
    out << "]";
  }
  out << "\n";
  for (const auto& o : p.operands) print_provenance(out, o, indent + 1);
}

// ---------------------------------------------------------------------------

struct Compose {
  std::string op;
  std::vector<std::string> operands;
  double lambda = Sharpness::kDefault;
  int index = 0;
  std::string out = "composed.json";
};

int compose(const Compose& c, std::ostream& out) {
  static const std::vector<std::string> known = {
      "complement", "sum",       "multi-sum",       "difference",      "set-difference",
      "conjunction", "i-product", "multi-i-product", "component",      "o-product",
      "multi-o-product", "extend", "align"};
  if (std::find(known.begin(), known.end(), c.op) == known.end()) {
    throw UsageError("unknown compose operation '" + c.op + "'; expected one of complement, sum, "
                     "multi-sum, difference, set-difference, conjunction, i-product, "
                     "multi-i-product, component, o-product, multi-o-product, extend, align");
  }
  std::vector<Mlp> nets;
  for (const auto& path : c.operands) nets.push_back(load_network(path));
  const Sharpness lambda(c.lambda);

  auto want = [&](std::size_t lo, std::size_t hi) {
    if (nets.size() < lo || nets.size() > hi) {
      throw UsageError("compose " + c.op + " takes " +
                       (lo == hi ? std::to_string(lo) : std::to_string(lo) + "+") +
                       " operand file(s), got " + std::to_string(nets.size()));
    }
  };
  constexpr std::size_t many = static_cast<std::size_t>(-1);

  using Binary = Mlp (*)(const Mlp&, const Mlp&, Sharpness);
  const std::map<std::string, Binary> binary = {
      {"sum", &sum},
      {"difference", &difference},
      {"set-difference", &set_difference},
      {"conjunction", &conjunction},
      {"i-product", &i_product},
  };

  bool uses_lambda = true;
  std::optional<Mlp> result;
  if (auto it = binary.find(c.op); it != binary.end()) {
    want(2, 2);
    result = it->second(nets[0], nets[1], lambda);
  } else if (c.op == "multi-sum") {
    want(1, many);
    result = multi_sum(nets, lambda);
  } else if (c.op == "multi-i-product") {
    want(1, many);
    result = multi_i_product(nets, lambda);
  } else if (c.op == "complement") {
    want(1, 1);
    uses_lambda = false;
    result = complement(nets[0]);
  } else if (c.op == "component") {
    want(1, 1);
    uses_lambda = false;
    if (c.index == 0) throw UsageError("compose component needs --index");
    result = component(nets[0], c.index);
  } else if (c.op == "o-product") {
    want(2, 2);
    uses_lambda = false;
    result = o_product(nets[0], nets[1]);
  } else if (c.op == "multi-o-product") {
    want(2, many);
    uses_lambda = false;
    result = multi_o_product(nets);
  } else if (c.op == "extend") {
    want(1, 1);
    uses_lambda = false;
    result = identical_extension(nets[0]);
  } else {
    want(2, 2);
    auto [a, b] = align_depths(nets[0], nets[1]);
    const fs::path base(c.out);
    const std::string ext = base.has_extension() ? base.extension().string() : ".json";
    const fs::path first = base.parent_path() / (base.stem().string() + "_1" + ext);
    const fs::path second = base.parent_path() / (base.stem().string() + "_2" + ext);
    save(first, a);
    save(second, b);
    out << "align: " << dims_str(nets[0].layer_dims()) << ", " << dims_str(nets[1].layer_dims())
        << " -> " << dims_str(a.layer_dims()) << ", " << dims_str(b.layer_dims()) << "\n"
        << "wrote " << first.string() << ", " << second.string() << "\n";
    return kOk;
  }

  const auto report = describe_composition(c.op, nets, *result, uses_lambda ? lambda.value() : 0.0);
  save(c.out, *result);
  out << report.operation << ":";
  for (std::size_t i = 0; i < report.operand_dims.size(); ++i) {
    out << (i > 0 ? " ," : "") << " " << dims_str(report.operand_dims[i]);
  }
  out << " -> " << dims_str(report.result_dims);
  if (uses_lambda) out << ", lambda " << report.lambda;
  out << "\nwrote " << c.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compose, train and evaluate multilayer perceptrons with exact network algebra."};
  app.name("mlpalg");
  app.require_subcommand(1);
  app.footer(kShapeHelp);

  std::uint64_t seed = 0;
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "master seed (default: $MLPALG_SEED or 0)")
        ->envname("MLPALG_SEED")
        ->capture_default_str();
  };

  // train
  auto* train = app.add_subcommand("train", "Train a characteristic net for a shape");
  std::string train_shape;
  std::string train_dims;
  double train_eps = Epsilon::kDefault;
  Eigen::Index n_pos = 500;
  Eigen::Index n_neg = 500;
  std::string train_out = "net.json";
  TrainFlags train_flags;
  train->add_option("--shape", train_shape, "shape spec")->required();
  train->add_option("--dims", train_dims, "layer dims, e.g. 2,3,1")->required();
  train->add_option("--eps", train_eps, "negative-sample margin")->capture_default_str();
  train->add_option("--npos", n_pos, "positive samples")->capture_default_str();
  train->add_option("--nneg", n_neg, "negative samples")->capture_default_str();
  train->add_option("--out", train_out, "network file")->capture_default_str();
  train_flags.add(train);
  add_seed(train);

  // compose
  auto* compose_cmd = app.add_subcommand("compose", "Apply a network algebra operation");
  Compose compose_args;
  compose_cmd->add_option("op", compose_args.op, "operation")->required();
  compose_cmd->add_option("operands", compose_args.operands, "operand network files")->required();
  compose_cmd->add_option("--lambda", compose_args.lambda, "sharpness")->capture_default_str();
  compose_cmd->add_option("--index", compose_args.index, "1-based output index for component");
  compose_cmd->add_option("--out", compose_args.out, "output network file")->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate accuracy on a dataset or a sampled shape");
  std::string eval_net;
  std::string eval_data;
  std::string eval_shape;
  std::string eval_rule;
  std::string eval_out;
  double eval_eps = Epsilon::kDefault;
  Eigen::Index eval_pos = 1000;
  Eigen::Index eval_neg = 1000;
  eval->add_option("net", eval_net, "network file")->required();
  auto* data_opt = eval->add_option("--data", eval_data, "dataset CSV");
  eval->add_option("--shape", eval_shape, "sample a characteristic dataset")->excludes(data_opt);
  eval->add_option("--rule", eval_rule, "scalar or argmax (default by output width)");
  eval->add_option("--out", eval_out, "report CSV");
  eval->add_option("--eps", eval_eps)->capture_default_str();
  eval->add_option("--npos", eval_pos)->capture_default_str();
  eval->add_option("--nneg", eval_neg)->capture_default_str();
  add_seed(eval);

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Show structure and provenance of a network file");
  std::string inspect_net;
  inspect->add_option("net", inspect_net, "network file")->required();

  // demo-torus
  auto* torus = app.add_subcommand("demo-torus", "Build a torus classifier in R^4 from two disk nets");
  TorusConfig torus_cfg;
  double torus_eps = torus_cfg.eps.value();
  double torus_lambda = Sharpness::kDefault;
  std::string torus_out = "torus_demo";
  TrainFlags torus_flags;
  torus->add_option("--R", torus_cfg.outer_radius, "outer radius")->capture_default_str();
  torus->add_option("--r", torus_cfg.inner_radius, "inner radius")->capture_default_str();
  torus->add_option("--eps", torus_eps)->capture_default_str();
  torus->add_option("--lambda", torus_lambda)->capture_default_str();
  torus->add_option("--out", torus_out, "output directory")->capture_default_str();
  torus_flags.add(torus);
  add_seed(torus);

  // demo-multilabel
  auto* multi = app.add_subcommand("demo-multilabel", "Combine per-label nets into one argmax classifier");
  std::vector<std::string> multi_shapes;
  double multi_eps = Epsilon::kDefault;
  std::string multi_out = "multilabel_demo";
  TrainFlags multi_flags;
  multi->add_option("--shape", multi_shapes, "one shape per label (repeatable); default: 3 disks");
  multi->add_option("--eps", multi_eps)->capture_default_str();
  multi->add_option("--out", multi_out, "output directory")->capture_default_str();
  multi_flags.add(multi);
  add_seed(multi);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kUsage;
  }

  if (train->parsed()) {
    const auto shape = shape_arg(train_shape);
    const auto dims = dims_arg(train_dims);
    const auto cfg = train_flags.resolve(seed);
    if (dims.front() != shape.dimension()) {
      throw ValidationError("--dims input width " + std::to_string(dims.front()) +
                            " does not match shape dimension " + std::to_string(shape.dimension()));
    }
    if (dims.back() != 1) {
      throw ValidationError("--dims output width " + std::to_string(dims.back()) +
                            " does not match scalar labels (expected 1)");
    }
    if (n_pos < 1 || n_neg < 1) throw UsageError("--npos and --nneg must be positive");
    const auto data = make_characteristic_dataset(shape, Epsilon(train_eps), n_pos, n_neg,
                                                  derive_seed(seed, 11));
    const auto init = init_mlp(dims, derive_seed(seed, 12), cfg.init_scale);
    auto result = train_sgd(init, data, cfg);
    Provenance prov = result.net.provenance();
    prov.params.push_back({"shape", shape.to_spec()});
    prov.params.push_back({"eps", format_shortest(train_eps)});
    const Mlp net = result.net.with_provenance(std::move(prov));
    const fs::path path(train_out);
    save(path, net);
    write_text(sibling(path, ".report.csv"), to_text([&](auto& os) { write_report_csv(os, result.report); }));
    write_text(sibling(path, ".loss.csv"), to_text([&](auto& os) { write_loss_csv(os, result.report); }));
    out << "trained " << dims_str(dims) << " on " << shape.to_spec() << " for " << cfg.epochs
        << " epochs: " << accuracy_line(result.report) << "\n"
        << "wrote " << path.string() << "\n";
    return kOk;
  }

  if (compose_cmd->parsed()) return compose(compose_args, out);

  if (eval->parsed()) {
    const auto net = load_network(eval_net);
    LabeledDataset data;
    if (!eval_data.empty()) {
      std::ifstream in(eval_data);
      if (!in) throw ValidationError("cannot read " + eval_data);
      data = read_dataset_csv(in);
    } else if (!eval_shape.empty()) {
      if (eval_pos < 1 || eval_neg < 1) throw UsageError("--npos and --nneg must be positive");
      data = make_characteristic_dataset(shape_arg(eval_shape), Epsilon(eval_eps), eval_pos, eval_neg,
                                         derive_seed(seed, 21));
    } else {
      throw UsageError("eval needs --data or --shape");
    }
    std::string rule = eval_rule.empty() ? (net.output_dim() == 1 ? "scalar" : "argmax") : eval_rule;
    if (rule != "scalar" && rule != "argmax") throw UsageError("--rule must be scalar or argmax");
    const auto report = rule == "scalar" ? accuracy_scalar(net, data) : accuracy_argmax(net, data);
    if (!eval_out.empty()) write_text(eval_out, to_text([&](auto& os) { write_report_csv(os, report); }));
    out << rule << " rule: " << accuracy_line(report) << "\n";
    return kOk;
  }

  if (inspect->parsed()) {
    const auto net = load_network(inspect_net);
    out << "layer dims: " << dims_str(net.layer_dims()) << "\n";
    out << "activations:";
    for (int i = 0; i < net.num_maps(); ++i) {
      const auto& layer = net.activations(i);
      if (is_uniform(layer, layer.front())) {
        out << " " << to_string(layer.front());
      } else {
        out << " mixed[";
        for (std::size_t j = 0; j < layer.size(); ++j) out << (j > 0 ? "," : "") << to_string(layer[j]);
        out << "]";
      }
    }
    out << "\nparameters: " << net.parameter_count() << "\n";
    out << "provenance: " << net.provenance().describe() << "\n";
    print_provenance(out, net.provenance(), 1);
    return kOk;
  }

  if (torus->parsed()) {
    if (!(torus_cfg.inner_radius > 0.0 && torus_cfg.inner_radius < torus_cfg.outer_radius)) {
      throw UsageError("demo-torus needs 0 < r < R");
    }
    if (!(torus_eps > 0.0 && torus_eps < torus_cfg.inner_radius)) {
      throw UsageError("demo-torus needs 0 < eps < r");
    }
    torus_cfg.eps = Epsilon(torus_eps);
    torus_cfg.lambda = Sharpness(torus_lambda);
    torus_cfg.train = torus_flags.resolve(seed);
    torus_cfg.seed = seed;
    const auto r = run_torus_demo(torus_cfg);
    const fs::path dir(torus_out);
    fs::create_directories(dir);
    save(dir / "disk_outer.json", r.outer_disk);
    save(dir / "disk_inner.json", r.inner_disk);
    save(dir / "annulus_set_difference.json", r.annulus_set_difference);
    save(dir / "annulus_literal.json", r.annulus_literal);
    save(dir / "torus_set_difference.json", r.torus_set_difference);
    save(dir / "torus_literal.json", r.torus_literal);
    write_text(dir / "eval_set.csv", to_text([&](auto& os) { write_dataset_csv(os, r.eval_set); }));
    write_text(dir / "probe_set.csv", to_text([&](auto& os) { write_dataset_csv(os, r.probe_set); }));
    write_text(dir / "accuracy.csv", to_text([&](auto& os) {
                 os << "variant,eval_accuracy,eval_correct,eval_total,probe_accuracy,probe_correct,probe_total\n"
                    << std::setprecision(17);
                 auto row = [&](const char* name, const EvalReport& e, const EvalReport& p) {
                   os << name << "," << e.accuracy << "," << e.correct << "," << e.total << ","
                      << p.accuracy << "," << p.correct << "," << p.total << "\n";
                 };
                 row("set_difference", r.eval_set_difference, r.probe_set_difference);
                 row("difference", r.eval_literal, r.probe_literal);
               }));
    out << "disk nets: outer " << accuracy_line(r.outer_train) << ", inner "
        << accuracy_line(r.inner_train) << "\n";
    out << "torus net " << dims_str(r.torus_set_difference.layer_dims()) << "\n\n";
    out << std::left << std::setw(16) << "variant" << std::setw(14) << "torus acc"
        << "inner-disk probe acc\n";
    out << std::setw(16) << "set_difference" << std::setw(14) << fixed(r.eval_set_difference.accuracy)
        << fixed(r.probe_set_difference.accuracy) << "\n";
    out << std::setw(16) << "difference" << std::setw(14) << fixed(r.eval_literal.accuracy)
        << fixed(r.probe_literal.accuracy) << "\n";
    out << "\nwrote " << dir.string() << "\n";
    return kOk;
  }

  if (multi->parsed()) {
    MultilabelConfig cfg;
    if (multi_shapes.empty()) {
      cfg.shapes = default_multilabel_shapes();
    } else {
      for (const auto& s : multi_shapes) cfg.shapes.push_back(shape_arg(s));
    }
    if (cfg.shapes.size() < 2) throw UsageError("demo-multilabel needs at least 2 --shape options");
    cfg.eps = Epsilon(multi_eps);
    cfg.train = multi_flags.resolve(seed);
    cfg.seed = seed;
    const auto r = run_multilabel_demo(cfg);
    const fs::path dir(multi_out);
    fs::create_directories(dir);
    for (std::size_t i = 0; i < r.nets.size(); ++i) {
      save(dir / ("label_" + std::to_string(i + 1) + ".json"), r.nets[i]);
    }
    save(dir / "combined.json", r.combined);
    write_text(dir / "report.csv", to_text([&](auto& os) { write_report_csv(os, r.argmax); }));
    write_text(dir / "components.csv", to_text([&](auto& os) {
                 os << "label,shape,accuracy,correct,total\n" << std::setprecision(17);
                 for (std::size_t i = 0; i < r.components.size(); ++i) {
                   os << i + 1 << ",\"" << cfg.shapes[i].to_spec() << "\"," << r.components[i].accuracy
                      << "," << r.components[i].correct << "," << r.components[i].total << "\n";
                 }
               }));
    out << "combined net " << dims_str(r.combined.layer_dims()) << ", argmax "
        << accuracy_line(r.argmax) << "\n";
    for (std::size_t i = 0; i < r.components.size(); ++i) {
      out << "  component " << i + 1 << " (" << cfg.shapes[i].to_spec() << "): "
          << accuracy_line(r.components[i]) << "\n";
    }
    out << "wrote " << dir.string() << "\n";
    return kOk;
  }
  return kUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::ostringstream buffered;
  int code = kOk;
  try {
    code = dispatch(args, buffered, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
  if (code == kOk) out << buffered.str();
  return code;
}

}  // namespace mlpalg::cli
