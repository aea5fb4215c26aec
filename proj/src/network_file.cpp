#include "mlpalg/network_file.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mlpalg/errors.hpp"

namespace mlpalg {

using json = nlohmann::ordered_json;

namespace {

json provenance_to_json(const Provenance& p) {
  json params = json::object();
  for (const auto& [k, v] : p.params) params[k] = v;
  json operands = json::array();
  for (const auto& o : p.operands) operands.push_back(provenance_to_json(o));
  return {{"op", p.op}, {"params", params}, {"operands", operands}};
}

Provenance provenance_from_json(const json& j) {
  Provenance p;
  p.op = j.value("op", std::string{});
  if (j.contains("params")) {
    for (const auto& [k, v] : j.at("params").items()) p.params.emplace_back(k, v.get<std::string>());
  }
  if (j.contains("operands")) {
    for (const auto& o : j.at("operands")) p.operands.push_back(provenance_from_json(o));
  }
  return p;
}

json activations_to_json(const LayerActivation& layer) {
  if (!layer.empty() && is_uniform(layer, layer.front())) return std::string(to_string(layer.front()));
  json arr = json::array();
  for (auto a : layer) arr.push_back(std::string(to_string(a)));
  return arr;
}

LayerActivation activations_from_json(const json& j, int units) {
  if (j.is_string()) return uniform_activation(units, parse_activation(j.get<std::string>()));
  LayerActivation out;
  for (const auto& a : j) out.push_back(parse_activation(a.get<std::string>()));
  return out;
}

}  // namespace

std::string render_network(const Mlp& net) {
  json weights = json::array();
  json thresholds = json::array();
  json activations = json::array();
  for (int i = 0; i < net.num_maps(); ++i) {
    const auto& W = net.weights(i);
    json rows = json::array();
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < W.cols(); ++c) row.push_back(W(r, c));
      rows.push_back(std::move(row));
    }
    weights.push_back(std::move(rows));
    const auto& t = net.thresholds(i);
    thresholds.push_back(std::vector<double>(t.data(), t.data() + t.size()));
    activations.push_back(activations_to_json(net.activations(i)));
  }
  json doc = {
      {"format_version", kNetworkFormatVersion},
      {"layer_dims", net.layer_dims()},
      {"activations", activations},
      {"weights", weights},
      {"thresholds", thresholds},
      {"metadata", {{"provenance", provenance_to_json(net.provenance())}}},
  };
  return doc.dump(1) + "\n";
}

Mlp parse_network(const std::string& text) {
  try {
    const json doc = json::parse(text);
    const int version = doc.at("format_version").get<int>();
    if (version != kNetworkFormatVersion) {
      throw ValidationError("unsupported network format_version " + std::to_string(version));
    }
    MlpParams p;
    p.layer_dims = doc.at("layer_dims").get<std::vector<int>>();
    const auto& weights = doc.at("weights");
    const auto& thresholds = doc.at("thresholds");
    const auto& activations = doc.at("activations");
    for (const auto& m : weights) {
      const auto rows = static_cast<Eigen::Index>(m.size());
      const auto cols = rows > 0 ? static_cast<Eigen::Index>(m.at(0).size()) : 0;
      Eigen::MatrixXd W(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = m.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != cols) throw ValidationError("ragged weight matrix");
        for (Eigen::Index c = 0; c < cols; ++c) W(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
      }
      p.weights.push_back(std::move(W));
    }
    for (const auto& t : thresholds) {
      const auto v = t.get<std::vector<double>>();
      p.thresholds.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    for (std::size_t i = 0; i < activations.size(); ++i) {
      const int units = i + 1 < p.layer_dims.size() ? p.layer_dims[i + 1] : 0;
      p.activations.push_back(activations_from_json(activations[i], units));
    }
    if (doc.contains("metadata") && doc.at("metadata").contains("provenance")) {
      p.provenance = provenance_from_json(doc.at("metadata").at("provenance"));
    }
    return Mlp(std::move(p));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed network file: ") + e.what());
  }
}

void save_network(const std::filesystem::path& path, const Mlp& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << render_network(net);
}

Mlp load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_network(buf.str());
}

}  // namespace mlpalg
