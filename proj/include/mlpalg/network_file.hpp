#pragma once

#include <filesystem>
#include <string>

#include "mlpalg/core.hpp"

namespace mlpalg {

inline constexpr int kNetworkFormatVersion = 1;

// Structured-text (JSON) network file:
//
//   {
//     "format_version": 1,
//     "layer_dims": [2, 3, 1],
//     "activations": ["sigmoid", "sigmoid"],      // or a per-unit list for mixed layers
//     "weights": [[[w11, w12], ...], ...],         // row-major, one matrix per map
//     "thresholds": [[t1, t2, t3], [t1]],
//     "metadata": {"provenance": {"op": ..., "params": {...}, "operands": [...]}}
//   }
//
// Doubles are written in shortest round-trip form, so parse(render(net)) is
// bit-identical.
std::string render_network(const Mlp& net);

// Throws ValidationError on malformed text, unknown format_version or an
// inconsistent network.
Mlp parse_network(const std::string& text);

void save_network(const std::filesystem::path& path, const Mlp& net);
Mlp load_network(const std::filesystem::path& path);

}  // namespace mlpalg
