#pragma once

#include <filesystem>
#include <string>

#include "qgs/graph_model.hpp"

namespace qgs {

GraphDescription parse_graph_description(const std::string& json_text);
GraphDescription load_graph_description(const std::filesystem::path& path);

MetricGraph load_graph(const std::filesystem::path& path);

// SHA-256 of the canonical (sorted-key, compact) form of a graph file.
std::string graph_hash(const std::string& json_text);

}  // namespace qgs
