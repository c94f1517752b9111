#include "qgs/graph_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "json.hpp"
#include "qgs/errors.hpp"

namespace qgs {
namespace {

using nlohmann::json;

std::string id_string(const json& value, const std::string& where) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw SchemaError(where + ": id must be a string or an integer");
}

double number(const json& node, const std::string& key, const std::string& where) {
  if (!node.contains(key)) throw SchemaError(where + ": missing '" + key + "'");
  if (!node[key].is_number()) throw SchemaError(where + ": '" + key + "' must be a number");
  return node[key].get<double>();
}

std::complex<double> complex_entry(const json& value, const std::string& where) {
  if (value.is_number()) return value.get<double>();
  if (value.is_array() && value.size() == 2 && value[0].is_number() && value[1].is_number())
    return {value[0].get<double>(), value[1].get<double>()};
  throw SchemaError(where + ": matrix entries must be numbers or [re, im] pairs");
}

MatrixXcd complex_matrix(const json& value, const std::string& where) {
  if (!value.is_array() || value.empty()) throw SchemaError(where + ": expected a non-empty list of rows");
  const Index rows = static_cast<Index>(value.size());
  const Index cols = value[0].is_array() ? static_cast<Index>(value[0].size()) : 0;
  MatrixXcd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = value[static_cast<size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) throw SchemaError(where + ": ragged matrix");
    for (Index j = 0; j < cols; ++j) m(i, j) = complex_entry(row[static_cast<size_t>(j)], where);
  }
  return m;
}

MatchingSpec matching_spec(const json& node, const std::string& where) {
  if (!node.is_object()) throw SchemaError(where + ": 'matching' must be an object");
  MatchingSpec spec;
  const bool has_matrices = node.contains("A") || node.contains("B");
  const std::string kind = node.value("kind", has_matrices ? "custom" : "");
  if (kind == "dirichlet") {
    spec.kind = MatchingKind::dirichlet;
  } else if (kind == "neumann") {
    spec.kind = MatchingKind::neumann;
  } else if (kind == "robin") {
    spec.kind = MatchingKind::robin;
    spec.lambda = number(node, "lambda", where);
  } else if (kind == "kirchhoff") {
    spec.kind = MatchingKind::kirchhoff;
  } else if (kind == "continuity_step") {
    spec.kind = MatchingKind::continuity_step;
  } else if (kind == "custom") {
    spec.kind = MatchingKind::custom;
    if (!node.contains("A") || !node.contains("B")) throw SchemaError(where + ": custom matching needs A and B");
    spec.A = complex_matrix(node["A"], where + ".A");
    spec.B = complex_matrix(node["B"], where + ".B");
  } else {
    throw SchemaError(where + ": unknown matching kind '" + kind + "'");
  }
  return spec;
}

}  // namespace

GraphDescription parse_graph_description(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw SchemaError("top level must be an object");
  if (!root.contains("vertices") || !root["vertices"].is_array()) throw SchemaError("missing 'vertices' list");
  if (!root.contains("edges") || !root["edges"].is_array()) throw SchemaError("missing 'edges' list");

  GraphDescription out;
  for (size_t i = 0; i < root["vertices"].size(); ++i) {
    const auto& node = root["vertices"][i];
    const std::string where = "vertices[" + std::to_string(i) + "]";
    if (!node.is_object() || !node.contains("id")) throw SchemaError(where + ": needs an 'id'");
    VertexSpec vertex;
    vertex.id = id_string(node["id"], where);
    if (!node.contains("matching")) throw SchemaError(where + ": missing 'matching'");
    vertex.matching = matching_spec(node["matching"], where + ".matching");
    out.vertices.push_back(std::move(vertex));
  }
  for (size_t i = 0; i < root["edges"].size(); ++i) {
    const auto& node = root["edges"][i];
    const std::string where = "edges[" + std::to_string(i) + "]";
    if (!node.is_object()) throw SchemaError(where + ": must be an object");
    EdgeSpec edge;
    edge.id = node.contains("id") ? id_string(node["id"], where) : "e" + std::to_string(i);
    if (!node.contains("from") || !node.contains("to")) throw SchemaError(where + ": needs 'from' and 'to'");
    edge.from = id_string(node["from"], where);
    edge.to = id_string(node["to"], where);
    edge.length = number(node, "length", where);
    if (node.contains("modes")) {
      if (!node["modes"].is_array() || node["modes"].empty()) throw SchemaError(where + ": 'modes' must be a non-empty list");
      for (const auto& v : node["modes"]) {
        if (!v.is_number()) throw SchemaError(where + ": mode potentials must be numbers");
        edge.potentials.push_back(v.get<double>());
      }
      if (node.contains("potential")) throw SchemaError(where + ": give either 'potential' or 'modes'");
    } else {
      edge.potentials.push_back(node.contains("potential") ? number(node, "potential", where) : 0.0);
    }
    out.edges.push_back(std::move(edge));
  }
  return out;
}

GraphDescription load_graph_description(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_graph_description(buffer.str());
}

MetricGraph load_graph(const std::filesystem::path& path) { return build_graph(load_graph_description(path)); }

std::string graph_hash(const std::string& json_text) {
  std::string canonical;
  try {
    canonical = json::parse(json_text).dump();
  } catch (const json::parse_error&) {
    canonical = json_text;
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(canonical.data(), canonical.size(), digest, &length, EVP_sha256(), nullptr);
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

}  // namespace qgs
