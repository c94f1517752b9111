#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qgs/types.hpp"

namespace qgs {

enum class MatchingKind { dirichlet, neumann, robin, kirchhoff, continuity_step, custom };

// Row/column order follows `ordering`: the directed edges leaving the vertex, ascending.
struct MatchingConditions {
  MatrixXcd A;
  MatrixXcd B;
  std::vector<Index> ordering;

  Index degree() const { return A.rows(); }
};

struct MatchingValidation {
  double hermiticity_residual = 0;
  Index rank = 0;
  double tolerance = 0;
  Index degree = 0;

  bool accepted() const { return hermiticity_residual < tolerance && rank == degree; }
};

MatchingValidation validate_matching(const MatrixXcd& A, const MatrixXcd& B, Index degree);

// All derivatives point away from the vertex. `lambda` is only read for robin.
MatchingConditions standard_conditions(MatchingKind kind, Index degree, double lambda = 0);

struct VertexRecord {
  std::string id;
  MatchingConditions matching;
  bool auxiliary = false;
};

struct EdgeRecord {
  std::string id;
  Index from = 0;
  Index to = 0;
  double length = 0;
  double potential = 0;
};

// Where an edge of an expanded graph came from.
struct EdgeOrigin {
  Index source_edge = 0;
  Index mode = 0;
  enum class Part { whole, first_half, second_half } part = Part::whole;
};

// Directed edge 2e runs from → to along edge e, 2e+1 runs back.
class MetricGraph {
 public:
  MetricGraph(std::vector<VertexRecord> vertices, std::vector<EdgeRecord> edges,
              std::vector<EdgeOrigin> origins = {});

  Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  Index num_directed() const { return 2 * num_edges(); }

  const std::vector<VertexRecord>& vertices() const { return vertices_; }
  const std::vector<EdgeRecord>& edges() const { return edges_; }
  const VertexRecord& vertex(Index v) const { return vertices_[static_cast<size_t>(v)]; }
  const EdgeRecord& edge(Index e) const { return edges_[static_cast<size_t>(e)]; }
  const std::vector<EdgeOrigin>& origins() const { return origins_; }

  static Index edge_of(Index directed) { return directed / 2; }
  static Index reversed(Index directed) { return directed ^ 1; }
  Index tail(Index directed) const;
  Index head(Index directed) const { return tail(reversed(directed)); }

  std::span<const Index> star(Index v) const { return stars_[static_cast<size_t>(v)]; }
  Index degree(Index v) const { return static_cast<Index>(stars_[static_cast<size_t>(v)].size()); }
  // Position of a directed edge within the star of its tail vertex.
  Index slot(Index directed) const { return slots_[static_cast<size_t>(directed)]; }

  double min_potential() const;
  double max_potential() const;
  std::vector<double> thresholds() const;
  std::optional<Index> find_vertex(const std::string& id) const;

 private:
  std::vector<VertexRecord> vertices_;
  std::vector<EdgeRecord> edges_;
  std::vector<EdgeOrigin> origins_;
  std::vector<std::vector<Index>> stars_;
  std::vector<Index> slots_;
};

// Parsed graph description; numbers are already validated as numbers.
struct MatchingSpec {
  MatchingKind kind = MatchingKind::kirchhoff;
  double lambda = 0;
  MatrixXcd A;
  MatrixXcd B;
};

struct VertexSpec {
  std::string id;
  MatchingSpec matching;
};

struct EdgeSpec {
  std::string id;
  std::string from;
  std::string to;
  double length = 0;
  std::vector<double> potentials;  // one entry per mode
};

struct GraphDescription {
  std::vector<VertexSpec> vertices;
  std::vector<EdgeSpec> edges;
};

// Vertex channels are (edge, end, mode) triples: edges in description order, a loop
// contributes its `from` end before its `to` end, modes vary fastest.
class MultiModeGraph {
 public:
  struct Channel {
    Index edge;
    bool from_end;
    Index mode;
  };

  explicit MultiModeGraph(GraphDescription description);

  const GraphDescription& description() const { return description_; }
  std::span<const Channel> channels(Index v) const { return channels_[static_cast<size_t>(v)]; }
  Index mode_count(Index e) const {
    return static_cast<Index>(description_.edges[static_cast<size_t>(e)].potentials.size());
  }
  Index vertex_index(const std::string& id) const;

 private:
  GraphDescription description_;
  std::vector<std::vector<Channel>> channels_;
};

MetricGraph expand_multimode(const MultiModeGraph& mm);

MetricGraph build_graph(const GraphDescription& description);

}  // namespace qgs
