#include "qgs/graph_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "qgs/errors.hpp"
#include "qgs/linalg.hpp"

namespace qgs {

MatchingValidation validate_matching(const MatrixXcd& A, const MatrixXcd& B, Index degree) {
  MatchingValidation report;
  report.degree = degree;
  if (A.rows() != degree || A.cols() != degree || B.rows() != degree || B.cols() != degree) {
    report.hermiticity_residual = std::numeric_limits<double>::infinity();
    return report;
  }
  report.tolerance = 1e-10 * std::max({1.0, max_norm(A), max_norm(B)});
  report.hermiticity_residual = max_norm(MatrixXcd(A * B.adjoint() - B * A.adjoint()));

  MatrixXcd joined(degree, 2 * degree);
  joined << A, B;
  Eigen::JacobiSVD<MatrixXcd> svd(joined);
  const auto& values = svd.singularValues();
  const double cutoff = 1e-10 * (values.size() ? values.maxCoeff() : 0.0);
  report.rank = (values.array() > cutoff).count();
  return report;
}

MatchingConditions standard_conditions(MatchingKind kind, Index degree, double lambda) {
  if (degree < 1) throw UnsupportedDegree("vertex degree must be at least 1");
  MatchingConditions mc;
  mc.A = MatrixXcd::Zero(degree, degree);
  mc.B = MatrixXcd::Zero(degree, degree);

  // Continuity across all ends plus one derivative-sum row: λφ − Σφ' = 0.
  auto coupling = [&](double strength) {
    for (Index i = 0; i + 1 < degree; ++i) {
      mc.A(i, i) = 1.0;
      mc.A(i, i + 1) = -1.0;
    }
    mc.A(degree - 1, 0) = strength;
    mc.B.row(degree - 1).setConstant(-1.0);
  };

  switch (kind) {
    case MatchingKind::dirichlet:
      mc.A.setIdentity();
      break;
    case MatchingKind::neumann:
      mc.B.setIdentity();
      break;
    case MatchingKind::robin:
      if (!std::isfinite(lambda)) throw MalformedMatching("robin parameter must be finite");
      coupling(lambda);
      break;
    case MatchingKind::kirchhoff:
      if (degree < 2) throw UnsupportedDegree("kirchhoff needs degree >= 2, got " + std::to_string(degree));
      coupling(0.0);
      break;
    case MatchingKind::continuity_step:
      if (degree != 2) throw UnsupportedDegree("continuity_step needs degree 2, got " + std::to_string(degree));
      coupling(0.0);
      break;
    case MatchingKind::custom:
      throw MalformedMatching("custom matching has no standard form");
  }
  return mc;
}

MetricGraph::MetricGraph(std::vector<VertexRecord> vertices, std::vector<EdgeRecord> edges,
                         std::vector<EdgeOrigin> origins)
    : vertices_(std::move(vertices)), edges_(std::move(edges)), origins_(std::move(origins)) {
  if (edges_.empty()) throw DisconnectedGraph("graph has no edges");
  if (origins_.empty()) {
    origins_.resize(edges_.size());
    for (size_t e = 0; e < edges_.size(); ++e) origins_[e].source_edge = static_cast<Index>(e);
  }
  const Index nv = num_vertices();
  for (const auto& edge : edges_) {
    if (edge.from < 0 || edge.from >= nv || edge.to < 0 || edge.to >= nv)
      throw SchemaError("edge '" + edge.id + "' references a missing vertex");
    if (edge.from == edge.to) throw SchemaError("edge '" + edge.id + "' is an unsplit loop");
    if (!(edge.length > 0) || !std::isfinite(edge.length))
      throw NonPositiveLength("edge '" + edge.id + "' has length " + std::to_string(edge.length));
    if (!std::isfinite(edge.potential)) throw SchemaError("edge '" + edge.id + "' has a non-finite potential");
  }

  stars_.assign(vertices_.size(), {});
  slots_.assign(static_cast<size_t>(num_directed()), 0);
  for (Index d = 0; d < num_directed(); ++d) {
    auto& star = stars_[static_cast<size_t>(tail(d))];
    slots_[static_cast<size_t>(d)] = static_cast<Index>(star.size());
    star.push_back(d);
  }

  for (Index v = 0; v < nv; ++v)
    if (degree(v) == 0) throw DisconnectedGraph("vertex '" + vertex(v).id + "' has no edges");

  std::vector<bool> seen(vertices_.size(), false);
  std::queue<Index> frontier;
  frontier.push(0);
  seen[0] = true;
  while (!frontier.empty()) {
    const Index v = frontier.front();
    frontier.pop();
    for (Index d : star(v)) {
      const Index w = head(d);
      if (!seen[static_cast<size_t>(w)]) {
        seen[static_cast<size_t>(w)] = true;
        frontier.push(w);
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw DisconnectedGraph("graph is not connected");

  for (Index v = 0; v < nv; ++v) {
    auto& mc = vertices_[static_cast<size_t>(v)].matching;
    const Index d = degree(v);
    if (mc.A.rows() != d || mc.A.cols() != d || mc.B.rows() != d || mc.B.cols() != d) {
      std::ostringstream msg;
      msg << "vertex '" << vertex(v).id << "' has degree " << d << " but matching matrices are " << mc.A.rows()
          << "x" << mc.A.cols() << " and " << mc.B.rows() << "x" << mc.B.cols();
      throw MalformedMatching(msg.str());
    }
    const auto report = validate_matching(mc.A, mc.B, d);
    if (!report.accepted()) {
      std::ostringstream msg;
      msg << "vertex '" << vertex(v).id << "': hermiticity residual " << report.hermiticity_residual << ", rank "
          << report.rank << " of " << d;
      throw MalformedMatching(msg.str());
    }
    mc.ordering.assign(star(v).begin(), star(v).end());
  }
}

Index MetricGraph::tail(Index directed) const {
  const auto& e = edges_[static_cast<size_t>(edge_of(directed))];
  return directed % 2 == 0 ? e.from : e.to;
}

double MetricGraph::min_potential() const {
  return std::min_element(edges_.begin(), edges_.end(),
                          [](const auto& a, const auto& b) { return a.potential < b.potential; })
      ->potential;
}

double MetricGraph::max_potential() const {
  return std::max_element(edges_.begin(), edges_.end(),
                          [](const auto& a, const auto& b) { return a.potential < b.potential; })
      ->potential;
}

std::vector<double> MetricGraph::thresholds() const {
  std::vector<double> out;
  for (const auto& e : edges_) out.push_back(e.potential);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<Index> MetricGraph::find_vertex(const std::string& id) const {
  for (Index v = 0; v < num_vertices(); ++v)
    if (vertex(v).id == id) return v;
  return std::nullopt;
}

MultiModeGraph::MultiModeGraph(GraphDescription description) : description_(std::move(description)) {
  const auto& vs = description_.vertices;
  for (size_t i = 0; i < vs.size(); ++i)
    for (size_t j = i + 1; j < vs.size(); ++j)
      if (vs[i].id == vs[j].id) throw SchemaError("duplicate vertex id '" + vs[i].id + "'");

  channels_.assign(vs.size(), {});
  for (size_t e = 0; e < description_.edges.size(); ++e) {
    const auto& edge = description_.edges[e];
    if (edge.potentials.empty()) throw SchemaError("edge '" + edge.id + "' has no modes");
    for (double v : edge.potentials)
      if (!std::isfinite(v)) throw SchemaError("edge '" + edge.id + "' has a non-finite potential");
    if (!(edge.length > 0) || !std::isfinite(edge.length))
      throw NonPositiveLength("edge '" + edge.id + "' has length " + std::to_string(edge.length));
    const Index from = vertex_index(edge.from);
    const Index to = vertex_index(edge.to);
    for (Index m = 0; m < mode_count(static_cast<Index>(e)); ++m)
      channels_[static_cast<size_t>(from)].push_back({static_cast<Index>(e), true, m});
    for (Index m = 0; m < mode_count(static_cast<Index>(e)); ++m)
      channels_[static_cast<size_t>(to)].push_back({static_cast<Index>(e), false, m});
  }
}

Index MultiModeGraph::vertex_index(const std::string& id) const {
  const auto& vs = description_.vertices;
  for (size_t v = 0; v < vs.size(); ++v)
    if (vs[v].id == id) return static_cast<Index>(v);
  throw SchemaError("unknown vertex id '" + id + "'");
}

MetricGraph expand_multimode(const MultiModeGraph& mm) {
  const auto& desc = mm.description();
  const Index nv = static_cast<Index>(desc.vertices.size());

  std::vector<VertexRecord> vertices(desc.vertices.size());
  for (size_t v = 0; v < desc.vertices.size(); ++v) vertices[v].id = desc.vertices[v].id;

  std::vector<EdgeRecord> edges;
  std::vector<EdgeOrigin> origins;
  // Directed index (leaving the vertex) of each (edge, end, mode) channel.
  std::vector<std::vector<Index>> from_directed(desc.edges.size()), to_directed(desc.edges.size());

  for (size_t e = 0; e < desc.edges.size(); ++e) {
    const auto& spec = desc.edges[e];
    const Index from = mm.vertex_index(spec.from);
    const Index to = mm.vertex_index(spec.to);
    const Index modes = mm.mode_count(static_cast<Index>(e));
    const bool loop = from == to;
    if (!loop) {
      for (Index m = 0; m < modes; ++m) {
        const Index index = static_cast<Index>(edges.size());
        edges.push_back({modes > 1 ? spec.id + "#" + std::to_string(m) : spec.id, from, to, spec.length,
                         spec.potentials[static_cast<size_t>(m)]});
        origins.push_back({static_cast<Index>(e), m, EdgeOrigin::Part::whole});
        from_directed[e].push_back(2 * index);
        to_directed[e].push_back(2 * index + 1);
      }
      continue;
    }
    std::vector<Index> middles;
    for (Index m = 0; m < modes; ++m) {
      VertexRecord aux;
      aux.id = spec.id + "/mid" + (modes > 1 ? "#" + std::to_string(m) : "");
      aux.auxiliary = true;
      aux.matching = standard_conditions(MatchingKind::continuity_step, 2);
      middles.push_back(static_cast<Index>(vertices.size()));
      vertices.push_back(std::move(aux));
    }
    for (Index m = 0; m < modes; ++m) {
      const Index index = static_cast<Index>(edges.size());
      edges.push_back({spec.id + "/a" + (modes > 1 ? "#" + std::to_string(m) : ""), from,
                       middles[static_cast<size_t>(m)], spec.length / 2, spec.potentials[static_cast<size_t>(m)]});
      origins.push_back({static_cast<Index>(e), m, EdgeOrigin::Part::first_half});
      from_directed[e].push_back(2 * index);
    }
    for (Index m = 0; m < modes; ++m) {
      const Index index = static_cast<Index>(edges.size());
      edges.push_back({spec.id + "/b" + (modes > 1 ? "#" + std::to_string(m) : ""),
                       middles[static_cast<size_t>(m)], to, spec.length / 2, spec.potentials[static_cast<size_t>(m)]});
      origins.push_back({static_cast<Index>(e), m, EdgeOrigin::Part::second_half});
      to_directed[e].push_back(2 * index + 1);
    }
  }

  for (Index v = 0; v < nv; ++v) {
    const auto channels = mm.channels(v);
    const Index degree = static_cast<Index>(channels.size());
    const auto& spec = desc.vertices[static_cast<size_t>(v)].matching;
    auto& record = vertices[static_cast<size_t>(v)];
    if (degree == 0) throw DisconnectedGraph("vertex '" + record.id + "' has no edges");
    if (spec.kind != MatchingKind::custom) {
      record.matching = standard_conditions(spec.kind, degree, spec.lambda);
      continue;
    }
    if (spec.A.rows() != degree || spec.A.cols() != degree || spec.B.rows() != degree || spec.B.cols() != degree)
      throw MalformedMatching("vertex '" + record.id + "' has " + std::to_string(degree) +
                              " channels but matching matrices are " + std::to_string(spec.A.rows()) + "x" +
                              std::to_string(spec.A.cols()));
    std::vector<Index> directed;
    for (const auto& c : channels) {
      const auto& list = c.from_end ? from_directed[static_cast<size_t>(c.edge)] : to_directed[static_cast<size_t>(c.edge)];
      directed.push_back(list[static_cast<size_t>(c.mode)]);
    }
    std::vector<Index> order(channels.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return directed[static_cast<size_t>(a)] < directed[static_cast<size_t>(b)]; });
    record.matching.A.resize(degree, degree);
    record.matching.B.resize(degree, degree);
    for (Index j = 0; j < degree; ++j) {
      record.matching.A.col(j) = spec.A.col(order[static_cast<size_t>(j)]);
      record.matching.B.col(j) = spec.B.col(order[static_cast<size_t>(j)]);
    }
  }

  return MetricGraph(std::move(vertices), std::move(edges), std::move(origins));
}

MetricGraph build_graph(const GraphDescription& description) {
  return expand_multimode(MultiModeGraph(description));
}

}  // namespace qgs
