#include "qgs/random_graph.hpp"

#include <algorithm>

namespace qgs {

MatrixXcd random_unitary(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  MatrixXcd z(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) z(i, j) = {gauss(rng), gauss(rng)};
  Eigen::HouseholderQR<MatrixXcd> qr(z);
  MatrixXcd q = qr.householderQ();
  const MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) q.col(j) *= r(j, j) / std::abs(r(j, j));
  return q;
}

MatchingSpec random_matching(Index degree, std::mt19937_64& rng) {
  const MatrixXcd w = random_unitary(degree, rng);
  std::normal_distribution<double> gauss;
  MatrixXcd c(degree, degree);
  for (Index i = 0; i < degree; ++i)
    for (Index j = 0; j < degree; ++j) c(i, j) = {gauss(rng), gauss(rng)};
  c += 2.0 * MatrixXcd::Identity(degree, degree);
  const MatrixXcd id = MatrixXcd::Identity(degree, degree);
  MatchingSpec spec;
  spec.kind = MatchingKind::custom;
  spec.A = c * (id - w) / 2.0;
  spec.B = std::complex<double>(0, 1) * c * (id + w) / 2.0;
  return spec;
}

GraphDescription random_graph(std::mt19937_64& rng, const RandomGraphOptions& options) {
  std::uniform_int_distribution<Index> vertex_count(2, options.max_vertices);
  const Index nv = vertex_count(rng);
  std::uniform_int_distribution<Index> edge_count(nv - 1, std::max(nv - 1, options.max_edges));
  const Index ne = edge_count(rng);
  std::uniform_real_distribution<double> length(options.min_length, options.max_length);
  std::uniform_real_distribution<double> potential(0.0, options.max_potential);
  std::uniform_real_distribution<double> unit;

  GraphDescription g;
  for (Index v = 0; v < nv; ++v) g.vertices.push_back({"v" + std::to_string(v), {}});
  auto add_edge = [&](Index a, Index b) {
    const std::string id = "e" + std::to_string(g.edges.size());
    g.edges.push_back({id, "v" + std::to_string(a), "v" + std::to_string(b), length(rng), {potential(rng)}});
  };
  for (Index v = 1; v < nv; ++v) add_edge(std::uniform_int_distribution<Index>(0, v - 1)(rng), v);
  std::uniform_int_distribution<Index> pick(0, nv - 1);
  while (static_cast<Index>(g.edges.size()) < ne) {
    const Index a = pick(rng);
    Index b = pick(rng);
    if (a == b && !(options.allow_loops && unit(rng) < 0.3)) continue;
    add_edge(a, b);
  }

  std::vector<Index> degree(static_cast<size_t>(nv), 0);
  for (const auto& e : g.edges) {
    ++degree[static_cast<size_t>(std::stoi(e.from.substr(1)))];
    ++degree[static_cast<size_t>(std::stoi(e.to.substr(1)))];
  }
  for (Index v = 0; v < nv; ++v) g.vertices[static_cast<size_t>(v)].matching = random_matching(degree[static_cast<size_t>(v)], rng);
  return g;
}

std::vector<double> random_energies(const MetricGraph& graph, std::size_t count, std::mt19937_64& rng,
                                    double headroom, double clearance) {
  const auto thresholds = graph.thresholds();
  std::uniform_real_distribution<double> energy(graph.min_potential(), graph.max_potential() + headroom);
  std::vector<double> out;
  while (out.size() < count) {
    const double e = energy(rng);
    const bool clear = std::all_of(thresholds.begin(), thresholds.end(),
                                   [&](double v) { return std::abs(e - v) > clearance * (1 + std::abs(e)); });
    if (clear) out.push_back(e);
  }
  return out;
}

}  // namespace qgs
