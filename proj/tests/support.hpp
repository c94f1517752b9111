#pragma once

#include <cmath>
#include <random>
#include <string>

#include "qgs/graph_model.hpp"

namespace qgs::test {

inline MatchingSpec kind(MatchingKind k, double lambda = 0) {
  MatchingSpec s;
  s.kind = k;
  s.lambda = lambda;
  return s;
}

inline GraphDescription interval(double l1, double l2, double v2) {
  GraphDescription g;
  g.vertices = {{"left", kind(MatchingKind::dirichlet)},
                {"step", kind(MatchingKind::continuity_step)},
                {"right", kind(MatchingKind::dirichlet)}};
  g.edges = {{"e1", "step", "left", l1, {0.0}}, {"e2", "step", "right", l2, {v2}}};
  return g;
}

inline GraphDescription dirichlet_edge(double length) {
  GraphDescription g;
  g.vertices = {{"a", kind(MatchingKind::dirichlet)}, {"b", kind(MatchingKind::dirichlet)}};
  g.edges = {{"e", "a", "b", length, {0.0}}};
  return g;
}

// Kirchhoff centre joined to leaves with the given lengths, potentials and leaf conditions.
inline GraphDescription star(const std::vector<double>& lengths, const std::vector<double>& potentials,
                             const std::vector<MatchingSpec>& leaves) {
  GraphDescription g;
  g.vertices.push_back({"c", kind(MatchingKind::kirchhoff)});
  for (size_t i = 0; i < lengths.size(); ++i) {
    g.vertices.push_back({"l" + std::to_string(i + 1), leaves[i]});
    g.edges.push_back({"e" + std::to_string(i + 1), "c", "l" + std::to_string(i + 1), lengths[i], {potentials[i]}});
  }
  return g;
}

inline GraphDescription threshold_star() {
  return star({std::sqrt(2.0), std::sqrt(3.0), 1.0}, {0, 121, 198},
              {kind(MatchingKind::dirichlet), kind(MatchingKind::dirichlet), kind(MatchingKind::dirichlet)});
}

inline GraphDescription robin_barrier_star(double ell) {
  return star({1.0, 0.5, 0.5 + ell}, {0, 10, 10},
              {kind(MatchingKind::dirichlet), kind(MatchingKind::robin, -2.5), kind(MatchingKind::robin, -2.5)});
}

}  // namespace qgs::test
