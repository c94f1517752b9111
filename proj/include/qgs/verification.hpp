#pragma once

#include <cstdint>
#include <vector>

#include "qgs/quantum_map.hpp"

namespace qgs {

// Largest residual of each relation seen over a set of evaluations.
struct ResidualSummary {
  double vertex_symmetry = 0;    // σ block relations per vertex
  double flux = 0;               // net current out of each vertex for a random incoming wave
  double block_symmetry = 0;     // U block relations
  double reduced_unitarity = 0;  // U_red† U_red = 𝕀
  double det_identities = 0;     // det U_red / det U and det(𝕀 − U) factorisation
  double map_unitarity = 0;      // U† U = 𝕀 above every threshold
  std::size_t evaluations = 0;
  std::size_t skipped = 0;       // thresholds and trapped states

  double max() const;
  void absorb(const ResidualSummary& other);
};

ResidualSummary verify_graph(const MetricGraph& graph, const std::vector<double>& energies, std::uint64_t seed = 1);

}  // namespace qgs
