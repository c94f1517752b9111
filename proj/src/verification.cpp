#include "qgs/verification.hpp"

#include <algorithm>
#include <random>

#include "qgs/phase_tracking.hpp"

namespace qgs {

double ResidualSummary::max() const {
  return std::max({vertex_symmetry, flux, block_symmetry, reduced_unitarity, det_identities, map_unitarity});
}

void ResidualSummary::absorb(const ResidualSummary& other) {
  vertex_symmetry = std::max(vertex_symmetry, other.vertex_symmetry);
  flux = std::max(flux, other.flux);
  block_symmetry = std::max(block_symmetry, other.block_symmetry);
  reduced_unitarity = std::max(reduced_unitarity, other.reduced_unitarity);
  det_identities = std::max(det_identities, other.det_identities);
  map_unitarity = std::max(map_unitarity, other.map_unitarity);
  evaluations += other.evaluations;
  skipped += other.skipped;
}

ResidualSummary verify_graph(const MetricGraph& graph, const std::vector<double>& energies, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  ResidualSummary out;
  auto check = [&](double energy) {
    if (energy <= graph.min_potential() || near_threshold(graph, energy)) {
      ++out.skipped;
      return;
    }
    QuantumMapBundle<double> b;
    try {
      b = assemble(graph, energy);
    } catch (const SingularVertexMatrix&) {
      ++out.skipped;
      return;
    }
    for (Index v = 0; v < graph.num_vertices(); ++v) {
      const auto& vs = b.vertices[static_cast<std::size_t>(v)];
      const auto osc = local_oscillatory(graph, v, b.k);
      out.vertex_symmetry = std::max(out.vertex_symmetry, vertex_symmetry_residuals(vs, osc).max());
      VectorXcd in(vs.degree());
      for (Index j = 0; j < in.size(); ++j) in(j) = {gauss(rng), gauss(rng)};
      const double scale = std::max(1.0, (vs.sigma * in).squaredNorm() + in.squaredNorm());
      out.flux = std::max(out.flux, std::abs(vertex_flux(vs, in, osc)) / scale);
    }
    if (trapped_state_check(b).flagged) {
      ++out.skipped;
      return;
    }
    const auto blocks = block_symmetry_residuals(b, b.partition);
    out.block_symmetry = std::max({out.block_symmetry, blocks.unitarity, blocks.mixed_left, blocks.mixed_right, blocks.evanescent});
    out.reduced_unitarity = std::max(out.reduced_unitarity, blocks.reduced_unitarity);
    const auto ids = det_identities_residuals(graph, b, b.partition);
    out.det_identities = std::max({out.det_identities, ids.ratio, ids.product});
    if (b.partition.evanescent.empty())
      out.map_unitarity = std::max(out.map_unitarity, max_norm(MatrixXcd(b.map.adjoint() * b.map - MatrixXcd::Identity(b.size(), b.size()))));
    ++out.evaluations;
  };
  for (double e : energies) check(e);
  check(graph.max_potential() + 3.7);
  return out;
}

}  // namespace qgs
