#pragma once

#include <algorithm>
#include <vector>

#include "qgs/scattering.hpp"

namespace qgs {

// Directed-edge index sets; both directions of an edge always share a block.
struct Partition {
  std::vector<Index> oscillatory;
  std::vector<Index> evanescent;

  Index dimension() const { return static_cast<Index>(oscillatory.size()); }
  friend bool operator==(const Partition&, const Partition&) = default;
};

inline Partition partition_from_edges(const std::vector<bool>& oscillatory_edges) {
  Partition p;
  for (size_t e = 0; e < oscillatory_edges.size(); ++e) {
    auto& block = oscillatory_edges[e] ? p.oscillatory : p.evanescent;
    block.push_back(static_cast<Index>(2 * e));
    block.push_back(static_cast<Index>(2 * e + 1));
  }
  return p;
}

// Oscillatory edges are those with V_e < E.
inline Partition partition_at(const MetricGraph& graph, double energy) {
  std::vector<bool> osc;
  for (const auto& e : graph.edges()) osc.push_back(e.potential < energy);
  return partition_from_edges(osc);
}

// True when every oscillatory edge of `inner` is also oscillatory in `outer`.
inline bool nested_in(const Partition& inner, const Partition& outer) {
  return std::includes(outer.oscillatory.begin(), outer.oscillatory.end(), inner.oscillatory.begin(),
                       inner.oscillatory.end());
}

template <typename Real = double>
struct QuantumMapBundle {
  WavenumberSet<Real> k;
  std::vector<VertexScattering<Real>> vertices;
  CMatrix<Real> sigma;      // Σ: block diagonal when rows and columns are grouped by end vertex
  CVector<Real> transport;  // diagonal of T, per directed edge
  CMatrix<Real> map;        // U = T P Σ
  Partition partition;

  Real energy() const { return k.energy; }
  Index size() const { return map.rows(); }
};

template <typename Real = double>
QuantumMapBundle<Real> assemble(const MetricGraph& graph, Real energy, Real epsilon = 0) {
  using C = Complex<Real>;
  QuantumMapBundle<Real> b;
  b.k = wavenumbers<Real>(graph, energy, epsilon);
  const Index n = graph.num_directed();
  b.sigma = CMatrix<Real>::Zero(n, n);
  for (Index v = 0; v < graph.num_vertices(); ++v) {
    b.vertices.push_back(vertex_scattering<Real>(graph, v, b.k));
    const auto star = graph.star(v);
    const auto& s = b.vertices.back().sigma;
    for (Index i = 0; i < s.rows(); ++i)
      for (Index j = 0; j < s.cols(); ++j)
        b.sigma(MetricGraph::reversed(star[static_cast<size_t>(i)]), MetricGraph::reversed(star[static_cast<size_t>(j)])) = s(i, j);
  }
  b.transport.resize(n);
  for (Index d = 0; d < n; ++d) {
    const Index e = MetricGraph::edge_of(d);
    b.transport(d) = std::exp(C(0, 1) * b.k[e] * Real(graph.edge(e).length));
  }
  b.map.resize(n, n);
  for (Index d = 0; d < n; ++d) b.map.row(d) = b.transport(d) * b.sigma.row(MetricGraph::reversed(d));
  b.partition = partition_from_edges(b.k.oscillatory);
  return b;
}

// U^{-1} = Σ^{-1} P T^{-1}, inverted block by block.
template <typename Real = double>
CMatrix<Real> inverse_map(const MetricGraph& graph, const QuantumMapBundle<Real>& b) {
  const Index n = b.size();
  CMatrix<Real> sigma_inverse = CMatrix<Real>::Zero(n, n);
  for (Index v = 0; v < graph.num_vertices(); ++v) {
    const auto star = graph.star(v);
    const CMatrix<Real> inv = b.vertices[static_cast<size_t>(v)].sigma.partialPivLu().inverse();
    for (Index i = 0; i < inv.rows(); ++i)
      for (Index j = 0; j < inv.cols(); ++j)
        sigma_inverse(MetricGraph::reversed(star[static_cast<size_t>(i)]), MetricGraph::reversed(star[static_cast<size_t>(j)])) = inv(i, j);
  }
  CMatrix<Real> out(n, n);
  for (Index d = 0; d < n; ++d) out.col(d) = sigma_inverse.col(MetricGraph::reversed(d)) / b.transport(d);
  return out;
}

template <typename Real = double>
struct MapBlocks {
  CMatrix<Real> oo, oe, eo, ee;
};

template <typename Real = double>
MapBlocks<Real> blocks(const CMatrix<Real>& m, const Partition& p) {
  return {submatrix(m, p.oscillatory, p.oscillatory), submatrix(m, p.oscillatory, p.evanescent),
          submatrix(m, p.evanescent, p.oscillatory), submatrix(m, p.evanescent, p.evanescent)};
}

template <typename Real = double>
struct TrapCheck {
  Real min_singular_value = std::numeric_limits<Real>::infinity();
  bool flagged = false;
};

template <typename Real = double>
TrapCheck<Real> trapped_state_check(const QuantumMapBundle<Real>& b, const Partition& p) {
  TrapCheck<Real> out;
  if (p.evanescent.empty()) return out;
  const CMatrix<Real> ee = submatrix(b.map, p.evanescent, p.evanescent);
  out.min_singular_value = smallest_singular_value(CMatrix<Real>(CMatrix<Real>::Identity(ee.rows(), ee.cols()) - ee));
  out.flagged = out.min_singular_value < Real(trap_tolerance);
  return out;
}

template <typename Real = double>
TrapCheck<Real> trapped_state_check(const QuantumMapBundle<Real>& b) {
  return trapped_state_check(b, b.partition);
}

// U_oo + U_oe(𝕀 − U_ee)^{-1}U_eo for an arbitrary square matrix and partition.
template <typename Real = double>
CMatrix<Real> reduce_matrix(const CMatrix<Real>& m, const Partition& p) {
  if (p.evanescent.empty()) return submatrix(m, p.oscillatory, p.oscillatory);
  const auto blk = blocks(m, p);
  const CMatrix<Real> gap = CMatrix<Real>::Identity(blk.ee.rows(), blk.ee.cols()) - blk.ee;
  return blk.oo + blk.oe * CMatrix<Real>(gap.partialPivLu().solve(blk.eo));
}

template <typename Real = double>
CMatrix<Real> reduce(const QuantumMapBundle<Real>& b, const Partition& p) {
  const auto trap = trapped_state_check(b, p);
  if (trap.flagged)
    throw TrappedStateSuspected("smallest singular value of 1 - U_ee is " +
                                std::to_string(static_cast<double>(trap.min_singular_value)) + " at E = " +
                                std::to_string(static_cast<double>(b.energy())));
  return reduce_matrix(b.map, p);
}

template <typename Real = double>
CMatrix<Real> reduce(const QuantumMapBundle<Real>& b) {
  return reduce(b, b.partition);
}

namespace detail {

template <typename Real>
Real log_det_mismatch(const LogDet<Real>& a, const LogDet<Real>& b) {
  if (a.is_zero() || b.is_zero()) return a.is_zero() && b.is_zero() ? Real(0) : Real(1);
  const Complex<Real> delta(a.log_abs - b.log_abs, wrap_pi(a.phase - b.phase));
  return std::abs(std::exp(delta) - Complex<Real>(1));
}

template <typename Real>
CMatrix<Real> one_minus(const CMatrix<Real>& m) {
  return CMatrix<Real>::Identity(m.rows(), m.cols()) - m;
}

}  // namespace detail

template <typename Real = double>
struct IdentityResiduals {
  Real ratio = 0;    // det U_red / det U = det(𝕀 − (U⁻¹)_ee) / det(𝕀 − U_ee)
  Real product = 0;  // det(𝕀 − U) = det(𝕀 − U_ee) det(𝕀 − U_red)
};

template <typename Real = double>
IdentityResiduals<Real> det_identities_residuals(const MetricGraph& graph, const QuantumMapBundle<Real>& b,
                                                 const Partition& p) {
  IdentityResiduals<Real> r;
  if (p.evanescent.empty()) return r;
  const CMatrix<Real> reduced = reduce_matrix(b.map, p);
  const CMatrix<Real> inverse_ee = submatrix(inverse_map(graph, b), p.evanescent, p.evanescent);
  const CMatrix<Real> ee = submatrix(b.map, p.evanescent, p.evanescent);
  r.ratio = detail::log_det_mismatch(log_det(reduced) / log_det(b.map),
                                     log_det(detail::one_minus(inverse_ee)) / log_det(detail::one_minus(ee)));
  r.product = detail::log_det_mismatch(log_det(detail::one_minus(b.map)),
                                       log_det(detail::one_minus(ee)) * log_det(detail::one_minus(reduced)));
  return r;
}

template <typename Real = double>
struct BlockResiduals {
  Real unitarity = 0;
  Real mixed_left = 0;
  Real mixed_right = 0;
  Real evanescent = 0;
  Real reduced_unitarity = 0;

  Real max() const { return std::max({unitarity, mixed_left, mixed_right, evanescent, reduced_unitarity}); }
};

// Block relations inherited by U from the vertex relations, evaluated at real energy.
template <typename Real = double>
BlockResiduals<Real> block_symmetry_residuals(const QuantumMapBundle<Real>& b, const Partition& p) {
  using C = Complex<Real>;
  const C i(0, 1);
  const auto blk = blocks(b.map, p);
  const Index ne = static_cast<Index>(p.evanescent.size());
  CMatrix<Real> swap = CMatrix<Real>::Zero(ne, ne);
  CVector<Real> transport(ne);
  for (Index r = 0; r < ne; ++r) {
    transport(r) = b.transport(p.evanescent[static_cast<size_t>(r)]);
    for (Index c = 0; c < ne; ++c)
      if (p.evanescent[static_cast<size_t>(r)] == MetricGraph::reversed(p.evanescent[static_cast<size_t>(c)])) swap(r, c) = 1;
  }
  const CVector<Real> inv_transport = transport.cwiseInverse();
  const CVector<Real> inv_conj_transport = transport.conjugate().cwiseInverse();

  BlockResiduals<Real> r;
  if (!p.oscillatory.empty())
    r.unitarity = max_norm(CMatrix<Real>(blk.oo.adjoint() * blk.oo - CMatrix<Real>::Identity(blk.oo.rows(), blk.oo.cols())));
  if (!p.oscillatory.empty() && ne > 0) {
    r.mixed_left = relative_residual(CMatrix<Real>(i * blk.oe.adjoint() * blk.oo),
                                     CMatrix<Real>(swap * inv_transport.asDiagonal() * blk.eo));
    r.mixed_right = relative_residual(CMatrix<Real>(i * blk.oo * blk.eo.adjoint()),
                                      CMatrix<Real>(blk.oe * swap * transport.conjugate().asDiagonal()));
  }
  if (ne > 0) {
    r.evanescent = relative_residual(CMatrix<Real>(i * blk.oe.adjoint() * blk.oe),
                                     CMatrix<Real>(swap * inv_transport.asDiagonal() * blk.ee -
                                                   blk.ee.adjoint() * swap * inv_conj_transport.asDiagonal()));
  }
  if (!p.oscillatory.empty()) {
    const CMatrix<Real> reduced = reduce_matrix(b.map, p);
    r.reduced_unitarity =
        max_norm(CMatrix<Real>(reduced.adjoint() * reduced - CMatrix<Real>::Identity(reduced.rows(), reduced.cols())));
  }
  return r;
}

template <typename Real = double>
LogDet<Real> secular(const QuantumMapBundle<Real>& b) {
  return log_det(detail::one_minus(b.map));
}

template <typename Real = double>
LogDet<Real> secular_reduced(const CMatrix<Real>& reduced) {
  return log_det(detail::one_minus(reduced));
}

// Edge-indexed map of a star: Ũ = σ̃ T̃² σ_center, columns in the centre's star order.
template <typename Real = double>
struct StarMap {
  Index center = 0;
  std::vector<Index> edges;  // edge of each row/column
  CMatrix<Real> map;
};

inline Index star_center(const MetricGraph& graph) {
  Index center = -1;
  for (Index v = 0; v < graph.num_vertices(); ++v) {
    if (graph.degree(v) <= 1) continue;
    if (center >= 0) throw NotAStar("vertices '" + graph.vertex(center).id + "' and '" + graph.vertex(v).id + "' both have degree > 1");
    center = v;
  }
  if (center < 0) {
    if (graph.num_edges() != 1) throw NotAStar("no centre vertex");
    center = graph.edge(0).from;
  }
  for (Index d : graph.star(center))
    if (graph.degree(graph.head(d)) != 1 || graph.head(d) == center) throw NotAStar("leaf of degree > 1");
  if (graph.degree(center) != graph.num_edges()) throw NotAStar("edges not attached to the centre");
  return center;
}

template <typename Real = double>
StarMap<Real> star_reduce(const MetricGraph& graph, const QuantumMapBundle<Real>& b) {
  StarMap<Real> out;
  out.center = star_center(graph);
  const auto star = graph.star(out.center);
  const Index n = static_cast<Index>(star.size());
  CVector<Real> leaf_phase(n);
  for (Index s = 0; s < n; ++s) {
    const Index d = star[static_cast<size_t>(s)];
    out.edges.push_back(MetricGraph::edge_of(d));
    const auto& leaf = b.vertices[static_cast<size_t>(graph.head(d))].sigma;
    leaf_phase(s) = leaf(0, 0) * b.transport(d) * b.transport(d);
  }
  out.map = leaf_phase.asDiagonal() * b.vertices[static_cast<size_t>(out.center)].sigma;
  return out;
}

}  // namespace qgs
