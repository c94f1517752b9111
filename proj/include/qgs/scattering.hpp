#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qgs/errors.hpp"
#include "qgs/graph_model.hpp"
#include "qgs/linalg.hpp"

namespace qgs {

template <typename Real = double>
struct WavenumberSet {
  Real energy = 0;
  Real epsilon = 0;
  std::vector<Complex<Real>> k;   // per edge
  std::vector<bool> oscillatory;  // per edge

  Index size() const { return static_cast<Index>(k.size()); }
  Complex<Real> operator[](Index e) const { return k[static_cast<size_t>(e)]; }
  bool is_oscillatory(Index e) const { return oscillatory[static_cast<size_t>(e)]; }
};

// K_e = √(E − V_e) on the branch Re K ≥ 0, Im K ≥ 0; evaluated at E + iε when ε > 0.
template <typename Real = double>
WavenumberSet<Real> wavenumbers(const MetricGraph& graph, Real energy, Real epsilon = 0) {
  WavenumberSet<Real> out;
  out.energy = energy;
  out.epsilon = epsilon;
  const Real tolerance = Real(threshold_tolerance(static_cast<double>(energy)));
  for (const auto& edge : graph.edges()) {
    const Real gap = energy - Real(edge.potential);
    if (std::abs(gap) < tolerance)
      throw AtThreshold("edge '" + edge.id + "' at E = " + std::to_string(static_cast<double>(energy)));
    const bool oscillatory = gap > 0;
    const Complex<Real> k = oscillatory ? std::sqrt(Complex<Real>(gap, epsilon))
                                        : Complex<Real>(0, 1) * std::sqrt(Complex<Real>(-gap, -epsilon));
    out.k.push_back(k);
    out.oscillatory.push_back(oscillatory);
  }
  return out;
}

template <typename Real = double>
struct VertexScattering {
  CMatrix<Real> sigma;
  CMatrix<Real> base;
  CVector<Real> reflection;    // diagonal of (K − 1)/(K + 1)
  CVector<Real> transmission;  // diagonal of 2K^{1/2}/(K + 1)
  CVector<Real> k;
  Real condition = 1;

  Index degree() const { return sigma.rows(); }
};

namespace detail {

template <typename Real>
CMatrix<Real> sigma_of(const CMatrix<Real>& A, const CMatrix<Real>& B, const CVector<Real>& k, Real& condition) {
  const Complex<Real> i(0, 1);
  const CVector<Real> root = k.array().sqrt();
  const CMatrix<Real> system = A + i * B * k.asDiagonal();
  Eigen::PartialPivLU<CMatrix<Real>> lu(system);
  const Real rcond = lu.rcond();
  condition = rcond > 0 ? 1 / rcond : std::numeric_limits<Real>::infinity();
  if (!(condition <= Real(cond_max)))
    throw SingularVertexMatrix("condition number of A + iBK is " + std::to_string(static_cast<double>(condition)));
  const CMatrix<Real> solved = lu.solve(CMatrix<Real>(B * root.asDiagonal()));
  CMatrix<Real> sigma = Complex<Real>(2) * i * (root.asDiagonal() * solved);
  sigma.diagonal().array() -= Complex<Real>(1);
  return sigma;
}

}  // namespace detail

template <typename Real = double>
VertexScattering<Real> vertex_scattering(const MatchingConditions& mc, const CVector<Real>& k) {
  using C = Complex<Real>;
  const CMatrix<Real> A = mc.A.cast<C>();
  const CMatrix<Real> B = mc.B.cast<C>();
  VertexScattering<Real> out;
  out.k = k;
  out.sigma = detail::sigma_of<Real>(A, B, k, out.condition);
  Real base_condition = 1;
  out.base = detail::sigma_of<Real>(A, B, CVector<Real>::Ones(k.size()), base_condition);
  out.reflection = (k.array() - C(1)) / (k.array() + C(1));
  out.transmission = C(2) * k.array().sqrt() / (k.array() + C(1));
  return out;
}

template <typename Real = double>
CVector<Real> local_wavenumbers(const MetricGraph& graph, Index v, const WavenumberSet<Real>& ks) {
  const auto star = graph.star(v);
  CVector<Real> k(static_cast<Index>(star.size()));
  for (Index s = 0; s < k.size(); ++s) k(s) = ks[MetricGraph::edge_of(star[static_cast<size_t>(s)])];
  return k;
}

template <typename Real = double>
std::vector<bool> local_oscillatory(const MetricGraph& graph, Index v, const WavenumberSet<Real>& ks) {
  std::vector<bool> out;
  for (Index d : graph.star(v)) out.push_back(ks.is_oscillatory(MetricGraph::edge_of(d)));
  return out;
}

template <typename Real = double>
VertexScattering<Real> vertex_scattering(const MetricGraph& graph, Index v, const WavenumberSet<Real>& ks) {
  return vertex_scattering<Real>(graph.vertex(v).matching, local_wavenumbers(graph, v, ks));
}

// ℛ + 𝒯(𝕀 + 𝒮ℛ)^{-1}𝒮𝒯, the same matrix built from the base unitary and edge barriers.
template <typename Real = double>
CMatrix<Real> barrier_form(const VertexScattering<Real>& vs) {
  const Index d = vs.degree();
  const CMatrix<Real> system = CMatrix<Real>::Identity(d, d) + vs.base * vs.reflection.asDiagonal();
  const CMatrix<Real> rhs = vs.base * vs.transmission.asDiagonal();
  CMatrix<Real> out = vs.transmission.asDiagonal() * CMatrix<Real>(system.partialPivLu().solve(rhs));
  out.diagonal() += vs.reflection;
  return out;
}

template <typename Real = double>
struct SymmetryResiduals {
  Real unitarity = 0;      // σ_oo†σ_oo = 𝕀
  Real mixed_left = 0;     // iσ_oe†σ_oo = σ_eo
  Real mixed_right = 0;    // iσ_ooσ_eo† = σ_oe
  Real evanescent = 0;     // iσ_oe†σ_oe = σ_ee − σ_ee†

  Real max() const { return std::max({unitarity, mixed_left, mixed_right, evanescent}); }
};

namespace detail {

inline void split_indices(const std::vector<bool>& oscillatory, std::vector<Index>& osc, std::vector<Index>& ev) {
  for (size_t i = 0; i < oscillatory.size(); ++i) (oscillatory[i] ? osc : ev).push_back(static_cast<Index>(i));
}

}  // namespace detail

// Relative max-norm residuals of the four block relations implied by flux conservation.
template <typename Real = double>
SymmetryResiduals<Real> vertex_symmetry_residuals(const VertexScattering<Real>& vs,
                                                  const std::vector<bool>& oscillatory) {
  using C = Complex<Real>;
  const C i(0, 1);
  std::vector<Index> o, e;
  detail::split_indices(oscillatory, o, e);
  const CMatrix<Real> oo = submatrix(vs.sigma, o, o), oe = submatrix(vs.sigma, o, e);
  const CMatrix<Real> eo = submatrix(vs.sigma, e, o), ee = submatrix(vs.sigma, e, e);
  SymmetryResiduals<Real> r;
  if (!o.empty())
    r.unitarity = max_norm(CMatrix<Real>(oo.adjoint() * oo - CMatrix<Real>::Identity(oo.rows(), oo.cols())));
  if (!o.empty() && !e.empty()) {
    r.mixed_left = relative_residual(CMatrix<Real>(i * oe.adjoint() * oo), eo);
    r.mixed_right = relative_residual(CMatrix<Real>(i * oo * eo.adjoint()), oe);
  }
  if (!e.empty()) r.evanescent = relative_residual(CMatrix<Real>(i * oe.adjoint() * oe), CMatrix<Real>(ee - ee.adjoint()));
  return r;
}

// Σ_e I_e with b_out = σ b_in; on an evanescent edge I_e = 2 Im(b_out* b_in).
template <typename Real = double>
Real vertex_flux(const VertexScattering<Real>& vs, const CVector<Real>& incoming, const std::vector<bool>& oscillatory) {
  const CVector<Real> outgoing = vs.sigma * incoming;
  Real total = 0;
  for (Index j = 0; j < incoming.size(); ++j) {
    if (oscillatory[static_cast<size_t>(j)])
      total += std::norm(outgoing(j)) - std::norm(incoming(j));
    else
      total += 2 * std::imag(std::conj(outgoing(j)) * incoming(j));
  }
  return total;
}

}  // namespace qgs
