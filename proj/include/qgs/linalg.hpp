#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qgs/types.hpp"

namespace qgs {

// Determinant held as (log|det|, arg) so huge and tiny factors can be combined.
template <typename Real>
struct LogDet {
  Real log_abs = 0;
  Real phase = 0;

  bool is_zero() const { return log_abs == -std::numeric_limits<Real>::infinity(); }
  Complex<Real> value() const { return is_zero() ? Complex<Real>(0) : std::polar(std::exp(log_abs), phase); }
  Complex<Real> log() const { return {log_abs, phase}; }

  friend LogDet operator*(const LogDet& a, const LogDet& b) { return {a.log_abs + b.log_abs, a.phase + b.phase}; }
  friend LogDet operator/(const LogDet& a, const LogDet& b) { return {a.log_abs - b.log_abs, a.phase - b.phase}; }
};

template <typename Derived>
using RealOf = typename Eigen::NumTraits<typename Derived::Scalar>::Real;

template <typename Derived>
LogDet<RealOf<Derived>> log_det(const Eigen::MatrixBase<Derived>& m) {
  using Real = RealOf<Derived>;
  LogDet<Real> out;
  if (m.rows() == 0) return out;
  Eigen::PartialPivLU<CMatrix<Real>> lu(m.template cast<Complex<Real>>());
  const auto& packed = lu.matrixLU();
  for (Index i = 0; i < packed.rows(); ++i) {
    const Complex<Real> pivot = packed(i, i);
    if (pivot == Complex<Real>(0)) return {-std::numeric_limits<Real>::infinity(), 0};
    out.log_abs += std::log(std::abs(pivot));
    out.phase += std::arg(pivot);
  }
  if (lu.permutationP().determinant() < 0) out.phase += std::numbers::pi_v<Real>;
  return out;
}

template <typename Derived>
CVector<RealOf<Derived>> eigenvalues(const Eigen::MatrixBase<Derived>& m) {
  using Real = RealOf<Derived>;
  if (m.rows() == 0) return {};
  if (m.rows() == 1) return CVector<Real>::Constant(1, m(0, 0));
  Eigen::ComplexEigenSolver<CMatrix<Real>> solver(m.template cast<Complex<Real>>(), false);
  return solver.eigenvalues();
}

// Σ_j log(1 − λ_j) with the principal branch taken eigenvalue by eigenvalue.
template <typename Derived>
Complex<RealOf<Derived>> trace_log_one_minus(const Eigen::MatrixBase<Derived>& m) {
  using Real = RealOf<Derived>;
  Complex<Real> sum = 0;
  for (const auto& lambda : eigenvalues(m)) sum += std::log(Complex<Real>(1) - lambda);
  return sum;
}

template <typename Derived>
CMatrix<RealOf<Derived>> submatrix(const Eigen::MatrixBase<Derived>& m, std::span<const Index> rows,
                                   std::span<const Index> cols) {
  CMatrix<RealOf<Derived>> out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

template <typename Derived>
RealOf<Derived> max_norm(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? RealOf<Derived>(0) : m.cwiseAbs().maxCoeff();
}

// ‖a − b‖_max relative to the larger of the two operands (floored at 1).
template <typename DA, typename DB>
RealOf<DA> relative_residual(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  using Real = RealOf<DA>;
  if (a.size() == 0) return 0;
  const Real scale = std::max({Real(1), max_norm(a), max_norm(b)});
  return max_norm(a - b) / scale;
}

template <typename Derived>
RealOf<Derived> smallest_singular_value(const Eigen::MatrixBase<Derived>& m) {
  using Real = RealOf<Derived>;
  if (m.rows() == 0) return std::numeric_limits<Real>::infinity();
  Eigen::JacobiSVD<CMatrix<Real>> svd(m.template cast<Complex<Real>>());
  return svd.singularValues().minCoeff();
}

template <typename Real>
Real wrap_pi(Real angle) {
  constexpr Real two_pi = 2 * std::numbers::pi_v<Real>;
  angle = std::remainder(angle, two_pi);
  if (angle <= -std::numbers::pi_v<Real>) angle += two_pi;
  return angle;
}

// Branch [−π, π); values within `snap` of +π are mapped to −π.
template <typename Real>
Real wrap_half_open(Real angle, Real snap = Real(1e-9)) {
  angle = wrap_pi(angle);
  if (angle > std::numbers::pi_v<Real> - snap) angle -= 2 * std::numbers::pi_v<Real>;
  return angle;
}

// Angle in [0, 2π).
template <typename Real>
Real wrap_positive(Real angle) {
  constexpr Real two_pi = 2 * std::numbers::pi_v<Real>;
  angle = std::fmod(angle, two_pi);
  if (angle < 0) angle += two_pi;
  if (angle >= two_pi) angle -= two_pi;
  return angle;
}

}  // namespace qgs
