#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace qgs {

using Index = Eigen::Index;

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using CMatrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using CVector = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;

using MatrixXcd = CMatrix<double>;
using VectorXcd = CVector<double>;

inline constexpr double pi = std::numbers::pi;

// Energies closer than this to an edge potential are treated as thresholds.
inline double threshold_tolerance(double energy) { return 1e-9 * (1.0 + std::abs(energy)); }

inline constexpr double cond_max = 1e12;
inline constexpr double trap_tolerance = 1e-8;

}  // namespace qgs
