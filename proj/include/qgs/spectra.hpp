#pragma once

#include <vector>

#include "qgs/phase_tracking.hpp"

namespace qgs {

struct Eigenvalue {
  double energy = 0;
  int multiplicity = 1;
  double residual = 0;  // |ξ_red| at the reported energy
};

struct SpectralResult {
  std::vector<Eigenvalue> eigenvalues;  // inside [e_lo, e_hi], ascending
  double e_lo = 0;
  double e_hi = 0;
  std::size_t grid = 0;
  double floor = 0;       // counting starts here
  int floor_count = 0;    // states assumed below the floor
  int below_range = 0;    // eigenvalues in (floor, e_lo)
  std::vector<double> thresholds;  // edge potentials inside the range
  std::vector<double> trapped;     // energies where 𝕀 − U_ee was numerically singular
  std::size_t refinements = 0;
  std::size_t resonances = 0;
  double winding_defect = 0;  // largest distance of the phase count from an integer

  // N(E): floor_count plus eigenvalues (with multiplicity) in (floor, E).
  int count(double energy) const;
  // Distance from E to the nearest reported eigenvalue.
  double distance(double energy) const;
};

struct SpectrumOptions {
  std::size_t grid = 4000;
  int floor_count = 0;
  TrackOptions track;
};

SpectralResult find_eigenvalues(const MetricGraph& graph, double e_lo, double e_hi, const SpectrumOptions& options = {});

inline int counting_exact(const SpectralResult& spectrum, double energy) { return spectrum.count(energy); }

// ξ = det(𝕀 − U) and ξ_red = det(𝕀 − U_red) on the natural partition, at real energy.
struct SecularValues {
  double energy = 0;
  bool valid = false;
  Complex<double> full{0, 0};
  Complex<double> reduced{0, 0};
};

SecularValues secular_values(const MetricGraph& graph, double energy);

}  // namespace qgs
