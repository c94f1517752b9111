#pragma once

#include <cstddef>
#include <vector>

#include "qgs/phase_tracking.hpp"

namespace qgs {

inline constexpr std::size_t default_orbit_cap = 1'000'000;

// Successors of each directed edge: d → d′ when U(d′, d) is structurally nonzero.
std::vector<std::vector<Index>> orbit_adjacency(const MetricGraph& graph);

// Primitive periodic orbits as cyclic directed-edge sequences in their lexicographically smallest rotation.
std::vector<std::vector<Index>> enumerate_primitive_orbits(const MetricGraph& graph, int n_max,
                                                           std::size_t cap = default_orbit_cap);

enum class OrbitClass { pure_osc, pure_ev, mixed };

const char* to_string(OrbitClass c);

struct PeriodicOrbit {
  std::vector<Index> sequence;
  int length = 0;
  int repetition = 1;
  Complex<double> amplitude;  // A_p: product of vertex scattering amplitudes
  Complex<double> phase;      // W_p = Σ_j K_{e_j} L_{e_j}
  OrbitClass classification = OrbitClass::pure_osc;

  Complex<double> contribution() const { return amplitude * std::exp(Complex<double>(0, 1) * phase); }
};

// Amplitude and phase of an orbit (or its repetition) at the bundle's energy.
PeriodicOrbit evaluate_orbit(const MetricGraph& graph, const QuantumMapBundle<double>& bundle,
                             const std::vector<Index>& sequence, int repetition = 1);

// Π_j U(s_{j+1}, s_j) straight from the map entries.
Complex<double> orbit_entry_product(const QuantumMapBundle<double>& bundle, const std::vector<Index>& sequence);

struct TraceComparison {
  int n = 0;
  Complex<double> trace;        // tr U^n
  Complex<double> orbit_sum;    // Σ over primitive orbits with n_p | n of n_p A e^{iW} raised to n / n_p
  Complex<double> trace_ee;     // tr U_ee^n
  Complex<double> primed_sum;   // same sum without pure-evanescent orbits
  double residual = 0;          // |orbit_sum − trace|
  double primed_residual = 0;   // |primed_sum − (trace − trace_ee)|
};

struct OrbitSum {
  double energy = 0;
  std::vector<TraceComparison> per_n;
  double osc_truncated = 0;  // (1/π) Im Σ′_p Σ_r (A e^{iW})^r / r
  double osc_exact = 0;      // −(1/π) Im tr log(𝕀 − U_red)
  std::size_t orbit_count = 0;

  double max_residual() const;
  double max_primed_residual() const;
};

// Orbit sums at E + iε for all n ≤ n_max; repetitions beyond r_max are left out of the truncated sum.
OrbitSum orbit_sum(const MetricGraph& graph, const std::vector<std::vector<Index>>& orbits, double energy,
                   int n_max, int r_max, double epsilon_relative = 1e-8);

// Star graphs: the orbit as the cyclic list of edges visited, one entry per excursion from the centre.
std::vector<Index> undirected_labels(const MetricGraph& graph, const std::vector<Index>& sequence);

}  // namespace qgs
