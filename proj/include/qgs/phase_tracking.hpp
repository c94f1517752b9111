#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "qgs/quantum_map.hpp"

namespace qgs {

// Counting starts slightly above the lowest edge potential.
double floor_energy(const MetricGraph& graph);

// Oscillatory block made of the edges at the lowest potential.
Partition floor_partition(const MetricGraph& graph);

bool near_threshold(const MetricGraph& graph, double energy);

// ε(E) = relative · (1 + |E|).
inline double damping(double energy, double relative) { return relative * (1 + std::abs(energy)); }

// Σ_e Re(K_e) L_e; the transport matrix T contributes twice this phase to arg det U.
double transport_phase(const MetricGraph& graph, const WavenumberSet<double>& k);

// Σ_v arg det σ_v plus π per edge for the swap P, wrapped to [−π, π).
double scattering_phase(const MetricGraph& graph, const QuantumMapBundle<double>& b);

// Principal-branch pieces of the mean counting phase for a given evanescent block.
struct MeanPhaseTerms {
  double transport = 0;   // 2 Σ_e Re(K_e) L_e
  double scattering = 0;  // arg det S in [−π, π)
  double inverse_log = 0; // Im tr log(𝕀 − (U^{-1})_ee)
  double direct_log = 0;  // Im tr log(𝕀 − U_ee)

  double sum() const { return transport + scattering + inverse_log - direct_log; }
};

MeanPhaseTerms mean_phase_terms(const MetricGraph& graph, const QuantumMapBundle<double>& b,
                                const std::vector<Index>& evanescent);

struct PhaseSample {
  double energy = 0;
  Complex<double> value{1, 0};
  double margin = std::numeric_limits<double>::infinity();
  bool valid = false;
};

using PhaseProbe = std::function<PhaseSample(double)>;

// arg det U_red with the transport phase removed; the natural partition unless one is fixed.
// The margin is the smallest singular value of 𝕀 − U_ee.
PhaseProbe reduced_map_probe(const MetricGraph& graph, double epsilon_relative,
                             std::optional<Partition> fixed = std::nullopt);

// arg det S with the vertex conditioning as margin.
PhaseProbe scattering_phase_probe(const MetricGraph& graph, double epsilon_relative);

struct TrackOptions {
  double max_increment = pi / 4;
  double min_width = 1e-13;  // relative to 1 + |E|
  double dip_ratio = 0.5;
  int golden_iterations = 90;
};

struct PhaseNode {
  double energy = 0;
  double phase = 0;
  Complex<double> value{1, 0};
  long request = -1;  // index of the requested energy, −1 for inserted nodes
};

struct PhaseTrack {
  std::vector<PhaseNode> nodes;  // every valid evaluation, in energy order
  std::vector<double> phase;     // per requested energy, NaN where the probe was invalid
  std::vector<double> invalid;   // requested energies the probe rejected
  std::size_t refinements = 0;
  std::size_t resonances = 0;

  // Continues the phase from the nearest node at or below the sample.
  double extend(const PhaseSample& sample) const;
};

// Unwraps the probe phase along sorted energies; the first valid energy gets `initial_phase`.
PhaseTrack track_phase(const PhaseProbe& probe, const std::vector<double>& energies, double initial_phase,
                       const TrackOptions& options = {});

// Phase given to the first valid node of a window, from the last node of the previous one.
using PhaseBridge = std::function<double(const PhaseNode& last, const PhaseSample& first)>;

// Tracks each window between consecutive cuts on its own and joins them with `bridge`.
PhaseTrack track_windows(const PhaseProbe& probe, const std::vector<double>& energies, const std::vector<double>& cuts,
                         double initial_phase, const PhaseBridge& bridge, const TrackOptions& options = {});

// Edge potentials strictly inside (lo, hi).
std::vector<double> thresholds_between(const MetricGraph& graph, double lo, double hi);

// Energies just below and above each cut, close enough that no state is expected in between.
std::vector<double> bridge_points(const std::vector<double>& cuts);

// Energies in [lo, hi] along which Σ_e 2 Re(K_e) L_e over all edges advances by at most `step`.
std::vector<double> phase_lattice(const MetricGraph& graph, double lo, double hi, double step = pi / 8);

// Sorted energies from `start` up to `first` at roughly the given spacing, excluding `first`.
std::vector<double> lead_in(double start, double first, double spacing);
std::vector<double> lead_in(const MetricGraph& graph, double first, double spacing);

}  // namespace qgs
