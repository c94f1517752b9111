#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qgs/spectra.hpp"

namespace qgs {

enum class CountingMode { reduced, fixed_partition, above_threshold };

std::string to_string(CountingMode mode);
CountingMode parse_counting_mode(const std::string& text);

struct CountingSetup {
  CountingMode mode = CountingMode::reduced;
  double epsilon = 1e-8;                   // ε = epsilon · (1 + |E|)
  std::optional<double> partition_energy;  // fixed partition: oscillatory edges are those with V < E0
};

// Partition used by the fixed-partition mode and the energy above which it is valid.
Partition fixed_partition(const MetricGraph& graph, double partition_energy);
double validity_floor(const MetricGraph& graph, const CountingSetup& setup);

// Mean-part pieces in counting units; `branch` is the integer fixed by unwrapping.
struct TermBreakdown {
  double weyl = 0;         // Σ_e Re(K_e) L_e / π
  double scattering = 0;   // arg det S / 2π
  double inverse_log = 0;  // Im tr log(𝕀 − (U^{-1})_ee) / 2π
  double direct_log = 0;   // Im tr log(𝕀 − U_ee) / 2π
  double branch = 0;
};

struct CountingRow {
  double energy = 0;
  TermBreakdown terms;
  double mean = 0;
  double osc = 0;
  double total = 0;
  int exact = 0;
  int dimension = 0;  // size of the counting map
  bool valid = false;
  std::vector<std::string> flags;
};

struct CountingReport {
  CountingSetup setup;
  double constant = 0;
  std::vector<double> references;  // calibration energies
  std::vector<double> estimates;   // c at each reference
  std::vector<CountingRow> rows;
  std::size_t refinements = 0;
  std::size_t resonances = 0;
};

// Pointwise pieces at E + iε on the principal branch, for the map the mode counts with.
struct CountingTerms {
  double energy = 0;
  bool valid = false;
  TermBreakdown terms;  // branch left at 0
  double osc = 0;
  int dimension = 0;
};

CountingTerms counting_terms(const MetricGraph& graph, double energy, const CountingSetup& setup);

// N̄ on the principal branch: Weyl term, det S phase and the two evanescent log-det terms, plus c.
double mean_counting(const MetricGraph& graph, const QuantumMapBundle<double>& bundle,
                     const std::vector<Index>& evanescent, double constant);

// −(1/π) Im tr log(𝕀 − M) for the counting map M.
double oscillatory_counting(const MatrixXcd& counting_map);

// Energies ≥ floor, off thresholds and eigenvalues, spread over separate windows where possible.
std::vector<double> calibration_energies(const MetricGraph& graph, const SpectralResult& spectrum, double lo,
                                         double hi, std::size_t count = 3);

// Mean of the per-reference estimates, snapped to the nearest half-integer when within 0.05 of it.
// InconsistentCalibration if the estimates spread by more than 0.1.
double calibrate_constant(const std::vector<double>& estimates);

// Upper end of the spectrum needed to calibrate the mode.
double calibration_ceiling(const MetricGraph& graph, const CountingSetup& setup, double e_hi);

CountingReport counting_sweep(const MetricGraph& graph, const std::vector<double>& energies,
                              const CountingSetup& setup, const SpectralResult& spectrum,
                              const TrackOptions& options = {});

struct EvanescentSeries {
  double leading = 0;                 // arg det(−(U^{-1})_ee) / 2π
  std::vector<double> terms;          // r = 1 … r_max
  std::vector<double> partial;        // leading plus the first r terms
  double exact = 0;                   // (Im tr log(𝕀 − (U^{-1})_ee) − Im tr log(𝕀 − U_ee)) / 2π
  double residual = 0;                // |partial − exact| modulo 1
};

// Throws SeriesNotConverged when the residual exceeds `tolerance`.
EvanescentSeries evanescent_correction_series(const MetricGraph& graph, const QuantumMapBundle<double>& bundle,
                                              const std::vector<Index>& evanescent, int r_max,
                                              double tolerance = 1e-8);

}  // namespace qgs
