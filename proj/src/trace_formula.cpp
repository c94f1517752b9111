#include "qgs/trace_formula.hpp"

#include <algorithm>
#include <cmath>

#include "qgs/parallel.hpp"

namespace qgs {

std::string to_string(CountingMode mode) {
  switch (mode) {
    case CountingMode::reduced: return "reduced";
    case CountingMode::fixed_partition: return "fixed_partition";
    case CountingMode::above_threshold: return "above_threshold";
  }
  return "reduced";
}

CountingMode parse_counting_mode(const std::string& text) {
  if (text == "reduced") return CountingMode::reduced;
  if (text == "fixed_partition" || text == "fixed") return CountingMode::fixed_partition;
  if (text == "above_threshold" || text == "full") return CountingMode::above_threshold;
  throw Error("unknown counting mode '" + text + "'");
}

Partition fixed_partition(const MetricGraph& graph, double partition_energy) {
  const auto p = partition_at(graph, partition_energy);
  if (p.oscillatory.empty()) throw Error("fixed partition below " + std::to_string(partition_energy) + " has no oscillatory edge");
  return p;
}

namespace {

double gap_above(double v) { return 8 * threshold_tolerance(v); }

double highest_potential(const MetricGraph& graph, const Partition& p) {
  double top = -std::numeric_limits<double>::infinity();
  for (Index d : p.oscillatory) top = std::max(top, graph.edge(MetricGraph::edge_of(d)).potential);
  return top;
}

}  // namespace

double validity_floor(const MetricGraph& graph, const CountingSetup& setup) {
  const double floor = floor_energy(graph);
  if (setup.mode != CountingMode::fixed_partition) return floor;
  if (!setup.partition_energy) throw Error("fixed-partition mode needs a partition energy");
  const double top = highest_potential(graph, fixed_partition(graph, *setup.partition_energy));
  return top <= graph.min_potential() ? floor : std::max(floor, top + gap_above(top));
}

double mean_counting(const MetricGraph& graph, const QuantumMapBundle<double>& bundle,
                     const std::vector<Index>& evanescent, double constant) {
  return mean_phase_terms(graph, bundle, evanescent).sum() / (2 * pi) + constant;
}

double oscillatory_counting(const MatrixXcd& counting_map) {
  return -trace_log_one_minus(counting_map).imag() / pi;
}

CountingTerms counting_terms(const MetricGraph& graph, double energy, const CountingSetup& setup) {
  CountingTerms out;
  out.energy = energy;
  if (energy <= graph.min_potential() || near_threshold(graph, energy)) return out;
  try {
    const auto b = assemble(graph, energy, damping(energy, setup.epsilon));
    MatrixXcd map;
    MeanPhaseTerms t;
    if (setup.mode == CountingMode::above_threshold) {
      map = b.map;
      t = mean_phase_terms(graph, b, {});
    } else {
      const Partition p = setup.mode == CountingMode::fixed_partition ? fixed_partition(graph, *setup.partition_energy)
                                                                       : b.partition;
      if (trapped_state_check(b, p).flagged) return out;
      map = reduce_matrix(b.map, p);
      t = mean_phase_terms(graph, b, p.evanescent);
    }
    out.terms.weyl = t.transport / (2 * pi);
    out.terms.scattering = t.scattering / (2 * pi);
    out.terms.inverse_log = t.inverse_log / (2 * pi);
    out.terms.direct_log = t.direct_log / (2 * pi);
    out.osc = oscillatory_counting(map);
    out.dimension = static_cast<int>(map.rows());
    out.valid = true;
  } catch (const AtThreshold&) {
  } catch (const SingularVertexMatrix&) {
  }
  return out;
}

std::vector<double> calibration_energies(const MetricGraph& graph, const SpectralResult& spectrum, double lo,
                                         double hi, std::size_t count) {
  lo = std::max(lo, spectrum.e_lo);
  hi = std::min(hi, spectrum.e_hi);
  if (!(hi > lo)) throw Error("no spectrum available to calibrate against");
  const auto cuts = thresholds_between(graph, lo, hi);
  std::vector<double> marks{lo, hi};
  marks.insert(marks.end(), cuts.begin(), cuts.end());
  for (const auto& ev : spectrum.eigenvalues)
    if (ev.energy > lo && ev.energy < hi) marks.push_back(ev.energy);
  for (double t : spectrum.trapped)
    if (t > lo && t < hi) marks.push_back(t);
  std::sort(marks.begin(), marks.end());

  struct Segment {
    double lo, hi;
    std::size_t window;
    double width() const { return hi - lo; }
  };
  std::vector<Segment> segments;
  for (std::size_t i = 0; i + 1 < marks.size(); ++i) {
    const auto window = static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), marks[i]) - cuts.begin());
    if (marks[i + 1] > marks[i]) segments.push_back({marks[i], marks[i + 1], window});
  }
  std::sort(segments.begin(), segments.end(), [](const auto& a, const auto& b) { return a.width() > b.width(); });

  std::vector<double> out;
  std::vector<bool> used(segments.size(), false);
  std::vector<bool> window_taken(cuts.size() + 1, false);
  for (std::size_t i = 0; i < segments.size() && out.size() < count; ++i) {
    if (window_taken[segments[i].window]) continue;
    window_taken[segments[i].window] = used[i] = true;
    out.push_back(0.5 * (segments[i].lo + segments[i].hi));
  }
  for (std::size_t i = 0; i < segments.size() && out.size() < count; ++i)
    if (!used[i]) out.push_back(0.5 * (segments[i].lo + segments[i].hi));
  std::sort(out.begin(), out.end());
  return out;
}

double calibrate_constant(const std::vector<double>& estimates) {
  if (estimates.empty()) throw InconsistentCalibration("no calibration estimate");
  const auto [lo, hi] = std::minmax_element(estimates.begin(), estimates.end());
  if (*hi - *lo > 0.1)
    throw InconsistentCalibration("calibration constants spread over " + std::to_string(*hi - *lo));
  double sum = 0;
  for (double c : estimates) sum += c;
  const double mean = sum / static_cast<double>(estimates.size());
  // N − c is an integer plus half the map dimension, so c sits on the half-integers.
  const double half = std::round(2 * mean) / 2;
  return std::abs(mean - half) < 0.05 ? half : mean;
}

double calibration_ceiling(const MetricGraph& graph, const CountingSetup& setup, double e_hi) {
  const double lo = graph.min_potential(), hi = graph.max_potential();
  const double headroom = std::max(10.0, 0.5 * (hi - lo));
  switch (setup.mode) {
    case CountingMode::reduced: return std::max(e_hi, floor_energy(graph) + headroom);
    case CountingMode::fixed_partition: return std::max(e_hi, validity_floor(graph, setup) + headroom);
    case CountingMode::above_threshold: return std::max(e_hi, hi + headroom);
  }
  return e_hi;
}

namespace {

PhaseProbe mode_probe(const MetricGraph& graph, const CountingSetup& setup) {
  switch (setup.mode) {
    case CountingMode::reduced: return reduced_map_probe(graph, setup.epsilon);
    case CountingMode::fixed_partition:
      return reduced_map_probe(graph, setup.epsilon, fixed_partition(graph, *setup.partition_energy));
    case CountingMode::above_threshold: return scattering_phase_probe(graph, setup.epsilon);
  }
  return {};
}

// Calibration-free total for a tracked mean phase R (radians, transport removed).
double uncalibrated_total(const CountingTerms& t, double phase) { return t.terms.weyl + phase / (2 * pi) + t.osc; }

double principal_phase(const TermBreakdown& t) { return 2 * pi * (t.scattering + t.inverse_log - t.direct_log); }

}  // namespace

CountingReport counting_sweep(const MetricGraph& graph, const std::vector<double>& energies,
                              const CountingSetup& setup, const SpectralResult& spectrum,
                              const TrackOptions& options) {
  CountingReport report;
  report.setup = setup;
  const double start = validity_floor(graph, setup);
  double top = start;
  for (double e : energies) top = std::max(top, e);

  const double ceiling = std::min(spectrum.e_hi, calibration_ceiling(graph, setup, top));
  // The full map counts correctly only once every edge is oscillatory.
  const double trusted = setup.mode == CountingMode::above_threshold
                             ? std::max(start, graph.max_potential() + gap_above(graph.max_potential()))
                             : start;
  report.references = calibration_energies(graph, spectrum, trusted, ceiling);
  top = std::max(top, report.references.back());

  std::vector<double> grid{start};
  std::vector<double> requested;
  for (double e : energies)
    if (e >= start) requested.push_back(e);
  std::sort(requested.begin(), requested.end());
  grid.insert(grid.end(), requested.begin(), requested.end());
  const auto lattice = phase_lattice(graph, start, top);
  grid.insert(grid.end(), lattice.begin(), lattice.end());
  grid.insert(grid.end(), report.references.begin(), report.references.end());
  const auto cuts = setup.mode == CountingMode::reduced ? thresholds_between(graph, start, top) : std::vector<double>{};
  for (double e : bridge_points(cuts)) grid.push_back(e);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const auto probe = mode_probe(graph, setup);
  const auto anchor_terms = counting_terms(graph, start, setup);
  const auto anchor_sample = probe(start);
  if (!anchor_terms.valid || !anchor_sample.valid) throw Error("counting cannot start at E = " + std::to_string(start));
  const double a = std::arg(anchor_sample.value);
  const double initial = a + 2 * pi * std::round((principal_phase(anchor_terms.terms) - a) / (2 * pi));

  PhaseTrack track;
  if (setup.mode == CountingMode::reduced) {
    auto bridge = [&](const PhaseNode& last, const PhaseSample& first) {
      const double before = uncalibrated_total(counting_terms(graph, last.energy, setup), last.phase);
      const auto next = counting_terms(graph, first.energy, setup);
      const double principal = std::arg(first.value);
      return principal + 2 * pi * std::round(before - uncalibrated_total(next, principal));
    };
    track = track_windows(probe, grid, cuts, initial, bridge, options);
  } else {
    track = track_phase(probe, grid, initial, options);
  }
  report.refinements = track.refinements;
  report.resonances = track.resonances;

  auto phase_at = [&](double e) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), e);
    return it != grid.end() && *it == e ? track.phase[static_cast<std::size_t>(it - grid.begin())]
                                        : std::numeric_limits<double>::quiet_NaN();
  };

  for (double ref : report.references) {
    const auto t = counting_terms(graph, ref, setup);
    const double phase = phase_at(ref);
    if (!t.valid || std::isnan(phase)) throw InconsistentCalibration("calibration energy " + std::to_string(ref) + " is not usable");
    report.estimates.push_back(spectrum.count(ref) - uncalibrated_total(t, phase));
  }
  report.constant = calibrate_constant(report.estimates);

  report.rows.resize(energies.size());
  parallel_for(energies.size(), [&](std::size_t i) {
    const double e = energies[i];
    auto& row = report.rows[i];
    row.energy = e;
    if (e < start) {
      row.flags.emplace_back("below_validity");
      row.mean = row.osc = row.total = std::numeric_limits<double>::quiet_NaN();
      row.exact = e <= spectrum.e_hi ? spectrum.count(e) : -1;
      return;
    }
    const auto t = counting_terms(graph, e, setup);
    const double phase = phase_at(e);
    row.terms = t.terms;
    row.dimension = t.dimension;
    row.osc = t.osc;
    row.exact = e <= spectrum.e_hi ? spectrum.count(e) : -1;
    if (row.exact < 0) row.flags.emplace_back("beyond_spectrum");
    if (near_threshold(graph, e)) row.flags.emplace_back("threshold");
    if (!t.valid || std::isnan(phase)) {
      if (!near_threshold(graph, e)) row.flags.emplace_back("trapped");
      row.mean = row.osc = row.total = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    row.terms.branch = std::round((phase - principal_phase(t.terms)) / (2 * pi));
    row.mean = t.terms.weyl + phase / (2 * pi) + report.constant;
    row.total = row.mean + row.osc;
    row.valid = true;
    if (spectrum.distance(e) < 1e-6 * (1 + std::abs(e))) row.flags.emplace_back("near_eigenvalue");
  });
  return report;
}

EvanescentSeries evanescent_correction_series(const MetricGraph& graph, const QuantumMapBundle<double>& bundle,
                                              const std::vector<Index>& evanescent, int r_max, double tolerance) {
  EvanescentSeries out;
  if (evanescent.empty()) return out;
  const MatrixXcd inverse_ee = submatrix(inverse_map(graph, bundle), evanescent, evanescent);
  const MatrixXcd direct_ee = submatrix(bundle.map, evanescent, evanescent);
  const MatrixXcd shrink = inverse_ee.inverse();

  out.leading = log_det(MatrixXcd(-inverse_ee)).phase / (2 * pi);
  out.exact = (trace_log_one_minus(inverse_ee).imag() - trace_log_one_minus(direct_ee).imag()) / (2 * pi);
  MatrixXcd direct_power = direct_ee, shrink_power = shrink;
  double sum = out.leading;
  for (int r = 1; r <= r_max; ++r) {
    const double term = (direct_power.trace() - shrink_power.trace()).imag() / (2 * pi * r);
    out.terms.push_back(term);
    sum += term;
    out.partial.push_back(sum);
    direct_power = direct_power * direct_ee;
    shrink_power = shrink_power * shrink;
  }
  const double d = sum - out.exact;
  out.residual = std::abs(d - std::round(d));
  if (out.residual > tolerance)
    throw SeriesNotConverged("evanescent series residual " + std::to_string(out.residual) + " after " +
                             std::to_string(r_max) + " terms");
  return out;
}

}  // namespace qgs
