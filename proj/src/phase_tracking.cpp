#include "qgs/phase_tracking.hpp"

#include <algorithm>
#include <cmath>

#include "qgs/parallel.hpp"

namespace qgs {

double floor_energy(const MetricGraph& graph) {
  const double v = graph.min_potential();
  return v + 1e-6 * (1 + std::abs(v));
}

Partition floor_partition(const MetricGraph& graph) { return partition_at(graph, floor_energy(graph)); }

bool near_threshold(const MetricGraph& graph, double energy) {
  const double tol = 4 * threshold_tolerance(energy);
  return std::any_of(graph.edges().begin(), graph.edges().end(),
                     [&](const EdgeRecord& e) { return std::abs(energy - e.potential) < tol; });
}

double transport_phase(const MetricGraph& graph, const WavenumberSet<double>& k) {
  double sum = 0;
  for (Index e = 0; e < graph.num_edges(); ++e) sum += k[e].real() * graph.edge(e).length;
  return sum;
}

double scattering_phase(const MetricGraph& graph, const QuantumMapBundle<double>& b) {
  double phase = pi * static_cast<double>(graph.num_edges());
  for (const auto& vs : b.vertices) phase += log_det(vs.sigma).phase;
  return wrap_half_open(phase);
}

MeanPhaseTerms mean_phase_terms(const MetricGraph& graph, const QuantumMapBundle<double>& b,
                                const std::vector<Index>& evanescent) {
  MeanPhaseTerms t;
  t.transport = 2 * transport_phase(graph, b.k);
  t.scattering = scattering_phase(graph, b);
  if (!evanescent.empty()) {
    const MatrixXcd inverse = inverse_map(graph, b);
    t.inverse_log = trace_log_one_minus(submatrix(inverse, evanescent, evanescent)).imag();
    t.direct_log = trace_log_one_minus(submatrix(b.map, evanescent, evanescent)).imag();
  }
  return t;
}

namespace {

Complex<double> unit(double phase) { return std::polar(1.0, phase); }

template <typename Body>
PhaseSample guarded(double energy, Body body) {
  PhaseSample s;
  s.energy = energy;
  try {
    body(s);
  } catch (const AtThreshold&) {
    s.valid = false;
  } catch (const SingularVertexMatrix&) {
    s.valid = false;
  }
  return s;
}

}  // namespace

PhaseProbe reduced_map_probe(const MetricGraph& graph, double epsilon_relative, std::optional<Partition> fixed) {
  return [&graph, fixed, epsilon_relative](double energy) {
    return guarded(energy, [&](PhaseSample& s) {
      if (energy <= graph.min_potential() || near_threshold(graph, energy)) return;
      const auto b = assemble(graph, energy, damping(energy, epsilon_relative));
      const Partition& p = fixed ? *fixed : b.partition;
      const auto trap = trapped_state_check(b, p);
      s.margin = trap.min_singular_value;
      if (trap.flagged) return;
      const auto det = log_det(reduce_matrix(b.map, p));
      if (det.is_zero()) return;
      s.value = unit(det.phase - 2 * transport_phase(graph, b.k));
      s.valid = true;
    });
  };
}

PhaseProbe scattering_phase_probe(const MetricGraph& graph, double epsilon_relative) {
  return [&graph, epsilon_relative](double energy) {
    return guarded(energy, [&](PhaseSample& s) {
      if (near_threshold(graph, energy)) return;
      const auto k = wavenumbers(graph, energy, damping(energy, epsilon_relative));
      double phase = pi * static_cast<double>(graph.num_edges());
      for (Index v = 0; v < graph.num_vertices(); ++v) {
        const auto vs = vertex_scattering(graph, v, k);
        s.margin = std::min(s.margin, 1 / vs.condition);
        phase += log_det(vs.sigma).phase;
      }
      s.value = unit(phase);
      s.valid = true;
    });
  };
}

double PhaseTrack::extend(const PhaseSample& sample) const {
  auto it = std::upper_bound(nodes.begin(), nodes.end(), sample.energy,
                             [](double e, const PhaseNode& n) { return e < n.energy; });
  if (it != nodes.begin()) --it;
  return it->phase + std::arg(sample.value * std::conj(it->value));
}

namespace {

struct Inner {
  PhaseSample sample;
  double offset;  // phase relative to the left end of the cell
};

double refine(const PhaseProbe& probe, const PhaseSample& a, const PhaseSample& b, double offset_a,
              const TrackOptions& options, std::vector<Inner>& inner, std::size_t& count) {
  const double step = std::arg(b.value * std::conj(a.value));
  const double width = b.energy - a.energy;
  if (std::abs(step) <= options.max_increment || width <= options.min_width * (1 + std::abs(b.energy))) return step;
  PhaseSample mid;
  for (double f : {0.5, 0.4, 0.6}) {
    mid = probe(a.energy + f * width);
    if (mid.valid) break;
  }
  if (!mid.valid) return step;
  ++count;
  const double left = refine(probe, a, mid, offset_a, options, inner, count);
  inner.push_back({mid, offset_a + left});
  const double right = refine(probe, mid, b, offset_a + left, options, inner, count);
  return left + right;
}

double margin_of(const PhaseSample& s) { return s.valid ? s.margin : -1.0; }

// Golden-section minimum of the probe margin on [lo, hi].
PhaseSample deepest(const PhaseProbe& probe, double lo, double hi, const TrackOptions& options) {
  const double g = (std::sqrt(5.0) - 1) / 2;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  PhaseSample s1 = probe(x1), s2 = probe(x2);
  for (int it = 0; it < options.golden_iterations && hi - lo > 1e-14 * (1 + std::abs(hi)); ++it) {
    if (margin_of(s1) < margin_of(s2)) {
      hi = x2;
      x2 = x1;
      s2 = s1;
      x1 = hi - g * (hi - lo);
      s1 = probe(x1);
    } else {
      lo = x1;
      x1 = x2;
      s1 = s2;
      x2 = lo + g * (hi - lo);
      s2 = probe(x2);
    }
  }
  return margin_of(s1) < margin_of(s2) ? s1 : s2;
}

}  // namespace

PhaseTrack track_phase(const PhaseProbe& probe, const std::vector<double>& energies, double initial_phase,
                       const TrackOptions& options) {
  const std::size_t n = energies.size();
  std::vector<PhaseSample> base(n);
  parallel_for(n, [&](std::size_t i) { base[i] = probe(energies[i]); });

  PhaseTrack track;
  track.phase.assign(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < n; ++i) {
    if (base[i].valid)
      valid.push_back(i);
    else
      track.invalid.push_back(energies[i]);
  }
  if (valid.empty()) return track;

  // Narrow features of the margin hide fast phase rotations between grid points.
  std::vector<std::size_t> dips;
  for (std::size_t j = 1; j + 1 < valid.size(); ++j) {
    const double m = base[valid[j]].margin;
    const double low = std::min(base[valid[j - 1]].margin, base[valid[j + 1]].margin);
    const double high = std::max(base[valid[j - 1]].margin, base[valid[j + 1]].margin);
    if (std::isfinite(m) && (m < options.dip_ratio * low || (m <= low && m < options.dip_ratio * high)))
      dips.push_back(j);
  }
  std::vector<PhaseSample> found(dips.size());
  parallel_for(dips.size(), [&](std::size_t d) {
    const std::size_t j = dips[d];
    found[d] = deepest(probe, energies[valid[j - 1]], energies[valid[j + 1]], options);
  });

  std::vector<std::pair<PhaseSample, long>> points;
  for (std::size_t i : valid) points.emplace_back(base[i], static_cast<long>(i));
  for (const auto& s : found) {
    if (!s.valid) {
      track.invalid.push_back(s.energy);
      continue;
    }
    ++track.resonances;
    points.emplace_back(s, -1);
  }
  std::stable_sort(points.begin(), points.end(),
                   [](const auto& a, const auto& b) { return a.first.energy < b.first.energy; });

  const std::size_t cells = points.size() - 1;
  std::vector<std::vector<Inner>> inner(cells);
  std::vector<double> steps(cells);
  std::vector<std::size_t> counts(cells, 0);
  parallel_for(cells, [&](std::size_t c) {
    steps[c] = refine(probe, points[c].first, points[c + 1].first, 0.0, options, inner[c], counts[c]);
  });

  double phase = initial_phase;
  for (std::size_t c = 0; c <= cells; ++c) {
    const auto& [sample, request] = points[c];
    track.nodes.push_back({sample.energy, phase, sample.value, request});
    if (request >= 0) track.phase[static_cast<std::size_t>(request)] = phase;
    if (c == cells) break;
    for (const auto& in : inner[c]) track.nodes.push_back({in.sample.energy, phase + in.offset, in.sample.value, -1});
    phase += steps[c];
    track.refinements += counts[c];
  }
  return track;
}

PhaseTrack track_windows(const PhaseProbe& probe, const std::vector<double>& energies, const std::vector<double>& cuts,
                         double initial_phase, const PhaseBridge& bridge, const TrackOptions& options) {
  PhaseTrack out;
  out.phase.assign(energies.size(), std::numeric_limits<double>::quiet_NaN());
  std::size_t begin = 0;
  for (std::size_t w = 0; w <= cuts.size() && begin < energies.size(); ++w) {
    std::size_t end = begin;
    while (end < energies.size() && (w == cuts.size() || energies[end] < cuts[w])) ++end;
    if (end == begin) continue;
    const std::vector<double> window(energies.begin() + static_cast<long>(begin), energies.begin() + static_cast<long>(end));
    auto part = track_phase(probe, window, 0.0, options);
    if (!part.nodes.empty()) {
      const auto& head = part.nodes.front();
      const double start = out.nodes.empty() ? initial_phase
                                              : bridge(out.nodes.back(), PhaseSample{head.energy, head.value, 0, true});
      const double offset = start - head.phase;
      for (auto& node : part.nodes) {
        node.phase += offset;
        if (node.request >= 0) node.request += static_cast<long>(begin);
        out.nodes.push_back(node);
      }
      for (std::size_t i = 0; i < window.size(); ++i) out.phase[begin + i] = part.phase[i] + offset;
    }
    out.invalid.insert(out.invalid.end(), part.invalid.begin(), part.invalid.end());
    out.refinements += part.refinements;
    out.resonances += part.resonances;
    begin = end;
  }
  return out;
}

std::vector<double> thresholds_between(const MetricGraph& graph, double lo, double hi) {
  std::vector<double> out;
  for (double v : graph.thresholds())
    if (v > lo && v < hi) out.push_back(v);
  return out;
}

std::vector<double> bridge_points(const std::vector<double>& cuts) {
  std::vector<double> out;
  for (double v : cuts) {
    const double gap = 8 * threshold_tolerance(v);
    out.push_back(v - gap);
    out.push_back(v + gap);
  }
  return out;
}

std::vector<double> phase_lattice(const MetricGraph& graph, double lo, double hi, double step) {
  std::vector<double> out;
  if (!(hi > lo)) return out;
  const double smallest = 1e-6 * (hi - lo);
  for (double e = lo; e < hi;) {
    out.push_back(e);
    double rate = 0;  // d/dE of Σ_e 2 Re(K_e) L_e
    for (const auto& edge : graph.edges())
      if (e > edge.potential) rate += edge.length / std::sqrt(e - edge.potential);
    e += std::clamp(rate > 0 ? step / rate : hi - lo, smallest, (hi - lo) / 64);
  }
  out.push_back(hi);
  return out;
}

std::vector<double> lead_in(const MetricGraph& graph, double first, double spacing) {
  return lead_in(floor_energy(graph), first, spacing);
}

std::vector<double> lead_in(double start, double first, double spacing) {
  std::vector<double> out;
  if (!(first > start)) return out;
  const auto count = static_cast<std::size_t>(std::clamp(std::ceil((first - start) / spacing), 16.0, 1e6));
  for (std::size_t i = 0; i < count; ++i) out.push_back(start + (first - start) * static_cast<double>(i) / count);
  return out;
}

}  // namespace qgs
