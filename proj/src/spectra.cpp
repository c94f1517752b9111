#include "qgs/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "qgs/parallel.hpp"

namespace qgs {

int SpectralResult::count(double energy) const {
  int n = floor_count + below_range;
  for (const auto& ev : eigenvalues)
    if (ev.energy < energy) n += ev.multiplicity;
  return n;
}

double SpectralResult::distance(double energy) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ev : eigenvalues) best = std::min(best, std::abs(ev.energy - energy));
  return best;
}

SecularValues secular_values(const MetricGraph& graph, double energy) {
  SecularValues out;
  out.energy = energy;
  try {
    const auto b = assemble(graph, energy);
    out.full = secular(b).value();
    out.reduced = secular_reduced(reduce(b)).value();
    out.valid = true;
  } catch (const Error&) {
    out.valid = false;
  }
  return out;
}

namespace {

// Phase-winding count of the reduced map on the natural partition at a real energy.
struct FloorCount {
  PhaseSample sample;
  double transport = 0;
  double eigenphases = 0;  // Σ θ_j of U_red with θ_j ∈ [0, 2π)
  double dimension = 0;

  // Σ_j (π − θ_j) / 2π plus the continuous phase of det U_red over 2π.
  double winding(double phase) const {
    return (2 * transport + phase - eigenphases) / (2 * pi) + dimension / 2;
  }
};

class Counter {
 public:
  explicit Counter(const MetricGraph& graph) : graph_(graph) {}

  FloorCount at(double energy) const {
    FloorCount c;
    c.sample.energy = energy;
    try {
      if (energy <= graph_.min_potential() || near_threshold(graph_, energy)) return c;
      const auto b = assemble(graph_, energy);
      const auto trap = trapped_state_check(b);
      c.sample.margin = trap.min_singular_value;
      if (trap.flagged) return c;
      const MatrixXcd m = reduce_matrix(b.map, b.partition);
      const auto det = log_det(m);
      if (det.is_zero()) return c;
      c.transport = transport_phase(graph_, b.k);
      c.dimension = static_cast<double>(m.rows());
      c.sample.value = std::polar(1.0, det.phase - 2 * c.transport);
      for (const auto& lambda : eigenvalues(m)) c.eigenphases += wrap_positive(std::arg(lambda));
      c.sample.valid = true;
    } catch (const AtThreshold&) {
    } catch (const SingularVertexMatrix&) {
    }
    return c;
  }

  PhaseProbe probe() const {
    return [this](double energy) { return at(energy).sample; };
  }

 private:
  const MetricGraph& graph_;
};

struct Point {
  double energy;
  double phase;
  Complex<double> value;
  long count;
};

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

}  // namespace

SpectralResult find_eigenvalues(const MetricGraph& graph, double e_lo, double e_hi, const SpectrumOptions& options) {
  if (!(e_hi > e_lo) || options.grid < 2) throw Error("invalid spectral range");
  SpectralResult result;
  result.floor = floor_energy(graph);
  result.floor_count = options.floor_count;
  result.e_lo = std::max(e_lo, result.floor);
  result.e_hi = e_hi;
  result.grid = options.grid;
  if (!(result.e_hi > result.e_lo)) return result;
  result.thresholds = thresholds_between(graph, result.e_lo, result.e_hi);
  const auto cuts = thresholds_between(graph, result.floor, result.e_hi);

  const double spacing = (result.e_hi - result.e_lo) / static_cast<double>(options.grid - 1);
  std::vector<double> energies = lead_in(graph, result.e_lo, spacing);
  for (double e : linspace(result.e_lo, result.e_hi, options.grid)) energies.push_back(e);
  for (double e : bridge_points(cuts)) energies.push_back(e);
  for (double e : phase_lattice(graph, result.floor, result.e_hi)) energies.push_back(e);
  std::sort(energies.begin(), energies.end());
  energies.erase(std::unique(energies.begin(), energies.end()), energies.end());

  // No state sits at a threshold, so the count carries over unchanged between windows.
  const Counter counter(graph);
  auto bridge = [&](const PhaseNode& last, const PhaseSample& first) {
    const double before = std::round(counter.at(last.energy).winding(last.phase));
    const auto next = counter.at(first.energy);
    const double principal = std::arg(first.value);
    return principal + 2 * pi * std::round(before - next.winding(principal));
  };
  const auto track = track_windows(counter.probe(), energies, cuts, std::arg(counter.at(result.floor).sample.value),
                                   bridge, options.track);
  if (track.nodes.empty() || track.nodes.front().energy != result.floor)
    throw Error("phase tracking could not start at the floor energy");
  result.refinements = track.refinements;
  result.resonances = track.resonances;
  for (double e : track.invalid)
    if (!near_threshold(graph, e) && e > graph.min_potential()) result.trapped.push_back(e);

  std::vector<Point> points(track.nodes.size());
  // Counts are relative to the floor.
  std::vector<double> defects(track.nodes.size(), 0.0);
  parallel_for(points.size(), [&](std::size_t i) {
    const auto& node = track.nodes[i];
    const auto c = counter.at(node.energy);
    const double w = c.winding(node.phase);
    points[i] = {node.energy, node.phase, node.value, std::lround(w)};
    defects[i] = std::abs(w - static_cast<double>(points[i].count));
  });
  result.winding_defect = *std::max_element(defects.begin(), defects.end());
  const long base = points.front().count;
  for (auto& p : points) p.count -= base;

  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    if (points[i + 1].count != points[i].count) cells.push_back(i);

  std::mutex mutex;
  std::vector<Eigenvalue> found;
  parallel_for(cells.size(), [&](std::size_t c) {
    std::vector<Eigenvalue> local;
    auto isolate = [&](auto&& self, const Point& a, const Point& b) -> void {
      if (a.count == b.count) return;
      const double width = b.energy - a.energy;
      if (width <= 1e-12 * (1 + std::abs(b.energy))) {
        if (b.count < a.count)
          throw GridTooCoarse("phase count decreases near E = " + std::to_string(b.energy));
        const double e = 0.5 * (a.energy + b.energy);
        const auto sec = secular_values(graph, e);
        local.push_back({e, static_cast<int>(b.count - a.count), sec.valid ? std::abs(sec.reduced) : NAN});
        return;
      }
      FloorCount mid;
      for (double f : {0.5, 0.45, 0.55}) {
        mid = counter.at(a.energy + f * width);
        if (mid.sample.valid) break;
      }
      if (!mid.sample.valid) throw GridTooCoarse("no valid evaluation inside a bracket near E = " + std::to_string(a.energy));
      const double phase = a.phase + std::arg(mid.sample.value * std::conj(a.value));
      const Point m{mid.sample.energy, phase, mid.sample.value, std::lround(mid.winding(phase)) - base};
      self(self, a, m);
      self(self, m, b);
    };
    isolate(isolate, points[cells[c]], points[cells[c] + 1]);
    std::lock_guard lock(mutex);
    found.insert(found.end(), local.begin(), local.end());
  });
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.energy < b.energy; });

  for (const auto& ev : found) {
    if (ev.energy < result.e_lo)
      result.below_range += ev.multiplicity;
    else if (ev.energy <= result.e_hi)
      result.eigenvalues.push_back(ev);
  }
  return result;
}

}  // namespace qgs
