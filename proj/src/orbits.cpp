#include "qgs/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace qgs {

std::vector<std::vector<Index>> orbit_adjacency(const MetricGraph& graph) {
  // Entries that vanish at two unrelated complex energies are structural zeros.
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> re(-1.0, 1.0), im(0.5, 2.0);
  const double scale = 1 + graph.max_potential() - graph.min_potential();
  std::vector<MatrixXcd> magnitude;
  for (Index v = 0; v < graph.num_vertices(); ++v) magnitude.push_back(MatrixXcd::Zero(graph.degree(v), graph.degree(v)));
  for (int sample = 0; sample < 2; ++sample) {
    const Complex<double> energy(graph.min_potential() + scale * (1 + re(rng)), scale * im(rng));
    std::vector<Complex<double>> k_edge;
    for (const auto& e : graph.edges()) k_edge.push_back(std::sqrt(energy - e.potential));
    for (Index v = 0; v < graph.num_vertices(); ++v) {
      VectorXcd k(graph.degree(v));
      for (Index i = 0; i < k.size(); ++i) k(i) = k_edge[static_cast<std::size_t>(MetricGraph::edge_of(graph.star(v)[static_cast<std::size_t>(i)]))];
      magnitude[static_cast<std::size_t>(v)] += vertex_scattering<double>(graph.vertex(v).matching, k).sigma.cwiseAbs().cast<Complex<double>>();
    }
  }
  std::vector<std::vector<Index>> next(static_cast<std::size_t>(graph.num_directed()));
  for (Index d = 0; d < graph.num_directed(); ++d) {
    const Index v = graph.head(d);
    const Index from = graph.slot(MetricGraph::reversed(d));
    for (Index out : graph.star(v))
      if (std::abs(magnitude[static_cast<std::size_t>(v)](graph.slot(out), from)) > 1e-12)
        next[static_cast<std::size_t>(d)].push_back(out);
    std::sort(next[static_cast<std::size_t>(d)].begin(), next[static_cast<std::size_t>(d)].end());
  }
  return next;
}

namespace {

// Strictly smaller than every nontrivial rotation: canonical and primitive at once.
bool is_lyndon(const std::vector<Index>& s) {
  const std::size_t n = s.size();
  for (std::size_t k = 1; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const Index a = s[i], b = s[(i + k) % n];
      if (a < b) break;
      if (a > b || i + 1 == n) return false;
    }
  }
  return true;
}

}  // namespace

std::vector<std::vector<Index>> enumerate_primitive_orbits(const MetricGraph& graph, int n_max, std::size_t cap) {
  if (n_max < 1) throw Error("orbit length limit must be at least 1");
  const auto next = orbit_adjacency(graph);
  std::vector<std::vector<Index>> out;
  std::vector<Index> path;
  auto walk = [&](auto&& self, Index start) -> void {
    const auto& succ = next[static_cast<std::size_t>(path.back())];
    if (std::binary_search(succ.begin(), succ.end(), start) && is_lyndon(path)) {
      if (out.size() >= cap) throw OrbitBudgetExceeded("more than " + std::to_string(cap) + " primitive orbits");
      out.push_back(path);
    }
    if (static_cast<int>(path.size()) == n_max) return;
    for (Index d : succ) {
      if (d < start) continue;
      path.push_back(d);
      self(self, start);
      path.pop_back();
    }
  };
  for (Index s = 0; s < graph.num_directed(); ++s) {
    path = {s};
    walk(walk, s);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
  return out;
}

const char* to_string(OrbitClass c) {
  switch (c) {
    case OrbitClass::pure_osc: return "pure_osc";
    case OrbitClass::pure_ev: return "pure_ev";
    case OrbitClass::mixed: return "mixed";
  }
  return "mixed";
}

Complex<double> orbit_entry_product(const QuantumMapBundle<double>& bundle, const std::vector<Index>& sequence) {
  Complex<double> product = 1;
  for (std::size_t j = 0; j < sequence.size(); ++j) product *= bundle.map(sequence[(j + 1) % sequence.size()], sequence[j]);
  return product;
}

PeriodicOrbit evaluate_orbit(const MetricGraph& graph, const QuantumMapBundle<double>& bundle,
                             const std::vector<Index>& sequence, int repetition) {
  PeriodicOrbit p;
  p.sequence = sequence;
  p.repetition = repetition;
  p.length = static_cast<int>(sequence.size()) * repetition;
  Complex<double> amplitude = 1, phase = 0;
  bool any_osc = false, any_ev = false;
  for (std::size_t j = 0; j < sequence.size(); ++j) {
    const Index d = sequence[j];
    const Index e = MetricGraph::edge_of(d);
    amplitude *= bundle.sigma(MetricGraph::reversed(sequence[(j + 1) % sequence.size()]), d);
    phase += bundle.k[e] * graph.edge(e).length;
    (bundle.k.is_oscillatory(e) ? any_osc : any_ev) = true;
  }
  p.amplitude = std::pow(amplitude, repetition);
  p.phase = phase * static_cast<double>(repetition);
  p.classification = !any_ev ? OrbitClass::pure_osc : !any_osc ? OrbitClass::pure_ev : OrbitClass::mixed;
  return p;
}

double OrbitSum::max_residual() const {
  double m = 0;
  for (const auto& t : per_n) m = std::max(m, t.residual);
  return m;
}

double OrbitSum::max_primed_residual() const {
  double m = 0;
  for (const auto& t : per_n) m = std::max(m, t.primed_residual);
  return m;
}

OrbitSum orbit_sum(const MetricGraph& graph, const std::vector<std::vector<Index>>& orbits, double energy, int n_max,
                   int r_max, double epsilon_relative) {
  OrbitSum out;
  out.energy = energy;
  out.orbit_count = orbits.size();
  const auto b = assemble(graph, energy, damping(energy, epsilon_relative));
  const auto& ev = b.partition.evanescent;
  const MatrixXcd ee = submatrix(b.map, ev, ev);

  std::vector<PeriodicOrbit> evaluated;
  evaluated.reserve(orbits.size());
  for (const auto& s : orbits) evaluated.push_back(evaluate_orbit(graph, b, s));

  MatrixXcd power = MatrixXcd::Identity(b.size(), b.size());
  MatrixXcd power_ee = MatrixXcd::Identity(ee.rows(), ee.cols());
  for (int n = 1; n <= n_max; ++n) {
    power = b.map * power;
    power_ee = ee * power_ee;
    TraceComparison t;
    t.n = n;
    t.trace = power.trace();
    t.trace_ee = ee.size() ? power_ee.trace() : Complex<double>(0);
    for (const auto& p : evaluated) {
      if (n % p.length != 0) continue;
      const Complex<double> term = static_cast<double>(p.length) * std::pow(p.contribution(), n / p.length);
      t.orbit_sum += term;
      if (p.classification != OrbitClass::pure_ev) t.primed_sum += term;
    }
    t.residual = std::abs(t.orbit_sum - t.trace);
    t.primed_residual = std::abs(t.primed_sum - (t.trace - t.trace_ee));
    out.per_n.push_back(t);
  }

  Complex<double> series = 0;
  for (const auto& p : evaluated) {
    if (p.classification == OrbitClass::pure_ev) continue;
    const Complex<double> c = p.contribution();
    for (int r = 1; r <= r_max && r * p.length <= n_max; ++r) series += std::pow(c, r) / static_cast<double>(r);
  }
  out.osc_truncated = series.imag() / pi;
  out.osc_exact = trapped_state_check(b).flagged ? std::numeric_limits<double>::quiet_NaN()
                                                 : -trace_log_one_minus(reduce_matrix(b.map, b.partition)).imag() / pi;
  return out;
}

std::vector<Index> undirected_labels(const MetricGraph& graph, const std::vector<Index>& sequence) {
  const Index center = star_center(graph);
  std::vector<Index> labels;
  for (Index d : sequence)
    if (graph.tail(d) == center) labels.push_back(MetricGraph::edge_of(d));
  return labels;
}

}  // namespace qgs
