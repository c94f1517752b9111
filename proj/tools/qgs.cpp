#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "qgs/graph_io.hpp"
#include "qgs/orbits.hpp"
#include "qgs/parallel.hpp"
#include "qgs/random_graph.hpp"
#include "qgs/trace_formula.hpp"
#include "qgs/verification.hpp"
#include "table_writer.hpp"

using namespace qgs;
using namespace qgs::cli;

namespace {

enum Exit { ok = 0, invalid = 1, trapped = 2, orbit_budget = 3, verify_failed = 4 };

constexpr double verify_threshold = 1e-8;
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

struct RunConfig {
  std::string graph_path;
  std::optional<double> emin;
  std::optional<double> emax;
  std::size_t grid = 4000;
  double epsilon = 1e-8;
  std::string mode = "reduced";
  std::optional<double> fixed_below;
  int nmax = 8;
  int rmax = 20;
  std::string out;
  std::string format = "csv";
  int floor_count = 0;
  std::size_t fuzz = 0;
  bool secular = false;
  bool undirected = false;
};

struct Output {
  std::vector<Table> tables;
  int code = ok;
};

struct Run {
  const RunConfig& config;
  const MetricGraph& graph;
  double lo;
  double hi;

  std::vector<double> grid() const {
    std::vector<double> out(config.grid);
    for (std::size_t i = 0; i < config.grid; ++i)
      out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(config.grid - 1);
    return out;
  }

  SpectrumOptions spectrum_options() const {
    SpectrumOptions o;
    o.grid = config.grid;
    o.floor_count = config.floor_count;
    return o;
  }
};

CountingSetup counting_setup(const RunConfig& config) {
  CountingSetup s;
  s.epsilon = config.epsilon;
  s.mode = config.fixed_below ? CountingMode::fixed_partition : parse_counting_mode(config.mode);
  if (s.mode == CountingMode::fixed_partition) {
    if (!config.fixed_below) throw Error("fixed-partition mode needs --fixed-partition-below");
    s.partition_energy = config.fixed_below;
  }
  return s;
}

std::string mode_label(const RunConfig& config) {
  const auto s = counting_setup(config);
  return s.partition_energy ? to_string(s.mode) + "(" + format_double(*s.partition_energy) + ")" : to_string(s.mode);
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : sep) + p;
  return out;
}

Output cmd_eigs(const Run& run) {
  Output out;
  const auto spectrum = find_eigenvalues(run.graph, run.lo, run.hi, run.spectrum_options());
  Table eigs{"eigenvalues", {"E", "multiplicity", "residual"}, {}};
  for (const auto& ev : spectrum.eigenvalues)
    eigs.add({ev.energy, std::int64_t{ev.multiplicity}, ev.residual});
  out.tables.push_back(std::move(eigs));
  if (run.config.secular) {
    const auto energies = run.grid();
    std::vector<SecularValues> values(energies.size());
    parallel_for(energies.size(), [&](std::size_t i) { values[i] = secular_values(run.graph, energies[i]); });
    Table sec{"secular", {"E", "re_xi", "im_xi", "abs_xi", "re_xi_red", "im_xi_red", "abs_xi_red", "N_exact"}, {}};
    for (std::size_t i = 0; i < energies.size(); ++i) {
      const auto& v = values[i];
      const auto full = v.valid ? v.full : Complex<double>(nan, nan);
      const auto red = v.valid ? v.reduced : Complex<double>(nan, nan);
      sec.add({energies[i], full.real(), full.imag(), std::abs(full), red.real(), red.imag(), std::abs(red),
               std::int64_t{spectrum.count(energies[i])}});
    }
    out.tables.push_back(std::move(sec));
  }
  if (!spectrum.trapped.empty()) {
    std::cerr << "warning: possible trapped states near E = " << format_double(spectrum.trapped.front()) << '\n';
    out.code = trapped;
  }
  return out;
}

Output cmd_count(const Run& run) {
  Output out;
  const auto setup = counting_setup(run.config);
  const auto spectrum = find_eigenvalues(run.graph, floor_energy(run.graph),
                                         calibration_ceiling(run.graph, setup, run.hi), run.spectrum_options());
  const auto report = counting_sweep(run.graph, run.grid(), setup, spectrum);
  const auto label = mode_label(run.config);
  Table rows{"count",
             {"E", "N_mean", "N_osc", "N_total", "N_exact", "mode", "flags", "weyl", "det_s", "inverse_log",
              "direct_log", "branch", "c", "dimension"},
             {}};
  bool any_trapped = !spectrum.trapped.empty();
  for (const auto& r : report.rows) {
    any_trapped = any_trapped || std::find(r.flags.begin(), r.flags.end(), "trapped") != r.flags.end();
    rows.add({r.energy, r.mean, r.osc, r.total, std::int64_t{r.exact}, label, join(r.flags, "|"), r.terms.weyl,
              r.terms.scattering, r.terms.inverse_log, r.terms.direct_log, r.terms.branch, report.constant,
              std::int64_t{r.dimension}});
  }
  out.tables.push_back(std::move(rows));
  if (any_trapped) {
    std::cerr << "warning: trapped states flagged; affected rows are marked\n";
    out.code = trapped;
  }
  return out;
}

Output cmd_trace(const Run& run) {
  Output out;
  const auto orbits = enumerate_primitive_orbits(run.graph, run.config.nmax);
  const auto energies = run.grid();
  Table rows{"trace",
             {"E", "osc_exact", "osc_orbits", "osc_difference", "trace_residual", "primed_residual", "ev_leading",
              "ev_partial", "ev_exact", "ev_residual", "flags"},
             {}};
  rows.rows.resize(energies.size());
  std::atomic<bool> any_trapped = false;
  parallel_for(energies.size(), [&](std::size_t i) {
    const double e = energies[i];
    if (e <= run.graph.min_potential() || near_threshold(run.graph, e)) {
      rows.rows[i] = {e, nan, nan, nan, nan, nan, nan, nan, nan, nan, std::string("threshold")};
      return;
    }
    const auto s = orbit_sum(run.graph, orbits, e, run.config.nmax, run.config.rmax, run.config.epsilon);
    const auto b = assemble(run.graph, e, damping(e, run.config.epsilon));
    std::string flags;
    EvanescentSeries series;
    series.leading = series.exact = series.residual = nan;
    if (trapped_state_check(b).flagged) {
      flags = "trapped";
      any_trapped = true;
    } else {
      series = evanescent_correction_series(run.graph, b, b.partition.evanescent, run.config.rmax,
                                            std::numeric_limits<double>::infinity());
    }
    const double partial = series.partial.empty() ? series.leading : series.partial.back();
    rows.rows[i] = {e, s.osc_exact, s.osc_truncated, s.osc_truncated - s.osc_exact, s.max_residual(),
                    s.max_primed_residual(), series.leading, partial, series.exact, series.residual, flags};
  });
  out.tables.push_back(std::move(rows));
  if (any_trapped) {
    std::cerr << "warning: trapped states flagged; affected rows are marked\n";
    out.code = trapped;
  }
  return out;
}

Output cmd_verify(const Run& run) {
  Output out;
  std::vector<double> energies;
  for (double e : run.grid())
    if (e > run.graph.min_potential()) energies.push_back(e);
  auto summary = verify_graph(run.graph, energies);
  std::mt19937_64 rng(2024);
  for (std::size_t trial = 0; trial < run.config.fuzz; ++trial) {
    const auto g = build_graph(random_graph(rng));
    summary.absorb(verify_graph(g, random_energies(g, 20, rng), trial + 1));
  }
  Table rows{"verify", {"check", "max_residual", "threshold", "status"}, {}};
  const std::pair<const char*, double> checks[] = {{"vertex_symmetry", summary.vertex_symmetry},
                                                   {"flux_conservation", summary.flux},
                                                   {"block_symmetry", summary.block_symmetry},
                                                   {"reduced_unitarity", summary.reduced_unitarity},
                                                   {"determinant_identities", summary.det_identities},
                                                   {"map_unitarity", summary.map_unitarity}};
  for (const auto& [name, value] : checks)
    rows.add({std::string(name), value, verify_threshold, std::string(value < verify_threshold ? "pass" : "fail")});
  rows.add({std::string("evaluations"), static_cast<double>(summary.evaluations), nan,
            std::string(summary.evaluations ? "pass" : "fail")});
  out.tables.push_back(std::move(rows));
  if (!(summary.max() < verify_threshold) || summary.evaluations == 0) {
    std::cerr << "verification failed: largest residual " << format_double(summary.max()) << '\n';
    out.code = verify_failed;
  }
  return out;
}

std::string directed_label(const MetricGraph& g, Index d) {
  return g.edge(MetricGraph::edge_of(d)).id + (d % 2 ? "-" : "+");
}

Output cmd_orbits(const Run& run) {
  Output out;
  const bool undirected = run.config.undirected;
  if (undirected) star_center(run.graph);
  const int n_max = undirected ? 2 * run.config.nmax : run.config.nmax;
  const auto orbits = enumerate_primitive_orbits(run.graph, n_max);
  const double e = run.lo;
  if (near_threshold(run.graph, e)) throw AtThreshold("reference energy " + format_double(e) + " is a threshold");
  const auto b = assemble(run.graph, e, damping(e, run.config.epsilon));

  Table dump{"orbits", {"sequence", "n_p", "abs_A", "re_W", "im_W", "class"}, {}};
  for (const auto& seq : orbits) {
    const auto p = evaluate_orbit(run.graph, b, seq);
    std::vector<std::string> labels;
    if (undirected)
      for (Index edge : undirected_labels(run.graph, seq)) labels.push_back(run.graph.edge(edge).id);
    else
      for (Index d : seq) labels.push_back(directed_label(run.graph, d));
    dump.add({join(labels, " "), std::int64_t(undirected ? p.length / 2 : p.length), std::abs(p.amplitude),
              p.phase.real(), p.phase.imag(), std::string(to_string(p.classification))});
  }
  const auto sums = orbit_sum(run.graph, orbits, e, n_max, run.config.rmax, run.config.epsilon);
  Table traces{"traces", {"n", "re_trace", "im_trace", "residual", "primed_residual"}, {}};
  for (const auto& t : sums.per_n)
    traces.add({std::int64_t{t.n}, t.trace.real(), t.trace.imag(), t.residual, t.primed_residual});
  out.tables.push_back(std::move(dump));
  out.tables.push_back(std::move(traces));
  return out;
}

void validate(const RunConfig& c, double lo, double hi) {
  if (!(lo < hi)) throw Error("--emin must be below --emax");
  if (c.grid < 2) throw Error("--grid must be at least 2");
  if (!(c.epsilon >= 0 && c.epsilon < 1)) throw Error("--epsilon must lie in [0, 1)");
  if (c.nmax < 1 || c.nmax > 64) throw Error("--nmax must lie in [1, 64]");
  if (c.rmax < 1 || c.rmax > 1000) throw Error("--rmax must lie in [1, 1000]");
  if (c.floor_count < 0) throw Error("--floor-count must be non-negative");
  if (c.format != "csv" && c.format != "json") throw Error("--format must be csv or json");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral counting and trace formulas for quantum graphs with edge potentials", "qgs"};
  app.set_version_flag("--version", QGS_VERSION);
  app.require_subcommand(1);
  RunConfig config;
  app.add_option("--graph", config.graph_path, "graph description (JSON)")->required();
  app.add_option("--emin", config.emin, "lower energy (orbits: reference energy)");
  app.add_option("--emax", config.emax, "upper energy");
  app.add_option("--grid", config.grid, "number of grid energies")->capture_default_str();
  app.add_option("--epsilon", config.epsilon, "damping ε relative to 1 + |E|")->capture_default_str();
  app.add_option("--mode", config.mode, "reduced | fixed_partition | above_threshold")->capture_default_str();
  app.add_option("--fixed-partition-below", config.fixed_below,
                 "fixed-partition mode with the edges below this energy oscillatory");
  app.add_option("--nmax", config.nmax, "orbit length limit")->capture_default_str();
  app.add_option("--rmax", config.rmax, "repetition and series limit")->capture_default_str();
  app.add_option("--out", config.out, "output file (default stdout)");
  app.add_option("--format", config.format, "csv | json")->capture_default_str();
  app.add_option("--floor-count", config.floor_count, "states below the counting floor")->capture_default_str();
  app.add_option("--fuzz", config.fuzz, "verify: additional random graphs")->capture_default_str();

  auto* eigs = app.add_subcommand("eigs", "eigenvalues in [emin, emax]")->fallthrough();
  eigs->add_flag("--secular", config.secular, "emit secular functions on the grid");
  auto* count = app.add_subcommand("count", "spectral counting decomposition on the grid")->fallthrough();
  auto* trace = app.add_subcommand("trace", "orbit sums and evanescent series on the grid")->fallthrough();
  auto* verify = app.add_subcommand("verify", "symmetry and identity residuals")->fallthrough();
  auto* orbits = app.add_subcommand("orbits", "primitive orbits and trace residuals at emin")->fallthrough();
  orbits->add_flag("--undirected", config.undirected, "star graphs: list orbits by edges, nmax counts edges");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return invalid;
  }

  try {
    const std::string text = read_file(config.graph_path);
    const auto graph = build_graph(parse_graph_description(text));
    const double lo = config.emin.value_or(floor_energy(graph));
    const double hi = config.emax.value_or(std::max(graph.max_potential(), lo) + 100.0);
    validate(config, lo, hi);
    const Run run{config, graph, lo, hi};

    Output result;
    std::string command;
    if (eigs->parsed()) {
      command = "eigs";
      result = cmd_eigs(run);
    } else if (count->parsed()) {
      command = "count";
      result = cmd_count(run);
    } else if (trace->parsed()) {
      command = "trace";
      result = cmd_trace(run);
    } else if (verify->parsed()) {
      command = "verify";
      result = cmd_verify(run);
    } else if (orbits->parsed()) {
      command = "orbits";
      result = cmd_orbits(run);
    }

    std::ostringstream buffer;
    if (config.format == "json")
      write_json(buffer, {command, graph_hash(text), QGS_VERSION, config.epsilon, mode_label(config)}, result.tables);
    else
      write_csv(buffer, result.tables);
    if (config.out.empty()) {
      std::cout << buffer.str() << std::flush;
    } else {
      std::ofstream file(config.out);
      if (!(file << buffer.str())) throw Error("cannot write " + config.out);
    }
    return result.code;
  } catch (const OrbitBudgetExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return orbit_budget;
  } catch (const std::exception& e) {
    std::string line = e.what();
    std::replace(line.begin(), line.end(), '\n', ' ');
    std::cerr << "error: " << line << '\n';
    return invalid;
  }
}
