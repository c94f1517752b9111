#include <cmath>
#include <random>

#include "doctest.h"
#include "qgs/quantum_map.hpp"
#include "qgs/random_graph.hpp"
#include "support.hpp"

using namespace qgs;
using C = std::complex<double>;

namespace {

const double L2 = std::sqrt(3.0);

struct IntervalClosedForm {
  C k1, k2, r, u11, u12, u21, u22;
  explicit IntervalClosedForm(double e, double v = 213.0) {
    const C i(0, 1);
    k1 = std::sqrt(C(e));
    k2 = e > v ? std::sqrt(C(e - v)) : i * std::sqrt(v - e);
    r = (k1 - k2) / (k1 + k2);
    const C t = 2.0 * std::sqrt(k1 * k2) / (k1 + k2);
    u11 = -r * std::exp(2.0 * i * k1);
    u12 = -t * std::exp(2.0 * i * k1);
    u21 = -t * std::exp(2.0 * i * k2 * L2);
    u22 = r * std::exp(2.0 * i * k2 * L2);
  }
};

// Odd state of the symmetric Robin star: tanh(κ/2) = κ/2.5 on the two short edges.
double symmetric_odd_state_energy() {
  double lo = 1.0, hi = 3.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (std::tanh(0.5 * mid) - mid / 2.5 > 0 ? lo : hi) = mid;
  }
  const double kappa = 0.5 * (lo + hi);
  return 10.0 - kappa * kappa;
}

}  // namespace

TEST_CASE("Dirichlet edge of length pi is resonant at E = 4") {
  const auto g = build_graph(test::dirichlet_edge(pi));
  const auto b = assemble(g, 4.0);
  CHECK(std::abs(secular(b).value()) < 1e-12);
  CHECK(std::abs(secular(assemble(g, 5.0)).value()) > 0.1);
}

TEST_CASE("interval map matches the closed-form two-edge map") {
  const auto g = build_graph(test::interval(1.0, L2, 213.0));
  for (double e : {12.5, 100.0, 180.0, 250.0, 390.0}) {
    const auto b = assemble(g, e);
    const auto star = star_reduce(g, b);
    const IntervalClosedForm cf(e);
    REQUIRE(star.map.rows() == 2);
    CHECK(std::abs(star.map(0, 0) - cf.u11) < 1e-12);
    CHECK(std::abs(star.map(0, 1) - cf.u12) < 1e-12);
    CHECK(std::abs(star.map(1, 0) - cf.u21) < 1e-12);
    CHECK(std::abs(star.map(1, 1) - cf.u22) < 1e-12);
    const C full = secular(b).value();
    const C reduced_star = (MatrixXcd::Identity(2, 2) - star.map).determinant();
    CHECK(std::abs(full - reduced_star) < 1e-11 * std::max(1.0, std::abs(full)));
  }
}

TEST_CASE("interval reduced secular function below threshold") {
  const auto g = build_graph(test::interval(1.0, L2, 213.0));
  const C i(0, 1);
  for (double e : {5.0, 60.0, 150.0, 212.0}) {
    const auto b = assemble(g, e);
    const IntervalClosedForm cf(e);
    const C u_red = (std::exp(2.0 * i * (cf.k1 + cf.k2 * L2)) - cf.r * std::exp(2.0 * i * cf.k1)) /
                    (1.0 - cf.r * std::exp(2.0 * i * cf.k2 * L2));
    CHECK(std::abs(std::abs(u_red) - 1.0) < 1e-12);
    const C xi_red = secular_reduced(reduce(b)).value();
    CHECK(std::abs(xi_red - (1.0 - u_red)) < 1e-11);
    const C ratio = (secular(b) / secular_reduced(reduce(b))).value();
    CHECK(std::abs(ratio - (1.0 - cf.u22)) < 1e-11);
  }
}

TEST_CASE("interval at threshold: spurious zero of the full secular function only") {
  const auto g = build_graph(test::interval(1.0, L2, 213.0));
  const C i(0, 1);
  const C k1 = std::sqrt(C(213.0));
  const C limit = std::exp(2.0 * i * k1) * (1.0 + i * k1 * L2) / (1.0 - i * k1 * L2);
  for (double delta : {-1e-6, 1e-6}) {
    const auto b = assemble(g, 213.0 + delta);
    CHECK(std::abs(secular(b).value()) < 1e-2);
    const auto fixed = partition_at(g, 100.0);
    const C xi_red = secular_reduced(reduce(b, fixed)).value();
    CHECK(std::abs(xi_red - (1.0 - limit)) < 1e-4);
    CHECK(std::abs(xi_red) > 0.1);
  }
  // ξ itself is continuous across the threshold.
  CHECK(std::abs(secular(assemble(g, 213.0 + 1e-6)).value() - secular(assemble(g, 213.0 - 1e-6)).value()) < 1e-2);
}

TEST_CASE("partitions") {
  const auto g = build_graph(test::threshold_star());
  const auto b = assemble(g, 150.0);
  CHECK(b.partition.oscillatory == std::vector<Index>{0, 1, 2, 3});
  CHECK(b.partition.evanescent == std::vector<Index>{4, 5});
  CHECK(assemble(g, 250.0).partition.evanescent.empty());
  CHECK(assemble(g, 1.0).partition.oscillatory == std::vector<Index>{0, 1});
  CHECK(nested_in(partition_at(g, 50.0), partition_at(g, 150.0)));
  CHECK_FALSE(nested_in(partition_at(g, 150.0), partition_at(g, 50.0)));
}

TEST_CASE("reduction above all thresholds is the identity operation") {
  const auto g = build_graph(test::threshold_star());
  const auto b = assemble(g, 300.0);
  CHECK((reduce(b) - b.map).cwiseAbs().maxCoeff() == 0.0);
  const auto r = det_identities_residuals(g, b, b.partition);
  CHECK(r.ratio == 0.0);
  CHECK(r.product == 0.0);
  CHECK((b.map.adjoint() * b.map - MatrixXcd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("determinant identities on the three-edge star") {
  const auto g = build_graph(test::threshold_star());
  const auto b = assemble(g, 150.0);
  const auto r = det_identities_residuals(g, b, b.partition);
  CHECK(r.ratio < 1e-9);
  CHECK(r.product < 1e-9);
  const auto blocks = block_symmetry_residuals(b, b.partition);
  CHECK(blocks.max() < 1e-9);
}

TEST_CASE("nested reduction equals one-shot reduction") {
  const auto g = build_graph(test::threshold_star());
  for (double e : {20.0, 77.0, 115.0}) {
    const auto b = assemble(g, e);
    const MatrixXcd over_third = reduce(b, partition_at(g, 150.0));
    Partition inner;
    inner.oscillatory = {0, 1};
    inner.evanescent = {2, 3};
    const MatrixXcd stepwise = reduce_matrix(over_third, inner);
    const MatrixXcd direct = reduce(b, partition_at(g, 50.0));
    CHECK((stepwise - direct).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("star reduction preserves the secular function") {
  const auto g = build_graph(test::threshold_star());
  for (int j = 1; j <= 80; ++j) {
    const double e = 5.0 * j + 0.123;
    const auto b = assemble(g, e);
    const auto star = star_reduce(g, b);
    const C full = secular(b).value();
    const C small = (MatrixXcd::Identity(3, 3) - star.map).determinant();
    CHECK(std::abs(full - small) < 1e-10 * std::max(1.0, std::abs(full)));
  }
  const auto single = build_graph(test::dirichlet_edge(1.3));
  const auto b = assemble(single, 7.0);
  const auto star = star_reduce(single, b);
  REQUIRE(star.map.rows() == 1);
  CHECK(std::abs(star.map(0, 0) - std::exp(C(0, 2.0 * std::sqrt(7.0) * 1.3))) < 1e-13);

  const auto chain = build_graph(test::interval(1.0, 1.0, 0.0));
  CHECK_NOTHROW(star_reduce(chain, assemble(chain, 3.0)));
  GraphDescription path = test::interval(1.0, 1.0, 0.0);
  path.vertices.push_back({"far", test::kind(MatchingKind::dirichlet)});
  path.vertices[2].matching = test::kind(MatchingKind::kirchhoff);
  path.edges.push_back({"e3", "right", "far", 1.0, {0.0}});
  const auto long_path = build_graph(path);
  CHECK_THROWS_AS(star_reduce(long_path, assemble(long_path, 3.0)), NotAStar);
}

TEST_CASE("trapped evanescent state of the symmetric Robin star") {
  const double e_odd = symmetric_odd_state_energy();
  const auto symmetric = build_graph(test::robin_barrier_star(0.0));
  const auto b = assemble(symmetric, e_odd);
  const auto trap = trapped_state_check(b);
  CHECK(trap.flagged);
  CHECK_THROWS_AS(reduce(b), TrappedStateSuspected);

  const auto detuned = build_graph(test::robin_barrier_star(0.05));
  double smallest = 1e300;
  for (int j = 0; j < 2000; ++j) {
    const double e = 0.1 + (9.99 - 0.1) * j / 1999.0;
    smallest = std::min(smallest, trapped_state_check(assemble(detuned, e)).min_singular_value);
  }
  CHECK(smallest > trap_tolerance);
}

TEST_CASE("random graphs: unitarity, block relations and determinant identities") {
  std::mt19937_64 rng(1234);
  double worst_blocks = 0, worst_ids = 0, worst_unitary = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto g = build_graph(random_graph(rng));
    for (double e : random_energies(g, 10, rng)) {
      const auto b = assemble(g, e);
      if (trapped_state_check(b).flagged) continue;
      worst_blocks = std::max(worst_blocks, block_symmetry_residuals(b, b.partition).max());
      const auto ids = det_identities_residuals(g, b, b.partition);
      worst_ids = std::max({worst_ids, ids.ratio, ids.product});
    }
    const auto above = assemble(g, g.max_potential() + 3.7);
    worst_unitary = std::max(worst_unitary, (above.map.adjoint() * above.map - MatrixXcd::Identity(above.size(), above.size()))
                                                .cwiseAbs()
                                                .maxCoeff());
  }
  CHECK(worst_blocks < 1e-9);
  CHECK(worst_ids < 1e-8);
  CHECK(worst_unitary < 1e-10);
}
