#pragma once

#include <random>
#include <vector>

#include "qgs/graph_model.hpp"

namespace qgs {

// Haar-distributed unitary from the QR factors of a complex Gaussian matrix.
MatrixXcd random_unitary(Index n, std::mt19937_64& rng);

// A self-adjoint (A, B) pair built as A = C(1 − W)/2, B = iC(1 + W)/2 from a random unitary W
// and a random invertible left factor C.
MatchingSpec random_matching(Index degree, std::mt19937_64& rng);

struct RandomGraphOptions {
  Index max_vertices = 5;
  Index max_edges = 8;
  double min_length = 0.3;
  double max_length = 2.0;
  double max_potential = 20.0;
  bool allow_loops = true;
};

// Connected graph with random custom matching at every vertex.
GraphDescription random_graph(std::mt19937_64& rng, const RandomGraphOptions& options = {});

// Energies in (min V, max V + headroom) kept at least `clearance` away from every threshold.
std::vector<double> random_energies(const MetricGraph& graph, std::size_t count, std::mt19937_64& rng,
                                    double headroom = 20.0, double clearance = 1e-3);

}  // namespace qgs
