#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "belieflab/common.hpp"

namespace belieflab {

// Undirected communication graph on vertices 0..n-1.  Edges are stored as
// normalized (u < v) pairs without duplicates; self-loops are rejected.
struct Graph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;

    std::vector<int> degrees() const;
    bool connected() const;
    bool has_edge(int u, int v) const;
};

Graph make_graph(int n, std::vector<std::pair<int, int>> edges);

Graph path_graph(int n);
Graph ring_graph(int n);
Graph complete_graph(int n);
Graph star_graph(int n);
Graph grid_graph(int rows, int cols);

// "ring(8)", "grid(3,4)", ... -> generator call.
Graph graph_from_generator(const std::string& spec);

// Text format: first line "n <vertex count>", then one "u v" line per edge.
Graph parse_graph(const std::string& text);
std::string format_graph(const Graph& g);

// Mixing weights together with the quantities everything downstream needs:
// the smallest positive entry and the two spectral-gap surrogates.
struct WeightMatrix {
    Eigen::MatrixXd entries;
    double eta = 0.0;               // min positive entry
    double lambda_formula = 0.0;    // 1 - eta / (4 n^2)
    double lambda_empirical = 0.0;  // power-iteration estimate of |lambda_2|

    int n() const { return static_cast<int>(entries.rows()); }
};

// Wraps an explicit matrix, computing eta and both lambdas.
WeightMatrix make_weight_matrix(Eigen::MatrixXd entries);

// Lazy Metropolis weights: off-diagonal (1/2) / max(d_i + 1, d_j + 1) on
// edges, diagonal filled to make rows sum to 1.  Symmetric and doubly
// stochastic by construction.  Throws assumption_error for disconnected
// graphs; a single vertex yields [[1]].
WeightMatrix lazy_metropolis(const Graph& g);

// Per-condition weight-matrix validation with a witness for each failure.
struct WeightCondition {
    std::string name;
    bool pass = false;
    std::string witness;
};

struct WeightReport {
    bool pass = false;
    std::vector<WeightCondition> conditions;
};

WeightReport validate_weights(const WeightMatrix& w, const Graph& g,
                              double tol = 1e-12);

// A^0, A^1, ..., A^k by repeated multiplication.
std::vector<Eigen::MatrixXd> matrix_powers(const Eigen::MatrixXd& a, int k);

// sum_{t=1..k} sum_j | [A^{k-t}]_{ij} - 1/n |, i.e. the accumulated deviation
// of agent i's influence weights from uniform over the first k steps.
double consensus_deviation_sum(const Eigen::MatrixXd& a, int k, int i);

// Checks consensus_deviation_sum(A, k, i) <= 4 log(n) / (1 - lambda) for all
// agents and all k <= k_max, for both lambda variants; the empirical lambda
// must give the tighter (smaller) bound.
struct ConsensusBoundReport {
    bool pass = false;
    double bound_formula = 0.0;
    double bound_empirical = 0.0;
    double max_deviation = 0.0;
    double max_ratio_formula = 0.0;   // deviation / bound, worst case
    double max_ratio_empirical = 0.0;
};

ConsensusBoundReport consensus_bound_check(const WeightMatrix& w, int k_max);

}  // namespace belieflab
