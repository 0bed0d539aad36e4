#include "belieflab/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

namespace belieflab {

std::vector<int> Graph::degrees() const {
    std::vector<int> deg(n, 0);
    for (const auto& [u, v] : edges) {
        ++deg[u];
        ++deg[v];
    }
    return deg;
}

bool Graph::connected() const {
    if (n <= 0) return false;
    std::vector<std::vector<int>> adj(n);
    for (const auto& [u, v] : edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    std::vector<char> seen(n, 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    int reached = 1;
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        for (int v : adj[u])
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                queue.push_back(v);
            }
    }
    return reached == n;
}

bool Graph::has_edge(int u, int v) const {
    if (u > v) std::swap(u, v);
    return std::find(edges.begin(), edges.end(), std::make_pair(u, v)) !=
           edges.end();
}

Graph make_graph(int n, std::vector<std::pair<int, int>> edges) {
    if (n < 1) throw std::invalid_argument("graph: n < 1");
    std::set<std::pair<int, int>> normalized;
    for (auto [u, v] : edges) {
        if (u == v)
            throw std::invalid_argument("graph: self-loop at vertex " +
                                        std::to_string(u));
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw std::invalid_argument("graph: edge endpoint out of range");
        if (u > v) std::swap(u, v);
        normalized.emplace(u, v);
    }
    Graph g;
    g.n = n;
    g.edges.assign(normalized.begin(), normalized.end());
    return g;
}

Graph path_graph(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return make_graph(n, std::move(e));
}

Graph ring_graph(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    if (n > 2) e.emplace_back(0, n - 1);
    return make_graph(n, std::move(e));
}

Graph complete_graph(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return make_graph(n, std::move(e));
}

Graph star_graph(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 1; i < n; ++i) e.emplace_back(0, i);
    return make_graph(n, std::move(e));
}

Graph grid_graph(int rows, int cols) {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("grid_graph: empty grid");
    std::vector<std::pair<int, int>> e;
    const auto id = [cols](int r, int c) { return r * cols + c; };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) e.emplace_back(id(r, c), id(r, c + 1));
            if (r + 1 < rows) e.emplace_back(id(r, c), id(r + 1, c));
        }
    return make_graph(rows * cols, std::move(e));
}

Graph graph_from_generator(const std::string& spec) {
    const auto open = spec.find('(');
    const auto close = spec.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw std::invalid_argument("graph generator: expected name(args), got '" +
                                    spec + "'");
    const std::string name = spec.substr(0, open);
    std::string args = spec.substr(open + 1, close - open - 1);
    std::replace(args.begin(), args.end(), ',', ' ');
    std::istringstream in(args);
    std::vector<int> a;
    for (int v; in >> v;) a.push_back(v);

    if (name == "path" && a.size() == 1) return path_graph(a[0]);
    if (name == "ring" && a.size() == 1) return ring_graph(a[0]);
    if (name == "complete" && a.size() == 1) return complete_graph(a[0]);
    if (name == "star" && a.size() == 1) return star_graph(a[0]);
    if (name == "grid" && a.size() == 2) return grid_graph(a[0], a[1]);
    throw std::invalid_argument("graph generator: unknown spec '" + spec + "'");
}

Graph parse_graph(const std::string& text) {
    std::istringstream in(text);
    std::string tag;
    int n = 0;
    if (!(in >> tag >> n) || tag != "n")
        throw std::invalid_argument("graph file: expected header 'n <count>'");
    std::vector<std::pair<int, int>> edges;
    int u, v;
    while (in >> u >> v) edges.emplace_back(u, v);
    if (!in.eof()) {
        in.clear();
        std::string rest;
        in >> rest;
        throw std::invalid_argument("graph file: unparsable token '" + rest + "'");
    }
    return make_graph(n, std::move(edges));
}

std::string format_graph(const Graph& g) {
    std::ostringstream out;
    out << "n " << g.n << "\n";
    for (const auto& [u, v] : g.edges) out << u << " " << v << "\n";
    return out.str();
}

namespace {

// Largest magnitude of the consensus-error map x -> A x - mean(A x) 1,
// estimated by power iteration; this is |lambda_2(A)| for symmetric doubly
// stochastic A.
double second_eigenvalue_estimate(const Eigen::MatrixXd& a) {
    const Eigen::Index n = a.rows();
    if (n <= 1) return 0.0;
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = std::sin(i + 1.0);
    x.array() -= x.mean();
    if (x.norm() == 0.0) x[0] = 1.0;
    x.normalize();

    double estimate = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Eigen::VectorXd y = a * x;
        y.array() -= y.mean();
        const double norm = y.norm();
        if (norm == 0.0) return 0.0;
        const double prev = estimate;
        estimate = norm;  // x has unit norm
        x = y / norm;
        if (it > 0 && std::abs(estimate - prev) < 1e-10) break;
    }
    return estimate;
}

}  // namespace

WeightMatrix make_weight_matrix(Eigen::MatrixXd entries) {
    if (entries.rows() != entries.cols() || entries.rows() < 1)
        throw std::invalid_argument("weight matrix: not square");
    WeightMatrix w;
    w.entries = std::move(entries);
    const Eigen::Index n = w.entries.rows();
    double eta = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (w.entries(i, j) > 0.0) eta = std::min(eta, w.entries(i, j));
    w.eta = std::isfinite(eta) ? eta : 0.0;
    w.lambda_formula = 1.0 - w.eta / (4.0 * n * n);
    w.lambda_empirical = second_eigenvalue_estimate(w.entries);
    return w;
}

WeightMatrix lazy_metropolis(const Graph& g) {
    if (g.n == 1) return make_weight_matrix(Eigen::MatrixXd::Ones(1, 1));
    if (!g.connected())
        throw assumption_error("lazy_metropolis: graph is not connected");
    const std::vector<int> deg = g.degrees();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n, g.n);
    for (const auto& [u, v] : g.edges) {
        const double w = 0.5 / std::max(deg[u] + 1, deg[v] + 1);
        a(u, v) = w;
        a(v, u) = w;
    }
    for (int i = 0; i < g.n; ++i) a(i, i) = 1.0 - a.row(i).sum();
    return make_weight_matrix(std::move(a));
}

WeightReport validate_weights(const WeightMatrix& w, const Graph& g,
                              double tol) {
    const auto& a = w.entries;
    const int n = w.n();
    WeightReport rep;
    if (n != g.n)
        throw std::invalid_argument("validate_weights: matrix/graph size mismatch");

    WeightCondition doubly;
    doubly.name = "doubly_stochastic";
    doubly.pass = true;
    for (int i = 0; i < n && doubly.pass; ++i) {
        for (int j = 0; j < n; ++j)
            if (a(i, j) < 0.0) {
                doubly.pass = false;
                doubly.witness = "negative entry at (" + std::to_string(i) + "," +
                                 std::to_string(j) + ")";
                break;
            }
        if (!doubly.pass) break;
        if (std::abs(a.row(i).sum() - 1.0) > tol) {
            doubly.pass = false;
            doubly.witness = "row " + std::to_string(i) + " sums to " +
                             std::to_string(a.row(i).sum());
        } else if (std::abs(a.col(i).sum() - 1.0) > tol) {
            doubly.pass = false;
            doubly.witness = "column " + std::to_string(i) + " sums to " +
                             std::to_string(a.col(i).sum());
        }
    }
    rep.conditions.push_back(doubly);

    WeightCondition edges_pos{"edges_positive", true, ""};
    for (const auto& [u, v] : g.edges)
        if (!(a(u, v) > 0.0) || !(a(v, u) > 0.0)) {
            edges_pos.pass = false;
            edges_pos.witness =
                "edge (" + std::to_string(u) + "," + std::to_string(v) +
                ") has non-positive weight";
            break;
        }
    rep.conditions.push_back(edges_pos);

    WeightCondition non_edges{"non_edges_zero", true, ""};
    for (int i = 0; i < n && non_edges.pass; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && a(i, j) != 0.0 && !g.has_edge(i, j)) {
                non_edges.pass = false;
                non_edges.witness = "non-edge (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") has weight " +
                                    std::to_string(a(i, j));
                break;
            }
    rep.conditions.push_back(non_edges);

    WeightCondition diag{"diagonal_positive", true, ""};
    for (int i = 0; i < n; ++i)
        if (!(a(i, i) > 0.0)) {
            diag.pass = false;
            diag.witness = "diagonal entry " + std::to_string(i) + " is " +
                           std::to_string(a(i, i));
            break;
        }
    rep.conditions.push_back(diag);

    WeightCondition floor{"entry_floor", w.eta > 0.0,
                          "min positive entry = " + std::to_string(w.eta)};
    rep.conditions.push_back(floor);

    WeightCondition conn{"connected", g.connected(), ""};
    if (!conn.pass) conn.witness = "graph is disconnected";
    rep.conditions.push_back(conn);

    rep.pass = true;
    for (const auto& c : rep.conditions) rep.pass = rep.pass && c.pass;
    return rep;
}

std::vector<Eigen::MatrixXd> matrix_powers(const Eigen::MatrixXd& a, int k) {
    if (k < 0) throw std::invalid_argument("matrix_powers: negative exponent");
    std::vector<Eigen::MatrixXd> powers;
    powers.reserve(k + 1);
    powers.push_back(
        Eigen::MatrixXd::Identity(a.rows(), a.cols()));
    for (int p = 1; p <= k; ++p) powers.push_back(powers.back() * a);
    return powers;
}

double consensus_deviation_sum(const Eigen::MatrixXd& a, int k, int i) {
    const Eigen::Index n = a.rows();
    if (i < 0 || i >= n)
        throw std::invalid_argument("consensus_deviation_sum: bad agent index");
    if (k < 0) throw std::invalid_argument("consensus_deviation_sum: k < 0");
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
    row[i] = 1.0;  // row of A^0
    const double uniform = 1.0 / static_cast<double>(n);
    double acc = 0.0;
    for (int p = 0; p < k; ++p) {
        acc += (row.array() - uniform).abs().sum();
        row = row * a;
    }
    return acc;
}

ConsensusBoundReport consensus_bound_check(const WeightMatrix& w, int k_max) {
    if (k_max < 1) throw std::invalid_argument("consensus_bound_check: k_max < 1");
    const int n = w.n();
    const double logn = std::log(static_cast<double>(n));

    ConsensusBoundReport rep;
    rep.bound_formula = 4.0 * logn / (1.0 - w.lambda_formula);
    rep.bound_empirical = w.lambda_empirical < 1.0
                              ? 4.0 * logn / (1.0 - w.lambda_empirical)
                              : std::numeric_limits<double>::infinity();

    // The deviation sum is nondecreasing in k, so the k = k_max value is the
    // worst case over k <= k_max.
    for (int i = 0; i < n; ++i)
        rep.max_deviation =
            std::max(rep.max_deviation, consensus_deviation_sum(w.entries, k_max, i));

    const auto ratio = [](double value, double bound) {
        if (bound == 0.0) return value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        return value / bound;
    };
    rep.max_ratio_formula = ratio(rep.max_deviation, rep.bound_formula);
    rep.max_ratio_empirical = ratio(rep.max_deviation, rep.bound_empirical);

    rep.pass = rep.max_ratio_formula <= 1.0 + 1e-12 &&
               rep.max_ratio_empirical <= 1.0 + 1e-12 &&
               rep.bound_empirical <= rep.bound_formula + 1e-12;
    return rep;
}

}  // namespace belieflab
