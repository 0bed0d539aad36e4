#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "belieflab/model.hpp"
#include "belieflab/network.hpp"

namespace testutil {

inline Eigen::MatrixXd rows(std::initializer_list<std::initializer_list<double>> r) {
    const long nr = static_cast<long>(r.size());
    const long nc = static_cast<long>(r.begin()->size());
    Eigen::MatrixXd m(nr, nc);
    long i = 0;
    for (const auto& row : r) {
        long j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

inline belieflab::LikelihoodModel make_model(
    long theta_star, std::vector<Eigen::MatrixXd> tables) {
    belieflab::LikelihoodModel model;
    model.n = static_cast<int>(tables.size());
    model.theta_star = theta_star;
    for (const auto& t : tables) model.alphabets.push_back(static_cast<int>(t.cols()));
    model.tables = std::move(tables);
    belieflab::validate_model(model);
    return model;
}

// The two-agent instance behind several worked examples: symmetric binary
// signals for agent 0, uninformative signals for agent 1.
inline belieflab::LikelihoodModel two_agent_model() {
    return make_model(0, {rows({{0.9, 0.1}, {0.1, 0.9}}),
                          rows({{0.5, 0.5}, {0.5, 0.5}})});
}

// Random model with every entry at least `floor`, keeping the likelihood
// floor bounded away from zero.
inline belieflab::LikelihoodModel random_model(std::mt19937_64& gen, int n,
                                               long ntheta,
                                               const std::vector<int>& alphabets,
                                               double floor = 0.05) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Eigen::MatrixXd> tables;
    for (int i = 0; i < n; ++i) {
        Eigen::MatrixXd t(ntheta, alphabets[i]);
        for (long th = 0; th < ntheta; ++th) {
            double sum = 0.0;
            for (int s = 0; s < alphabets[i]; ++s) {
                t(th, s) = floor + u(gen);
                sum += t(th, s);
            }
            t.row(th) /= sum;
        }
        tables.push_back(std::move(t));
    }
    return make_model(static_cast<long>(u(gen) * ntheta), std::move(tables));
}

// Hellinger distance between the product distributions of two hypotheses,
// materializing the joint alphabet.  Only viable for tiny models.
inline double brute_force_joint_hellinger(const belieflab::LikelihoodModel& model,
                                          long a, long b) {
    long joint = 1;
    for (int s : model.alphabets) joint *= s;
    double bc = 0.0;  // Bhattacharyya coefficient sum sqrt(p q)
    for (long code = 0; code < joint; ++code) {
        long rem = code;
        double pa = 1.0, pb = 1.0;
        for (int i = model.n - 1; i >= 0; --i) {
            const int s = static_cast<int>(rem % model.alphabets[i]);
            rem /= model.alphabets[i];
            pa *= model.tables[i](a, s);
            pb *= model.tables[i](b, s);
        }
        bc += std::sqrt(pa * pb);
    }
    const double h2 = std::max(0.0, 1.0 - bc);
    return std::sqrt(h2) / std::sqrt(static_cast<double>(model.n));
}

// Random connected graph: a random spanning tree plus a few extra edges.
inline belieflab::Graph random_connected_graph(std::mt19937_64& gen, int n) {
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<std::pair<int, int>> edges;
    for (int v = 1; v < n; ++v) {
        std::uniform_int_distribution<int> parent(0, v - 1);
        edges.emplace_back(parent(gen), v);
    }
    const int extra = n / 2;
    for (int e = 0; e < extra; ++e) {
        const int u = pick(gen), v = pick(gen);
        if (u != v) edges.emplace_back(u, v);
    }
    return belieflab::make_graph(n, std::move(edges));
}

}  // namespace testutil
