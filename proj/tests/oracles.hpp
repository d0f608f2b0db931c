#pragma once

// Independent test oracles: path-enumeration d-separation, exhaustive DAG
// enumeration, and numeric likelihood maximization.  These deliberately avoid
// the library's own algorithms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "cstree/dag.hpp"
#include "cstree/estimation.hpp"
#include "cstree/model.hpp"

namespace oracles {

// --- d-separation by explicit path enumeration ---------------------------

struct PathOracle {
    int n;
    std::vector<std::vector<int>> adj;      // undirected adjacency (dense ids)
    std::vector<std::vector<char>> edge;    // edge[u][v] = 1 iff u->v
    std::vector<std::set<int>> descendants;

    explicit PathOracle(const cstree::Dag& g) {
        n = g.num_nodes();
        const auto& ids = g.nodes();
        auto idx = [&](int id) {
            return static_cast<int>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
        };
        adj.assign(static_cast<size_t>(n), {});
        edge.assign(static_cast<size_t>(n), std::vector<char>(static_cast<size_t>(n), 0));
        for (const auto& [f, t] : g.edges()) {
            int u = idx(f), v = idx(t);
            adj[static_cast<size_t>(u)].push_back(v);
            adj[static_cast<size_t>(v)].push_back(u);
            edge[static_cast<size_t>(u)][static_cast<size_t>(v)] = 1;
        }
        descendants.assign(static_cast<size_t>(n), {});
        for (int s = 0; s < n; ++s) {
            std::vector<int> stack{s};
            while (!stack.empty()) {
                int u = stack.back();
                stack.pop_back();
                for (int v = 0; v < n; ++v)
                    if (edge[static_cast<size_t>(u)][static_cast<size_t>(v)] &&
                        !descendants[static_cast<size_t>(s)].count(v)) {
                        descendants[static_cast<size_t>(s)].insert(v);
                        stack.push_back(v);
                    }
            }
            descendants[static_cast<size_t>(s)].insert(s);
        }
    }

    bool path_blocked(const std::vector<int>& path, const std::set<int>& s) const {
        for (size_t i = 1; i + 1 < path.size(); ++i) {
            int prev = path[i - 1], w = path[i], next = path[i + 1];
            bool collider = edge[static_cast<size_t>(prev)][static_cast<size_t>(w)] &&
                            edge[static_cast<size_t>(next)][static_cast<size_t>(w)];
            if (collider) {
                bool opened = false;
                for (int d : descendants[static_cast<size_t>(w)])
                    if (s.count(d)) opened = true;
                if (!opened) return true;
            } else {
                if (s.count(w)) return true;
            }
        }
        return false;
    }

    bool separated(int a, int b, const std::set<int>& s) const {
        std::vector<int> path{a};
        std::vector<char> used(static_cast<size_t>(n), 0);
        used[static_cast<size_t>(a)] = 1;
        return all_paths_blocked(path, used, b, s);
    }

    bool all_paths_blocked(std::vector<int>& path, std::vector<char>& used, int b,
                           const std::set<int>& s) const {
        int u = path.back();
        if (u == b) return path_blocked(path, s);
        for (int v : adj[static_cast<size_t>(u)]) {
            if (used[static_cast<size_t>(v)]) continue;
            used[static_cast<size_t>(v)] = 1;
            path.push_back(v);
            bool ok = all_paths_blocked(path, used, b, s);
            path.pop_back();
            used[static_cast<size_t>(v)] = 0;
            if (!ok) return false;
        }
        return true;
    }
};

inline bool path_d_separated(const cstree::Dag& g, int a, int b, const std::vector<int>& s) {
    PathOracle oracle(g);
    const auto& ids = g.nodes();
    auto idx = [&](int id) {
        return static_cast<int>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };
    std::set<int> sep;
    for (int id : s) sep.insert(idx(id));
    return oracle.separated(idx(a), idx(b), sep);
}

// --- exhaustive DAG enumeration -------------------------------------------

inline std::vector<cstree::Dag> all_dags(int n) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) pairs.emplace_back(i, j);
    std::vector<int> nodes;
    for (int i = 0; i < n; ++i) nodes.push_back(i);
    std::vector<cstree::Dag> out;
    std::uint64_t total = 1ull << pairs.size();
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        std::vector<std::pair<int, int>> edges;
        bool two_cycle = false;
        for (size_t e = 0; e < pairs.size(); ++e)
            if ((mask >> e) & 1) edges.push_back(pairs[e]);
        for (size_t a = 0; a < edges.size() && !two_cycle; ++a)
            for (size_t b = a + 1; b < edges.size(); ++b)
                if (edges[a].first == edges[b].second && edges[a].second == edges[b].first)
                    two_cycle = true;
        if (two_cycle) continue;
        try {
            out.emplace_back(nodes, edges);
        } catch (const std::exception&) {
            // cyclic
        }
    }
    return out;
}

// All (i, j, S) d-separation statements of a DAG on nodes 0..n-1, as a
// canonical set usable for full-relation equality.
inline std::set<std::tuple<int, int, std::vector<int>>> dsep_signature(const cstree::Dag& g) {
    int n = g.num_nodes();
    std::set<std::tuple<int, int, std::vector<int>>> out;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            std::vector<int> rest;
            for (int k = 0; k < n; ++k)
                if (k != i && k != j) rest.push_back(k);
            for (std::uint32_t mask = 0; mask < (1u << rest.size()); ++mask) {
                std::vector<int> s;
                for (size_t t = 0; t < rest.size(); ++t)
                    if ((mask >> t) & 1) s.push_back(rest[t]);
                if (cstree::d_separated(g, {i}, {j}, s)) out.insert({i, j, s});
            }
        }
    return out;
}

// --- numeric likelihood maximization ---------------------------------------

// Gradient-free check scaffold: maximizes the exact tensor log-likelihood
// over softmax logits per stage by central-difference gradient ascent.
struct NumericMle {
    const cstree::CStree& tree;
    const cstree::ContingencyTable& table;
    std::vector<cstree::Stage> stages;
    std::vector<int> dims;
    std::vector<std::vector<double>> logits;

    NumericMle(const cstree::CStree& t, const cstree::ContingencyTable& u) : tree(t), table(u) {
        for (int k = 1; k <= tree.num_variables(); ++k)
            for (const cstree::Stage& s : tree.level_stages(k)) {
                stages.push_back(s);
                dims.push_back(tree.cardinality_at_level(k));
                logits.emplace_back(static_cast<size_t>(tree.cardinality_at_level(k)), 0.0);
            }
    }

    cstree::ParameterMap params() const {
        cstree::ParameterMap out;
        for (size_t s = 0; s < stages.size(); ++s) {
            std::vector<double> probs(static_cast<size_t>(dims[s]));
            double mx = *std::max_element(logits[s].begin(), logits[s].end());
            double z = 0.0;
            for (int v = 0; v < dims[s]; ++v) {
                probs[static_cast<size_t>(v)] = std::exp(logits[s][static_cast<size_t>(v)] - mx);
                z += probs[static_cast<size_t>(v)];
            }
            for (double& x : probs) x /= z;
            double acc = 0.0;
            for (size_t v = 0; v + 1 < probs.size(); ++v) acc += probs[v];
            probs.back() = 1.0 - acc;
            out.set(stages[s], probs);
        }
        return out;
    }

    double value() const { return cstree::log_likelihood(tree, params(), table); }

    void maximize(int iterations = 400, double step = 0.5) {
        const double h = 1e-5;
        for (int it = 0; it < iterations; ++it) {
            std::vector<std::vector<double>> grad(logits.size());
            for (size_t s = 0; s < logits.size(); ++s) {
                grad[s].assign(logits[s].size(), 0.0);
                for (size_t v = 0; v < logits[s].size(); ++v) {
                    logits[s][v] += h;
                    double up = value();
                    logits[s][v] -= 2 * h;
                    double down = value();
                    logits[s][v] += h;
                    grad[s][v] = (up - down) / (2 * h);
                }
            }
            for (size_t s = 0; s < logits.size(); ++s)
                for (size_t v = 0; v < logits[s].size(); ++v) logits[s][v] += step * grad[s][v] / table.total();
        }
    }
};

}  // namespace oracles
