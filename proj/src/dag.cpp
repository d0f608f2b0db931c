#include "cstree/dag.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace cstree {

namespace {
constexpr int kMaxNodes = 64;
}

Dag::Dag(std::vector<int> nodes, std::vector<std::pair<int, int>> edges) : nodes_(std::move(nodes)) {
    std::sort(nodes_.begin(), nodes_.end());
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
    if (nodes_.size() > kMaxNodes) throw std::runtime_error("Dag supports at most 64 nodes");
    for (size_t i = 0; i < nodes_.size(); ++i) index_[nodes_[i]] = static_cast<int>(i);
    pa_.assign(nodes_.size(), 0);
    ch_.assign(nodes_.size(), 0);
    for (const auto& [from, to] : edges) {
        int f = idx(from), t = idx(to);
        if (f == t) throw std::runtime_error("self-loop");
        pa_[t] |= 1ull << f;
        ch_[f] |= 1ull << t;
    }
    // acyclicity via Kahn's algorithm
    std::vector<std::uint64_t> pa = pa_;
    std::vector<int> queue;
    for (size_t i = 0; i < nodes_.size(); ++i)
        if (!pa[i]) queue.push_back(static_cast<int>(i));
    size_t removed = 0;
    while (!queue.empty()) {
        int u = queue.back();
        queue.pop_back();
        ++removed;
        std::uint64_t ch = ch_[u];
        while (ch) {
            int v = __builtin_ctzll(ch);
            ch &= ch - 1;
            pa[v] &= ~(1ull << u);
            if (!pa[v]) queue.push_back(v);
        }
    }
    if (removed != nodes_.size()) throw std::runtime_error("graph has a cycle");
}

int Dag::idx(int id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::runtime_error("unknown node id");
    return it->second;
}

std::vector<std::pair<int, int>> Dag::edges() const {
    std::vector<std::pair<int, int>> out;
    for (size_t f = 0; f < nodes_.size(); ++f) {
        std::uint64_t ch = ch_[f];
        while (ch) {
            int t = __builtin_ctzll(ch);
            ch &= ch - 1;
            out.emplace_back(nodes_[f], nodes_[t]);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

int Dag::num_edges() const {
    int n = 0;
    for (std::uint64_t m : ch_) n += __builtin_popcountll(m);
    return n;
}

bool Dag::has_edge(int from, int to) const {
    if (!has_node(from) || !has_node(to)) return false;
    return (ch_[idx(from)] >> idx(to)) & 1;
}

std::vector<int> Dag::parents(int id) const {
    std::vector<int> out;
    std::uint64_t m = pa_[idx(id)];
    while (m) {
        int i = __builtin_ctzll(m);
        m &= m - 1;
        out.push_back(nodes_[i]);
    }
    return out;
}

std::vector<int> Dag::children(int id) const {
    std::vector<int> out;
    std::uint64_t m = ch_[idx(id)];
    while (m) {
        int i = __builtin_ctzll(m);
        m &= m - 1;
        out.push_back(nodes_[i]);
    }
    return out;
}

bool Dag::operator==(const Dag& rhs) const {
    return nodes_ == rhs.nodes_ && pa_ == rhs.pa_;
}

bool d_separated(const Dag& g, const std::vector<int>& A, const std::vector<int>& B,
                 const std::vector<int>& S) {
    std::uint64_t a = 0, b = 0, s = 0;
    for (int id : A) a |= 1ull << g.idx(id);
    for (int id : B) b |= 1ull << g.idx(id);
    for (int id : S) s |= 1ull << g.idx(id);
    if ((a & b) || (a & s) || (b & s)) throw std::runtime_error("d-separation sets must be disjoint");
    if (!a || !b) throw std::runtime_error("A and B must be nonempty");

    // ancestral closure of A ∪ B ∪ S
    std::uint64_t anc = a | b | s;
    bool grew = true;
    while (grew) {
        grew = false;
        for (size_t i = 0; i < g.nodes_.size(); ++i)
            if (!((anc >> i) & 1) && (g.ch_[i] & anc)) {
                anc |= 1ull << i;
                grew = true;
            }
    }

    // moralize the induced subgraph: undirected adjacency
    size_t n = g.nodes_.size();
    std::vector<std::uint64_t> adj(n, 0);
    for (size_t v = 0; v < n; ++v) {
        if (!((anc >> v) & 1)) continue;
        std::uint64_t pa = g.pa_[v] & anc;
        std::uint64_t m = pa;
        while (m) {
            int u = __builtin_ctzll(m);
            m &= m - 1;
            adj[v] |= 1ull << u;
            adj[u] |= 1ull << v;
        }
        // marry parents
        std::uint64_t m1 = pa;
        while (m1) {
            int u = __builtin_ctzll(m1);
            m1 &= m1 - 1;
            adj[u] |= pa & ~(1ull << u);
        }
    }

    // reachability from A avoiding S
    std::uint64_t reach = a, frontier = a;
    while (frontier) {
        std::uint64_t next = 0;
        while (frontier) {
            int u = __builtin_ctzll(frontier);
            frontier &= frontier - 1;
            next |= adj[u] & anc & ~s & ~reach;
        }
        reach |= next;
        frontier = next;
    }
    return (reach & b) == 0;
}

std::set<std::pair<int, int>> skeleton(const Dag& g) {
    std::set<std::pair<int, int>> out;
    for (const auto& [f, t] : g.edges()) out.insert({std::min(f, t), std::max(f, t)});
    return out;
}

std::set<std::tuple<int, int, int>> v_structures(const Dag& g) {
    std::set<std::tuple<int, int, int>> out;
    for (int k : g.nodes()) {
        auto pa = g.parents(k);
        for (size_t i = 0; i < pa.size(); ++i)
            for (size_t j = i + 1; j < pa.size(); ++j) {
                int a = std::min(pa[i], pa[j]), b = std::max(pa[i], pa[j]);
                if (!g.adjacent(a, b)) out.insert({a, k, b});
            }
    }
    return out;
}

bool markov_equivalent(const Dag& g, const Dag& h) {
    if (g.nodes() != h.nodes()) throw std::runtime_error("node sets differ");
    return skeleton(g) == skeleton(h) && v_structures(g) == v_structures(h);
}

CiStatement::CiStatement(std::vector<int> a_, std::vector<int> b_, std::vector<int> s_)
    : a(std::move(a_)), b(std::move(b_)), s(std::move(s_)) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::sort(s.begin(), s.end());
    if (b < a) std::swap(a, b);
}

Dag minimal_imap(const CiQuery& ci, const std::vector<int>& order) {
    std::vector<std::pair<int, int>> edges;
    for (size_t j = 1; j < order.size(); ++j)
        for (size_t i = 0; i < j; ++i) {
            std::vector<int> s;
            for (size_t t = 0; t < j; ++t)
                if (t != i) s.push_back(order[t]);
            if (!ci(order[j], order[i], s)) edges.emplace_back(order[i], order[j]);
        }
    return Dag(order, edges);
}

Dag minimal_imap(const std::set<CiStatement>& ci, const std::vector<int>& order) {
    return minimal_imap(
        [&ci](int b, int a, const std::vector<int>& s) {
            return ci.count(CiStatement({b}, {a}, s)) != 0;
        },
        order);
}

IDag augment_idag(const Dag& g, const std::map<int, std::set<int>>& placements) {
    std::vector<int> nodes = g.nodes();
    std::vector<std::pair<int, int>> edges = g.edges();
    IDag out;
    for (const auto& [target, heads] : placements) {
        int w = Dag::w_node(target);
        nodes.push_back(w);
        out.target_ids.push_back(target);
        for (int head : heads) {
            if (!g.has_node(head)) throw std::runtime_error("w-edge head is not a node");
            edges.emplace_back(w, head);
        }
    }
    out.graph = Dag(std::move(nodes), std::move(edges));
    return out;
}

std::string to_dot(const Dag& g, const std::string& graph_name,
                   const std::function<std::string(int)>& node_label) {
    std::ostringstream os;
    os << "digraph \"" << graph_name << "\" {\n";
    os << "  label=\"" << graph_name << "\";\n";
    for (int id : g.nodes()) {
        os << "  \"" << node_label(id) << "\"";
        if (Dag::is_w_node(id)) os << " [shape=box]";
        os << ";\n";
    }
    for (const auto& [f, t] : g.edges())
        os << "  \"" << node_label(f) << "\" -> \"" << node_label(t) << "\";\n";
    os << "}\n";
    return os.str();
}

}  // namespace cstree
