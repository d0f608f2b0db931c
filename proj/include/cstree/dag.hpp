#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace cstree {

/// A DAG over abstract integer node ids.  Negative ids are reserved for
/// intervention nodes (w_I for target index j has id ~j).
class Dag {
public:
    Dag() = default;
    Dag(std::vector<int> nodes, std::vector<std::pair<int, int>> edges);

    static int w_node(int target_index) { return ~target_index; }
    static bool is_w_node(int id) { return id < 0; }
    static int w_target(int id) { return ~id; }

    const std::vector<int>& nodes() const { return nodes_; }
    std::vector<std::pair<int, int>> edges() const;
    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    int num_edges() const;

    bool has_node(int id) const { return index_.count(id) != 0; }
    bool has_edge(int from, int to) const;
    bool adjacent(int a, int b) const { return has_edge(a, b) || has_edge(b, a); }
    std::vector<int> parents(int id) const;
    std::vector<int> children(int id) const;

    bool operator==(const Dag& rhs) const;

private:
    int idx(int id) const;

    std::vector<int> nodes_;           // sorted distinct ids
    std::map<int, int> index_;         // id -> dense position
    std::vector<std::uint64_t> pa_;    // parent bitmask per dense position
    std::vector<std::uint64_t> ch_;    // child bitmask per dense position

    friend class DagBuilder;
    friend bool d_separated(const Dag&, const std::vector<int>&, const std::vector<int>&,
                            const std::vector<int>&);
};

/// True iff every path between A and B is blocked by S.  Implemented as
/// reachability in the moralized ancestral subgraph of A ∪ B ∪ S.
bool d_separated(const Dag& g, const std::vector<int>& A, const std::vector<int>& B,
                 const std::vector<int>& S);

/// Undirected edge set {min(a,b), max(a,b)}.
std::set<std::pair<int, int>> skeleton(const Dag& g);

/// All triples (i, k, j) with i -> k <- j, i and j non-adjacent, i < j.
std::set<std::tuple<int, int, int>> v_structures(const Dag& g);

/// Verma–Pearl test: same skeleton and v-structures.  Requires equal node sets.
bool markov_equivalent(const Dag& g, const Dag& h);

/// One CI statement <A ⫫ B | S> over plain node ids, with A and B stored as
/// canonically ordered sets.
struct CiStatement {
    std::vector<int> a, b, s;
    CiStatement() = default;
    CiStatement(std::vector<int> a_, std::vector<int> b_, std::vector<int> s_);
    bool operator<(const CiStatement& rhs) const {
        return std::tie(a, b, s) < std::tie(rhs.a, rhs.b, rhs.s);
    }
    bool operator==(const CiStatement& rhs) const {
        return a == rhs.a && b == rhs.b && s == rhs.s;
    }
};

/// Predicate answering whether X_b ⫫ X_a | X_S holds in the caller's CI model.
using CiQuery = std::function<bool(int b, int a, const std::vector<int>& s)>;

/// Minimal I-MAP of a CI model with respect to `order`: the edge
/// order[i] -> order[j] (i < j) is absent iff the model contains
/// <order[j] ⫫ order[i] | {order[0..j-1]} \ {order[i]}>.
Dag minimal_imap(const CiQuery& ci, const std::vector<int>& order);
Dag minimal_imap(const std::set<CiStatement>& ci, const std::vector<int>& order);

/// A DAG augmented with intervention nodes w_I; w nodes have in-degree 0.
struct IDag {
    Dag graph;                    // variable nodes plus w nodes
    std::vector<int> target_ids;  // target indices present as w nodes
};

/// Adds one w node per target with edges into the listed head nodes.
IDag augment_idag(const Dag& g, const std::map<int, std::set<int>>& placements);

/// DOT rendering; w nodes come out as boxes labeled w_<name>.
std::string to_dot(const Dag& g, const std::string& graph_name,
                   const std::function<std::string(int)>& node_label);

}  // namespace cstree
