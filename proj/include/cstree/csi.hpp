#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "cstree/dag.hpp"
#include "cstree/model.hpp"

namespace cstree {

/// Context-specific CI relation X_A ⫫ X_B | X_S, X_C = x_C over variable
/// indices; A and B are canonically ordered (A <= B).
struct CsiRelation {
    std::vector<int> a, b, s;
    Context ctx;

    CsiRelation() = default;
    CsiRelation(std::vector<int> a_, std::vector<int> b_, std::vector<int> s_, Context ctx_);

    bool operator<(const CsiRelation& rhs) const;
    bool operator==(const CsiRelation& rhs) const;
};

struct CsiSet {
    std::vector<VariableSpec> vars;
    std::set<CsiRelation> relations;
    bool closure_complete = false;  // set by axiom_closure when the fixpoint was reached
};

/// One relation X_k ⫫ X_{[k-1]\C} | X_C = x_C per non-singleton stage
/// (relations with empty independence side omitted).
CsiSet stage_relations(const CStree& tree);

/// Fixpoint of the seven context-specific CI axioms over the finite relation
/// universe.  Exponential; intended for small variable counts and as a test
/// oracle.  Stops with closure_complete=false once `max_relations` is hit.
CsiSet axiom_closure(const CsiSet& js, std::size_t max_relations = 2000000);

/// Minimal contexts of a closed CsiSet: contexts carrying some relation that
/// admits no further absorption.
std::vector<Context> minimal_contexts(const CsiSet& closed);

/// Per-level CSI relation families of a CStree in normal form
/// (independence set B, context face), closed under weak union,
/// specialization and absorption.  This is the fast path behind
/// minimal_contexts and context_graphs; the brute-force closure above is its
/// oracle at small p.
class CsiEngine {
public:
    explicit CsiEngine(const CStree& tree);

    const CStree& tree() const { return *tree_; }

    /// The set C_T; {∅} for a tree with no non-singleton stages.
    std::vector<Context> minimal_contexts() const;

    /// Membership of X_b ⫫ X_a | X_{pre(b)\{a}}, X_C=x_C in the family,
    /// where pre(b) is every variable ordered before b and outside C.
    bool imap_edge_absent(int a, int b, const Context& ctx) const;

    /// Minimal I-MAP for one context; node ids are variable indices.
    Dag context_graph(const Context& ctx) const;

private:
    struct Face {
        std::uint32_t mask = 0;   // ordering positions fixed by the face
        std::uint64_t vals = 0;   // 4 bits per position
        bool operator<(const Face& rhs) const {
            if (mask != rhs.mask) return mask < rhs.mask;
            return vals < rhs.vals;
        }
        bool operator==(const Face& rhs) const { return mask == rhs.mask && vals == rhs.vals; }
    };

    static int face_value(const Face& f, int t) { return static_cast<int>((f.vals >> (4 * t)) & 0xF); }
    static Face face_with(Face f, int t, int v);
    static Face face_without(Face f, int t);

    Face context_to_face(const Context& ctx) const;
    Context face_to_context(const Face& f) const;

    void close_level(int level);

    const CStree* tree_;
    // families_[k-1]: B-mask over ordering positions 0..k-2 -> faces
    std::vector<std::map<std::uint32_t, std::set<Face>>> families_;
};

struct ContextGraphSet {
    std::vector<Context> contexts;  // canonical order
    std::map<Context, Dag> graphs;  // node ids are variable indices
};

std::vector<Context> minimal_contexts(const CStree& tree);
ContextGraphSet context_graphs(const CStree& tree);

/// Statistical equivalence per the skeleton/v-structure characterization:
/// equal minimal-context sets and, per context, Markov-equivalent context
/// graphs.  Variables are matched by name; orderings may differ.
bool cstree_equivalent(const CStree& t1, const CStree& t2);

/// Canonical (context -> skeleton + v-structures) fingerprint: two CStrees
/// over the same variable list are statistically equivalent iff their
/// signatures compare equal.
using EquivalenceSignature =
    std::map<Context, std::pair<std::set<std::pair<int, int>>, std::set<std::tuple<int, int, int>>>>;
EquivalenceSignature equivalence_signature(const CStree& tree);

/// Text report: one line per minimal context followed by its edge list.
std::string context_report(const CStree& tree);

/// Human-readable context name, e.g. "X1=x1^1, X3=x3^2" or "empty".
std::string context_name(const std::vector<VariableSpec>& vars, const Context& ctx);

}  // namespace cstree
