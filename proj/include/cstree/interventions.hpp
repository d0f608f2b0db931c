#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cstree/csi.hpp"
#include "cstree/dag.hpp"
#include "cstree/estimation.hpp"
#include "cstree/model.hpp"

namespace cstree {

/// An intervention target: the children of a union of whole stages.  The
/// stage set is primary; the node set (one-longer prefixes) is derived.
struct InterventionTarget {
    std::string name;
    std::vector<Stage> stages;  // canonically sorted; empty = observational

    bool empty() const { return stages.empty(); }
};

/// Targets with the observational (empty) target first.
struct TargetSet {
    std::vector<InterventionTarget> targets;

    int num_targets() const { return static_cast<int>(targets.size()); }
};

InterventionTarget target_from_stages(const CStree& tree, std::vector<Stage> stages,
                                      std::string name);

/// The ψ image: all children (one-longer prefixes) of all stage members.
std::set<Prefix> target_nodes(const CStree& tree, const InterventionTarget& target);

/// ψ⁻¹: recovers the stage set from a node set; throws when the nodes are
/// not exactly the children of a union of whole stages.
InterventionTarget target_from_nodes(const CStree& tree, const std::set<Prefix>& nodes,
                                     std::string name);

struct CompletenessReport {
    bool complete = true;
    std::string witness;  // offending prefix, when incomplete
};

/// A target is complete when every targeted prefix carries a minimal
/// subcontext and, per minimal subcontext, targeting is all-or-nothing over
/// the prefixes sharing it.
CompletenessReport is_complete(const CStree& tree, const InterventionTarget& target);

/// The (K+1)-copy interventional model for a CStree and targets.  Copies are
/// virtual; the primitive is the stage/target slot-sharing structure.
class InterventionalCStree {
public:
    InterventionalCStree(CStree base, TargetSet targets);

    const CStree& base() const { return base_; }
    const TargetSet& targets() const { return targets_; }
    int num_copies() const { return targets_.num_targets(); }

    /// Target indices (>= 1) whose stage set contains `stage`.
    std::vector<int> targeted_by(const Stage& stage) const;
    /// Parameter slots of one stage: |targeted copies| own slots plus one
    /// shared slot when some copy is untargeted.
    int num_slots(const Stage& stage) const;

    std::int64_t free_parameters() const;

private:
    CStree base_;
    TargetSet targets_;
};

struct ContextIDagSet {
    std::vector<Context> contexts;           // C_T, with ∅ always present
    std::map<Context, IDag> graphs;          // w node ids encode target indices
    std::vector<std::string> target_names;   // index -> name (index 0 = observational)
};

/// Minimal-context I-DAGs: the base context graphs (complete DAG for the
/// empty context when ∅ ∉ C_T) plus w_I -> j whenever I targets a stage
/// whose floret determines X_j, j is not fixed by the context, and the
/// stage's defining context is consistent with it.
ContextIDagSet context_idags(const InterventionalCStree& itree);

/// A bijection (as target-index permutation, position 0 fixed) matching the
/// w-edge pattern of every context in C ∪ {∅}, or nullopt.
std::optional<std::vector<int>> compatible(const InterventionalCStree& it1,
                                           const InterventionalCStree& it2);

/// Statistical equivalence of interventional CStrees: compatible targets,
/// per-context skeleton and v-structure equality, and matching w-node
/// v-structures across C ∪ {∅}.  Both target sets must be complete.
bool interventional_equivalent(const InterventionalCStree& it1, const InterventionalCStree& it2);

/// True iff S ∪ W \ {w_I} d-separates A from w_I in the context's I-DAG,
/// i.e. f^(I)(X_A | X_S, ctx) is invariant to the intervention.
bool imarkov_invariance_query(const ContextIDagSet& idags, int target_index,
                              const std::vector<int>& a, const std::vector<int>& s,
                              const Context& ctx);

/// Interventional BIC: per-slot MLE pools counts across copies sharing the
/// slot; the log-likelihood sums per-table terms; d counts every slot.
Score interventional_bic(const InterventionalCStree& itree,
                         const std::vector<ContingencyTable>& tables);

struct TargetSearchResult {
    Score best;
    std::vector<InterventionalCStree> ties;  // every maximizer within 1e-9
};

/// Scores every interventional CStree obtained by assigning each
/// interventional table a complete target (or none) in each tree of the
/// class; aborts when the candidate count exceeds `budget`.
TargetSearchResult search_targets_over_class(const std::vector<CStree>& trees,
                                             const ContingencyTable& obs,
                                             const std::vector<ContingencyTable>& interventional,
                                             std::int64_t budget = 32768);

/// All CStrees statistically equivalent to `tree` (enumerates every CStree
/// over the same variables; feasible for p <= 4 binary).
std::vector<CStree> equivalence_class(const CStree& tree, std::int64_t limit = 200000);

}  // namespace cstree
