#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cstree {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A categorical variable: name, number of outcomes, optional outcome labels.
struct VariableSpec {
    std::string name;
    int cardinality = 2;
    std::vector<std::string> labels;  // empty or exactly `cardinality` distinct strings

    void validate() const;
};

/// Partial assignment of outcomes to variables, kept sorted by variable index.
/// The empty context assigns nothing.
class Context {
public:
    Context() = default;
    explicit Context(std::vector<std::pair<int, int>> items);

    void set(int var, int value);
    std::optional<int> get(int var) const;
    bool assigns(int var) const { return get(var).has_value(); }
    bool empty() const { return items_.empty(); }
    int size() const { return static_cast<int>(items_.size()); }
    const std::vector<std::pair<int, int>>& items() const { return items_; }

    /// True when the two assignments agree on every shared variable.
    bool consistent_with(const Context& other) const;
    /// True when every assignment of this context appears in `other`.
    bool subcontext_of(const Context& other) const;

    bool operator==(const Context& rhs) const { return items_ == rhs.items_; }
    bool operator<(const Context& rhs) const { return items_ < rhs.items_; }

private:
    std::vector<std::pair<int, int>> items_;  // (variable index, outcome index), sorted
};

/// One stage of level `level` (vertices of L_{level-1}).  The member set is
/// the full subcube of length-(level-1) prefixes agreeing with `context`;
/// `context` may only assign variables at ordering positions < level-1.
struct Stage {
    int level = 1;  // 1-based
    Context context;

    bool operator==(const Stage& rhs) const { return level == rhs.level && context == rhs.context; }
    bool operator<(const Stage& rhs) const {
        if (level != rhs.level) return level < rhs.level;
        return context < rhs.context;
    }
};

/// Non-singleton stages per level; every uncovered prefix is implicitly its
/// own singleton stage.
struct Staging {
    std::vector<std::vector<Stage>> per_level;  // index k-1 holds stages of level k
};

/// Outcome prefix along the causal ordering: prefix[t] is the outcome of the
/// variable at ordering position t.
using Prefix = std::vector<int>;

struct StagingViolation {
    enum class Kind { Overlap, Gap, NonSubcube, BadContext, BadLevel };
    Kind kind;
    int level = 0;
    std::string detail;
};

class GeneralStagedTree;

/// A CStree: variables, a causal ordering and a per-level staging whose
/// stages are subcubes of the prefix space.  Immutable after construction.
class CStree {
public:
    CStree(std::vector<VariableSpec> vars, std::vector<int> order, Staging staging);

    int num_variables() const { return static_cast<int>(vars_.size()); }
    const std::vector<VariableSpec>& variables() const { return vars_; }
    const VariableSpec& variable(int v) const { return vars_.at(v); }
    const std::vector<int>& order() const { return order_; }
    const Staging& staging() const { return staging_; }

    /// Variable index housed at 1-based level k.
    int level_variable(int level) const { return order_.at(level - 1); }
    /// Ordering position (0-based) of a variable index.
    int position_of(int var) const { return pos_.at(var); }
    int cardinality_at_level(int level) const { return vars_[level_variable(level)].cardinality; }

    /// Number of prefixes of length k (nodes of L_k).
    std::int64_t level_size(int k) const;

    Prefix decode_prefix(int k, std::int64_t code) const;
    std::int64_t encode_prefix(const Prefix& prefix) const;

    /// All length-k prefixes in lexicographic (ordering) order.
    std::vector<Prefix> enumerate_prefixes(int k) const;

    /// The unique stage containing a length-(level-1) prefix.
    Stage stage_of(const Prefix& prefix) const;
    bool prefix_in_stage(const Prefix& prefix, const Stage& stage) const;
    /// Member prefixes of a stage, in lexicographic order.
    std::vector<Prefix> stage_members(const Stage& stage) const;
    std::int64_t stage_member_count(const Stage& stage) const;

    /// All stages of level k: the stored non-singleton ones followed by the
    /// implicit singletons, canonically ordered.
    std::vector<Stage> level_stages(int level) const;
    std::int64_t num_stages(int level) const;
    std::int64_t total_stages() const;

    bool operator==(const CStree& rhs) const;

private:
    std::vector<VariableSpec> vars_;
    std::vector<int> order_;
    std::vector<int> pos_;  // pos_[var] = ordering position
    Staging staging_;
};

/// Checks that `staging` is a valid CStree staging for the given variables
/// and ordering: contexts in range, restricted to earlier levels, and
/// pairwise disjoint member sets.  Returns violations instead of throwing.
std::vector<StagingViolation> validate_cstree(const Staging& staging,
                                              const std::vector<VariableSpec>& vars,
                                              const std::vector<int>& order);

/// Checks an explicit per-level staging of prefixes (member sets given as
/// prefix codes) and reports overlap, gap and non-subcube violations.  With
/// `complete_partition` false, uncovered prefixes count as implicit
/// singletons rather than gaps.
std::vector<StagingViolation> validate_member_staging(
    const std::vector<std::vector<std::vector<std::int64_t>>>& per_level_blocks,
    const std::vector<VariableSpec>& vars, const std::vector<int>& order,
    bool complete_partition = false);

/// A uniform stratified compatibly-labeled staged tree whose per-level stages
/// are arbitrary prefix sets (no subcube requirement).  Stages are stored as
/// sorted prefix-code blocks; uncovered prefixes are implicit singletons.
class GeneralStagedTree {
public:
    GeneralStagedTree(std::vector<VariableSpec> vars, std::vector<int> order,
                      std::vector<std::vector<std::vector<std::int64_t>>> blocks);

    int num_variables() const { return static_cast<int>(vars_.size()); }
    const std::vector<VariableSpec>& variables() const { return vars_; }
    const std::vector<int>& order() const { return order_; }
    int level_variable(int level) const { return order_.at(level - 1); }
    int cardinality_at_level(int level) const { return vars_[level_variable(level)].cardinality; }
    std::int64_t level_size(int k) const;

    /// All stages of level k as sorted member-code lists (implicit singletons
    /// materialized), canonically ordered by smallest member.
    std::vector<std::vector<std::int64_t>> level_blocks(int level) const;
    std::int64_t num_stages(int level) const;
    std::int64_t total_stages() const;

    /// Interprets this staged tree as a CStree; requires every stage to be a
    /// subcube (throws ModelError otherwise).
    CStree to_cstree() const;

private:
    std::vector<VariableSpec> vars_;
    std::vector<int> order_;
    std::vector<std::vector<std::vector<std::int64_t>>> blocks_;  // per level, non-singleton
};

/// Converts a CStree's level staging to explicit member blocks.
GeneralStagedTree to_staged_tree(const CStree& tree);

/// Context-specific subtree: the tree over variables [p]\C obtained by
/// deleting branches disagreeing with `ctx` and contracting the levels in C.
/// Nodes are reported per level together with the original stage they
/// inherit their floret from.
struct SubtreeLevel {
    int variable = 0;                  // variable housed at this subtree level
    std::vector<Prefix> nodes;         // surviving prefixes (original-tree labels)
    std::vector<Stage> node_stages;    // inherited stage per node; empty for the leaf level
};

struct ContextSubtree {
    Context context;
    std::vector<int> variables;        // induced causal order on [p]\C
    std::vector<SubtreeLevel> levels;  // levels[t] holds the subtree's level-(t+1) nodes
};

ContextSubtree context_specific_subtree(const CStree& tree, const Context& ctx);

namespace detail {
/// Smallest subcube (as a context over ordering positions < level-1 mapped to
/// variable indices) containing all given stages of one level.
Stage join_stages(const CStree& tree, const std::vector<Stage>& stages);
}  // namespace detail

}  // namespace cstree
