#include "cstree/model.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace cstree {

void VariableSpec::validate() const {
    if (cardinality < 2) throw ModelError("variable '" + name + "' needs cardinality >= 2");
    if (!labels.empty()) {
        if (static_cast<int>(labels.size()) != cardinality)
            throw ModelError("variable '" + name + "': label count != cardinality");
        std::set<std::string> uniq(labels.begin(), labels.end());
        if (static_cast<int>(uniq.size()) != cardinality)
            throw ModelError("variable '" + name + "': duplicate labels");
    }
}

Context::Context(std::vector<std::pair<int, int>> items) : items_(std::move(items)) {
    std::sort(items_.begin(), items_.end());
    for (size_t i = 1; i < items_.size(); ++i)
        if (items_[i].first == items_[i - 1].first)
            throw ModelError("context assigns a variable twice");
}

void Context::set(int var, int value) {
    auto it = std::lower_bound(items_.begin(), items_.end(), std::make_pair(var, 0),
                               [](const auto& a, const auto& b) { return a.first < b.first; });
    if (it != items_.end() && it->first == var)
        it->second = value;
    else
        items_.insert(it, {var, value});
}

std::optional<int> Context::get(int var) const {
    auto it = std::lower_bound(items_.begin(), items_.end(), std::make_pair(var, 0),
                               [](const auto& a, const auto& b) { return a.first < b.first; });
    if (it != items_.end() && it->first == var) return it->second;
    return std::nullopt;
}

bool Context::consistent_with(const Context& other) const {
    for (const auto& [var, val] : items_) {
        auto o = other.get(var);
        if (o && *o != val) return false;
    }
    return true;
}

bool Context::subcontext_of(const Context& other) const {
    for (const auto& [var, val] : items_) {
        auto o = other.get(var);
        if (!o || *o != val) return false;
    }
    return true;
}

namespace {

std::vector<int> inverse_permutation(const std::vector<int>& order, size_t p) {
    if (order.size() != p) throw ModelError("ordering length != variable count");
    std::vector<int> pos(p, -1);
    for (size_t t = 0; t < p; ++t) {
        int v = order[t];
        if (v < 0 || v >= static_cast<int>(p) || pos[v] != -1)
            throw ModelError("ordering is not a permutation");
        pos[v] = static_cast<int>(t);
    }
    return pos;
}

}  // namespace

CStree::CStree(std::vector<VariableSpec> vars, std::vector<int> order, Staging staging)
    : vars_(std::move(vars)), order_(std::move(order)), staging_(std::move(staging)) {
    for (const auto& v : vars_) v.validate();
    pos_ = inverse_permutation(order_, vars_.size());
    if (staging_.per_level.empty()) staging_.per_level.resize(vars_.size());
    if (staging_.per_level.size() != vars_.size())
        throw ModelError("staging must list one level per variable");
    auto violations = validate_cstree(staging_, vars_, order_);
    if (!violations.empty()) {
        std::ostringstream os;
        os << "invalid staging: " << violations.front().detail;
        throw ModelError(os.str());
    }
    for (auto& level : staging_.per_level) std::sort(level.begin(), level.end());
}

std::int64_t CStree::level_size(int k) const {
    if (k < 0 || k > num_variables()) throw ModelError("level out of range");
    std::int64_t n = 1;
    for (int t = 0; t < k; ++t) n *= vars_[order_[t]].cardinality;
    return n;
}

Prefix CStree::decode_prefix(int k, std::int64_t code) const {
    Prefix prefix(k);
    for (int t = k - 1; t >= 0; --t) {
        int d = vars_[order_[t]].cardinality;
        prefix[t] = static_cast<int>(code % d);
        code /= d;
    }
    return prefix;
}

std::int64_t CStree::encode_prefix(const Prefix& prefix) const {
    std::int64_t code = 0;
    for (size_t t = 0; t < prefix.size(); ++t) {
        int d = vars_[order_[t]].cardinality;
        if (prefix[t] < 0 || prefix[t] >= d) throw ModelError("prefix outcome out of range");
        code = code * d + prefix[t];
    }
    return code;
}

std::vector<Prefix> CStree::enumerate_prefixes(int k) const {
    std::int64_t n = level_size(k);
    std::vector<Prefix> out;
    out.reserve(static_cast<size_t>(n));
    for (std::int64_t code = 0; code < n; ++code) out.push_back(decode_prefix(k, code));
    return out;
}

bool CStree::prefix_in_stage(const Prefix& prefix, const Stage& stage) const {
    if (static_cast<int>(prefix.size()) != stage.level - 1) return false;
    for (const auto& [var, val] : stage.context.items()) {
        int t = pos_[var];
        if (t >= static_cast<int>(prefix.size()) || prefix[t] != val) return false;
    }
    return true;
}

Stage CStree::stage_of(const Prefix& prefix) const {
    int level = static_cast<int>(prefix.size()) + 1;
    if (level < 1 || level > num_variables()) throw ModelError("prefix length out of range");
    for (const Stage& s : staging_.per_level[level - 1])
        if (prefix_in_stage(prefix, s)) return s;
    // implicit singleton: context fixes the whole prefix
    Context ctx;
    for (size_t t = 0; t < prefix.size(); ++t) ctx.set(order_[t], prefix[t]);
    return Stage{level, ctx};
}

std::vector<Prefix> CStree::stage_members(const Stage& stage) const {
    std::vector<Prefix> out;
    int k = stage.level - 1;
    std::int64_t n = level_size(k);
    for (std::int64_t code = 0; code < n; ++code) {
        Prefix prefix = decode_prefix(k, code);
        if (prefix_in_stage(prefix, stage)) out.push_back(std::move(prefix));
    }
    return out;
}

std::int64_t CStree::stage_member_count(const Stage& stage) const {
    std::int64_t n = 1;
    for (int t = 0; t < stage.level - 1; ++t) {
        int var = order_[t];
        if (!stage.context.assigns(var)) n *= vars_[var].cardinality;
    }
    return n;
}

std::vector<Stage> CStree::level_stages(int level) const {
    std::vector<Stage> out = staging_.per_level[level - 1];
    std::int64_t n = level_size(level - 1);
    for (std::int64_t code = 0; code < n; ++code) {
        Prefix prefix = decode_prefix(level - 1, code);
        bool covered = false;
        for (const Stage& s : out)
            if (prefix_in_stage(prefix, s)) {
                covered = true;
                break;
            }
        if (!covered) {
            Context ctx;
            for (size_t t = 0; t < prefix.size(); ++t) ctx.set(order_[t], prefix[t]);
            out.push_back(Stage{level, ctx});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::int64_t CStree::num_stages(int level) const {
    std::int64_t covered = 0;
    for (const Stage& s : staging_.per_level[level - 1]) covered += stage_member_count(s);
    return static_cast<std::int64_t>(staging_.per_level[level - 1].size()) +
           (level_size(level - 1) - covered);
}

std::int64_t CStree::total_stages() const {
    std::int64_t n = 0;
    for (int k = 1; k <= num_variables(); ++k) n += num_stages(k);
    return n;
}

bool CStree::operator==(const CStree& rhs) const {
    if (order_ != rhs.order_ || vars_.size() != rhs.vars_.size()) return false;
    for (size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i].name != rhs.vars_[i].name || vars_[i].cardinality != rhs.vars_[i].cardinality)
            return false;
    for (int k = 1; k <= num_variables(); ++k)
        if (level_stages(k) != rhs.level_stages(k)) return false;
    return true;
}

std::vector<StagingViolation> validate_cstree(const Staging& staging,
                                              const std::vector<VariableSpec>& vars,
                                              const std::vector<int>& order) {
    std::vector<StagingViolation> out;
    std::vector<int> pos = inverse_permutation(order, vars.size());
    if (staging.per_level.size() > vars.size()) {
        out.push_back({StagingViolation::Kind::BadLevel, 0, "staging has more levels than variables"});
        return out;
    }
    for (size_t li = 0; li < staging.per_level.size(); ++li) {
        int level = static_cast<int>(li) + 1;
        const auto& stages = staging.per_level[li];
        for (const Stage& s : stages) {
            if (s.level != level) {
                out.push_back({StagingViolation::Kind::BadLevel, level, "stage stored under wrong level"});
                continue;
            }
            for (const auto& [var, val] : s.context.items()) {
                if (var < 0 || var >= static_cast<int>(vars.size()) || val < 0 ||
                    val >= vars[var].cardinality) {
                    out.push_back({StagingViolation::Kind::BadContext, level, "context value out of range"});
                } else if (pos[var] >= level - 1) {
                    out.push_back({StagingViolation::Kind::BadContext, level,
                                   "context assigns a variable at or after the stage's level"});
                }
            }
        }
        // Two subcube stages overlap exactly when their contexts are compatible.
        for (size_t i = 0; i < stages.size(); ++i)
            for (size_t j = i + 1; j < stages.size(); ++j)
                if (stages[i].context.consistent_with(stages[j].context)) {
                    std::ostringstream os;
                    os << "level " << level << ": stages " << i << " and " << j << " overlap";
                    out.push_back({StagingViolation::Kind::Overlap, level, os.str()});
                }
    }
    return out;
}

std::vector<StagingViolation> validate_member_staging(
    const std::vector<std::vector<std::vector<std::int64_t>>>& per_level_blocks,
    const std::vector<VariableSpec>& vars, const std::vector<int>& order,
    bool complete_partition) {
    std::vector<StagingViolation> out;
    inverse_permutation(order, vars.size());
    for (size_t li = 0; li < per_level_blocks.size(); ++li) {
        int level = static_cast<int>(li) + 1;
        std::int64_t n = 1;
        for (size_t t = 0; t + 1 < static_cast<size_t>(level); ++t) n *= vars[order[t]].cardinality;
        std::vector<int> seen(static_cast<size_t>(n), 0);
        for (const auto& block : per_level_blocks[li]) {
            for (std::int64_t code : block) {
                if (code < 0 || code >= n) {
                    out.push_back({StagingViolation::Kind::BadContext, level, "member code out of range"});
                    continue;
                }
                if (seen[static_cast<size_t>(code)]++) {
                    std::ostringstream os;
                    os << "level " << level << ": prefix " << code << " in two stages";
                    out.push_back({StagingViolation::Kind::Overlap, level, os.str()});
                }
            }
            // Subcube check: the block must equal the face spanned by its agreements.
            if (block.size() > 1) {
                std::vector<std::vector<int>> prefixes;
                for (std::int64_t code : block) {
                    std::vector<int> prefix(level - 1);
                    std::int64_t c = code;
                    for (int t = level - 2; t >= 0; --t) {
                        int d = vars[order[t]].cardinality;
                        prefix[t] = static_cast<int>(c % d);
                        c /= d;
                    }
                    prefixes.push_back(std::move(prefix));
                }
                std::int64_t expect = 1;
                for (int t = 0; t < level - 1; ++t) {
                    bool same = true;
                    for (const auto& prefix : prefixes)
                        if (prefix[t] != prefixes[0][t]) same = false;
                    if (!same) expect *= vars[order[t]].cardinality;
                }
                if (expect != static_cast<std::int64_t>(block.size())) {
                    std::ostringstream os;
                    os << "level " << level << ": a stage is not a subcube";
                    out.push_back({StagingViolation::Kind::NonSubcube, level, os.str()});
                }
            }
        }
        if (complete_partition)
            for (std::int64_t code = 0; code < n; ++code)
                if (!seen[static_cast<size_t>(code)]) {
                    std::ostringstream os;
                    os << "level " << level << ": prefix " << code << " is in no stage";
                    out.push_back({StagingViolation::Kind::Gap, level, os.str()});
                }
    }
    return out;
}

GeneralStagedTree::GeneralStagedTree(std::vector<VariableSpec> vars, std::vector<int> order,
                                     std::vector<std::vector<std::vector<std::int64_t>>> blocks)
    : vars_(std::move(vars)), order_(std::move(order)), blocks_(std::move(blocks)) {
    for (const auto& v : vars_) v.validate();
    inverse_permutation(order_, vars_.size());
    if (blocks_.empty()) blocks_.resize(vars_.size());
    if (blocks_.size() != vars_.size()) throw ModelError("blocks must list one level per variable");
    for (auto& level : blocks_) {
        for (auto& block : level) std::sort(block.begin(), block.end());
        std::sort(level.begin(), level.end());
    }
    auto violations = validate_member_staging(blocks_, vars_, order_);
    for (const auto& v : violations)
        if (v.kind == StagingViolation::Kind::Overlap || v.kind == StagingViolation::Kind::BadContext)
            throw ModelError(v.detail);
}

std::int64_t GeneralStagedTree::level_size(int k) const {
    std::int64_t n = 1;
    for (int t = 0; t < k; ++t) n *= vars_[order_[t]].cardinality;
    return n;
}

std::vector<std::vector<std::int64_t>> GeneralStagedTree::level_blocks(int level) const {
    std::vector<std::vector<std::int64_t>> out = blocks_[level - 1];
    std::vector<char> covered(static_cast<size_t>(level_size(level - 1)), 0);
    for (const auto& block : out)
        for (std::int64_t code : block) covered[static_cast<size_t>(code)] = 1;
    for (std::int64_t code = 0; code < static_cast<std::int64_t>(covered.size()); ++code)
        if (!covered[static_cast<size_t>(code)]) out.push_back({code});
    std::sort(out.begin(), out.end());
    return out;
}

std::int64_t GeneralStagedTree::num_stages(int level) const {
    std::int64_t covered = 0;
    for (const auto& block : blocks_[level - 1]) covered += static_cast<std::int64_t>(block.size());
    return static_cast<std::int64_t>(blocks_[level - 1].size()) + (level_size(level - 1) - covered);
}

std::int64_t GeneralStagedTree::total_stages() const {
    std::int64_t n = 0;
    for (int k = 1; k <= num_variables(); ++k) n += num_stages(k);
    return n;
}

CStree GeneralStagedTree::to_cstree() const {
    auto violations = validate_member_staging(blocks_, vars_, order_);
    if (!violations.empty()) throw ModelError("staged tree is not a CStree: " + violations.front().detail);
    Staging staging;
    staging.per_level.resize(vars_.size());
    for (size_t li = 0; li < blocks_.size(); ++li) {
        int level = static_cast<int>(li) + 1;
        for (const auto& block : blocks_[li]) {
            if (block.size() <= 1) continue;  // singletons stay implicit
            // fixed coordinates of the face
            std::vector<std::vector<int>> prefixes;
            for (std::int64_t code : block) {
                std::vector<int> prefix(level - 1);
                std::int64_t c = code;
                for (int t = level - 2; t >= 0; --t) {
                    int d = vars_[order_[t]].cardinality;
                    prefix[t] = static_cast<int>(c % d);
                    c /= d;
                }
                prefixes.push_back(std::move(prefix));
            }
            Context ctx;
            for (int t = 0; t < level - 1; ++t) {
                bool same = true;
                for (const auto& prefix : prefixes)
                    if (prefix[t] != prefixes[0][t]) same = false;
                if (same) ctx.set(order_[t], prefixes[0][t]);
            }
            staging.per_level[li].push_back(Stage{level, std::move(ctx)});
        }
    }
    return CStree(vars_, order_, std::move(staging));
}

GeneralStagedTree to_staged_tree(const CStree& tree) {
    std::vector<std::vector<std::vector<std::int64_t>>> blocks(tree.num_variables());
    for (int k = 1; k <= tree.num_variables(); ++k)
        for (const Stage& s : tree.staging().per_level[k - 1]) {
            std::vector<std::int64_t> block;
            for (const Prefix& m : tree.stage_members(s)) block.push_back(tree.encode_prefix(m));
            blocks[k - 1].push_back(std::move(block));
        }
    return GeneralStagedTree(tree.variables(), tree.order(), std::move(blocks));
}

ContextSubtree context_specific_subtree(const CStree& tree, const Context& ctx) {
    ContextSubtree out;
    out.context = ctx;
    int p = tree.num_variables();
    for (int t = 0; t < p; ++t) {
        int var = tree.order()[t];
        if (!ctx.assigns(var)) out.variables.push_back(var);
    }
    // Level t of the subtree holds the outcomes of the first t induced
    // variables, labeled by the original prefixes (contracted context levels
    // keep the longer label).
    for (int var : out.variables) {
        SubtreeLevel level;
        level.variable = var;
        int k = tree.position_of(var) + 1;  // original prefix length of this level's nodes
        for (const Prefix& prefix : tree.enumerate_prefixes(k)) {
            bool ok = true;
            for (int t = 0; t < k; ++t) {
                auto v = ctx.get(tree.order()[t]);
                if (v && *v != prefix[t]) ok = false;
            }
            if (!ok) continue;
            if (k < p) level.node_stages.push_back(tree.stage_of(prefix));
            level.nodes.push_back(prefix);
        }
        out.levels.push_back(std::move(level));
    }
    return out;
}

namespace detail {

Stage join_stages(const CStree& tree, const std::vector<Stage>& stages) {
    if (stages.empty()) throw ModelError("join of no stages");
    int level = stages.front().level;
    Context joined;
    for (int t = 0; t < level - 1; ++t) {
        int var = tree.order()[t];
        bool fixed = true;
        int value = -1;
        for (const Stage& s : stages) {
            if (s.level != level) throw ModelError("join across levels");
            auto v = s.context.get(var);
            if (!v) {
                fixed = false;
                break;
            }
            if (value == -1)
                value = *v;
            else if (value != *v)
                fixed = false;
            if (!fixed) break;
        }
        if (fixed) joined.set(var, value);
    }
    return Stage{level, joined};
}

}  // namespace detail

}  // namespace cstree
