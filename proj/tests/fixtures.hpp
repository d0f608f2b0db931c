#pragma once

// Shared model fixtures used across the unit and acceptance suites.

#include <utility>
#include <vector>

#include "cstree/interventions.hpp"
#include "cstree/model.hpp"

namespace fixtures {

using cstree::Context;
using cstree::CStree;
using cstree::InterventionalCStree;
using cstree::InterventionTarget;
using cstree::Stage;
using cstree::Staging;
using cstree::TargetSet;
using cstree::VariableSpec;

inline Context ctx(std::vector<std::pair<int, int>> items) { return Context(std::move(items)); }

inline CStree make_tree(std::vector<VariableSpec> vars, std::vector<int> order,
                        std::vector<Stage> stages) {
    Staging staging;
    staging.per_level.resize(vars.size());
    for (Stage& s : stages) staging.per_level[static_cast<size_t>(s.level - 1)].push_back(s);
    return CStree(std::move(vars), std::move(order), std::move(staging));
}

inline std::vector<VariableSpec> binary_vars(std::vector<std::string> names) {
    std::vector<VariableSpec> out;
    for (auto& name : names) out.push_back({std::move(name), 2, {}});
    return out;
}

// Four binary variables, causal ordering 1234.  Non-singleton stages: one
// X3-level stage with context X2=x2^1 and three X4-level stages with
// contexts x1^1x3^1, x1^1x3^2, x1^2x3^1.
inline CStree intro_tree() {
    return make_tree(binary_vars({"X1", "X2", "X3", "X4"}), {0, 1, 2, 3},
                     {Stage{3, ctx({{1, 0}})},
                      Stage{4, ctx({{0, 0}, {2, 0}})},
                      Stage{4, ctx({{0, 0}, {2, 1}})},
                      Stage{4, ctx({{0, 1}, {2, 0}})}});
}

// Ordering 1234; stages X3|X1=x1^1 and the four X4-level pair stages; the
// canonical two-target interventional example whose targets live inside the
// context X1 = x1^1.
inline CStree empty_context_base_tree() {
    return make_tree(binary_vars({"X1", "X2", "X3", "X4"}), {0, 1, 2, 3},
                     {Stage{3, ctx({{0, 0}})},
                      Stage{4, ctx({{0, 0}, {2, 0}})},
                      Stage{4, ctx({{0, 0}, {2, 1}})},
                      Stage{4, ctx({{0, 1}, {1, 0}})},
                      Stage{4, ctx({{0, 1}, {1, 1}})}});
}

inline InterventionalCStree empty_context_itree() {
    CStree base = empty_context_base_tree();
    TargetSet ts;
    ts.targets.push_back(InterventionTarget{"obs", {}});
    ts.targets.push_back(
        InterventionTarget{"I1", {Stage{2, ctx({{0, 0}})}, Stage{3, ctx({{0, 0}})}}});
    return InterventionalCStree(std::move(base), std::move(ts));
}

// The same model under causal ordering 1324 with the matching targets.
inline CStree empty_context_base_tree_reordered() {
    return make_tree(binary_vars({"X1", "X2", "X3", "X4"}), {0, 2, 1, 3},
                     {Stage{3, ctx({{0, 0}})},
                      Stage{4, ctx({{0, 0}, {2, 0}})},
                      Stage{4, ctx({{0, 0}, {2, 1}})},
                      Stage{4, ctx({{0, 1}, {1, 0}})},
                      Stage{4, ctx({{0, 1}, {1, 1}})}});
}

inline InterventionalCStree empty_context_itree_reordered() {
    CStree base = empty_context_base_tree_reordered();
    TargetSet ts;
    ts.targets.push_back(InterventionTarget{"obs", {}});
    ts.targets.push_back(
        InterventionTarget{"I1", {Stage{2, ctx({{0, 0}})}, Stage{3, ctx({{0, 0}})}}});
    return InterventionalCStree(std::move(base), std::move(ts));
}

// Ordering 1234 with the root, the X3|X1=x1^2 stage and both X4-level stages
// in the context X1=x1^1 targeted (the first interventional example).
inline CStree first_interventional_base_tree() {
    return make_tree(binary_vars({"X1", "X2", "X3", "X4"}), {0, 1, 2, 3},
                     {Stage{3, ctx({{0, 1}})},
                      Stage{4, ctx({{0, 0}, {2, 0}})},
                      Stage{4, ctx({{0, 0}, {2, 1}})}});
}

inline InterventionalCStree first_interventional_itree() {
    CStree base = first_interventional_base_tree();
    TargetSet ts;
    ts.targets.push_back(InterventionTarget{"obs", {}});
    ts.targets.push_back(InterventionTarget{"I1",
                                            {Stage{1, ctx({})},
                                             Stage{3, ctx({{0, 1}})},
                                             Stage{4, ctx({{0, 0}, {2, 0}})},
                                             Stage{4, ctx({{0, 0}, {2, 1}})}}});
    return InterventionalCStree(std::move(base), std::move(ts));
}

// Observational protein tree over (pCAMKII, pS6, pPKCG, NR1): merged first
// level, pPKCG pooled when pCAMKII is high, NR1 stages per the learned
// staging.  Its equivalence class has size two.
inline CStree protein_tree_a() {
    return make_tree(binary_vars({"pCAMKII", "pS6", "pPKCG", "NR1"}), {0, 1, 2, 3},
                     {Stage{2, ctx({})},
                      Stage{3, ctx({{0, 0}})},
                      Stage{4, ctx({{0, 0}, {2, 1}})},
                      Stage{4, ctx({{0, 1}})}});
}

// Observational protein tree over (pPKCG, pNUMB, pNR1, pCAMKII); class size
// four.  Variable ids: 0=pPKCG, 1=pNUMB, 2=pNR1, 3=pCAMKII.
inline std::vector<VariableSpec> protein_vars_b() {
    return binary_vars({"pPKCG", "pNUMB", "pNR1", "pCAMKII"});
}

inline CStree protein_tree_b() {
    return make_tree(protein_vars_b(), {0, 1, 2, 3},
                     {Stage{3, ctx({{1, 0}})},
                      Stage{3, ctx({{1, 1}})},
                      Stage{4, ctx({{0, 0}})},
                      Stage{4, ctx({{0, 1}, {2, 0}})},
                      Stage{4, ctx({{0, 1}, {2, 1}})}});
}

// The four BIC-optimal interventional CStrees over the protein_vars_b
// variables; A forms an equivalence class of size one, B/C/D one of size
// three.
inline InterventionalCStree protein_itree_a() {
    TargetSet ts;
    ts.targets.push_back(InterventionTarget{"obs", {}});
    ts.targets.push_back(
        InterventionTarget{"mem", {Stage{2, ctx({{0, 0}})}, Stage{2, ctx({{0, 1}})}}});
    return InterventionalCStree(protein_tree_b(), std::move(ts));
}

inline InterventionalCStree protein_itree_b() {
    CStree base = make_tree(protein_vars_b(), {2, 1, 0, 3},
                            {Stage{3, ctx({{1, 0}})},
                             Stage{3, ctx({{1, 1}})},
                             Stage{4, ctx({{0, 0}})},
                             Stage{4, ctx({{2, 0}, {0, 1}})},
                             Stage{4, ctx({{2, 1}, {0, 1}})}});
    TargetSet ts;
    ts.targets.push_back(InterventionTarget{"obs", {}});
    ts.targets.push_back(
        InterventionTarget{"mem", {Stage{3, ctx({{1, 0}})}, Stage{3, ctx({{1, 1}})}}});
    return InterventionalCStree(std::move(base), std::move(ts));
}

inline InterventionalCStree protein_itree_c() {
    CStree base = make_tree(protein_vars_b(), {1, 0, 2, 3},
                            {Stage{3, ctx({{1, 0}})},
                             Stage{3, ctx({{1, 1}})},
                             Stage{4, ctx({{0, 0}})},
                             Stage{4, ctx({{0, 1}, {2, 0}})},
                             Stage{4, ctx({{0, 1}, {2, 1}})}});
    TargetSet ts;
    ts.targets.push_back(InterventionTarget{"obs", {}});
    ts.targets.push_back(
        InterventionTarget{"mem", {Stage{2, ctx({{1, 0}})}, Stage{2, ctx({{1, 1}})}}});
    return InterventionalCStree(std::move(base), std::move(ts));
}

inline InterventionalCStree protein_itree_d() {
    CStree base = make_tree(protein_vars_b(), {1, 2, 0, 3},
                            {Stage{3, ctx({{1, 0}})},
                             Stage{3, ctx({{1, 1}})},
                             Stage{4, ctx({{0, 0}})},
                             Stage{4, ctx({{2, 0}, {0, 1}})},
                             Stage{4, ctx({{2, 1}, {0, 1}})}});
    TargetSet ts;
    ts.targets.push_back(InterventionTarget{"obs", {}});
    ts.targets.push_back(
        InterventionTarget{"mem", {Stage{3, ctx({{1, 0}})}, Stage{3, ctx({{1, 1}})}}});
    return InterventionalCStree(std::move(base), std::move(ts));
}

// Coronary risk-factor tree: ordering (MW, P, PW, S, L, F) over variables
// indexed 0=S, 1=MW, 2=PW, 3=P, 4=L, 5=F; outcome index 1 is "yes"/high.
inline CStree coronary_tree() {
    std::vector<VariableSpec> vars = {
        {"S", 2, {"no", "yes"}},          {"MW", 2, {"no", "yes"}}, {"PW", 2, {"no", "yes"}},
        {"P", 2, {"(<140)", "(>140)"}},   {"L", 2, {"(<3)", "(>3)"}},
        {"F", 2, {"negative", "positive"}}};
    return make_tree(std::move(vars), {1, 3, 2, 0, 4, 5},
                     {Stage{3, ctx({{1, 1}})},
                      Stage{4, ctx({{3, 1}})},
                      Stage{4, ctx({{3, 0}, {2, 1}})},
                      Stage{5, ctx({{0, 0}})},
                      Stage{5, ctx({{0, 1}, {3, 1}})},
                      Stage{5, ctx({{0, 1}, {2, 1}, {3, 0}})},
                      Stage{6, ctx({})}});
}

// Full-dependence (saturated) binary tree.
inline CStree saturated_tree(int p) {
    std::vector<std::string> names;
    for (int i = 1; i <= p; ++i) names.push_back("X" + std::to_string(i));
    std::vector<int> order;
    for (int i = 0; i < p; ++i) order.push_back(i);
    return make_tree(binary_vars(names), order, {});
}

}  // namespace fixtures
