#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cstree/estimation.hpp"
#include "cstree/model.hpp"

namespace cstree {

/// Random staged tree: start from full dependence and, per level
/// k in {2..p-1}, run |L_{k-1}| Bernoulli(merge_prob) trials, each success
/// merging two uniformly random stages of that level.  Binary variables.
GeneralStagedTree random_staged_tree(int p, double merge_prob, std::uint64_t seed);

/// Random CStree: as above over levels {2..p}, with the trial count adjusted
/// to floor(|L_{k-1}| / (1 + 4k(q - q^2))) and every merge replaced by the
/// minimal CStree-valid merge (the face closure of the chosen pair).
CStree random_cstree(int p, double merge_prob, std::uint64_t seed);

/// Random positive stage parameters, each conditional drawn uniformly with
/// entries in [lo, hi] before normalization.
ParameterMap random_parameters(const CStree& tree, std::uint64_t seed, double lo = 0.1,
                               double hi = 0.9);

/// n iid draws by sequential sampling along the ordering; rows are outcomes
/// in natural variable order.
std::vector<std::vector<int>> sample_rows(const CStree& tree, const ParameterMap& params,
                                          std::int64_t n, std::uint64_t seed);
ContingencyTable sample(const CStree& tree, const ParameterMap& params, std::int64_t n,
                        std::uint64_t seed);

/// Backwards hill-climbing over CStree stagings: per level, greedily apply
/// the BIC-best minimal CStree-valid pairwise stage merge until no merge
/// improves BIC.  Ties break to the canonically smallest pair.
CStree bhc_cs(const std::vector<VariableSpec>& vars, const ContingencyTable& data,
              const std::vector<int>& order);

/// Same greedy loop without the subcube restriction on merges.
GeneralStagedTree bhc_s(const std::vector<VariableSpec>& vars, const ContingencyTable& data,
                        const std::vector<int>& order);

/// One BHC-CS run per causal ordering, keeping the BIC-best output; ties
/// break to the lexicographically smallest ordering.  Parallelizes across
/// orderings (capped by the CSTREE_THREADS environment variable).
CStree bhc_cs_perm(const std::vector<VariableSpec>& vars, const ContingencyTable& data,
                   int max_vars = 8);

/// Staging partition distance: number of same-level unordered node pairs
/// whose same-stage status differs.  Requires equal variables and ordering.
std::int64_t shd(const CStree& a, const CStree& b);
std::int64_t shd(const GeneralStagedTree& a, const GeneralStagedTree& b);

struct PredictiveAccuracy {
    double accuracy = 0.0;
    std::int64_t zero_mass = 0;  // holdout predictions skipped (counted wrong)
};

/// For each holdout row and each variable, predict argmax of the fitted
/// conditional given the remaining values (ties to the smallest outcome).
PredictiveAccuracy predictive_accuracy(const CStree& tree, const ParameterMap& params,
                                       const std::vector<std::vector<int>>& rows);
/// Same check against an explicit fitted joint (dense, natural order).
PredictiveAccuracy predictive_accuracy_joint(const std::vector<double>& joint,
                                             const std::vector<int>& shape,
                                             const std::vector<std::vector<int>>& rows);

/// Dense MLE joint of a staged tree (uniform florets where unobserved).
std::vector<double> fitted_joint(const GeneralStagedTree& tree, const ContingencyTable& data);
std::vector<double> fitted_joint(const CStree& tree, const ContingencyTable& data);

/// Random positive joint factorizing along the staged tree (shared per-stage
/// florets), and iid sampling from an explicit joint.
std::vector<double> random_joint(const GeneralStagedTree& tree, std::uint64_t seed, double lo = 0.1,
                                 double hi = 0.9);
std::vector<std::vector<int>> sample_rows_from_joint(const std::vector<double>& joint,
                                                     const std::vector<int>& shape, std::int64_t n,
                                                     std::uint64_t seed);

struct SimulationRow {
    int trial = 0;
    std::int64_t n = 0;
    std::int64_t stages_true = 0;
    std::int64_t shd = 0;
    double accuracy = 0.0;
    std::int64_t runtime_ms = 0;
};

/// The simulation protocol: per trial draw a random CStree (or staged tree),
/// random parameters, n training samples and 10 validation rows; learn with
/// BHC-CS (or BHC-S) under the known ordering and report metrics.
std::vector<SimulationRow> run_simulation(int p, double merge_prob, std::int64_t n, int trials,
                                          std::uint64_t seed, bool staged_trees = false);

/// Binary variable specs named X1..Xp.
std::vector<VariableSpec> binary_variables(int p);

}  // namespace cstree
