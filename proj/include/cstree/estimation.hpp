#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "cstree/model.hpp"

namespace cstree {

/// Dense count tensor over the joint outcome space, indexed in natural
/// variable order.
class ContingencyTable {
public:
    ContingencyTable() = default;
    explicit ContingencyTable(std::vector<int> shape);
    ContingencyTable(std::vector<int> shape, std::vector<std::int64_t> counts);

    const std::vector<int>& shape() const { return shape_; }
    std::int64_t total() const { return total_; }
    std::int64_t cells() const { return static_cast<std::int64_t>(counts_.size()); }
    const std::vector<std::int64_t>& counts() const { return counts_; }

    std::int64_t at(const std::vector<int>& outcome) const { return counts_[offset(outcome)]; }
    void add(const std::vector<int>& outcome, std::int64_t count = 1);
    std::vector<int> decode(std::int64_t cell) const;
    std::int64_t offset(const std::vector<int>& outcome) const;

private:
    std::vector<int> shape_;
    std::vector<std::int64_t> strides_;
    std::vector<std::int64_t> counts_;
    std::int64_t total_ = 0;
};

/// Sum of counts over all cells agreeing with `ctx` (variable indices).
std::int64_t marginal_count(const ContingencyTable& u, const Context& ctx);

/// Stage-indexed conditional distributions for the next variable.
class ParameterMap {
public:
    const std::vector<double>& at(const Stage& stage) const;
    void set(const Stage& stage, std::vector<double> probs);
    bool contains(const Stage& stage) const { return params_.count(stage) != 0; }
    const std::map<Stage, std::vector<double>>& entries() const { return params_; }

private:
    std::map<Stage, std::vector<double>> params_;
};

struct MleResult {
    ParameterMap params;
    std::vector<Stage> undefined;  // stages with zero marginal count; params set uniform
};

/// Closed-form MLE: the stage parameter for outcome v is the pooled count of
/// (stage context, next variable = v) over the stage's marginal count.
/// Stages with zero marginal are reported in `undefined` and given uniform
/// parameters (zero likelihood contribution by convention).
MleResult mle(const CStree& tree, const ContingencyTable& u);

/// Pooled next-variable counts per stage over every level (unobserved stages
/// included with zero vectors).
std::map<Stage, std::vector<std::int64_t>> stage_counts(const CStree& tree,
                                                        const ContingencyTable& u);

/// Fitted joint probability of one full outcome under the given parameters.
double fitted_probability(const CStree& tree, const ParameterMap& params,
                          const std::vector<int>& outcome);

/// Multinomial log-likelihood Σ_x u_x ln p̂(x) with 0·ln0 = 0; −inf when some
/// observed cell has zero fitted mass.
double log_likelihood(const CStree& tree, const ParameterMap& params, const ContingencyTable& u);

/// Σ_levels (d_k − 1) · (#stages in level k), implicit singletons included.
std::int64_t free_parameters(const CStree& tree);
std::int64_t free_parameters(const GeneralStagedTree& tree);

struct Score {
    double loglik = 0.0;
    std::int64_t free_params = 0;
    double bic = 0.0;
    std::int64_t n = 0;
};

/// BIC = loglik(MLE) − (d/2)·ln n, natural log.  Unobserved stages follow the
/// uniform/zero-contribution convention and are still counted in d.
Score bic(const CStree& tree, const ContingencyTable& u);
Score bic(const GeneralStagedTree& tree, const ContingencyTable& u);

}  // namespace cstree
