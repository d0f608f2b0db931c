#include "cstree/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cstree {

ContingencyTable::ContingencyTable(std::vector<int> shape) : shape_(std::move(shape)) {
    std::int64_t n = 1;
    strides_.resize(shape_.size());
    for (int i = static_cast<int>(shape_.size()) - 1; i >= 0; --i) {
        if (shape_[i] < 1) throw ModelError("table dimension must be positive");
        strides_[i] = n;
        n *= shape_[i];
    }
    counts_.assign(static_cast<size_t>(n), 0);
}

ContingencyTable::ContingencyTable(std::vector<int> shape, std::vector<std::int64_t> counts)
    : ContingencyTable(std::move(shape)) {
    if (counts.size() != counts_.size()) throw ModelError("count vector does not match shape");
    counts_ = std::move(counts);
    for (std::int64_t c : counts_) {
        if (c < 0) throw ModelError("negative count");
        total_ += c;
    }
}

std::int64_t ContingencyTable::offset(const std::vector<int>& outcome) const {
    if (outcome.size() != shape_.size()) throw ModelError("outcome arity mismatch");
    std::int64_t off = 0;
    for (size_t i = 0; i < shape_.size(); ++i) {
        if (outcome[i] < 0 || outcome[i] >= shape_[i]) throw ModelError("outcome out of range");
        off += outcome[i] * strides_[i];
    }
    return off;
}

void ContingencyTable::add(const std::vector<int>& outcome, std::int64_t count) {
    counts_[static_cast<size_t>(offset(outcome))] += count;
    total_ += count;
}

std::vector<int> ContingencyTable::decode(std::int64_t cell) const {
    std::vector<int> out(shape_.size());
    for (size_t i = 0; i < shape_.size(); ++i) {
        out[i] = static_cast<int>(cell / strides_[i]);
        cell %= strides_[i];
    }
    return out;
}

std::int64_t marginal_count(const ContingencyTable& u, const Context& ctx) {
    if (ctx.empty()) return u.total();
    std::int64_t sum = 0;
    for (std::int64_t cell = 0; cell < u.cells(); ++cell) {
        if (u.counts()[static_cast<size_t>(cell)] == 0) continue;
        std::vector<int> outcome = u.decode(cell);
        bool match = true;
        for (const auto& [var, val] : ctx.items())
            if (outcome[static_cast<size_t>(var)] != val) {
                match = false;
                break;
            }
        if (match) sum += u.counts()[static_cast<size_t>(cell)];
    }
    return sum;
}

const std::vector<double>& ParameterMap::at(const Stage& stage) const {
    auto it = params_.find(stage);
    if (it == params_.end()) throw ModelError("no parameters for stage");
    return it->second;
}

void ParameterMap::set(const Stage& stage, std::vector<double> probs) {
    double sum = 0.0;
    for (double p : probs) {
        if (p < 0.0 || p > 1.0) throw ModelError("stage probability out of [0,1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ModelError("stage probabilities must sum to 1");
    params_[stage] = std::move(probs);
}

namespace {

// Counts indexed by full prefix code in the causal ordering; contiguous
// suffix blocks make level marginals cheap.
std::vector<std::int64_t> ordered_counts(const CStree& tree, const ContingencyTable& u) {
    int p = tree.num_variables();
    std::vector<std::int64_t> out(static_cast<size_t>(tree.level_size(p)), 0);
    for (std::int64_t cell = 0; cell < u.cells(); ++cell) {
        std::int64_t c = u.counts()[static_cast<size_t>(cell)];
        if (!c) continue;
        std::vector<int> outcome = u.decode(cell);
        Prefix prefix(p);
        for (int t = 0; t < p; ++t) prefix[t] = outcome[static_cast<size_t>(tree.order()[t])];
        out[static_cast<size_t>(tree.encode_prefix(prefix))] += c;
    }
    return out;
}

// counts over the first k ordered variables
std::vector<std::int64_t> fold_to_level(const CStree& tree, const std::vector<std::int64_t>& full,
                                        int k) {
    std::int64_t m = tree.level_size(k);
    std::int64_t block = static_cast<std::int64_t>(full.size()) / m;
    std::vector<std::int64_t> out(static_cast<size_t>(m), 0);
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < block; ++j) out[static_cast<size_t>(i)] += full[static_cast<size_t>(i * block + j)];
    return out;
}

}  // namespace

std::map<Stage, std::vector<std::int64_t>> stage_counts(const CStree& tree,
                                                        const ContingencyTable& u) {
    if (static_cast<int>(u.shape().size()) != tree.num_variables())
        throw ModelError("table arity does not match tree");
    for (int v = 0; v < tree.num_variables(); ++v)
        if (u.shape()[static_cast<size_t>(v)] != tree.variable(v).cardinality)
            throw ModelError("table shape does not match variable cardinalities");
    std::vector<std::int64_t> full = ordered_counts(tree, u);
    std::map<Stage, std::vector<std::int64_t>> out;
    for (int k = 1; k <= tree.num_variables(); ++k) {
        int d = tree.cardinality_at_level(k);
        std::vector<std::int64_t> level = fold_to_level(tree, full, k);
        for (const Stage& s : tree.level_stages(k)) out[s].assign(static_cast<size_t>(d), 0);
        for (std::int64_t code = 0; code < static_cast<std::int64_t>(level.size()); ++code) {
            if (!level[static_cast<size_t>(code)]) continue;
            Prefix prefix = tree.decode_prefix(k, code);
            int last = prefix.back();
            prefix.pop_back();
            out[tree.stage_of(prefix)][static_cast<size_t>(last)] += level[static_cast<size_t>(code)];
        }
    }
    return out;
}

MleResult mle(const CStree& tree, const ContingencyTable& u) {
    MleResult out;
    for (const auto& [stage, counts] : stage_counts(tree, u)) {
        int d = static_cast<int>(counts.size());
        {
            std::int64_t m = 0;
            for (std::int64_t c : counts) m += c;
            std::vector<double> probs(static_cast<size_t>(d));
            if (m == 0) {
                out.undefined.push_back(stage);
                std::fill(probs.begin(), probs.end(), 1.0 / d);
            } else {
                for (int v = 0; v < d; ++v) probs[static_cast<size_t>(v)] = static_cast<double>(counts[static_cast<size_t>(v)]) / static_cast<double>(m);
            }
            out.params.set(stage, std::move(probs));
        }
    }
    return out;
}

double fitted_probability(const CStree& tree, const ParameterMap& params,
                          const std::vector<int>& outcome) {
    double p = 1.0;
    Prefix prefix;
    for (int k = 1; k <= tree.num_variables(); ++k) {
        int v = outcome[static_cast<size_t>(tree.level_variable(k))];
        p *= params.at(tree.stage_of(prefix)).at(static_cast<size_t>(v));
        prefix.push_back(v);
    }
    return p;
}

double log_likelihood(const CStree& tree, const ParameterMap& params, const ContingencyTable& u) {
    double ll = 0.0;
    for (std::int64_t cell = 0; cell < u.cells(); ++cell) {
        std::int64_t c = u.counts()[static_cast<size_t>(cell)];
        if (!c) continue;
        double p = fitted_probability(tree, params, u.decode(cell));
        if (p <= 0.0) return -std::numeric_limits<double>::infinity();
        ll += static_cast<double>(c) * std::log(p);
    }
    return ll;
}

std::int64_t free_parameters(const CStree& tree) {
    std::int64_t d = 0;
    for (int k = 1; k <= tree.num_variables(); ++k)
        d += static_cast<std::int64_t>(tree.cardinality_at_level(k) - 1) * tree.num_stages(k);
    return d;
}

std::int64_t free_parameters(const GeneralStagedTree& tree) {
    std::int64_t d = 0;
    for (int k = 1; k <= tree.num_variables(); ++k)
        d += static_cast<std::int64_t>(tree.cardinality_at_level(k) - 1) * tree.num_stages(k);
    return d;
}

namespace {

double stage_block_loglik(const std::vector<std::int64_t>& counts) {
    std::int64_t m = 0;
    for (std::int64_t c : counts) m += c;
    if (!m) return 0.0;
    double ll = 0.0;
    for (std::int64_t c : counts)
        if (c) ll += static_cast<double>(c) * std::log(static_cast<double>(c) / static_cast<double>(m));
    return ll;
}

}  // namespace

Score bic(const CStree& tree, const ContingencyTable& u) {
    std::vector<std::int64_t> full = ordered_counts(tree, u);
    double ll = 0.0;
    for (int k = 1; k <= tree.num_variables(); ++k) {
        int d = tree.cardinality_at_level(k);
        std::vector<std::int64_t> level = fold_to_level(tree, full, k);
        std::map<Stage, std::vector<std::int64_t>> stage_counts;
        for (std::int64_t code = 0; code < static_cast<std::int64_t>(level.size()); ++code) {
            if (!level[static_cast<size_t>(code)]) continue;
            Prefix prefix = tree.decode_prefix(k, code);
            int last = prefix.back();
            prefix.pop_back();
            auto& counts = stage_counts[tree.stage_of(prefix)];
            if (counts.empty()) counts.assign(static_cast<size_t>(d), 0);
            counts[static_cast<size_t>(last)] += level[static_cast<size_t>(code)];
        }
        for (const auto& [stage, counts] : stage_counts) ll += stage_block_loglik(counts);
    }
    Score s;
    s.loglik = ll;
    s.free_params = free_parameters(tree);
    s.n = u.total();
    s.bic = s.n > 0 ? ll - 0.5 * static_cast<double>(s.free_params) * std::log(static_cast<double>(s.n)) : ll;
    return s;
}

Score bic(const GeneralStagedTree& tree, const ContingencyTable& u) {
    // same fold as for CStrees, over explicit member blocks
    int p = tree.num_variables();
    std::vector<std::int64_t> strides(static_cast<size_t>(p));
    std::int64_t n = 1;
    for (int t = p - 1; t >= 0; --t) {
        strides[static_cast<size_t>(t)] = n;
        n *= tree.variables()[static_cast<size_t>(tree.order()[t])].cardinality;
    }
    std::vector<std::int64_t> full(static_cast<size_t>(n), 0);
    for (std::int64_t cell = 0; cell < u.cells(); ++cell) {
        std::int64_t c = u.counts()[static_cast<size_t>(cell)];
        if (!c) continue;
        std::vector<int> outcome = u.decode(cell);
        std::int64_t code = 0;
        for (int t = 0; t < p; ++t) code += outcome[static_cast<size_t>(tree.order()[t])] * strides[static_cast<size_t>(t)];
        full[static_cast<size_t>(code)] += c;
    }
    double ll = 0.0;
    for (int k = 1; k <= p; ++k) {
        int d = tree.cardinality_at_level(k);
        std::int64_t m = tree.level_size(k);
        std::int64_t block = n / m;
        std::vector<std::int64_t> level(static_cast<size_t>(m), 0);
        for (std::int64_t i = 0; i < m; ++i)
            for (std::int64_t j = 0; j < block; ++j) level[static_cast<size_t>(i)] += full[static_cast<size_t>(i * block + j)];
        for (const auto& members : tree.level_blocks(k)) {
            std::vector<std::int64_t> counts(static_cast<size_t>(d), 0);
            for (std::int64_t parent : members)
                for (int v = 0; v < d; ++v) counts[static_cast<size_t>(v)] += level[static_cast<size_t>(parent * d + v)];
            ll += stage_block_loglik(counts);
        }
    }
    Score s;
    s.loglik = ll;
    s.free_params = free_parameters(tree);
    s.n = u.total();
    s.bic = s.n > 0 ? ll - 0.5 * static_cast<double>(s.free_params) * std::log(static_cast<double>(s.n)) : ll;
    return s;
}

}  // namespace cstree
