#include "cstree/learning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace cstree {

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

// face over ordering positions, as in the CSI engine
struct Face {
    std::uint32_t mask = 0;
    std::uint64_t vals = 0;
    bool operator<(const Face& rhs) const {
        if (mask != rhs.mask) return mask < rhs.mask;
        return vals < rhs.vals;
    }
    bool operator==(const Face& rhs) const { return mask == rhs.mask && vals == rhs.vals; }
};

int face_value(const Face& f, int t) { return static_cast<int>((f.vals >> (4 * t)) & 0xF); }

Face full_face(const std::vector<int>& prefix) {
    Face f;
    for (size_t t = 0; t < prefix.size(); ++t) {
        f.mask |= 1u << t;
        f.vals |= static_cast<std::uint64_t>(prefix[t]) << (4 * t);
    }
    return f;
}

bool faces_compatible(const Face& a, const Face& b) {
    std::uint32_t common = a.mask & b.mask;
    std::uint64_t vm = 0;
    std::uint32_t m = common;
    while (m) {
        int t = __builtin_ctz(m);
        m &= m - 1;
        vm |= 0xFull << (4 * t);
    }
    return (a.vals & vm) == (b.vals & vm);
}

Face face_join(const Face& a, const Face& b) {
    Face out;
    std::uint32_t common = a.mask & b.mask;
    std::uint32_t m = common;
    while (m) {
        int t = __builtin_ctz(m);
        m &= m - 1;
        if (face_value(a, t) == face_value(b, t)) {
            out.mask |= 1u << t;
            out.vals |= static_cast<std::uint64_t>(face_value(a, t)) << (4 * t);
        }
    }
    return out;
}

double entropy_term(const std::vector<std::int64_t>& vec) {
    std::int64_t m = 0;
    for (std::int64_t c : vec) m += c;
    if (!m) return 0.0;
    double h = 0.0;
    for (std::int64_t c : vec)
        if (c) h += static_cast<double>(c) * std::log(static_cast<double>(c) / static_cast<double>(m));
    return h;
}

// counts over the first k ordered variables, last variable fastest
std::vector<std::int64_t> level_fold(const std::vector<VariableSpec>& vars,
                                     const ContingencyTable& data, const std::vector<int>& order,
                                     int k) {
    std::vector<std::int64_t> strides(static_cast<size_t>(k));
    std::int64_t m = 1;
    for (int t = k - 1; t >= 0; --t) {
        strides[static_cast<size_t>(t)] = m;
        m *= vars[static_cast<size_t>(order[static_cast<size_t>(t)])].cardinality;
    }
    std::vector<std::int64_t> out(static_cast<size_t>(m), 0);
    for (std::int64_t cell = 0; cell < data.cells(); ++cell) {
        std::int64_t c = data.counts()[static_cast<size_t>(cell)];
        if (!c) continue;
        std::vector<int> outcome = data.decode(cell);
        std::int64_t code = 0;
        for (int t = 0; t < k; ++t)
            code += outcome[static_cast<size_t>(order[static_cast<size_t>(t)])] * strides[static_cast<size_t>(t)];
        out[static_cast<size_t>(code)] += c;
    }
    return out;
}

// One hill-climbing pass over a level.  Stages are faces when cs_valid, else
// arbitrary member sets; returns the surviving stages as member-code lists
// plus their faces (faces meaningful only when cs_valid).
struct LevelState {
    std::vector<std::vector<std::int64_t>> members;  // per stage, sorted codes
    std::vector<Face> faces;
    std::vector<std::vector<std::int64_t>> counts;  // per stage, next-variable counts
};

void greedy_level(LevelState& st, int d, double log_n, bool cs_valid,
                  const std::vector<std::vector<int>>& prefixes) {
    const double kTol = 1e-9;
    while (st.members.size() >= 2) {
        double best_delta = kTol;
        std::vector<size_t> best_group;
        size_t ns = st.members.size();
        // canonical candidate order: stages are kept sorted by smallest member
        for (size_t i = 0; i < ns; ++i)
            for (size_t j = i + 1; j < ns; ++j) {
                std::vector<size_t> group{i, j};
                if (cs_valid) {
                    // minimal CStree-valid merge: close the pair under the
                    // smallest containing face
                    Face f = face_join(st.faces[i], st.faces[j]);
                    bool grew = true;
                    while (grew) {
                        grew = false;
                        for (size_t s = 0; s < ns; ++s) {
                            if (std::find(group.begin(), group.end(), s) != group.end()) continue;
                            if (faces_compatible(f, st.faces[s])) {
                                group.push_back(s);
                                f = face_join(f, st.faces[s]);
                                grew = true;
                            }
                        }
                    }
                    std::sort(group.begin(), group.end());
                }
                std::vector<std::int64_t> pooled(static_cast<size_t>(d), 0);
                double before = 0.0;
                for (size_t s : group) {
                    before += entropy_term(st.counts[s]);
                    for (int v = 0; v < d; ++v) pooled[static_cast<size_t>(v)] += st.counts[s][static_cast<size_t>(v)];
                }
                double delta = entropy_term(pooled) - before +
                               0.5 * static_cast<double>(group.size() - 1) * (d - 1) * log_n;
                if (delta > best_delta) {
                    best_delta = delta;
                    best_group = group;
                }
            }
        if (best_group.empty()) break;
        // apply: fuse the group into its first slot, drop the rest
        std::vector<std::int64_t> members;
        std::vector<std::int64_t> counts(static_cast<size_t>(d), 0);
        Face face = st.faces[best_group.front()];
        for (size_t s : best_group) {
            members.insert(members.end(), st.members[s].begin(), st.members[s].end());
            for (int v = 0; v < d; ++v) counts[static_cast<size_t>(v)] += st.counts[s][static_cast<size_t>(v)];
            if (cs_valid) face = face_join(face, st.faces[s]);
        }
        std::sort(members.begin(), members.end());
        for (auto it = best_group.rbegin(); it != best_group.rend(); ++it) {
            st.members.erase(st.members.begin() + static_cast<std::ptrdiff_t>(*it));
            st.faces.erase(st.faces.begin() + static_cast<std::ptrdiff_t>(*it));
            st.counts.erase(st.counts.begin() + static_cast<std::ptrdiff_t>(*it));
        }
        // keep stages ordered by smallest member for deterministic candidates
        auto pos = std::lower_bound(st.members.begin(), st.members.end(), members);
        size_t at = static_cast<size_t>(pos - st.members.begin());
        st.members.insert(pos, std::move(members));
        st.faces.insert(st.faces.begin() + static_cast<std::ptrdiff_t>(at), face);
        st.counts.insert(st.counts.begin() + static_cast<std::ptrdiff_t>(at), std::move(counts));
    }
    (void)prefixes;
}

LevelState initial_level_state(const std::vector<VariableSpec>& vars,
                               const ContingencyTable& data, const std::vector<int>& order,
                               int k, std::vector<std::vector<int>>& prefixes_out) {
    int d = vars[static_cast<size_t>(order[static_cast<size_t>(k - 1)])].cardinality;
    std::vector<std::int64_t> lvl = level_fold(vars, data, order, k);
    std::int64_t m = static_cast<std::int64_t>(lvl.size()) / d;
    LevelState st;
    prefixes_out.clear();
    for (std::int64_t code = 0; code < m; ++code) {
        st.members.push_back({code});
        std::vector<int> prefix(static_cast<size_t>(k - 1));
        std::int64_t c = code;
        for (int t = k - 2; t >= 0; --t) {
            int dt = vars[static_cast<size_t>(order[static_cast<size_t>(t)])].cardinality;
            prefix[static_cast<size_t>(t)] = static_cast<int>(c % dt);
            c /= dt;
        }
        st.faces.push_back(full_face(prefix));
        prefixes_out.push_back(std::move(prefix));
        std::vector<std::int64_t> counts(static_cast<size_t>(d));
        for (int v = 0; v < d; ++v) counts[static_cast<size_t>(v)] = lvl[static_cast<size_t>(code * d + v)];
        st.counts.push_back(std::move(counts));
    }
    return st;
}

Staging states_to_staging(const std::vector<VariableSpec>& vars, const std::vector<int>& order,
                          const std::vector<LevelState>& states) {
    Staging staging;
    staging.per_level.resize(vars.size());
    for (size_t li = 0; li < states.size(); ++li) {
        int level = static_cast<int>(li) + 1;
        for (size_t s = 0; s < states[li].members.size(); ++s) {
            if (states[li].members[s].size() <= 1) continue;
            Context ctx;
            const Face& f = states[li].faces[s];
            for (int t = 0; t < level - 1; ++t)
                if ((f.mask >> t) & 1) ctx.set(order[static_cast<size_t>(t)], face_value(f, t));
            staging.per_level[li].push_back(Stage{level, std::move(ctx)});
        }
    }
    return staging;
}

}  // namespace

std::vector<VariableSpec> binary_variables(int p) {
    std::vector<VariableSpec> vars;
    for (int i = 1; i <= p; ++i) {
        std::ostringstream name;
        name << "X" << i;
        vars.push_back({name.str(), 2, {}});
    }
    return vars;
}

GeneralStagedTree random_staged_tree(int p, double merge_prob, std::uint64_t seed) {
    if (merge_prob < 0.0 || merge_prob > 1.0) throw ModelError("merge probability out of [0,1]");
    std::mt19937_64 rng(seed);
    std::vector<VariableSpec> vars = binary_variables(p);
    std::vector<int> order(static_cast<size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::vector<std::vector<std::int64_t>>> blocks(static_cast<size_t>(p));
    for (int k = 2; k <= p - 1; ++k) {
        std::int64_t nodes = std::int64_t{1} << (k - 1);
        std::vector<std::vector<std::int64_t>> stages;
        for (std::int64_t c = 0; c < nodes; ++c) stages.push_back({c});
        for (std::int64_t trial = 0; trial < nodes; ++trial) {
            if (uniform01(rng) >= merge_prob || stages.size() < 2) continue;
            size_t i = static_cast<size_t>(bounded(rng, stages.size()));
            size_t j = static_cast<size_t>(bounded(rng, stages.size() - 1));
            if (j >= i) ++j;
            if (i > j) std::swap(i, j);
            stages[i].insert(stages[i].end(), stages[j].begin(), stages[j].end());
            std::sort(stages[i].begin(), stages[i].end());
            stages.erase(stages.begin() + static_cast<std::ptrdiff_t>(j));
        }
        for (auto& block : stages)
            if (block.size() > 1) blocks[static_cast<size_t>(k - 1)].push_back(std::move(block));
    }
    return GeneralStagedTree(std::move(vars), std::move(order), std::move(blocks));
}

CStree random_cstree(int p, double merge_prob, std::uint64_t seed) {
    if (merge_prob < 0.0 || merge_prob > 1.0) throw ModelError("merge probability out of [0,1]");
    std::mt19937_64 rng(seed);
    std::vector<VariableSpec> vars = binary_variables(p);
    std::vector<int> order(static_cast<size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    Staging staging;
    staging.per_level.resize(static_cast<size_t>(p));
    double q = merge_prob;
    for (int k = 2; k <= p; ++k) {
        std::int64_t nodes = std::int64_t{1} << (k - 1);
        // current stages as faces over positions 0..k-2
        std::vector<Face> faces;
        for (std::int64_t c = 0; c < nodes; ++c) {
            std::vector<int> prefix(static_cast<size_t>(k - 1));
            std::int64_t v = c;
            for (int t = k - 2; t >= 0; --t) {
                prefix[static_cast<size_t>(t)] = static_cast<int>(v % 2);
                v /= 2;
            }
            faces.push_back(full_face(prefix));
        }
        std::int64_t trials =
            static_cast<std::int64_t>(std::floor(static_cast<double>(nodes) / (1.0 + 4.0 * k * (q - q * q))));
        for (std::int64_t trial = 0; trial < trials; ++trial) {
            if (uniform01(rng) >= merge_prob || faces.size() < 2) continue;
            size_t i = static_cast<size_t>(bounded(rng, faces.size()));
            size_t j = static_cast<size_t>(bounded(rng, faces.size() - 1));
            if (j >= i) ++j;
            // minimal CStree-valid merge: close under the joined face
            Face f = face_join(faces[i], faces[j]);
            std::vector<char> in_group(faces.size(), 0);
            in_group[i] = in_group[j] = 1;
            bool grew = true;
            while (grew) {
                grew = false;
                for (size_t s = 0; s < faces.size(); ++s) {
                    if (in_group[s]) continue;
                    if (faces_compatible(f, faces[s])) {
                        in_group[s] = 1;
                        f = face_join(f, faces[s]);
                        grew = true;
                    }
                }
            }
            std::vector<Face> next;
            for (size_t s = 0; s < faces.size(); ++s)
                if (!in_group[s]) next.push_back(faces[s]);
            next.push_back(f);
            std::sort(next.begin(), next.end());
            faces = std::move(next);
        }
        for (const Face& f : faces) {
            if (static_cast<int>(__builtin_popcount(f.mask)) == k - 1) continue;  // singleton
            Context ctx;
            for (int t = 0; t < k - 1; ++t)
                if ((f.mask >> t) & 1) ctx.set(order[static_cast<size_t>(t)], face_value(f, t));
            staging.per_level[static_cast<size_t>(k - 1)].push_back(Stage{k, std::move(ctx)});
        }
    }
    return CStree(std::move(vars), std::move(order), std::move(staging));
}

ParameterMap random_parameters(const CStree& tree, std::uint64_t seed, double lo, double hi) {
    std::mt19937_64 rng(seed);
    ParameterMap params;
    for (int k = 1; k <= tree.num_variables(); ++k) {
        int d = tree.cardinality_at_level(k);
        for (const Stage& s : tree.level_stages(k)) {
            std::vector<double> probs(static_cast<size_t>(d));
            double sum = 0.0;
            for (int v = 0; v < d; ++v) {
                probs[static_cast<size_t>(v)] = lo + (hi - lo) * uniform01(rng);
                sum += probs[static_cast<size_t>(v)];
            }
            for (double& x : probs) x /= sum;
            // exact normalization for the sum-to-one invariant
            double acc = 0.0;
            for (size_t v = 0; v + 1 < probs.size(); ++v) acc += probs[v];
            probs.back() = 1.0 - acc;
            params.set(s, std::move(probs));
        }
    }
    return params;
}

std::vector<std::vector<int>> sample_rows(const CStree& tree, const ParameterMap& params,
                                          std::int64_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    int p = tree.num_variables();
    // cumulative conditionals per level, indexed by parent prefix code
    std::vector<std::vector<double>> cdf(static_cast<size_t>(p));
    for (int k = 1; k <= p; ++k) {
        int d = tree.cardinality_at_level(k);
        std::int64_t m = tree.level_size(k - 1);
        cdf[static_cast<size_t>(k - 1)].resize(static_cast<size_t>(m * d));
        for (std::int64_t code = 0; code < m; ++code) {
            const auto& probs = params.at(tree.stage_of(tree.decode_prefix(k - 1, code)));
            double acc = 0.0;
            for (int v = 0; v < d; ++v) {
                acc += probs[static_cast<size_t>(v)];
                cdf[static_cast<size_t>(k - 1)][static_cast<size_t>(code * d + v)] = acc;
            }
        }
    }
    std::vector<std::vector<int>> rows;
    rows.reserve(static_cast<size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        std::vector<int> row(static_cast<size_t>(p));
        std::int64_t code = 0;
        for (int k = 1; k <= p; ++k) {
            int d = tree.cardinality_at_level(k);
            double u = uniform01(rng);
            int v = 0;
            while (v + 1 < d && u >= cdf[static_cast<size_t>(k - 1)][static_cast<size_t>(code * d + v)]) ++v;
            row[static_cast<size_t>(tree.level_variable(k))] = v;
            code = code * d + v;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

ContingencyTable sample(const CStree& tree, const ParameterMap& params, std::int64_t n,
                        std::uint64_t seed) {
    std::vector<int> shape;
    for (const auto& v : tree.variables()) shape.push_back(v.cardinality);
    ContingencyTable table(shape);
    for (const auto& row : sample_rows(tree, params, n, seed)) table.add(row);
    return table;
}

CStree bhc_cs(const std::vector<VariableSpec>& vars, const ContingencyTable& data,
              const std::vector<int>& order) {
    int p = static_cast<int>(vars.size());
    double log_n = data.total() > 0 ? std::log(static_cast<double>(data.total())) : 0.0;
    std::vector<LevelState> states(static_cast<size_t>(p));
    std::vector<std::vector<int>> prefixes;
    for (int k = 2; k <= p; ++k) {
        int d = vars[static_cast<size_t>(order[static_cast<size_t>(k - 1)])].cardinality;
        states[static_cast<size_t>(k - 1)] = initial_level_state(vars, data, order, k, prefixes);
        greedy_level(states[static_cast<size_t>(k - 1)], d, log_n, true, prefixes);
    }
    return CStree(vars, order, states_to_staging(vars, order, states));
}

GeneralStagedTree bhc_s(const std::vector<VariableSpec>& vars, const ContingencyTable& data,
                        const std::vector<int>& order) {
    int p = static_cast<int>(vars.size());
    double log_n = data.total() > 0 ? std::log(static_cast<double>(data.total())) : 0.0;
    std::vector<std::vector<std::vector<std::int64_t>>> blocks(static_cast<size_t>(p));
    std::vector<std::vector<int>> prefixes;
    for (int k = 2; k <= p; ++k) {
        int d = vars[static_cast<size_t>(order[static_cast<size_t>(k - 1)])].cardinality;
        LevelState st = initial_level_state(vars, data, order, k, prefixes);
        greedy_level(st, d, log_n, false, prefixes);
        for (auto& members : st.members)
            if (members.size() > 1) blocks[static_cast<size_t>(k - 1)].push_back(std::move(members));
    }
    return GeneralStagedTree(vars, order, std::move(blocks));
}

CStree bhc_cs_perm(const std::vector<VariableSpec>& vars, const ContingencyTable& data,
                   int max_vars) {
    int p = static_cast<int>(vars.size());
    if (p > max_vars) throw ModelError("permutation budget exceeded");
    std::vector<std::vector<int>> orders;
    std::vector<int> order(static_cast<size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    do {
        orders.push_back(order);
    } while (std::next_permutation(order.begin(), order.end()));

    int threads = 1;
    if (const char* env = std::getenv("CSTREE_THREADS")) threads = std::max(1, std::atoi(env));
    threads = std::min<int>(threads, static_cast<int>(orders.size()));

    std::vector<double> bics(orders.size());
    std::vector<std::optional<CStree>> results(orders.size());

    auto work = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            results[i] = bhc_cs(vars, data, orders[i]);
            bics[i] = bic(*results[i], data).bic;
        }
    };
    if (threads <= 1) {
        work(0, orders.size());
    } else {
        std::vector<std::thread> pool;
        size_t chunk = (orders.size() + static_cast<size_t>(threads) - 1) / static_cast<size_t>(threads);
        for (int t = 0; t < threads; ++t) {
            size_t begin = static_cast<size_t>(t) * chunk;
            size_t end = std::min(orders.size(), begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    // deterministic reduce: best BIC, ties to the lexicographically first ordering
    size_t best = 0;
    for (size_t i = 1; i < orders.size(); ++i)
        if (bics[i] > bics[best] + 1e-9) best = i;
    return *results[best];
}

namespace {

std::vector<int> stage_ids_cstree(const CStree& tree, int level) {
    std::int64_t m = tree.level_size(level - 1);
    std::vector<Stage> stages = tree.level_stages(level);
    std::vector<int> ids(static_cast<size_t>(m), -1);
    for (std::int64_t code = 0; code < m; ++code) {
        Stage s = tree.stage_of(tree.decode_prefix(level - 1, code));
        ids[static_cast<size_t>(code)] =
            static_cast<int>(std::lower_bound(stages.begin(), stages.end(), s) - stages.begin());
    }
    return ids;
}

std::vector<int> stage_ids_staged(const GeneralStagedTree& tree, int level) {
    std::int64_t m = tree.level_size(level - 1);
    std::vector<int> ids(static_cast<size_t>(m), -1);
    auto blocks = tree.level_blocks(level);
    for (size_t b = 0; b < blocks.size(); ++b)
        for (std::int64_t code : blocks[b]) ids[static_cast<size_t>(code)] = static_cast<int>(b);
    return ids;
}

std::int64_t pair_mismatch(const std::vector<int>& a, const std::vector<int>& b) {
    std::int64_t out = 0;
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = i + 1; j < a.size(); ++j)
            if ((a[i] == a[j]) != (b[i] == b[j])) ++out;
    return out;
}

template <typename TreeA, typename TreeB, typename IdsA, typename IdsB>
std::int64_t shd_impl(const TreeA& a, const TreeB& b, IdsA ids_a, IdsB ids_b) {
    if (a.order() != b.order() || a.num_variables() != b.num_variables())
        throw ModelError("shd requires identical variables and ordering");
    std::int64_t out = 0;
    for (int k = 1; k <= a.num_variables(); ++k) out += pair_mismatch(ids_a(a, k), ids_b(b, k));
    return out;
}

}  // namespace

std::int64_t shd(const CStree& a, const CStree& b) {
    return shd_impl(a, b, stage_ids_cstree, stage_ids_cstree);
}

std::int64_t shd(const GeneralStagedTree& a, const GeneralStagedTree& b) {
    return shd_impl(a, b, stage_ids_staged, stage_ids_staged);
}

PredictiveAccuracy predictive_accuracy_joint(const std::vector<double>& joint,
                                             const std::vector<int>& shape,
                                             const std::vector<std::vector<int>>& rows) {
    std::vector<std::int64_t> strides(shape.size());
    std::int64_t n = 1;
    for (int i = static_cast<int>(shape.size()) - 1; i >= 0; --i) {
        strides[static_cast<size_t>(i)] = n;
        n *= shape[static_cast<size_t>(i)];
    }
    PredictiveAccuracy out;
    std::int64_t correct = 0, total = 0;
    for (const auto& row : rows) {
        std::int64_t base = 0;
        for (size_t i = 0; i < row.size(); ++i) base += row[i] * strides[i];
        for (size_t i = 0; i < row.size(); ++i) {
            std::int64_t rest = base - row[i] * strides[i];
            int argmax = 0;
            double best = -1.0;
            double mass = 0.0;
            for (int v = 0; v < shape[i]; ++v) {
                double pr = joint[static_cast<size_t>(rest + v * strides[i])];
                mass += pr;
                if (pr > best + 1e-15) {
                    best = pr;
                    argmax = v;
                }
            }
            ++total;
            if (mass <= 0.0) {
                ++out.zero_mass;  // counted wrong
            } else if (argmax == row[i]) {
                ++correct;
            }
        }
    }
    out.accuracy = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    return out;
}

std::vector<double> fitted_joint(const CStree& tree, const ContingencyTable& data) {
    MleResult fit = mle(tree, data);
    std::vector<int> shape;
    for (const auto& v : tree.variables()) shape.push_back(v.cardinality);
    ContingencyTable probe(shape);
    std::vector<double> joint(static_cast<size_t>(probe.cells()));
    for (std::int64_t cell = 0; cell < probe.cells(); ++cell)
        joint[static_cast<size_t>(cell)] = fitted_probability(tree, fit.params, probe.decode(cell));
    return joint;
}

std::vector<double> fitted_joint(const GeneralStagedTree& tree, const ContingencyTable& data) {
    int p = tree.num_variables();
    // per level: conditional per parent code
    std::vector<std::vector<double>> cond(static_cast<size_t>(p));
    for (int k = 1; k <= p; ++k) {
        int d = tree.cardinality_at_level(k);
        std::vector<std::int64_t> lvl = level_fold(tree.variables(), data, tree.order(), k);
        std::int64_t m = static_cast<std::int64_t>(lvl.size()) / d;
        cond[static_cast<size_t>(k - 1)].assign(static_cast<size_t>(m * d), 1.0 / d);
        for (const auto& block : tree.level_blocks(k)) {
            std::vector<std::int64_t> counts(static_cast<size_t>(d), 0);
            for (std::int64_t parent : block)
                for (int v = 0; v < d; ++v) counts[static_cast<size_t>(v)] += lvl[static_cast<size_t>(parent * d + v)];
            std::int64_t total = 0;
            for (std::int64_t c : counts) total += c;
            if (!total) continue;  // unobserved stage keeps the uniform floret
            for (std::int64_t parent : block)
                for (int v = 0; v < d; ++v)
                    cond[static_cast<size_t>(k - 1)][static_cast<size_t>(parent * d + v)] =
                        static_cast<double>(counts[static_cast<size_t>(v)]) / static_cast<double>(total);
        }
    }
    std::vector<int> shape;
    for (const auto& v : tree.variables()) shape.push_back(v.cardinality);
    ContingencyTable probe(shape);
    std::vector<double> joint(static_cast<size_t>(probe.cells()), 1.0);
    for (std::int64_t cell = 0; cell < probe.cells(); ++cell) {
        std::vector<int> outcome = probe.decode(cell);
        std::int64_t code = 0;
        for (int k = 1; k <= p; ++k) {
            int d = tree.cardinality_at_level(k);
            int v = outcome[static_cast<size_t>(tree.order()[static_cast<size_t>(k - 1)])];
            joint[static_cast<size_t>(cell)] *= cond[static_cast<size_t>(k - 1)][static_cast<size_t>(code * d + v)];
            code = code * d + v;
        }
    }
    return joint;
}

std::vector<double> random_joint(const GeneralStagedTree& tree, std::uint64_t seed, double lo,
                                 double hi) {
    std::mt19937_64 rng(seed);
    int p = tree.num_variables();
    std::vector<std::vector<double>> cond(static_cast<size_t>(p));
    for (int k = 1; k <= p; ++k) {
        int d = tree.cardinality_at_level(k);
        std::int64_t m = tree.level_size(k - 1);
        cond[static_cast<size_t>(k - 1)].assign(static_cast<size_t>(m * d), 0.0);
        for (const auto& block : tree.level_blocks(k)) {
            std::vector<double> probs(static_cast<size_t>(d));
            double sum = 0.0;
            for (int v = 0; v < d; ++v) {
                probs[static_cast<size_t>(v)] = lo + (hi - lo) * uniform01(rng);
                sum += probs[static_cast<size_t>(v)];
            }
            for (double& x : probs) x /= sum;
            for (std::int64_t parent : block)
                for (int v = 0; v < d; ++v)
                    cond[static_cast<size_t>(k - 1)][static_cast<size_t>(parent * d + v)] = probs[static_cast<size_t>(v)];
        }
    }
    std::vector<int> shape;
    for (const auto& v : tree.variables()) shape.push_back(v.cardinality);
    ContingencyTable probe(shape);
    std::vector<double> joint(static_cast<size_t>(probe.cells()), 1.0);
    for (std::int64_t cell = 0; cell < probe.cells(); ++cell) {
        std::vector<int> outcome = probe.decode(cell);
        std::int64_t code = 0;
        for (int k = 1; k <= p; ++k) {
            int d = tree.cardinality_at_level(k);
            int v = outcome[static_cast<size_t>(tree.order()[static_cast<size_t>(k - 1)])];
            joint[static_cast<size_t>(cell)] *= cond[static_cast<size_t>(k - 1)][static_cast<size_t>(code * d + v)];
            code = code * d + v;
        }
    }
    return joint;
}

std::vector<std::vector<int>> sample_rows_from_joint(const std::vector<double>& joint,
                                                     const std::vector<int>& shape, std::int64_t n,
                                                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> cdf(joint.size());
    double acc = 0.0;
    for (size_t i = 0; i < joint.size(); ++i) {
        acc += joint[i];
        cdf[i] = acc;
    }
    ContingencyTable probe(shape);
    std::vector<std::vector<int>> rows;
    rows.reserve(static_cast<size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        double u = uniform01(rng) * acc;
        size_t cell = static_cast<size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        if (cell >= cdf.size()) cell = cdf.size() - 1;
        rows.push_back(probe.decode(static_cast<std::int64_t>(cell)));
    }
    return rows;
}

PredictiveAccuracy predictive_accuracy(const CStree& tree, const ParameterMap& params,
                                       const std::vector<std::vector<int>>& rows) {
    std::vector<int> shape;
    for (const auto& v : tree.variables()) shape.push_back(v.cardinality);
    ContingencyTable probe(shape);
    std::vector<double> joint(static_cast<size_t>(probe.cells()));
    for (std::int64_t cell = 0; cell < probe.cells(); ++cell)
        joint[static_cast<size_t>(cell)] = fitted_probability(tree, params, probe.decode(cell));
    return predictive_accuracy_joint(joint, shape, rows);
}

std::vector<SimulationRow> run_simulation(int p, double merge_prob, std::int64_t n, int trials,
                                          std::uint64_t seed, bool staged_trees) {
    std::vector<SimulationRow> out;
    std::vector<VariableSpec> vars = binary_variables(p);
    std::vector<int> order(static_cast<size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> shape(static_cast<size_t>(p), 2);
    for (int trial = 0; trial < trials; ++trial) {
        std::uint64_t s = seed + 7919ull * static_cast<std::uint64_t>(trial);
        SimulationRow row;
        row.trial = trial;
        row.n = n;
        std::vector<std::vector<int>> rows, holdout;
        std::int64_t stages_true = 0;
        std::optional<CStree> truth_cs;
        std::optional<GeneralStagedTree> truth_st;
        if (staged_trees) {
            truth_st = random_staged_tree(p, merge_prob, s);
            std::vector<double> joint = random_joint(*truth_st, s ^ 0x9e3779b97f4a7c15ull);
            rows = sample_rows_from_joint(joint, shape, n + 10, s ^ 0x5851f42d4c957f2dull);
            stages_true = truth_st->total_stages();
        } else {
            truth_cs = random_cstree(p, merge_prob, s);
            ParameterMap params = random_parameters(*truth_cs, s ^ 0x9e3779b97f4a7c15ull);
            rows = sample_rows(*truth_cs, params, n + 10, s ^ 0x5851f42d4c957f2dull);
            stages_true = truth_cs->total_stages();
        }
        holdout.assign(rows.end() - 10, rows.end());
        rows.resize(static_cast<size_t>(n));
        ContingencyTable data(shape);
        for (const auto& r : rows) data.add(r);

        auto start = std::chrono::steady_clock::now();
        row.stages_true = stages_true;
        if (staged_trees) {
            GeneralStagedTree learned = bhc_s(vars, data, order);
            row.shd = shd(*truth_st, learned);
            row.accuracy = predictive_accuracy_joint(fitted_joint(learned, data), shape, holdout).accuracy;
        } else {
            CStree learned = bhc_cs(vars, data, order);
            row.shd = shd(*truth_cs, learned);
            row.accuracy = predictive_accuracy_joint(fitted_joint(learned, data), shape, holdout).accuracy;
        }
        row.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
        out.push_back(row);
    }
    return out;
}

}  // namespace cstree
