#include "cstree/interventions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cstree/enumeration.hpp"

namespace cstree {

namespace {

std::string prefix_string(const Prefix& prefix) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < prefix.size(); ++i) os << (i ? "," : "") << prefix[i];
    os << ")";
    return os.str();
}

}  // namespace

InterventionTarget target_from_stages(const CStree& tree, std::vector<Stage> stages,
                                      std::string name) {
    for (const Stage& s : stages) {
        if (s.level < 1 || s.level > tree.num_variables()) throw ModelError("target stage level out of range");
        // must be an actual stage of the tree: either stored or an uncovered singleton
        Stage canonical = s;
        auto members = tree.stage_members(s);
        if (members.empty()) throw ModelError("target stage is empty");
        if (!(tree.stage_of(members.front()) == s)) throw ModelError("target stage is not a stage of the tree");
    }
    std::sort(stages.begin(), stages.end());
    stages.erase(std::unique(stages.begin(), stages.end()), stages.end());
    return InterventionTarget{std::move(name), std::move(stages)};
}

std::set<Prefix> target_nodes(const CStree& tree, const InterventionTarget& target) {
    std::set<Prefix> out;
    for (const Stage& s : target.stages) {
        int d = tree.cardinality_at_level(s.level);
        for (const Prefix& member : tree.stage_members(s))
            for (int v = 0; v < d; ++v) {
                Prefix child = member;
                child.push_back(v);
                out.insert(std::move(child));
            }
    }
    return out;
}

InterventionTarget target_from_nodes(const CStree& tree, const std::set<Prefix>& nodes,
                                     std::string name) {
    std::set<Prefix> parents;
    for (const Prefix& node : nodes) {
        if (node.empty()) throw ModelError("target node has no parent");
        Prefix parent(node.begin(), node.end() - 1);
        parents.insert(std::move(parent));
    }
    std::vector<Stage> stages;
    for (const Prefix& parent : parents) {
        Stage s = tree.stage_of(parent);
        if (std::find(stages.begin(), stages.end(), s) == stages.end()) stages.push_back(s);
    }
    InterventionTarget target{std::move(name), std::move(stages)};
    std::sort(target.stages.begin(), target.stages.end());
    if (target_nodes(tree, target) != nodes)
        throw ModelError("node set is not the children of a union of whole stages");
    return target;
}

CompletenessReport is_complete(const CStree& tree, const InterventionTarget& target) {
    if (target.empty()) return {};
    std::vector<Context> minimal = minimal_contexts(tree);

    // targeted prefixes, grouped by level
    std::vector<std::set<std::int64_t>> targeted(static_cast<size_t>(tree.num_variables() + 1));
    for (const Stage& s : target.stages)
        for (const Prefix& member : tree.stage_members(s))
            targeted[static_cast<size_t>(s.level)].insert(tree.encode_prefix(member));

    auto prefix_context = [&](const Prefix& prefix) {
        Context ctx;
        for (size_t t = 0; t < prefix.size(); ++t) ctx.set(tree.order()[t], prefix[t]);
        return ctx;
    };

    for (int level = 1; level <= tree.num_variables(); ++level) {
        const auto& codes = targeted[static_cast<size_t>(level)];
        if (codes.empty()) continue;
        for (std::int64_t code : codes) {
            Prefix prefix = tree.decode_prefix(level - 1, code);
            Context full = prefix_context(prefix);
            bool has_sub = false;
            for (const Context& m : minimal) {
                if (!m.subcontext_of(full)) continue;
                has_sub = true;
                // all-or-nothing over prefixes sharing the minimal subcontext
                for (std::int64_t other = 0; other < tree.level_size(level - 1); ++other) {
                    if (codes.count(other)) continue;
                    Prefix candidate = tree.decode_prefix(level - 1, other);
                    if (m.subcontext_of(prefix_context(candidate)))
                        return {false, prefix_string(candidate)};
                }
            }
            if (!has_sub) return {false, prefix_string(prefix)};
        }
    }
    return {};
}

InterventionalCStree::InterventionalCStree(CStree base, TargetSet targets)
    : base_(std::move(base)), targets_(std::move(targets)) {
    if (targets_.targets.empty() || !targets_.targets.front().empty())
        throw ModelError("target set must start with the observational (empty) target");
    for (size_t j = 1; j < targets_.targets.size(); ++j) {
        if (targets_.targets[j].empty()) continue;  // a no-op arm shares every slot
        targets_.targets[j] = target_from_stages(base_, targets_.targets[j].stages,
                                                 targets_.targets[j].name);
    }
}

std::vector<int> InterventionalCStree::targeted_by(const Stage& stage) const {
    std::vector<int> out;
    for (int j = 1; j < targets_.num_targets(); ++j) {
        const auto& stages = targets_.targets[static_cast<size_t>(j)].stages;
        if (std::binary_search(stages.begin(), stages.end(), stage)) out.push_back(j);
    }
    return out;
}

int InterventionalCStree::num_slots(const Stage& stage) const {
    int targeted = static_cast<int>(targeted_by(stage).size());
    return targeted + (targeted < num_copies() ? 1 : 0);
}

std::int64_t InterventionalCStree::free_parameters() const {
    std::int64_t d = 0;
    for (int k = 1; k <= base_.num_variables(); ++k) {
        int dk = base_.cardinality_at_level(k) - 1;
        for (const Stage& s : base_.level_stages(k)) d += static_cast<std::int64_t>(dk) * num_slots(s);
    }
    return d;
}

ContextIDagSet context_idags(const InterventionalCStree& itree) {
    const CStree& tree = itree.base();
    CsiEngine engine(tree);
    ContextIDagSet out;
    out.contexts = engine.minimal_contexts();
    if (std::find(out.contexts.begin(), out.contexts.end(), Context{}) == out.contexts.end())
        out.contexts.insert(out.contexts.begin(), Context{});
    for (const auto& t : itree.targets().targets) out.target_names.push_back(t.name);

    for (const Context& ctx : out.contexts) {
        Dag base_graph = engine.context_graph(ctx);
        std::map<int, std::set<int>> placements;
        for (int j = 1; j < itree.num_copies(); ++j) {
            if (itree.targets().targets[static_cast<size_t>(j)].empty()) continue;
            std::set<int> heads;
            for (const Stage& s : itree.targets().targets[static_cast<size_t>(j)].stages) {
                int var = tree.level_variable(s.level);
                if (ctx.assigns(var)) continue;
                if (s.context.consistent_with(ctx)) heads.insert(var);
            }
            placements[j] = std::move(heads);  // w node present even with no heads
        }
        out.graphs.emplace(ctx, augment_idag(base_graph, placements));
    }
    return out;
}

namespace {

// per-target, per-context head sets as a comparable pattern
using WPattern = std::vector<std::vector<int>>;

std::vector<WPattern> w_patterns(const InterventionalCStree& it, const std::vector<Context>& contexts,
                                 const std::vector<int>& var_remap) {
    const CStree& tree = it.base();
    std::vector<WPattern> out;
    for (int j = 1; j < it.num_copies(); ++j) {
        if (it.targets().targets[static_cast<size_t>(j)].empty()) continue;
        WPattern pattern;
        for (const Context& ctx : contexts) {
            std::set<int> heads;
            for (const Stage& s : it.targets().targets[static_cast<size_t>(j)].stages) {
                int var = tree.level_variable(s.level);
                if (ctx.assigns(var)) continue;
                if (s.context.consistent_with(ctx)) heads.insert(var_remap.empty() ? var : var_remap[static_cast<size_t>(var)]);
            }
            pattern.emplace_back(heads.begin(), heads.end());
        }
        out.push_back(std::move(pattern));
    }
    return out;
}

std::vector<int> identity_remap(const CStree&) { return {}; }

// Bijection (index j in it1 -> index fo[j-1]+1 in it2) matching every pattern.
std::optional<std::vector<int>> match_patterns(const std::vector<WPattern>& p1,
                                               const std::vector<WPattern>& p2) {
    if (p1.size() != p2.size()) return std::nullopt;
    size_t n = p1.size();
    std::vector<int> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i);
    std::sort(perm.begin(), perm.end());
    do {
        bool ok = true;
        for (size_t i = 0; i < n && ok; ++i)
            if (p1[i] != p2[static_cast<size_t>(perm[i])]) ok = false;
        if (ok) {
            std::vector<int> phi(n + 1);
            phi[0] = 0;
            for (size_t i = 0; i < n; ++i) phi[i + 1] = perm[i] + 1;
            return phi;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::nullopt;
}

std::vector<int> remap_for(const CStree& t1, const CStree& t2) {
    std::map<std::string, int> to1;
    for (int v = 0; v < t1.num_variables(); ++v) to1[t1.variable(v).name] = v;
    if (t2.num_variables() != t1.num_variables()) throw ModelError("variable sets differ");
    std::vector<int> remap(static_cast<size_t>(t2.num_variables()));
    for (int v = 0; v < t2.num_variables(); ++v) {
        auto it = to1.find(t2.variable(v).name);
        if (it == to1.end() || t1.variable(it->second).cardinality != t2.variable(v).cardinality)
            throw ModelError("variable sets differ");
        remap[static_cast<size_t>(v)] = it->second;
    }
    return remap;
}

Context remap_context(const Context& ctx, const std::vector<int>& remap) {
    Context out;
    for (const auto& [var, val] : ctx.items()) out.set(remap[static_cast<size_t>(var)], val);
    return out;
}

}  // namespace

std::optional<std::vector<int>> compatible(const InterventionalCStree& it1,
                                           const InterventionalCStree& it2) {
    std::vector<int> remap = remap_for(it1.base(), it2.base());

    std::vector<Context> c1 = minimal_contexts(it1.base());
    std::vector<Context> c2raw = minimal_contexts(it2.base());
    std::set<Context> c2;
    for (const Context& ctx : c2raw) c2.insert(remap_context(ctx, remap));
    if (std::set<Context>(c1.begin(), c1.end()) != c2) return std::nullopt;
    std::vector<Context> contexts = c1;
    if (std::find(contexts.begin(), contexts.end(), Context{}) == contexts.end())
        contexts.insert(contexts.begin(), Context{});

    // it2's contexts expressed in its own variable ids, aligned with `contexts`
    std::vector<int> inverse(remap.size());
    for (size_t v = 0; v < remap.size(); ++v) inverse[static_cast<size_t>(remap[v])] = static_cast<int>(v);
    std::vector<Context> contexts2;
    for (const Context& ctx : contexts) contexts2.push_back(remap_context(ctx, inverse));

    return match_patterns(w_patterns(it1, contexts, identity_remap(it1.base())),
                          w_patterns(it2, contexts2, remap));
}

bool interventional_equivalent(const InterventionalCStree& it1, const InterventionalCStree& it2) {
    for (const auto* it : {&it1, &it2})
        for (int j = 1; j < it->num_copies(); ++j) {
            if (it->targets().targets[static_cast<size_t>(j)].empty())
                throw ModelError("equivalence requires nonempty targets beyond the observational one");
            auto report = is_complete(it->base(), it->targets().targets[static_cast<size_t>(j)]);
            if (!report.complete)
                throw ModelError("incomplete intervention target; witness prefix " + report.witness);
        }

    auto phi = compatible(it1, it2);
    if (!phi) return false;

    std::vector<int> remap = remap_for(it1.base(), it2.base());
    ContextIDagSet g1 = context_idags(it1);
    ContextIDagSet g2 = context_idags(it2);

    for (const Context& ctx : g1.contexts) {
        const IDag& idag1 = g1.graphs.at(ctx);
        // locate the matching context in it2's coordinates
        std::vector<int> inverse(remap.size());
        for (size_t v = 0; v < remap.size(); ++v) inverse[static_cast<size_t>(remap[v])] = static_cast<int>(v);
        const IDag& idag2 = g2.graphs.at(remap_context(ctx, inverse));

        // bring idag2 into it1's variable ids and it1's target indices
        std::vector<int> nodes;
        std::vector<std::pair<int, int>> edges;
        std::vector<int> phi_inv(phi->size());
        for (size_t i = 0; i < phi->size(); ++i) phi_inv[static_cast<size_t>((*phi)[i])] = static_cast<int>(i);
        auto map_node = [&](int id) {
            if (Dag::is_w_node(id)) return Dag::w_node(phi_inv[static_cast<size_t>(Dag::w_target(id))]);
            return remap[static_cast<size_t>(id)];
        };
        for (int id : idag2.graph.nodes()) nodes.push_back(map_node(id));
        for (const auto& [f, t] : idag2.graph.edges()) edges.emplace_back(map_node(f), map_node(t));
        Dag mapped(std::move(nodes), std::move(edges));

        // conditions (2) and (3) on the variable part, condition (4) on w nodes
        auto strip = [](const Dag& g) {
            std::vector<int> vs;
            std::vector<std::pair<int, int>> es;
            for (int id : g.nodes())
                if (!Dag::is_w_node(id)) vs.push_back(id);
            for (const auto& [f, t] : g.edges())
                if (!Dag::is_w_node(f) && !Dag::is_w_node(t)) es.emplace_back(f, t);
            return Dag(std::move(vs), std::move(es));
        };
        // base skeleton and v-structures must agree on every context; for an
        // empty context outside C_T both bases are complete DAGs anyway
        if (!markov_equivalent(strip(idag1.graph), strip(mapped))) return false;
        auto wv = [](const Dag& g) {
            std::set<std::tuple<int, int, int>> out;
            for (const auto& v : v_structures(g)) {
                auto [a, k, b] = v;
                if (Dag::is_w_node(a) || Dag::is_w_node(b)) out.insert(v);
            }
            return out;
        };
        if (wv(idag1.graph) != wv(mapped)) return false;
    }
    return true;
}

bool imarkov_invariance_query(const ContextIDagSet& idags, int target_index,
                              const std::vector<int>& a, const std::vector<int>& s,
                              const Context& ctx) {
    const IDag& idag = idags.graphs.at(ctx);
    std::vector<int> cond = s;
    for (int id : idag.graph.nodes())
        if (Dag::is_w_node(id) && Dag::w_target(id) != target_index) cond.push_back(id);
    return d_separated(idag.graph, a, {Dag::w_node(target_index)}, cond);
}

namespace {

double entropy_term(const std::vector<std::int64_t>& vec) {
    std::int64_t m = 0;
    for (std::int64_t c : vec) m += c;
    if (!m) return 0.0;
    double h = 0.0;
    for (std::int64_t c : vec)
        if (c) h += static_cast<double>(c) * std::log(static_cast<double>(c) / static_cast<double>(m));
    return h;
}

// per-table stage-count maps for one base tree
std::vector<std::map<Stage, std::vector<std::int64_t>>> per_table_counts(
    const CStree& tree, const std::vector<ContingencyTable>& tables) {
    std::vector<std::map<Stage, std::vector<std::int64_t>>> out;
    out.reserve(tables.size());
    for (const auto& u : tables) out.push_back(stage_counts(tree, u));
    return out;
}

double slot_loglik(const InterventionalCStree& itree,
                   const std::vector<std::map<Stage, std::vector<std::int64_t>>>& counts) {
    const CStree& tree = itree.base();
    double ll = 0.0;
    for (int k = 1; k <= tree.num_variables(); ++k) {
        int d = tree.cardinality_at_level(k);
        for (const Stage& stage : tree.level_stages(k)) {
            std::vector<int> targeted = itree.targeted_by(stage);
            std::vector<std::int64_t> shared(static_cast<size_t>(d), 0);
            bool any_shared = false;
            for (int j = 0; j < itree.num_copies(); ++j) {
                const auto& vec = counts[static_cast<size_t>(j)].at(stage);
                if (std::find(targeted.begin(), targeted.end(), j) != targeted.end()) {
                    ll += entropy_term(vec);
                } else {
                    any_shared = true;
                    for (int v = 0; v < d; ++v) shared[static_cast<size_t>(v)] += vec[static_cast<size_t>(v)];
                }
            }
            if (any_shared) ll += entropy_term(shared);
        }
    }
    return ll;
}

}  // namespace

Score interventional_bic(const InterventionalCStree& itree,
                         const std::vector<ContingencyTable>& tables) {
    if (static_cast<int>(tables.size()) != itree.num_copies())
        throw ModelError("need one table per target");
    std::int64_t n = 0;
    for (const auto& u : tables) n += u.total();
    Score s;
    s.loglik = slot_loglik(itree, per_table_counts(itree.base(), tables));
    s.free_params = itree.free_parameters();
    s.n = n;
    s.bic = n > 0 ? s.loglik - 0.5 * static_cast<double>(s.free_params) * std::log(static_cast<double>(n))
                  : s.loglik;
    return s;
}

TargetSearchResult search_targets_over_class(const std::vector<CStree>& trees,
                                             const ContingencyTable& obs,
                                             const std::vector<ContingencyTable>& interventional,
                                             std::int64_t budget) {
    if (trees.empty()) throw ModelError("empty equivalence class");
    int K = static_cast<int>(interventional.size());

    TargetSearchResult out;
    out.best.bic = -std::numeric_limits<double>::infinity();

    std::vector<ContingencyTable> tables;
    tables.push_back(obs);
    for (const auto& u : interventional) tables.push_back(u);

    std::int64_t n = 0;
    for (const auto& u : tables) n += u.total();

    for (const CStree& tree : trees) {
        std::vector<Stage> stages;
        for (int k = 1; k <= tree.num_variables(); ++k)
            for (const Stage& s : tree.level_stages(k)) stages.push_back(s);
        int ns = static_cast<int>(stages.size());
        if (ns >= 62) throw ModelError("search budget exceeded");
        if ((std::int64_t{1} << ns) > budget) throw ModelError("search budget exceeded");

        // complete stage subsets (the empty subset means "no intervention")
        std::vector<std::vector<Stage>> complete_subsets;
        for (std::int64_t mask = 0; mask < (std::int64_t{1} << ns); ++mask) {
            std::vector<Stage> subset;
            for (int i = 0; i < ns; ++i)
                if ((mask >> i) & 1) subset.push_back(stages[static_cast<size_t>(i)]);
            InterventionTarget t{"candidate", subset};
            if (subset.empty() || is_complete(tree, t).complete)
                complete_subsets.push_back(std::move(subset));
        }

        std::int64_t total = 1;
        for (int j = 0; j < K; ++j) {
            total *= static_cast<std::int64_t>(complete_subsets.size());
            if (total > budget) throw ModelError("search budget exceeded");
        }

        auto counts = per_table_counts(tree, tables);
        std::vector<size_t> pick(static_cast<size_t>(K), 0);
        while (true) {
            TargetSet ts;
            ts.targets.push_back(InterventionTarget{"observational", {}});
            for (int j = 0; j < K; ++j) {
                std::ostringstream name;
                name << "I" << (j + 1);
                ts.targets.push_back(
                    InterventionTarget{name.str(), complete_subsets[pick[static_cast<size_t>(j)]]});
            }
            InterventionalCStree cand(tree, ts);
            Score s;
            s.loglik = slot_loglik(cand, counts);
            s.free_params = cand.free_parameters();
            s.n = n;
            s.bic = n > 0
                        ? s.loglik - 0.5 * static_cast<double>(s.free_params) * std::log(static_cast<double>(n))
                        : s.loglik;
            if (s.bic > out.best.bic + 1e-9) {
                out.best = s;
                out.ties.clear();
                out.ties.push_back(std::move(cand));
            } else if (std::abs(s.bic - out.best.bic) <= 1e-9) {
                out.ties.push_back(std::move(cand));
            }
            int j = 0;
            for (; j < K; ++j) {
                if (++pick[static_cast<size_t>(j)] < complete_subsets.size()) break;
                pick[static_cast<size_t>(j)] = 0;
            }
            if (j == K || K == 0) break;
        }
    }
    return out;
}

std::vector<CStree> equivalence_class(const CStree& tree, std::int64_t limit) {
    // Candidates share the variable list, so signatures compare directly;
    // Markov equivalence of the context graphs reduces to signature equality.
    EquivalenceSignature reference = equivalence_signature(tree);
    std::vector<CStree> all = enumerate_cstrees(tree.variables(), limit);
    std::vector<CStree> out;
    for (CStree& candidate : all)
        if (equivalence_signature(candidate) == reference) out.push_back(std::move(candidate));
    return out;
}

}  // namespace cstree
