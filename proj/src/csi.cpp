#include "cstree/csi.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <tuple>

namespace cstree {

CsiRelation::CsiRelation(std::vector<int> a_, std::vector<int> b_, std::vector<int> s_, Context ctx_)
    : a(std::move(a_)), b(std::move(b_)), s(std::move(s_)), ctx(std::move(ctx_)) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::sort(s.begin(), s.end());
    if (b < a) std::swap(a, b);
}

bool CsiRelation::operator<(const CsiRelation& rhs) const {
    return std::tie(a, b, s, ctx) < std::tie(rhs.a, rhs.b, rhs.s, rhs.ctx);
}

bool CsiRelation::operator==(const CsiRelation& rhs) const {
    return a == rhs.a && b == rhs.b && s == rhs.s && ctx == rhs.ctx;
}

CsiSet stage_relations(const CStree& tree) {
    CsiSet out;
    out.vars = tree.variables();
    for (int k = 2; k <= tree.num_variables(); ++k)
        for (const Stage& stage : tree.staging().per_level[k - 1]) {
            std::vector<int> b;
            for (int t = 0; t < k - 1; ++t) {
                int var = tree.order()[t];
                if (!stage.context.assigns(var)) b.push_back(var);
            }
            if (b.empty()) continue;
            out.relations.insert(CsiRelation({tree.level_variable(k)}, std::move(b), {}, stage.context));
        }
    return out;
}

namespace {

// Brute-force closure bookkeeping: masks over variable indices plus a
// variable-keyed context face.
struct RawRelation {
    std::uint32_t a = 0, b = 0, s = 0;
    std::uint32_t cmask = 0;
    std::uint64_t cvals = 0;

    void canonicalize() {
        if (b < a) std::swap(a, b);
    }
    bool operator<(const RawRelation& rhs) const {
        return std::tie(a, b, s, cmask, cvals) < std::tie(rhs.a, rhs.b, rhs.s, rhs.cmask, rhs.cvals);
    }
};

std::vector<int> mask_to_vars(std::uint32_t m) {
    std::vector<int> out;
    while (m) {
        out.push_back(__builtin_ctz(m));
        m &= m - 1;
    }
    return out;
}

std::uint32_t vars_to_mask(const std::vector<int>& vars) {
    std::uint32_t m = 0;
    for (int v : vars) m |= 1u << v;
    return m;
}

int raw_cval(const RawRelation& r, int v) { return static_cast<int>((r.cvals >> (4 * v)) & 0xF); }

void foreach_submask(std::uint32_t m, const std::function<void(std::uint32_t)>& fn) {
    // all nonempty submasks
    for (std::uint32_t s = m; s; s = (s - 1) & m) fn(s);
}

}  // namespace

CsiSet axiom_closure(const CsiSet& js, std::size_t max_relations) {
    const auto& vars = js.vars;
    if (vars.size() > 8) throw ModelError("axiom_closure supports at most 8 variables");
    std::set<RawRelation> seen;
    std::deque<RawRelation> work;
    auto push = [&](RawRelation r) {
        if (!r.a || !r.b) return;
        r.canonicalize();
        if (seen.insert(r).second) work.push_back(r);
    };
    for (const auto& rel : js.relations) {
        RawRelation r;
        r.a = vars_to_mask(rel.a);
        r.b = vars_to_mask(rel.b);
        r.s = vars_to_mask(rel.s);
        for (const auto& [var, val] : rel.ctx.items()) {
            r.cmask |= 1u << var;
            r.cvals |= static_cast<std::uint64_t>(val) << (4 * var);
        }
        push(r);
    }

    bool complete = true;
    auto over_budget = [&] { return seen.size() > max_relations; };

    while (!work.empty() && !over_budget()) {
        RawRelation r = work.front();
        work.pop_front();

        // (2) decomposition and (3) weak union, on both sides
        for (int side = 0; side < 2; ++side) {
            std::uint32_t big = side ? r.b : r.a;
            foreach_submask(big, [&](std::uint32_t drop) {
                if (drop == big) return;
                RawRelation d = r;
                (side ? d.b : d.a) = big & ~drop;
                push(d);  // decomposition
                RawRelation w = d;
                w.s |= drop;  // weak union
                push(w);
            });
        }
        // (6) specialization
        foreach_submask(r.s, [&](std::uint32_t tmask) {
            std::vector<int> tv = mask_to_vars(tmask);
            std::vector<int> counter(tv.size(), 0);
            while (true) {
                RawRelation d = r;
                d.s &= ~tmask;
                d.cmask |= tmask;
                for (size_t i = 0; i < tv.size(); ++i)
                    d.cvals |= static_cast<std::uint64_t>(counter[i]) << (4 * tv[i]);
                push(d);
                size_t i = 0;
                for (; i < tv.size(); ++i) {
                    if (++counter[i] < vars[tv[i]].cardinality) break;
                    counter[i] = 0;
                }
                if (i == tv.size()) break;
            }
        });
        // (7) absorption over single context variables (iterates to subsets)
        for (int v : mask_to_vars(r.cmask)) {
            bool all = true;
            for (int val = 0; val < vars[v].cardinality && all; ++val) {
                RawRelation probe = r;
                probe.cvals = (r.cvals & ~(0xFull << (4 * v))) | (static_cast<std::uint64_t>(val) << (4 * v));
                if (!seen.count(probe)) all = false;
            }
            if (all) {
                RawRelation d = r;
                d.cmask &= ~(1u << v);
                d.cvals &= ~(0xFull << (4 * v));
                d.s |= 1u << v;
                push(d);
            }
        }
        // (4) contraction and (5) intersection need a partner; try the freshly
        // processed relation in both premise slots
        std::vector<RawRelation> partners(seen.begin(), seen.end());
        for (const RawRelation& partner : partners) {
            if (partner.cmask != r.cmask || partner.cvals != r.cvals) continue;
            for (int which = 0; which < 2; ++which) {
                const RawRelation& p1 = which ? partner : r;
                const RawRelation& p2 = which ? r : partner;
                for (int s1 = 0; s1 < 2; ++s1)
                    for (int s2 = 0; s2 < 2; ++s2) {
                        std::uint32_t A1 = s1 ? p1.b : p1.a, B1 = s1 ? p1.a : p1.b;
                        std::uint32_t A2 = s2 ? p2.b : p2.a, B2 = s2 ? p2.a : p2.b;
                        if (A1 != A2) continue;
                        // contraction: <A,B|S∪D> + <A,D|S> -> <A,B∪D|S>
                        if ((B2 & (A1 | B1)) == 0 && (B2 & p1.s) == B2 && p2.s == (p1.s & ~B2)) {
                            RawRelation d = p1;
                            d.a = A1;
                            d.b = B1 | B2;
                            d.s = p2.s;
                            push(d);
                        }
                        // intersection: <A,B|S∪D> + <A,S|B∪D> -> <A,B∪S|D>
                        if ((B2 & p1.s) == B2 && B2 != 0) {
                            std::uint32_t dmask = p1.s & ~B2;
                            if (p2.s == (B1 | dmask)) {
                                RawRelation d = p1;
                                d.a = A1;
                                d.b = B1 | B2;
                                d.s = dmask;
                                push(d);
                            }
                        }
                    }
            }
        }
        if (over_budget()) {
            complete = false;
            break;
        }
    }
    if (over_budget()) complete = false;

    CsiSet out;
    out.vars = vars;
    out.closure_complete = complete;
    for (const RawRelation& r : seen) {
        Context ctx;
        for (int v : mask_to_vars(r.cmask)) ctx.set(v, raw_cval(r, v));
        out.relations.insert(
            CsiRelation(mask_to_vars(r.a), mask_to_vars(r.b), mask_to_vars(r.s), std::move(ctx)));
    }
    return out;
}

std::vector<Context> minimal_contexts(const CsiSet& closed) {
    std::set<Context> out;
    for (const auto& rel : closed.relations) {
        if (rel.ctx.empty()) {
            out.insert(rel.ctx);
            continue;
        }
        bool minimal = true;
        for (const auto& [var, val] : rel.ctx.items()) {
            Context sub;
            for (const auto& [v2, val2] : rel.ctx.items())
                if (v2 != var) sub.set(v2, val2);
            std::vector<int> s2 = rel.s;
            s2.push_back(var);
            if (closed.relations.count(CsiRelation(rel.a, rel.b, std::move(s2), std::move(sub)))) {
                minimal = false;
                break;
            }
        }
        if (minimal) out.insert(rel.ctx);
    }
    if (out.empty()) out.insert(Context{});
    return {out.begin(), out.end()};
}

CsiEngine::Face CsiEngine::face_with(Face f, int t, int v) {
    f.mask |= 1u << t;
    f.vals = (f.vals & ~(0xFull << (4 * t))) | (static_cast<std::uint64_t>(v) << (4 * t));
    return f;
}

CsiEngine::Face CsiEngine::face_without(Face f, int t) {
    f.mask &= ~(1u << t);
    f.vals &= ~(0xFull << (4 * t));
    return f;
}

CsiEngine::Face CsiEngine::context_to_face(const Context& ctx) const {
    Face f;
    for (const auto& [var, val] : ctx.items()) f = face_with(f, tree_->position_of(var), val);
    return f;
}

Context CsiEngine::face_to_context(const Face& f) const {
    Context ctx;
    std::uint32_t m = f.mask;
    while (m) {
        int t = __builtin_ctz(m);
        m &= m - 1;
        ctx.set(tree_->order()[t], face_value(f, t));
    }
    return ctx;
}

CsiEngine::CsiEngine(const CStree& tree) : tree_(&tree) {
    if (tree.num_variables() > 16) throw ModelError("CsiEngine supports at most 16 variables");
    for (const auto& v : tree.variables())
        if (v.cardinality > 15) throw ModelError("CsiEngine supports cardinalities up to 15");
    families_.resize(tree.num_variables());
    for (int k = 2; k <= tree.num_variables(); ++k) close_level(k);
}

void CsiEngine::close_level(int level) {
    auto& family = families_[level - 1];
    std::deque<std::pair<std::uint32_t, Face>> work;
    auto push = [&](std::uint32_t bmask, const Face& face) {
        if (!bmask) return;
        if (family[bmask].insert(face).second) work.emplace_back(bmask, face);
    };
    std::uint32_t all = (1u << (level - 1)) - 1;
    for (const Stage& stage : tree_->staging().per_level[level - 1]) {
        Face face = context_to_face(stage.context);
        push(all & ~face.mask, face);
    }
    while (!work.empty()) {
        auto [bmask, face] = work.front();
        work.pop_front();
        // weak union: move a variable from the independence set into S
        if (__builtin_popcount(bmask) >= 2) {
            std::uint32_t m = bmask;
            while (m) {
                int t = __builtin_ctz(m);
                m &= m - 1;
                push(bmask & ~(1u << t), face);
            }
        }
        // specialization: fix a free conditioning variable
        std::uint32_t free = all & ~bmask & ~face.mask;
        std::uint32_t m = free;
        while (m) {
            int t = __builtin_ctz(m);
            m &= m - 1;
            int d = tree_->variable(tree_->order()[t]).cardinality;
            for (int v = 0; v < d; ++v) push(bmask, face_with(face, t, v));
        }
        // absorption: a fixed variable whose every outcome is present merges away
        m = face.mask;
        while (m) {
            int t = __builtin_ctz(m);
            m &= m - 1;
            int d = tree_->variable(tree_->order()[t]).cardinality;
            bool allvals = true;
            const auto& faces = family[bmask];
            for (int v = 0; v < d && allvals; ++v)
                if (!faces.count(face_with(face, t, v))) allvals = false;
            if (allvals) push(bmask, face_without(face, t));
        }
    }
}

std::vector<Context> CsiEngine::minimal_contexts() const {
    std::set<Context> out;
    bool any = false;
    for (int k = 2; k <= tree_->num_variables(); ++k)
        for (const auto& [bmask, faces] : families_[k - 1])
            for (const Face& face : faces) {
                any = true;
                bool minimal = true;
                std::uint32_t m = face.mask;
                while (m && minimal) {
                    int t = __builtin_ctz(m);
                    m &= m - 1;
                    if (faces.count(face_without(face, t))) minimal = false;
                }
                if (minimal) out.insert(face_to_context(face));
            }
    if (!any) out.insert(Context{});
    return {out.begin(), out.end()};
}

bool CsiEngine::imap_edge_absent(int a, int b, const Context& ctx) const {
    int tb = tree_->position_of(b);
    for (const auto& [var, val] : ctx.items())
        if (tree_->position_of(var) >= tb) return false;
    Face face = context_to_face(ctx);
    std::uint32_t bmask = 1u << tree_->position_of(a);
    auto it = families_[tb].find(bmask);
    if (it == families_[tb].end()) return false;
    return it->second.count(face) != 0;
}

Dag CsiEngine::context_graph(const Context& ctx) const {
    std::vector<int> nodes;
    for (int t = 0; t < tree_->num_variables(); ++t) {
        int var = tree_->order()[t];
        if (!ctx.assigns(var)) nodes.push_back(var);
    }
    return minimal_imap(
        [this, &ctx](int b, int a, const std::vector<int>&) { return imap_edge_absent(a, b, ctx); },
        nodes);
}

std::vector<Context> minimal_contexts(const CStree& tree) {
    return CsiEngine(tree).minimal_contexts();
}

ContextGraphSet context_graphs(const CStree& tree) {
    CsiEngine engine(tree);
    ContextGraphSet out;
    out.contexts = engine.minimal_contexts();
    for (const Context& ctx : out.contexts) out.graphs.emplace(ctx, engine.context_graph(ctx));
    return out;
}

bool cstree_equivalent(const CStree& t1, const CStree& t2) {
    std::map<std::string, int> to1;
    for (int v = 0; v < t1.num_variables(); ++v) to1[t1.variable(v).name] = v;
    if (t2.num_variables() != t1.num_variables()) throw ModelError("variable sets differ");
    std::vector<int> remap(t2.num_variables());
    for (int v = 0; v < t2.num_variables(); ++v) {
        auto it = to1.find(t2.variable(v).name);
        if (it == to1.end() || t1.variable(it->second).cardinality != t2.variable(v).cardinality)
            throw ModelError("variable sets differ");
        remap[v] = it->second;
    }

    ContextGraphSet g1 = context_graphs(t1);
    ContextGraphSet g2 = context_graphs(t2);
    auto remap_ctx = [&](const Context& ctx) {
        Context out;
        for (const auto& [var, val] : ctx.items()) out.set(remap[var], val);
        return out;
    };
    std::set<Context> c1(g1.contexts.begin(), g1.contexts.end());
    std::set<Context> c2;
    for (const Context& ctx : g2.contexts) c2.insert(remap_ctx(ctx));
    if (c1 != c2) return false;
    for (const auto& [ctx, dag2] : g2.graphs) {
        std::vector<int> nodes;
        std::vector<std::pair<int, int>> edges;
        for (int id : dag2.nodes()) nodes.push_back(remap[id]);
        for (const auto& [f, t] : dag2.edges()) edges.emplace_back(remap[f], remap[t]);
        Dag mapped(std::move(nodes), std::move(edges));
        const Dag& dag1 = g1.graphs.at(remap_ctx(ctx));
        if (!markov_equivalent(dag1, mapped)) return false;
    }
    return true;
}

EquivalenceSignature equivalence_signature(const CStree& tree) {
    CsiEngine engine(tree);
    EquivalenceSignature out;
    for (const Context& ctx : engine.minimal_contexts()) {
        Dag g = engine.context_graph(ctx);
        out.emplace(ctx, std::make_pair(skeleton(g), v_structures(g)));
    }
    return out;
}

std::string context_name(const std::vector<VariableSpec>& vars, const Context& ctx) {
    if (ctx.empty()) return "empty";
    std::ostringstream os;
    bool first = true;
    for (const auto& [var, val] : ctx.items()) {
        if (!first) os << ", ";
        first = false;
        os << vars[var].name << "=";
        if (!vars[var].labels.empty())
            os << vars[var].labels[val];
        else
            os << val;
    }
    return os.str();
}

std::string context_report(const CStree& tree) {
    std::ostringstream os;
    ContextGraphSet graphs = context_graphs(tree);
    for (const Context& ctx : graphs.contexts) {
        os << "context " << context_name(tree.variables(), ctx) << ":";
        const Dag& g = graphs.graphs.at(ctx);
        bool any = false;
        for (const auto& [f, t] : g.edges()) {
            os << (any ? ", " : " ") << tree.variable(f).name << "->" << tree.variable(t).name;
            any = true;
        }
        if (!any) os << " (no edges)";
        os << "\n";
    }
    return os.str();
}

}  // namespace cstree
