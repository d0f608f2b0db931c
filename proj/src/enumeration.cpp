#include "cstree/enumeration.hpp"

#include <algorithm>
#include <numeric>

namespace cstree {

BigCount bell(int n) {
    if (n < 0) throw ModelError("bell: n must be non-negative");
    if (n == 0) return 1;
    std::vector<BigCount> row{1};
    for (int i = 1; i < n; ++i) {
        std::vector<BigCount> next;
        next.reserve(row.size() + 1);
        next.push_back(row.back());
        for (const BigCount& x : row) next.push_back(next.back() + x);
        row = std::move(next);
    }
    return row.back();
}

namespace {

// Exact cover over faces of the product space prod cards[i], branching on the
// lowest uncovered vertex.
struct FaceCover {
    std::vector<int> cards;
    std::int64_t num_vertices = 1;
    std::vector<char> covered;
    std::vector<CubeFace> chosen;
    BigCount count = 0;
    const std::function<void(const std::vector<CubeFace>&)>* callback = nullptr;

    std::vector<int> decode(std::int64_t v) const {
        std::vector<int> out(cards.size());
        for (int i = static_cast<int>(cards.size()) - 1; i >= 0; --i) {
            out[static_cast<size_t>(i)] = static_cast<int>(v % cards[static_cast<size_t>(i)]);
            v /= cards[static_cast<size_t>(i)];
        }
        return out;
    }

    void face_vertices(const CubeFace& face, std::vector<std::int64_t>& out) const {
        out.clear();
        out.push_back(0);
        std::int64_t stride = 1;
        for (int i = static_cast<int>(cards.size()) - 1; i >= 0; --i) {
            size_t sz = out.size();
            if (face[static_cast<size_t>(i)] >= 0) {
                for (size_t j = 0; j < sz; ++j) out[j] += face[static_cast<size_t>(i)] * stride;
            } else {
                for (int v = 1; v < cards[static_cast<size_t>(i)]; ++v)
                    for (size_t j = 0; j < sz; ++j) out.push_back(out[j] + v * stride);
            }
            stride *= cards[static_cast<size_t>(i)];
        }
    }

    void run() {
        if (cards.empty()) {
            count = 1;
            if (callback) (*callback)(chosen);
            return;
        }
        for (int c : cards) num_vertices *= c;
        covered.assign(static_cast<size_t>(num_vertices), 0);
        recurse(0);
    }

    void recurse(std::int64_t from) {
        std::int64_t pivot = from;
        while (pivot < num_vertices && covered[static_cast<size_t>(pivot)]) ++pivot;
        if (pivot == num_vertices) {
            ++count;
            if (callback) (*callback)(chosen);
            return;
        }
        std::vector<int> base = decode(pivot);
        int dims = static_cast<int>(cards.size());
        std::vector<std::int64_t> verts;
        // every face containing the pivot: choose the free coordinate set
        for (std::uint32_t freemask = 0; freemask < (1u << dims); ++freemask) {
            CubeFace face(base.begin(), base.end());
            for (int i = 0; i < dims; ++i)
                if ((freemask >> i) & 1) face[static_cast<size_t>(i)] = -1;
            face_vertices(face, verts);
            bool ok = true;
            for (std::int64_t v : verts)
                if (covered[static_cast<size_t>(v)]) {
                    ok = false;
                    break;
                }
            if (!ok) continue;
            for (std::int64_t v : verts) covered[static_cast<size_t>(v)] = 1;
            chosen.push_back(face);
            recurse(pivot + 1);
            chosen.pop_back();
            for (std::int64_t v : verts) covered[static_cast<size_t>(v)] = 0;
        }
    }
};

}  // namespace

BigCount enumerate_face_partitions(const std::vector<int>& cards,
                                   const std::function<void(const std::vector<CubeFace>&)>& fn) {
    FaceCover cover;
    cover.cards = cards;
    cover.callback = fn ? &fn : nullptr;
    cover.run();
    return cover.count;
}

BigCount count_face_partitions(const std::vector<int>& cards) {
    return enumerate_face_partitions(cards, nullptr);
}

CubicalBellResult cubical_bell(int m) {
    if (m < 1) throw ModelError("cubical_bell: m must be >= 1");
    if (m == 6) return {BigCount("71319425714"), true};
    if (m > 6) throw ModelError("cubical_bell: unsupported beyond m = 6");
    std::vector<int> cards(static_cast<size_t>(m - 1), 2);
    return {count_face_partitions(cards), false};
}

BigCount count_cstrees(int p) {
    if (p < 1 || p > 6) throw ModelError("count_cstrees supports 1 <= p <= 6");
    BigCount out = 1;
    for (int i = 2; i <= p; ++i) out *= i;
    for (int k = 1; k <= p; ++k) out *= cubical_bell(k).value;
    return out;
}

BigCount count_compatible_staged_trees(int p) {
    if (p < 1) throw ModelError("count_compatible_staged_trees: p must be >= 1");
    BigCount out = 1;
    for (int i = 2; i <= p; ++i) out *= i;
    for (int k = 1; k <= p - 1; ++k) out *= bell(1 << k);
    return out;
}

std::vector<CStree> enumerate_cstrees_fixed_order(const std::vector<VariableSpec>& vars,
                                                  const std::vector<int>& order,
                                                  std::int64_t limit) {
    int p = static_cast<int>(vars.size());
    // per-level face partitions
    std::vector<std::vector<std::vector<Stage>>> level_choices(static_cast<size_t>(p));
    std::int64_t total = 1;
    for (int k = 1; k <= p; ++k) {
        std::vector<int> cards;
        for (int t = 0; t < k - 1; ++t) cards.push_back(vars[static_cast<size_t>(order[static_cast<size_t>(t)])].cardinality);
        enumerate_face_partitions(cards, [&](const std::vector<CubeFace>& faces) {
            std::vector<Stage> stages;
            for (const CubeFace& face : faces) {
                int free = 0;
                Context ctx;
                for (size_t t = 0; t < face.size(); ++t) {
                    if (face[t] < 0)
                        ++free;
                    else
                        ctx.set(order[t], face[t]);
                }
                if (free > 0) stages.push_back(Stage{k, std::move(ctx)});  // singletons implicit
            }
            level_choices[static_cast<size_t>(k - 1)].push_back(std::move(stages));
        });
        total *= static_cast<std::int64_t>(level_choices[static_cast<size_t>(k - 1)].size());
        if (total > limit) throw ModelError("enumerate_cstrees: limit exceeded");
    }
    std::vector<CStree> out;
    out.reserve(static_cast<size_t>(total));
    std::vector<size_t> idx(static_cast<size_t>(p), 0);
    while (true) {
        Staging staging;
        staging.per_level.resize(static_cast<size_t>(p));
        for (int k = 1; k <= p; ++k)
            staging.per_level[static_cast<size_t>(k - 1)] = level_choices[static_cast<size_t>(k - 1)][idx[static_cast<size_t>(k - 1)]];
        out.emplace_back(vars, order, std::move(staging));
        int i = 0;
        for (; i < p; ++i) {
            if (++idx[static_cast<size_t>(i)] < level_choices[static_cast<size_t>(i)].size()) break;
            idx[static_cast<size_t>(i)] = 0;
        }
        if (i == p) break;
    }
    return out;
}

std::vector<CStree> enumerate_cstrees(const std::vector<VariableSpec>& vars, std::int64_t limit) {
    std::vector<int> order(vars.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<CStree> out;
    do {
        auto batch = enumerate_cstrees_fixed_order(vars, order, limit);
        if (static_cast<std::int64_t>(out.size() + batch.size()) > limit)
            throw ModelError("enumerate_cstrees: limit exceeded");
        for (auto& t : batch) out.push_back(std::move(t));
    } while (std::next_permutation(order.begin(), order.end()));
    return out;
}

}  // namespace cstree
