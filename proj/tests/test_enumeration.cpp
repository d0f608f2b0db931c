#include <doctest.h>

#include <functional>
#include <set>

#include "cstree/enumeration.hpp"
#include "fixtures.hpp"

using namespace cstree;

namespace {

// independent Bell oracle: count set partitions via restricted growth strings
std::int64_t partitions_of_set(int n) {
    std::function<std::int64_t(int, int)> rec = [&](int i, int blocks) -> std::int64_t {
        if (i == n) return 1;
        std::int64_t total = 0;
        for (int b = 0; b <= blocks; ++b) total += rec(i + 1, std::max(blocks, b + 1));
        return total;
    };
    return n == 0 ? 1 : rec(1, 1);
}

// independent cubical Bell oracle: enumerate all vertex partitions of the
// m-cube and keep those whose blocks are faces
bool block_is_face(const std::vector<std::int64_t>& block, int dims) {
    std::int64_t fixed_mask = 0, fixed_vals = 0;
    std::int64_t free_count = 0;
    for (int d = 0; d < dims; ++d) {
        bool same = true;
        for (std::int64_t v : block)
            if (((v >> d) & 1) != ((block[0] >> d) & 1)) same = false;
        if (same) {
            fixed_mask |= std::int64_t{1} << d;
            fixed_vals |= block[0] & (std::int64_t{1} << d);
        } else {
            ++free_count;
        }
    }
    return static_cast<std::int64_t>(block.size()) == (std::int64_t{1} << free_count) &&
           [&] {
               for (std::int64_t v : block)
                   if ((v & fixed_mask) != fixed_vals) return false;
               return true;
           }();
}

std::int64_t face_partitions_by_exhaustion(int dims) {
    std::int64_t n = std::int64_t{1} << dims;
    std::vector<std::vector<std::int64_t>> blocks;
    std::int64_t count = 0;
    std::function<void(std::int64_t)> rec = [&](std::int64_t v) {
        if (v == n) {
            for (const auto& block : blocks)
                if (!block_is_face(block, dims)) return;
            ++count;
            return;
        }
        for (auto& block : blocks) {
            block.push_back(v);
            rec(v + 1);
            block.pop_back();
        }
        blocks.push_back({v});
        rec(v + 1);
        blocks.pop_back();
    };
    rec(0);
    return count;
}

}  // namespace

TEST_CASE("Bell numbers") {
    CHECK(bell(0) == 1);
    CHECK(bell(1) == 1);
    CHECK(bell(2) == 2);
    CHECK(bell(4) == 15);
    CHECK(bell(4) == partitions_of_set(4));
    CHECK(bell(8) == 4140);
    CHECK(bell(8) == partitions_of_set(8));
    CHECK_THROWS(bell(-1));
}

TEST_CASE("cubical Bell numbers match the published list") {
    CHECK(cubical_bell(1).value == 1);
    CHECK(cubical_bell(2).value == 2);
    CHECK(cubical_bell(3).value == 8);
    CHECK(cubical_bell(4).value == 154);
    CHECK(!cubical_bell(4).tabulated);
    CHECK(cubical_bell(6).value == BigCount("71319425714"));
    CHECK(cubical_bell(6).tabulated);
    CHECK_THROWS(cubical_bell(7));
    CHECK_THROWS(cubical_bell(0));
}

TEST_CASE("the 1-cube partitions by hand: two singletons or the full edge") {
    std::vector<std::vector<CubeFace>> partitions;
    enumerate_face_partitions({2}, [&](const std::vector<CubeFace>& faces) {
        partitions.push_back(faces);
    });
    REQUIRE(partitions.size() == 2);
    std::set<size_t> sizes;
    for (const auto& p : partitions) sizes.insert(p.size());
    CHECK(sizes == std::set<size_t>{1, 2});
}

TEST_CASE("exact cover agrees with the exhaustive partition oracle up to the 3-cube") {
    for (int dims = 0; dims <= 3; ++dims)
        CHECK(cubical_bell(dims + 1).value == face_partitions_by_exhaustion(dims));
}

TEST_CASE("CStree and compatibly-labeled staged tree counts") {
    CHECK(count_cstrees(1) == 1);
    CHECK(count_cstrees(2) == 4);
    CHECK(count_cstrees(3) == 96);
    CHECK(count_cstrees(4) == 59136);
    CHECK(count_cstrees(5) == BigCount("26466908160"));
    CHECK_THROWS(count_cstrees(7));

    CHECK(count_compatible_staged_trees(1) == 1);
    CHECK(count_compatible_staged_trees(2) == 4);
    CHECK(count_compatible_staged_trees(3) == 180);
    CHECK(count_compatible_staged_trees(4) == 2980800);
    // large p stays exact
    CHECK(count_compatible_staged_trees(8).str().size() >= 269);
}

TEST_CASE("generate-and-validate enumeration matches the product formula") {
    for (int p = 1; p <= 3; ++p) {
        auto trees = enumerate_cstrees(fixtures::binary_vars(
            [&] {
                std::vector<std::string> names;
                for (int i = 1; i <= p; ++i) names.push_back("X" + std::to_string(i));
                return names;
            }()));
        CHECK(BigCount(trees.size()) == count_cstrees(p));
        // the permutation factor: fixing the ordering divides by p!
        auto fixed = enumerate_cstrees_fixed_order(trees.front().variables(), trees.front().order());
        std::int64_t fact = 1;
        for (int i = 2; i <= p; ++i) fact *= i;
        CHECK(static_cast<std::int64_t>(trees.size()) ==
              fact * static_cast<std::int64_t>(fixed.size()));
    }
}

TEST_CASE("mixed cardinalities enumerate without a closed form") {
    std::vector<VariableSpec> vars = {{"A", 2, {}}, {"B", 3, {}}};
    auto trees = enumerate_cstrees_fixed_order(vars, {0, 1});
    // level 2 partitions the 2-point space: 2 ways; level 1 is trivial
    CHECK(trees.size() == 2);
}
