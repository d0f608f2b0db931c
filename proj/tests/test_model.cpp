#include <doctest.h>

#include "cstree/model.hpp"
#include "fixtures.hpp"

using namespace cstree;

TEST_CASE("prefix enumeration matches the product space") {
    CStree t2 = fixtures::saturated_tree(2);
    CHECK(t2.enumerate_prefixes(1).size() == 2);
    CHECK(t2.enumerate_prefixes(2).size() == 4);

    std::vector<VariableSpec> vars = {{"A", 2, {}}, {"B", 3, {}}};
    CStree mixed = fixtures::make_tree(vars, {0, 1}, {});
    auto prefixes = mixed.enumerate_prefixes(2);
    CHECK(prefixes.size() == 6);
    CHECK(prefixes.front() == Prefix{0, 0});
    CHECK(prefixes.back() == Prefix{1, 2});
    CHECK_THROWS_AS(mixed.enumerate_prefixes(3), ModelError);
}

TEST_CASE("prefix codes round-trip") {
    CStree tree = fixtures::intro_tree();
    for (int k = 0; k <= 4; ++k)
        for (std::int64_t code = 0; code < tree.level_size(k); ++code)
            CHECK(tree.encode_prefix(tree.decode_prefix(k, code)) == code);
}

TEST_CASE("staging validation") {
    auto vars = fixtures::binary_vars({"X1", "X2", "X3"});
    std::vector<int> order{0, 1, 2};

    SUBCASE("intro tree staging is accepted") {
        CHECK(validate_cstree(fixtures::intro_tree().staging(),
                              fixtures::intro_tree().variables(), {0, 1, 2, 3})
                  .empty());
    }
    SUBCASE("full dependence is accepted") {
        Staging empty;
        empty.per_level.resize(3);
        CHECK(validate_cstree(empty, vars, order).empty());
    }
    SUBCASE("overlapping faces are rejected") {
        Staging staging;
        staging.per_level.resize(3);
        staging.per_level[2].push_back(Stage{3, fixtures::ctx({{0, 0}})});
        staging.per_level[2].push_back(Stage{3, fixtures::ctx({{1, 1}})});  // shares (0,1)
        auto violations = validate_cstree(staging, vars, order);
        REQUIRE(!violations.empty());
        CHECK(violations.front().kind == StagingViolation::Kind::Overlap);
    }
    SUBCASE("a context on the stage's own level is rejected") {
        Staging staging;
        staging.per_level.resize(3);
        staging.per_level[2].push_back(Stage{3, fixtures::ctx({{2, 0}})});
        auto violations = validate_cstree(staging, vars, order);
        REQUIRE(!violations.empty());
        CHECK(violations.front().kind == StagingViolation::Kind::BadContext);
    }
    SUBCASE("two antipodal prefixes are not a face") {
        // level-3 member staging {x1^1x2^1, x1^2x2^2}
        std::vector<std::vector<std::vector<std::int64_t>>> blocks(3);
        blocks[2].push_back({0, 3});
        auto violations = validate_member_staging(blocks, vars, order);
        REQUIRE(!violations.empty());
        CHECK(violations.front().kind == StagingViolation::Kind::NonSubcube);
    }
    SUBCASE("gaps are flagged for complete partitions") {
        std::vector<std::vector<std::vector<std::int64_t>>> blocks(3);
        blocks[2].push_back({0, 1});
        auto violations = validate_member_staging(blocks, vars, order, true);
        REQUIRE(!violations.empty());
        CHECK(violations.front().kind == StagingViolation::Kind::Gap);
    }
}

TEST_CASE("stage_of finds the unique covering stage") {
    CStree tree = fixtures::intro_tree();
    Stage green{3, fixtures::ctx({{1, 0}})};
    CHECK(tree.stage_of({0, 0}) == green);
    CHECK(tree.stage_of({1, 0}) == green);
    // uncovered prefixes are their own singleton stage
    Stage singleton = tree.stage_of({0, 1});
    CHECK(singleton.context.get(0) == 0);
    CHECK(singleton.context.get(1) == 1);

    CStree sat = fixtures::saturated_tree(3);
    Stage s = sat.stage_of({1, 0});
    CHECK(sat.stage_member_count(s) == 1);

    CStree cstree = fixtures::make_tree(fixtures::binary_vars({"X1", "X2", "X3"}), {0, 1, 2},
                                        {Stage{3, fixtures::ctx({{0, 0}})}});
    CHECK(cstree.stage_of({0, 1}) == Stage{3, fixtures::ctx({{0, 0}})});
}

TEST_CASE("level stage counts include implicit singletons") {
    CStree tree = fixtures::intro_tree();
    CHECK(tree.num_stages(1) == 1);
    CHECK(tree.num_stages(2) == 2);
    CHECK(tree.num_stages(3) == 3);  // green + 2 singletons
    CHECK(tree.num_stages(4) == 5);  // three pairs + 2 singletons
    CHECK(tree.total_stages() == 11);

    CHECK(fixtures::saturated_tree(3).total_stages() == 7);
}

TEST_CASE("a DAG-patterned staging validates as a CStree") {
    // pa(3) = {2}: one level-3 stage per outcome of X2
    auto vars = fixtures::binary_vars({"X1", "X2", "X3"});
    CStree tree = fixtures::make_tree(vars, {0, 1, 2},
                                      {Stage{3, fixtures::ctx({{1, 0}})},
                                       Stage{3, fixtures::ctx({{1, 1}})}});
    CHECK(tree.num_stages(3) == 2);
}

TEST_CASE("context-specific subtrees") {
    CStree tree = fixtures::intro_tree();

    SUBCASE("empty context reproduces the tree's levels") {
        ContextSubtree sub = context_specific_subtree(tree, Context{});
        REQUIRE(sub.variables.size() == 4);
        CHECK(sub.levels[0].nodes.size() == 2);
        CHECK(sub.levels[1].nodes.size() == 4);
        CHECK(sub.levels[2].nodes.size() == 8);
        CHECK(sub.levels[3].nodes.size() == 16);
    }
    SUBCASE("conditioning on X2 leaves a 3-level tree over X1, X3, X4") {
        ContextSubtree sub = context_specific_subtree(tree, fixtures::ctx({{1, 0}}));
        REQUIRE(sub.variables == std::vector<int>{0, 2, 3});
        CHECK(sub.levels[0].nodes.size() == 2);
        CHECK(sub.levels[1].nodes.size() == 4);
        CHECK(sub.levels[2].nodes.size() == 8);
        // contracted nodes keep their original stage
        CHECK(sub.levels[1].node_stages[0] == tree.stage_of({0, 0, 0}));
    }
    SUBCASE("saturated p=3 conditioned on X1 has levels of sizes 2 and 4") {
        CStree sat = fixtures::saturated_tree(3);
        ContextSubtree sub = context_specific_subtree(sat, fixtures::ctx({{0, 0}}));
        REQUIRE(sub.variables == std::vector<int>{1, 2});
        CHECK(sub.levels[0].nodes.size() == 2);
        CHECK(sub.levels[1].nodes.size() == 4);
    }
}

TEST_CASE("staged-tree round trip through member blocks") {
    CStree tree = fixtures::intro_tree();
    GeneralStagedTree staged = to_staged_tree(tree);
    CHECK(staged.total_stages() == tree.total_stages());
    CHECK(staged.to_cstree() == tree);
}

TEST_CASE("member stagings that are not subcubes cannot become CStrees") {
    std::vector<std::vector<std::vector<std::int64_t>>> blocks(3);
    blocks[2].push_back({0, 3});
    GeneralStagedTree staged(fixtures::binary_vars({"X1", "X2", "X3"}), {0, 1, 2}, blocks);
    CHECK_THROWS_AS(staged.to_cstree(), ModelError);
}

TEST_CASE("context invariants") {
    Context a = fixtures::ctx({{0, 1}, {2, 0}});
    CHECK(a.subcontext_of(fixtures::ctx({{0, 1}, {1, 0}, {2, 0}})));
    CHECK(!a.subcontext_of(fixtures::ctx({{0, 1}})));
    CHECK(a.consistent_with(fixtures::ctx({{1, 1}})));
    CHECK(!a.consistent_with(fixtures::ctx({{0, 0}})));
    CHECK(Context{}.subcontext_of(a));
    CHECK_THROWS_AS(Context({{0, 0}, {0, 1}}), ModelError);
}
