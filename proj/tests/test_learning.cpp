#include <doctest.h>

#include <cmath>
#include <numeric>

#include "cstree/learning.hpp"
#include "fixtures.hpp"

using namespace cstree;

TEST_CASE("random staged trees") {
    SUBCASE("merge probability zero keeps full dependence") {
        GeneralStagedTree t = random_staged_tree(5, 0.0, 42);
        CHECK(t.total_stages() == 1 + 2 + 4 + 8 + 16);
    }
    SUBCASE("fixed seeds reproduce the tree") {
        GeneralStagedTree a = random_staged_tree(6, 0.7, 9);
        GeneralStagedTree b = random_staged_tree(6, 0.7, 9);
        CHECK(shd(a, b) == 0);
        CHECK(a.total_stages() == b.total_stages());
    }
    SUBCASE("high merge probability shrinks the staging") {
        GeneralStagedTree t = random_staged_tree(7, 1.0, 3);
        CHECK(t.total_stages() < 1 + 2 + 4 + 8 + 16 + 32 + 64);
        // the last level is never merged
        CHECK(t.num_stages(7) == 64);
    }
}

TEST_CASE("random CStrees") {
    SUBCASE("merge probability zero keeps full dependence") {
        CHECK(random_cstree(5, 0.0, 1).total_stages() == 31);
    }
    SUBCASE("outputs always validate and reproduce under the seed") {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            CStree a = random_cstree(6, 0.4, seed);  // constructor validates
            CStree b = random_cstree(6, 0.4, seed);
            CHECK(shd(a, b) == 0);
        }
    }
    SUBCASE("higher merge probability gives sparser trees on average") {
        double lo = 0, hi = 0;
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            lo += static_cast<double>(random_cstree(6, 0.2, seed).total_stages());
            hi += static_cast<double>(random_cstree(6, 0.9, seed).total_stages());
        }
        CHECK(hi < lo);
    }
}

TEST_CASE("forward sampling") {
    CStree tree = fixtures::saturated_tree(3);
    SUBCASE("deterministic parameters hit a single cell") {
        ParameterMap params;
        for (int k = 1; k <= 3; ++k)
            for (const Stage& s : tree.level_stages(k)) params.set(s, {0.0, 1.0});
        ContingencyTable u = sample(tree, params, 500, 7);
        CHECK(u.at({1, 1, 1}) == 500);
        CHECK(u.total() == 500);
    }
    SUBCASE("uniform parameters approach uniform frequencies") {
        ParameterMap params;
        for (int k = 1; k <= 3; ++k)
            for (const Stage& s : tree.level_stages(k)) params.set(s, {0.5, 0.5});
        ContingencyTable u = sample(tree, params, 100000, 11);
        for (std::int64_t cell = 0; cell < u.cells(); ++cell) {
            double freq = static_cast<double>(u.counts()[static_cast<size_t>(cell)]) / 100000.0;
            CHECK(std::abs(freq - 0.125) < 0.01);
        }
    }
    SUBCASE("empirical stage conditionals sit inside 3-sigma binomial bands") {
        CStree t = fixtures::intro_tree();
        ParameterMap params = random_parameters(t, 13);
        std::int64_t n = 100000;
        ContingencyTable u = sample(t, params, n, 17);
        auto counts = stage_counts(t, u);
        for (const auto& [stage, vec] : counts) {
            std::int64_t m = vec[0] + vec[1];
            if (m < 100) continue;
            double theta = params.at(stage)[1];
            double sd = std::sqrt(theta * (1 - theta) / static_cast<double>(m));
            double hat = static_cast<double>(vec[1]) / static_cast<double>(m);
            CHECK(std::abs(hat - theta) < 3.5 * sd + 1e-9);
        }
    }
}

TEST_CASE("BHC-CS learns canonical patterns at scale") {
    auto vars = binary_variables(3);
    std::vector<int> order{0, 1, 2};
    SUBCASE("independence data collapses each level to one stage") {
        CStree indep = fixtures::make_tree(vars, order,
                                           {Stage{2, fixtures::ctx({})}, Stage{3, fixtures::ctx({})}});
        ParameterMap params = random_parameters(indep, 5, 0.25, 0.75);
        ContingencyTable data = sample(indep, params, 100000, 3);
        CStree learned = bhc_cs(vars, data, order);
        CHECK(learned.num_stages(2) == 1);
        CHECK(learned.num_stages(3) == 1);
    }
    SUBCASE("full-dependence data keeps the saturated staging") {
        CStree sat = fixtures::saturated_tree(3);
        // conditionals far apart so every split is identifiable
        ParameterMap params;
        int step = 0;
        for (int k = 1; k <= 3; ++k)
            for (const Stage& s : sat.level_stages(k)) {
                double theta = 0.15 + 0.1 * (step++ % 8);
                params.set(s, {theta, 1 - theta});
            }
        ContingencyTable data = sample(sat, params, 100000, 19);
        CStree learned = bhc_cs(binary_variables(3), data, order);
        CHECK(shd(sat, learned) == 0);
    }
    SUBCASE("the learned score never loses to the saturated or fully merged alternatives") {
        CStree truth = random_cstree(4, 0.5, 77);
        ParameterMap params = random_parameters(truth, 78);
        ContingencyTable data = sample(truth, params, 20000, 79);
        CStree learned = bhc_cs(binary_variables(4), data, {0, 1, 2, 3});
        double learned_bic = bic(learned, data).bic;
        CHECK(learned_bic >= bic(fixtures::saturated_tree(4), data).bic - 1e-9);
        CStree merged = fixtures::make_tree(binary_variables(4), {0, 1, 2, 3},
                                            {Stage{2, fixtures::ctx({})},
                                             Stage{3, fixtures::ctx({})},
                                             Stage{4, fixtures::ctx({})}});
        CHECK(learned_bic >= bic(merged, data).bic - 1e-9);
    }
}

TEST_CASE("BHC-S mirrors BHC-CS and wins on non-CStree truths") {
    GeneralStagedTree truth = random_staged_tree(5, 0.6, 101);
    std::vector<double> joint = random_joint(truth, 102);
    std::vector<int> shape(5, 2);
    auto rows = sample_rows_from_joint(joint, shape, 50000, 103);
    ContingencyTable data(shape);
    for (const auto& r : rows) data.add(r);
    auto vars = binary_variables(5);
    std::vector<int> order{0, 1, 2, 3, 4};
    GeneralStagedTree s_fit = bhc_s(vars, data, order);
    CStree cs_fit = bhc_cs(vars, data, order);
    CHECK(bic(s_fit, data).loglik >= bic(cs_fit, data).loglik - 1e-6);
}

TEST_CASE("permutation search") {
    SUBCASE("a single variable is trivial") {
        auto vars = binary_variables(1);
        ContingencyTable data({2}, {3, 7});
        CStree tree = bhc_cs_perm(vars, data);
        CHECK(tree.num_variables() == 1);
        CHECK(tree.total_stages() == 1);
    }
    SUBCASE("exchangeable data ties and the lexicographic ordering wins") {
        auto vars = binary_variables(3);
        // fully symmetric positive table
        ContingencyTable data({2, 2, 2}, {40, 10, 10, 10, 10, 10, 10, 40});
        CStree tree = bhc_cs_perm(vars, data);
        CHECK(tree.order() == std::vector<int>{0, 1, 2});
    }
    SUBCASE("the permutation optimum dominates any fixed ordering") {
        CStree truth = random_cstree(4, 0.6, 55);
        ParameterMap params = random_parameters(truth, 56);
        ContingencyTable data = sample(truth, params, 20000, 57);
        auto vars = binary_variables(4);
        CStree best = bhc_cs_perm(vars, data);
        double best_bic = bic(best, data).bic;
        CHECK(best_bic >= bic(bhc_cs(vars, data, {0, 1, 2, 3}), data).bic - 1e-9);
        CHECK(best_bic >= bic(bhc_cs(vars, data, {3, 2, 1, 0}), data).bic - 1e-9);
        CHECK(best_bic >= bic(bhc_cs(vars, data, {1, 3, 0, 2}), data).bic - 1e-9);
    }
    SUBCASE("the budget guard rejects large p") {
        auto vars = binary_variables(9);
        std::vector<int> shape(9, 2);
        ContingencyTable data(shape);
        CHECK_THROWS(bhc_cs_perm(vars, data));
    }
}

TEST_CASE("staging SHD is a pseudometric") {
    CStree a = random_cstree(5, 0.5, 1);
    CStree b = random_cstree(5, 0.5, 2);
    CStree c = random_cstree(5, 0.5, 3);
    CHECK(shd(a, a) == 0);
    CHECK(shd(a, b) == shd(b, a));
    CHECK(shd(a, c) <= shd(a, b) + shd(b, c));

    // p=2: full dependence vs fully merged level 2 differ in one node pair
    auto vars = binary_variables(2);
    CStree full = fixtures::make_tree(vars, {0, 1}, {});
    CStree merged = fixtures::make_tree(vars, {0, 1}, {Stage{2, fixtures::ctx({})}});
    CHECK(shd(full, merged) == 1);

    CStree other_order = fixtures::make_tree(vars, {1, 0}, {});
    CHECK_THROWS(shd(full, other_order));
}

TEST_CASE("predictive accuracy") {
    CStree tree = fixtures::saturated_tree(2);
    SUBCASE("a deterministic tree predicts its own samples perfectly") {
        ParameterMap params;
        for (int k = 1; k <= 2; ++k)
            for (const Stage& s : tree.level_stages(k)) params.set(s, {1.0, 0.0});
        auto rows = sample_rows(tree, params, 20, 5);
        CHECK(predictive_accuracy(tree, params, rows).accuracy == doctest::Approx(1.0));
    }
    SUBCASE("a uniform tree is at chance level") {
        ParameterMap params;
        for (int k = 1; k <= 2; ++k)
            for (const Stage& s : tree.level_stages(k)) params.set(s, {0.5, 0.5});
        auto rows = sample_rows(tree, params, 4000, 6);
        double acc = predictive_accuracy(tree, params, rows).accuracy;
        CHECK(std::abs(acc - 0.5) < 0.05);
    }
}

TEST_CASE("simulation rows carry the metric columns") {
    auto rows = run_simulation(4, 0.4, 2000, 2, 31);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(r.n == 2000);
        CHECK(r.stages_true >= 4);
        CHECK(r.shd >= 0);
        CHECK(r.accuracy >= 0.0);
        CHECK(r.accuracy <= 1.0);
    }
    auto again = run_simulation(4, 0.4, 2000, 2, 31);
    CHECK(rows[0].shd == again[0].shd);
    CHECK(rows[1].accuracy == again[1].accuracy);
}
