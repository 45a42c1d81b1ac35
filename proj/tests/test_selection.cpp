#include "fim/selection.hpp"
#include "fim/errors.hpp"
#include "gradient_oracle.hpp"
#include "test_helpers.hpp"

#include <cmath>
#include <doctest.h>
#include <numeric>
#include <set>
#include <sstream>

using namespace fim;
using namespace fim::test;

#include "instance_gen.hpp"

namespace {

std::vector<std::string> ids(const char* prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(prefix + std::to_string(i));
    return out;
}

} // namespace

TEST_CASE("diffusion_matrix") {
    SUBCASE("zero model gives 0.5 everywhere") {
        Rng rng(1);
        EmbeddingModel m = init_model({"i0"}, {"n0", "n1"}, 4, rng);
        std::fill(m.theta.begin(), m.theta.end(), 0.0f);
        std::fill(m.tmat.begin(), m.tmat.end(), 0.0f);
        for (const float p : diffusion_matrix(m))
            CHECK(p == doctest::Approx(0.5));
    }
    SUBCASE("dot product ln 3 maps to 0.75") {
        Rng rng(1);
        EmbeddingModel m = init_model({"i0"}, {"n0"}, 2, rng);
        std::fill(m.theta.begin(), m.theta.end(), 0.0f);
        std::fill(m.tmat.begin(), m.tmat.end(), 0.0f);
        m.theta_row(0)[0] = 1.0f;
        m.node_col(0)[0] = static_cast<float>(std::log(3.0));
        CHECK(diffusion_matrix(m)[0] == doctest::Approx(0.75).epsilon(1e-6));
    }
    SUBCASE("bias is excluded unless requested") {
        Rng rng(1);
        EmbeddingModel m = init_model({"i0"}, {"n0"}, 2, rng);
        std::fill(m.theta.begin(), m.theta.end(), 0.0f);
        std::fill(m.tmat.begin(), m.tmat.end(), 0.0f);
        m.bias_b[0] = 2.0f;
        CHECK(diffusion_matrix(m, false)[0] == doctest::Approx(0.5));
        CHECK(diffusion_matrix(m, true)[0] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
    }
    SUBCASE("matches the dense sigmoid oracle") {
        Rng rng(2);
        const EmbeddingModel m = random_model(4, 7, 3, rng);
        const auto d = diffusion_matrix(m);
        for (std::size_t u = 0; u < 4; ++u)
            for (std::size_t v = 0; v < 7; ++v) {
                double z = 0;
                for (std::size_t e = 0; e < 3; ++e)
                    z += static_cast<double>(m.theta[u * 3 + e]) *
                         static_cast<double>(m.tmat[v * 3 + e]);
                CHECK(d[u * 7 + v] ==
                      doctest::Approx(1.0 / (1.0 + std::exp(-z))).epsilon(1e-6));
            }
    }
}

TEST_CASE("expected_spread") {
    Rng rng(3);
    SUBCASE("norm shares 1:3 over 100 nodes") {
        Rng r(1);
        EmbeddingModel m = init_model(ids("i", 2), ids("n", 100), 2, r);
        std::fill(m.theta.begin(), m.theta.end(), 0.0f);
        m.theta_row(0)[0] = 1.0f;
        m.theta_row(1)[1] = 3.0f;
        const auto lambda = expected_spread(m);
        CHECK(lambda[0] == 25);
        CHECK(lambda[1] == 75);
    }
    SUBCASE("single influencer takes everything") {
        EmbeddingModel m = random_model(1, 40, 3, rng);
        CHECK(expected_spread(m)[0] == 40);
    }
    SUBCASE("equal norms split evenly") {
        EmbeddingModel m = init_model(ids("i", 4), ids("n", 100), 2, rng);
        std::fill(m.theta.begin(), m.theta.end(), 0.0f);
        for (std::size_t u = 0; u < 4; ++u)
            m.theta_row(u)[0] = 2.0f;
        for (const int l : expected_spread(m))
            CHECK(l == 25);
    }
    SUBCASE("all-zero embeddings are an error") {
        EmbeddingModel m = init_model(ids("i", 2), ids("n", 5), 2, rng);
        std::fill(m.theta.begin(), m.theta.end(), 0.0f);
        CHECK_THROWS_AS(expected_spread(m), DataError);
    }
    SUBCASE("sum stays within |I| of |V| on random models") {
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t n_inf = 2 + uniform_index(rng, 12);
            const std::size_t n_nodes = 10 + uniform_index(rng, 200);
            const EmbeddingModel m = random_model(n_inf, n_nodes, 4, rng);
            const auto lambda = expected_spread(m);
            const long long sum = std::accumulate(lambda.begin(), lambda.end(), 0LL);
            CHECK(std::llabs(sum - static_cast<long long>(n_nodes)) <=
                  static_cast<long long>(n_inf));
        }
    }
}

TEST_CASE("fair_greedy hand instance") {
    const SelectionInputs inputs =
        make_inputs(2, 2, {0.9f, 0.8f, 0.5f, 0.6f}, {1, 1}, {0.6, 0.9});
    SUBCASE("alpha 0 follows the spread") {
        const SeedSet seeds = fair_greedy(inputs, 1, 0.0);
        REQUIRE(seeds.seeds.size() == 1);
        CHECK(seeds.seeds[0].influencer == 0);
        CHECK(seeds.seeds[0].omega == doctest::Approx(0.9));
        // omega rescaled into [F_lb, F_ub] = [0.6, 0.9]
        CHECK(seeds.seeds[0].omega_scaled == doctest::Approx(0.9));
    }
    SUBCASE("alpha 1 follows the fairness vector") {
        const SeedSet seeds = fair_greedy(inputs, 1, 1.0);
        REQUIRE(seeds.seeds.size() == 1);
        CHECK(seeds.seeds[0].influencer == 1);
    }
    SUBCASE("k = 0 returns nothing") {
        CHECK(fair_greedy(inputs, 0, 0.2).seeds.empty());
        CHECK(naive_fair_greedy(inputs, 0, 0.2).seeds.empty());
    }
    SUBCASE("k beyond |I| is rejected") {
        CHECK_THROWS_AS(fair_greedy(inputs, 3, 0.2), DataError);
        CHECK_THROWS_AS(naive_fair_greedy(inputs, 3, 0.2), DataError);
    }
}

TEST_CASE("alpha 0 ranking ignores the fairness vector") {
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        SelectionInputs inputs = random_instance(rng);
        const int k = static_cast<int>(inputs.num_influencers);
        const SeedSet a = fair_greedy(inputs, k, 0.0);
        SelectionInputs flat = inputs;
        std::fill(flat.fairness.begin(), flat.fairness.end(), 0.5);
        const SeedSet b = fair_greedy(flat, k, 0.0);
        REQUIRE(a.seeds.size() == b.seeds.size());
        for (std::size_t i = 0; i < a.seeds.size(); ++i)
            CHECK(a.seeds[i].influencer == b.seeds[i].influencer);
    }
}

TEST_CASE("lazy greedy equals the naive oracle on 50 random instances") {
    Rng rng(2024);
    const double alphas[] = {0.0, 0.2, 0.5, 1.0};
    int mismatches = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const SelectionInputs inputs = random_instance(rng);
        const int k = 1 + static_cast<int>(
                              uniform_index(rng, std::min<std::size_t>(5, inputs.num_influencers)));
        const double alpha = alphas[trial % 4];
        const SeedSet lazy = fair_greedy(inputs, k, alpha);
        const SeedSet naive = naive_fair_greedy(inputs, k, alpha);
        if (!same_seeds(lazy, naive))
            ++mismatches;
        // lazy evaluation may only save work
        CHECK(lazy.evaluations <= naive.evaluations);
    }
    CHECK(mismatches == 0);
}

TEST_CASE("claimed sets are disjoint with exact sizes") {
    Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        const SelectionInputs inputs = random_instance(rng);
        const int k = static_cast<int>(inputs.num_influencers);
        const SeedSet seeds = fair_greedy(inputs, k, 0.3);
        std::set<int> all;
        std::size_t pool = inputs.num_nodes;
        for (const auto& s : seeds.seeds) {
            const auto lambda =
                static_cast<std::size_t>(inputs.lambda[static_cast<std::size_t>(s.influencer)]);
            CHECK(s.claimed.size() == std::min(lambda, pool));
            for (const int v : s.claimed) {
                CHECK(all.insert(v).second); // disjoint
            }
            pool -= s.claimed.size();
        }
    }
}

TEST_CASE("alpha 1 selects the fairness argmax first") {
    Rng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const SelectionInputs inputs = random_instance(rng);
        const SeedSet seeds = fair_greedy(inputs, 1, 1.0);
        REQUIRE(seeds.seeds.size() == 1);
        double best = -1;
        for (const double f : inputs.fairness)
            best = std::max(best, f);
        CHECK(inputs.fairness[static_cast<std::size_t>(seeds.seeds[0].influencer)] ==
              doctest::Approx(best));
    }
}

TEST_CASE("degenerate min-max bounds fall back to fairness") {
    // identical rows: every omega equal, scaled value collapses to the middle
    std::vector<float> d(3 * 4, 0.5f);
    const SelectionInputs inputs = make_inputs(3, 4, std::move(d), {2, 2, 2}, {0.5, 0.9, 0.7});
    const SeedSet seeds = fair_greedy(inputs, 3, 0.5);
    CHECK(seeds.seeds[0].influencer == 1);
    CHECK(seeds.seeds[1].influencer == 2);
    CHECK(seeds.seeds[2].influencer == 0);
    const SeedSet naive = naive_fair_greedy(inputs, 3, 0.5);
    CHECK(same_seeds(seeds, naive));
}

TEST_CASE("selection inputs validation") {
    SUBCASE("out-of-range probability") {
        auto inputs = make_inputs(1, 2, {0.5f, 1.0f}, {1}, {0.5});
        CHECK_THROWS_AS(inputs.validate(), DataError);
    }
    SUBCASE("bad lambda") {
        auto inputs = make_inputs(1, 2, {0.5f, 0.5f}, {3}, {0.5});
        CHECK_THROWS_AS(inputs.validate(), DataError);
    }
    SUBCASE("bad fairness") {
        auto inputs = make_inputs(1, 2, {0.5f, 0.5f}, {1}, {1.5});
        CHECK_THROWS_AS(inputs.validate(), DataError);
    }
}

TEST_CASE("seed set json round trip") {
    const SelectionInputs inputs =
        make_inputs(2, 3, {0.9f, 0.8f, 0.7f, 0.5f, 0.6f, 0.4f}, {2, 1}, {0.6, 0.9});
    const SeedSet seeds = fair_greedy(inputs, 2, 0.2);
    std::ostringstream out;
    write_seed_set_json(seeds, inputs, out);
    std::istringstream in(out.str());
    std::vector<std::string> seed_ids;
    const SeedSet back = read_seed_set_json(in, &seed_ids);
    CHECK(back.alpha == seeds.alpha);
    CHECK(back.k == seeds.k);
    REQUIRE(seed_ids.size() == seeds.seeds.size());
    for (std::size_t i = 0; i < seed_ids.size(); ++i) {
        CHECK(seed_ids[i] ==
              inputs.influencer_ids[static_cast<std::size_t>(seeds.seeds[i].influencer)]);
        CHECK(back.seeds[i].omega == seeds.seeds[i].omega);
    }
}
