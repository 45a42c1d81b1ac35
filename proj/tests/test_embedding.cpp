#include "fim/embedding.hpp"
#include "fim/errors.hpp"
#include "fim/fairness.hpp"
#include "gradient_oracle.hpp"
#include "test_helpers.hpp"

#include <cmath>
#include <cstdio>
#include <doctest.h>
#include <filesystem>
#include <fstream>

using namespace fim;
using namespace fim::test;

namespace {

std::vector<std::string> ids(const char* prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(prefix + std::to_string(i));
    return out;
}

} // namespace

TEST_CASE("init_model") {
    Rng rng(1);
    const EmbeddingModel m = init_model(ids("i", 4), ids("n", 6), 50, rng);
    SUBCASE("row norms bounded by the init range") {
        for (std::size_t u = 0; u < m.num_influencers; ++u) {
            double sq = 0;
            for (const float x : m.theta_row(u)) {
                CHECK(std::abs(x) <= 0.5 / 50.0);
                sq += static_cast<double>(x) * static_cast<double>(x);
            }
            CHECK(std::sqrt(sq) > 0);
            CHECK(std::sqrt(sq) <= 0.5 * std::sqrt(50.0) / 50.0);
        }
    }
    SUBCASE("biases and fairness branch start at zero") {
        for (const float x : m.bias_b)
            CHECK(x == 0.0f);
        for (const float x : m.umat)
            CHECK(x == 0.0f);
        CHECK(m.bias_c == 0.0f);
    }
    SUBCASE("same seed, same bits") {
        Rng r1(9), r2(9);
        const EmbeddingModel a = init_model(ids("i", 3), ids("n", 5), 8, r1);
        const EmbeddingModel b = init_model(ids("i", 3), ids("n", 5), 8, r2);
        CHECK(a.theta == b.theta);
        CHECK(a.tmat == b.tmat);
    }
}

TEST_CASE("score_pair") {
    Rng rng(2);
    EmbeddingModel m = init_model(ids("i", 2), ids("n", 3), 4, rng);
    SUBCASE("orthogonal rows with zero bias score zero") {
        std::fill(m.theta.begin(), m.theta.end(), 0.0f);
        std::fill(m.tmat.begin(), m.tmat.end(), 0.0f);
        m.theta_row(0)[0] = 1.0f;
        m.node_col(1)[1] = 1.0f;
        CHECK(score_pair(m, 0, 1) == 0.0);
    }
    SUBCASE("unit vectors plus bias") {
        std::fill(m.theta.begin(), m.theta.end(), 0.0f);
        std::fill(m.tmat.begin(), m.tmat.end(), 0.0f);
        m.theta_row(0)[0] = 1.0f;
        m.node_col(2)[0] = 1.0f;
        m.bias_b[2] = 0.5f;
        CHECK(score_pair(m, 0, 2) == doctest::Approx(1.5));
    }
    SUBCASE("matches a dense matrix product oracle") {
        Rng r(3);
        const EmbeddingModel model = random_model(5, 6, 4, r);
        for (std::size_t u = 0; u < 5; ++u)
            for (std::size_t v = 0; v < 6; ++v) {
                double z = model.bias_b[v];
                for (std::size_t e = 0; e < 4; ++e)
                    z += static_cast<double>(model.theta[u * 4 + e]) *
                         static_cast<double>(model.tmat[v * 4 + e]);
                CHECK(score_pair(model, static_cast<int>(u), static_cast<int>(v)) ==
                      doctest::Approx(z).epsilon(1e-12));
            }
    }
    SUBCASE("unindexed ids are rejected") {
        CHECK_THROWS_AS(score_pair(m, "nope", "n0"), DataError);
        CHECK_THROWS_AS(score_pair(m, "i0", "nope"), DataError);
    }
}

TEST_CASE("nce_step on the zero model") {
    Rng rng(4);
    EmbeddingModel m = init_model(ids("i", 2), ids("n", 4), 6, rng);
    std::fill(m.theta.begin(), m.theta.end(), 0.0f);
    std::fill(m.tmat.begin(), m.tmat.end(), 0.0f);
    SUBCASE("one positive one negative costs 2 ln 2") {
        const std::vector<int> negs{1};
        const double loss = nce_step(m, 0, 0, negs, 0.1);
        CHECK(loss == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    }
    SUBCASE("lr = 0 leaves the model unchanged") {
        const EmbeddingModel before = m;
        const std::vector<int> negs{1, 2};
        const double loss = nce_step(m, 0, 0, negs, 0.0);
        CHECK(loss == doctest::Approx(3.0 * std::log(2.0)));
        CHECK(m.theta == before.theta);
        CHECK(m.tmat == before.tmat);
        CHECK(m.bias_b == before.bias_b);
    }
}

TEST_CASE("nce gradients match finite differences") {
    Rng rng(5);
    double worst = 0;
    for (int trial = 0; trial < 30; ++trial) {
        const EmbeddingModel m = random_model(3, 5, 2, rng);
        const int u = static_cast<int>(uniform_index(rng, 3));
        const int pos = static_cast<int>(uniform_index(rng, 5));
        const auto negs = distinct_negatives(5, pos, 1 + uniform_index(rng, 3), rng);
        worst = std::max(worst, nce_gradient_max_error(m, u, pos, negs));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("duplicate negatives merge their gradient contributions") {
    Rng rng(6);
    const EmbeddingModel m = random_model(2, 4, 3, rng);
    const std::vector<int> once{2};
    const std::vector<int> twice{2, 2};
    const NceGradients g1 = nce_gradients(m, 0, 1, once);
    const NceGradients g2 = nce_gradients(m, 0, 1, twice);
    REQUIRE(g2.targets == g1.targets);
    const std::size_t slot = 1; // the negative sits after the positive
    for (std::size_t e = 0; e < m.embed_dim; ++e)
        CHECK(g2.dt[slot * m.embed_dim + e] ==
              doctest::Approx(2.0 * g1.dt[slot * m.embed_dim + e]));
    CHECK(g2.db[slot] == doctest::Approx(2.0 * g1.db[slot]));
}

TEST_CASE("nce_step applies exactly lr times the gradients") {
    Rng rng(7);
    EmbeddingModel m = random_model(3, 5, 4, rng);
    const std::vector<int> negs{0, 3};
    const NceGradients grads = nce_gradients(m, 1, 2, negs);
    EmbeddingModel stepped = m;
    nce_step(stepped, 1, 2, negs, 0.05);
    for (std::size_t e = 0; e < m.embed_dim; ++e) {
        const float expected = static_cast<float>(
            static_cast<double>(m.theta_row(1)[e]) - 0.05 * grads.dtheta[e]);
        CHECK(stepped.theta_row(1)[e] == expected);
    }
    for (std::size_t i = 0; i < grads.targets.size(); ++i) {
        const auto v = static_cast<std::size_t>(grads.targets[i]);
        for (std::size_t e = 0; e < m.embed_dim; ++e) {
            const float expected = static_cast<float>(static_cast<double>(m.node_col(v)[e]) -
                                                      0.05 * grads.dt[i * m.embed_dim + e]);
            CHECK(stepped.node_col(v)[e] == expected);
        }
    }
}

TEST_CASE("fairness branch") {
    Rng rng(8);
    EmbeddingModel m = init_model(ids("i", 2), ids("n", 3), 4, rng);
    m.mode = TrainMode::FAC;
    std::fill(m.theta.begin(), m.theta.end(), 0.0f);
    SUBCASE("target 0.5 on the zero model is a fixed point") {
        const double loss = fairness_step(m, 0, 0.5, 0.1);
        CHECK(loss == 0.0);
        for (const float x : m.umat)
            CHECK(x == 0.0f);
        CHECK(m.bias_c == 0.0f);
    }
    SUBCASE("target 1.0 on the zero model costs 0.25") {
        const double loss = fairness_step(m, 0, 1.0, 0.1);
        CHECK(loss == doctest::Approx(0.25));
    }
    SUBCASE("rejected in FPS mode") {
        m.mode = TrainMode::FPS;
        CHECK_THROWS_AS(fairness_step(m, 0, 1.0, 0.1), DataError);
    }
    SUBCASE("gradients match finite differences") {
        Rng r(9);
        double worst = 0;
        for (int trial = 0; trial < 30; ++trial) {
            const EmbeddingModel model = random_model(3, 4, 3, r);
            const int u = static_cast<int>(uniform_index(r, 3));
            worst = std::max(worst,
                             mse_gradient_max_error(model, u, 0.1 + 0.9 * uniform01(r)));
        }
        CHECK(worst < 1e-3);
    }
    SUBCASE("a fairness step moves theta and the spread branch sees it") {
        Rng r(10);
        EmbeddingModel model = random_model(2, 3, 4, r);
        model.mode = TrainMode::FAC;
        const double before = score_pair(model, 0, 1);
        fairness_step(model, 0, 1.0, 0.5);
        CHECK(score_pair(model, 0, 1) != before);
    }
}

TEST_CASE("build_noise_distribution") {
    const auto ctx = [](std::vector<std::string> participants) {
        ContextSet c;
        c.cascade_id = "c";
        c.initiator = "i";
        c.participants = std::move(participants);
        return c;
    };
    std::unordered_map<std::string, int> index{{"a", 0}, {"b", 1}, {"c", 2}};
    SUBCASE("equal frequencies are uniform") {
        const auto dist = build_noise_distribution({ctx({"a", "b"})}, index, 0.75);
        CHECK(dist.probability(0) == doctest::Approx(0.5));
        CHECK(dist.probability(1) == doctest::Approx(0.5));
        CHECK(dist.probability(2) == 0.0);
    }
    SUBCASE("frequencies (8,1) with exponent 0.75") {
        std::vector<std::string> eights(8, "a");
        const auto dist = build_noise_distribution({ctx(eights), ctx({"b"})}, index, 0.75);
        CHECK(dist.probability(0) == doctest::Approx(0.8262932434158183).epsilon(1e-9));
        CHECK(dist.probability(1) == doctest::Approx(0.17370675658418167).epsilon(1e-9));
    }
    SUBCASE("exponent 0 is uniform over the observed support") {
        std::vector<std::string> eights(8, "a");
        const auto dist = build_noise_distribution({ctx(eights), ctx({"b"})}, index, 0.0);
        CHECK(dist.probability(0) == doctest::Approx(0.5));
        CHECK(dist.probability(1) == doctest::Approx(0.5));
    }
}

namespace {

// 200-cascade bimodal log over a balanced population: influencers 0..9 reach
// both groups evenly in every cascade (pooled fairness exactly 1), influencers
// 10..19 reach only group a (pooled fairness 2/(1+e)). Participants cycle
// through fixed pools of 100 users per group so every pool user appears.
CascadeLog bimodal_log(ProfileTable& profiles, AttributeSchema& schema) {
    schema = gender_schema();
    for (int i = 0; i < 100; ++i) {
        profiles.insert("a" + std::to_string(i), {0});
        profiles.insert("b" + std::to_string(i), {1});
    }
    std::vector<Cascade> cascades;
    std::int64_t start = 0;
    std::size_t seq = 0;
    for (int i = 0; i < 20; ++i) {
        const std::string inf = "inf" + std::to_string(i);
        profiles.insert(inf, {i % 2});
        for (int c = 0; c < 10; ++c) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "c%04zu", seq++);
            std::vector<std::pair<std::string, std::int64_t>> events{{inf, start}};
            if (i < 10) {
                for (int j = 0; j < 3; ++j) {
                    const int idx = ((i * 10 + c) * 3 + j) % 100;
                    events.push_back({"a" + std::to_string(idx), start + j + 1});
                    events.push_back({"b" + std::to_string(idx), start + j + 4});
                }
            } else {
                for (int j = 0; j < 6; ++j) {
                    const int idx = (((i - 10) * 10 + c) * 6 + j) % 100;
                    events.push_back({"a" + std::to_string(idx), start + j + 1});
                }
            }
            cascades.push_back(make_cascade(buf, std::move(events)));
            start += 100;
        }
    }
    return make_log(std::move(cascades));
}

} // namespace

TEST_CASE("training runs and learns") {
    AttributeSchema schema;
    ProfileTable profiles;
    const CascadeLog log = bimodal_log(profiles, schema);
    REQUIRE(log.cascades.size() == 200);

    TrainConfig cfg;
    cfg.embed_dim = 16;
    cfg.epochs = 10;
    cfg.negatives = 5;
    cfg.seed = 42;

    SUBCASE("nce loss decreases over epochs") {
        cfg.mode = TrainMode::FPS;
        TrainTrace trace;
        const EmbeddingModel m = train(log, profiles, schema, 0, cfg, &trace);
        REQUIRE(trace.epoch_mean_nce_loss.size() == 10);
        CHECK(trace.epoch_mean_nce_loss.back() < trace.epoch_mean_nce_loss.front());
        CHECK(m.all_finite());
    }
    SUBCASE("fac branch outputs track the bimodal targets") {
        cfg.mode = TrainMode::FAC;
        const EmbeddingModel m = train(log, profiles, schema, 0, cfg);
        const auto population = category_population(log, profiles, 0, 2);
        std::vector<double> target, output;
        for (std::size_t u = 0; u < m.num_influencers; ++u) {
            target.push_back(
                influencer_fairness_pooled(log, m.influencer_ids[u], 0, profiles, population));
            double z = m.bias_c;
            for (std::size_t e = 0; e < m.embed_dim; ++e)
                z += static_cast<double>(m.theta_row(u)[e]) * static_cast<double>(m.umat[e]);
            output.push_back(1.0 / (1.0 + std::exp(-z)));
        }
        // Pearson correlation between branch outputs and pooled targets
        const auto n = static_cast<double>(target.size());
        double mt = 0, mo = 0;
        for (std::size_t i = 0; i < target.size(); ++i) {
            mt += target[i];
            mo += output[i];
        }
        mt /= n;
        mo /= n;
        double cov = 0, vt = 0, vo = 0;
        for (std::size_t i = 0; i < target.size(); ++i) {
            cov += (target[i] - mt) * (output[i] - mo);
            vt += (target[i] - mt) * (target[i] - mt);
            vo += (output[i] - mo) * (output[i] - mo);
        }
        const double r = cov / std::sqrt(vt * vo);
        CHECK(r > 0.8);
    }
    SUBCASE("identical config is bit-identical") {
        cfg.mode = TrainMode::FPS_FAC;
        const EmbeddingModel a = train(log, profiles, schema, 0, cfg);
        const EmbeddingModel b = train(log, profiles, schema, 0, cfg);
        CHECK(a.theta == b.theta);
        CHECK(a.tmat == b.tmat);
        CHECK(a.bias_b == b.bias_b);
        CHECK(a.umat == b.umat);
        CHECK(a.bias_c == b.bias_c);
    }
    SUBCASE("empty training split is rejected") {
        CHECK_THROWS_AS(train(make_log({}), profiles, schema, 0, cfg), DataError);
    }
    SUBCASE("hogwild sharding still converges") {
        cfg.mode = TrainMode::FAC;
        cfg.threads = 3;
        TrainTrace trace;
        const EmbeddingModel m = train(log, profiles, schema, 0, cfg, &trace);
        CHECK(m.all_finite());
        CHECK(trace.epoch_mean_nce_loss.back() < trace.epoch_mean_nce_loss.front());
    }
    SUBCASE("context dump emits one line per cascade") {
        namespace fs = std::filesystem;
        const auto path = fs::temp_directory_path() / "fim_contexts.jsonl";
        cfg.mode = TrainMode::FPS;
        cfg.epochs = 1;
        cfg.dump_contexts_path = path.string();
        train(log, profiles, schema, 0, cfg);
        std::ifstream in(path);
        std::size_t lines = 0;
        std::string line;
        while (std::getline(in, line)) {
            ++lines;
            CHECK(line.find("\"initiator\"") != std::string::npos);
        }
        CHECK(lines == log.cascades.size());
        fs::remove(path);
    }
}

TEST_CASE("model persistence") {
    Rng rng(11);
    EmbeddingModel m = random_model(4, 7, 5, rng);
    m.mode = TrainMode::FPS_FAC;
    const auto path = std::filesystem::temp_directory_path() / "fim_test_model.bin";

    SUBCASE("round trip is bit exact") {
        save_model(m, path.string());
        const EmbeddingModel back = load_model(path.string());
        CHECK(back.mode == m.mode);
        CHECK(back.theta == m.theta);
        CHECK(back.tmat == m.tmat);
        CHECK(back.bias_b == m.bias_b);
        CHECK(back.umat == m.umat);
        CHECK(back.bias_c == m.bias_c);
        CHECK(back.influencer_ids == m.influencer_ids);
        CHECK(back.node_ids == m.node_ids);
        // and saving the loaded model reproduces the file byte for byte
        const auto path2 = std::filesystem::temp_directory_path() / "fim_test_model2.bin";
        save_model(back, path2.string());
        std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
        const std::string b1((std::istreambuf_iterator<char>(f1)),
                             std::istreambuf_iterator<char>());
        const std::string b2((std::istreambuf_iterator<char>(f2)),
                             std::istreambuf_iterator<char>());
        CHECK(b1 == b2);
        std::filesystem::remove(path2);
    }
    SUBCASE("corrupt magic is rejected") {
        save_model(m, path.string());
        {
            std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
            f.write("XXXX", 4);
        }
        CHECK_THROWS_AS(load_model(path.string()), ParseError);
    }
    SUBCASE("truncated file is rejected") {
        save_model(m, path.string());
        const auto size = std::filesystem::file_size(path);
        std::filesystem::resize_file(path, size / 2);
        CHECK_THROWS_AS(load_model(path.string()), ParseError);
    }
    std::filesystem::remove(path);
}

TEST_CASE("model summary json") {
    Rng rng(12);
    const EmbeddingModel m = random_model(6, 4, 3, rng);
    const std::string text = model_summary_json(m, 3);
    CHECK(text.find("\"influencers\": 6") != std::string::npos);
    CHECK(text.find("top_influencers") != std::string::npos);
}
