#include "fim/sampling.hpp"
#include "fim/errors.hpp"
#include "test_helpers.hpp"

#include <cmath>
#include <doctest.h>
#include <map>

using namespace fim;
using namespace fim::test;

TEST_CASE("temporal_weights") {
    SUBCASE("elapsed times (1,3) weigh 3:1") {
        const Cascade c = make_cascade("c", {{"u", 0}, {"a", 1}, {"b", 3}});
        const auto w = temporal_weights(c);
        CHECK(w[0] == doctest::Approx(0.75));
        CHECK(w[1] == doctest::Approx(0.25));
    }
    SUBCASE("single participant") {
        const Cascade c = make_cascade("c", {{"u", 0}, {"a", 42}});
        CHECK(temporal_weights(c) == std::vector<double>{1.0});
    }
    SUBCASE("equal elapsed times are uniform") {
        const Cascade c = make_cascade("c", {{"u", 0}, {"a", 2}, {"b", 2}, {"d", 2}});
        for (const double w : temporal_weights(c))
            CHECK(w == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("zero elapsed time counts as one second") {
        Cascade c;
        c.id = "c";
        c.events = {{"u", 5}, {"a", 5}, {"b", 6}};
        const auto w = temporal_weights(c);
        CHECK(w[0] == doctest::Approx(0.5));
        CHECK(w[1] == doctest::Approx(0.5));
    }
    SUBCASE("weights sum to 1") {
        Rng rng(5);
        for (int t = 0; t < 30; ++t) {
            const Cascade c = random_cascade("c", 1 + uniform_index(rng, 30), rng);
            double total = 0;
            for (const double w : temporal_weights(c))
                total += w;
            CHECK(std::abs(total - 1.0) < 1e-12);
        }
    }
    SUBCASE("no participants is an error") {
        const Cascade c = make_cascade("c", {{"u", 0}});
        CHECK_THROWS_AS(temporal_weights(c), DataError);
    }
}

TEST_CASE("context_length rounding") {
    CHECK(context_length(10, 120, 1.0) == 12);
    CHECK(context_length(1, 120, 1.0) == 1);
    CHECK(context_length(10, 120, 0.5) == 6);
    // smallest two-group fairness, round(6.4546) = 6
    CHECK(context_length(10, 120, 0.5378828427399902) == 6);
    CHECK(context_length(0, 120, 1.0) == 0);
    // clamped to 1 while participants exist and f > 0
    CHECK(context_length(1, 120, 0.1) == 1);
}

TEST_CASE("sample_context_fac") {
    SUBCASE("10 participants at eta=120 give 12 pairs") {
        std::vector<std::pair<std::string, std::int64_t>> events{{"u", 0}};
        for (int i = 0; i < 10; ++i)
            events.push_back({"p" + std::to_string(i), i + 1});
        const Cascade c = make_cascade("c", std::move(events));
        Rng rng(1);
        const ContextSet ctx = sample_context_fac(c, 120, rng);
        CHECK(ctx.size() == 12);
        CHECK(ctx.initiator == "u");
    }
    SUBCASE("single participant") {
        const Cascade c = make_cascade("c", {{"u", 0}, {"a", 5}});
        Rng rng(1);
        const ContextSet ctx = sample_context_fac(c, 120, rng);
        REQUIRE(ctx.size() == 1);
        CHECK(ctx.participants[0] == "a");
    }
    SUBCASE("zero participants give an empty context, not an error") {
        const Cascade c = make_cascade("c", {{"u", 0}});
        Rng rng(1);
        CHECK(sample_context_fac(c, 120, rng).empty());
    }
    SUBCASE("draw frequencies match temporal weights within L1 0.01") {
        const Cascade c =
            make_cascade("c", {{"u", 0}, {"a", 1}, {"b", 2}, {"d", 4}, {"e", 10}});
        const auto weights = temporal_weights(c);
        Rng rng(77);
        std::map<std::string, std::size_t> freq;
        const std::size_t rounds = 25000; // 4 participants x 120% -> 5 draws each
        std::size_t total = 0;
        for (std::size_t i = 0; i < rounds; ++i) {
            const ContextSet ctx = sample_context_fac(c, 120, rng);
            for (const auto& p : ctx.participants) {
                ++freq[p];
                ++total;
            }
        }
        double l1 = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            const auto& user = c.events[i + 1].user;
            l1 += std::abs(static_cast<double>(freq[user]) / static_cast<double>(total) -
                           weights[i]);
        }
        CHECK(l1 < 0.01);
    }
}

TEST_CASE("sample_context_fps") {
    std::vector<std::pair<std::string, std::int64_t>> events{{"u", 0}};
    for (int i = 0; i < 10; ++i)
        events.push_back({"p" + std::to_string(i), i + 1});
    const Cascade c = make_cascade("c", std::move(events));
    SUBCASE("f=1 reduces to the FAC length") {
        Rng rng(3);
        CHECK(sample_context_fps(c, 1.0, 120, rng).size() == 12);
    }
    SUBCASE("f=0.5 halves the context") {
        Rng rng(3);
        CHECK(sample_context_fps(c, 0.5, 120, rng).size() == 6);
    }
    SUBCASE("penalty out of range") {
        Rng rng(3);
        CHECK_THROWS_AS(sample_context_fps(c, 0.0, 120, rng), DataError);
        CHECK_THROWS_AS(sample_context_fps(c, 1.5, 120, rng), DataError);
    }
    SUBCASE("bad eta") {
        Rng rng(3);
        CHECK_THROWS_AS(sample_context_fps(c, 1.0, 0, rng), DataError);
    }
}

TEST_CASE("fps with f=1 is pair-stream-identical to fac") {
    Rng gen(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Cascade c = random_cascade("c" + std::to_string(trial),
                                         1 + uniform_index(gen, 25), gen);
        Rng a(1000 + static_cast<std::uint64_t>(trial));
        Rng b(1000 + static_cast<std::uint64_t>(trial));
        const ContextSet fac = sample_context_fac(c, 120, a);
        const ContextSet fps = sample_context_fps(c, 1.0, 120, b);
        CHECK(fac.participants == fps.participants);
    }
}

TEST_CASE("context invariants and determinism") {
    Rng gen(21);
    for (int trial = 0; trial < 25; ++trial) {
        const Cascade c = random_cascade("c", 1 + uniform_index(gen, 15), gen);
        Rng r1(500 + static_cast<std::uint64_t>(trial));
        Rng r2(500 + static_cast<std::uint64_t>(trial));
        const double f = 0.1 + 0.9 * uniform01(gen);
        const ContextSet ctx = sample_context_fps(c, f, 120, r1);
        const ContextSet again = sample_context_fps(c, f, 120, r2);
        CHECK(ctx.participants == again.participants); // bit-reproducible
        CHECK(ctx.initiator == c.initiator());
        for (const auto& p : ctx.participants) {
            bool found = false;
            for (std::size_t i = 1; i < c.events.size(); ++i)
                if (c.events[i].user == p) {
                    found = true;
                    CHECK(c.events[i].time > c.start_time());
                }
            CHECK(found);
        }
        // length stays within rounding of the penalty-free value, modulo the
        // minimum-1 clamp
        const double raw = 1.2 * static_cast<double>(c.participant_count()) * f;
        if (raw >= 0.5)
            CHECK(std::abs(static_cast<double>(ctx.size()) - raw) <= 0.5);
        else
            CHECK(ctx.size() == 1);
    }
}

TEST_CASE("apply_min_cascade_floor") {
    const auto cascade_with = [](const std::string& id, int participants, std::int64_t start) {
        std::vector<std::pair<std::string, std::int64_t>> events{{"inf", start}};
        for (int i = 0; i < participants; ++i)
            events.push_back({id + "_p" + std::to_string(i), start + i + 1});
        return make_cascade(id, std::move(events));
    };
    SUBCASE("restores up to 3 non-empty contexts") {
        std::vector<Cascade> cascades = {cascade_with("c1", 6, 0), cascade_with("c2", 5, 10),
                                         cascade_with("c3", 4, 20), cascade_with("c4", 3, 30),
                                         cascade_with("c5", 2, 40)};
        std::vector<ContextSet> contexts(5);
        for (std::size_t i = 0; i < 5; ++i) {
            contexts[i].cascade_id = cascades[i].id;
            contexts[i].initiator = "inf";
            contexts[i].mode = SampleMode::FPS;
        }
        // only c5 survived the penalty
        contexts[4].participants = {"c5_p0"};
        apply_min_cascade_floor(contexts, cascades, 120, 3, 99);
        std::size_t non_empty = 0;
        for (const auto& ctx : contexts)
            non_empty += !ctx.empty();
        CHECK(non_empty >= 3);
        // the largest penalized cascades were re-sampled at full length
        CHECK(contexts[0].size() == context_length(6, 120, 1.0));
        CHECK(contexts[1].size() == context_length(5, 120, 1.0));
    }
    SUBCASE("influencers with fewer cascades than the floor keep all of theirs") {
        std::vector<Cascade> cascades = {cascade_with("c1", 4, 0), cascade_with("c2", 3, 10)};
        std::vector<ContextSet> contexts(2);
        for (std::size_t i = 0; i < 2; ++i) {
            contexts[i].cascade_id = cascades[i].id;
            contexts[i].initiator = "inf";
        }
        apply_min_cascade_floor(contexts, cascades, 120, 3, 99);
        CHECK(contexts[0].empty());
        CHECK(contexts[1].empty());
    }
    SUBCASE("all non-empty is a no-op") {
        std::vector<Cascade> cascades = {cascade_with("c1", 4, 0), cascade_with("c2", 3, 10),
                                         cascade_with("c3", 2, 20)};
        std::vector<ContextSet> contexts(3);
        Rng rng(5);
        for (std::size_t i = 0; i < 3; ++i)
            contexts[i] = sample_context_fps(cascades[i], 0.9, 120, rng);
        const auto before = contexts;
        apply_min_cascade_floor(contexts, cascades, 120, 3, 99);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(contexts[i].participants == before[i].participants);
    }
}
