#include "fim/synth.hpp"

#include "fim/errors.hpp"
#include "fim/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <numeric>
#include <ostream>
#include <unordered_set>

namespace fim {

namespace {

std::string node_name(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "u%07zu", index);
    return buf;
}

std::string cascade_name(std::size_t seq) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "c%07zu", seq);
    return buf;
}

constexpr std::int64_t kCascadeStride = 1'000'000;

std::size_t binomial_draw(Rng& rng, std::size_t n, double p) {
    if (n == 0 || p <= 0)
        return 0;
    if (p >= 1)
        return n;
    std::binomial_distribution<std::size_t> dist(n, p);
    return dist(rng);
}

} // namespace

void SynthConfig::validate() const {
    if (nodes == 0 || influencers == 0 || influencers > nodes)
        throw DataError("need 0 < influencers <= nodes");
    if (schema.attributes.size() != marginals.size())
        throw DataError("one marginal vector per attribute required");
    for (std::size_t a = 0; a < marginals.size(); ++a) {
        if (marginals[a].size() != schema.attributes[a].categories.size())
            throw DataError("marginal length mismatch for attribute '" +
                            schema.attributes[a].name + "'");
        double total = 0;
        for (const double m : marginals[a]) {
            if (m < 0 || m > 1)
                throw DataError("marginals must lie in [0,1]");
            total += m;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw DataError("marginals must sum to 1");
    }
    if (homophily < 0 || homophily > 1 || edge_prob < 0 || edge_prob > 1 ||
        activation_prob < 0 || activation_prob > 1)
        throw DataError("probabilities must lie in [0,1]");
    if (homophily_attr < 0 || static_cast<std::size_t>(homophily_attr) >= schema.attributes.size())
        throw DataError("homophily attribute out of range");
    if (cascades_per_influencer > 0 && edge_prob == 0 && nodes > 1)
        throw DataError("cascades requested on an edgeless graph");
}

SynthConfig weibo_like_config() {
    SynthConfig cfg;
    cfg.schema.attributes.push_back({"gender", {"female", "male"}});
    cfg.marginals.push_back({0.53, 0.47});
    AttributeSchema::Attribute region{"region", {}};
    std::vector<double> region_marginal;
    double total = 0;
    for (int i = 1; i <= 36; ++i) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "r%02d", i);
        region.categories.push_back(buf);
        region_marginal.push_back(std::pow(0.9, i)); // decaying, names irrelevant
        total += region_marginal.back();
    }
    for (double& m : region_marginal)
        m /= total;
    // nudge the last entry so the vector sums to 1 exactly
    region_marginal.back() += 1.0 - std::accumulate(region_marginal.begin(),
                                                    region_marginal.end(), 0.0);
    cfg.schema.attributes.push_back(std::move(region));
    cfg.marginals.push_back(std::move(region_marginal));
    return cfg;
}

SynthConfig digg_like_config() {
    SynthConfig cfg;
    cfg.schema.attributes.push_back({"gender", {"female", "male"}});
    cfg.marginals.push_back({0.35, 0.65});
    cfg.schema.attributes.push_back(
        {"age", {"18-24", "25-34", "35-44", "45-54", "55-64", "65+"}});
    cfg.marginals.push_back({0.10, 0.30, 0.25, 0.15, 0.12, 0.08});
    return cfg;
}

std::size_t DirectedGraph::edge_count() const {
    std::size_t m = 0;
    for (const auto& adj : out)
        m += adj.size();
    return m;
}

SynthData gen_graph(const SynthConfig& config) {
    config.validate();
    SynthData data;
    data.schema = config.schema;
    data.influencer_count = config.influencers;
    data.node_names.reserve(config.nodes);
    for (std::size_t i = 0; i < config.nodes; ++i)
        data.node_names.push_back(node_name(i));

    // attribute draws
    Rng attr_rng(derive_seed(config.seed, "profiles"));
    std::vector<std::vector<double>> cdfs(config.marginals.size());
    for (std::size_t a = 0; a < config.marginals.size(); ++a) {
        cdfs[a].resize(config.marginals[a].size());
        std::partial_sum(config.marginals[a].begin(), config.marginals[a].end(), cdfs[a].begin());
    }
    std::vector<int> homophily_cat(config.nodes);
    for (std::size_t i = 0; i < config.nodes; ++i) {
        std::vector<int> row(config.schema.attributes.size());
        for (std::size_t a = 0; a < cdfs.size(); ++a)
            row[a] = static_cast<int>(sample_cdf(cdfs[a], uniform01(attr_rng)));
        homophily_cat[i] = row[static_cast<std::size_t>(config.homophily_attr)];
        data.profiles.insert(data.node_names[i], std::move(row));
    }

    // category membership lists for target sampling
    const std::size_t n_cats =
        config.schema.attributes[static_cast<std::size_t>(config.homophily_attr)].categories.size();
    std::vector<std::vector<int>> members(n_cats);
    for (std::size_t i = 0; i < config.nodes; ++i)
        members[static_cast<std::size_t>(homophily_cat[i])].push_back(static_cast<int>(i));

    // renormalize so the expected degree stays p*(n-1): q is the probability
    // that a random pair shares the homophily category
    double q = 0;
    for (const double m : config.marginals[static_cast<std::size_t>(config.homophily_attr)])
        q += m * m;
    const double kappa = 1.0 / (1.0 + config.homophily * (2.0 * q - 1.0));
    const double p_same = std::min(config.edge_prob * (1.0 + config.homophily) * kappa, 1.0);
    const double p_diff = std::max(config.edge_prob * (1.0 - config.homophily) * kappa, 0.0);

    data.graph.n = config.nodes;
    data.graph.out.resize(config.nodes);
    Rng edge_rng(derive_seed(config.seed, "graph"));
    std::unordered_set<int> chosen;
    for (std::size_t u = 0; u < config.nodes; ++u) {
        const auto cat = static_cast<std::size_t>(homophily_cat[u]);
        const std::size_t same_pool = members[cat].size() - 1;
        const std::size_t diff_pool = config.nodes - 1 - same_pool;
        const std::size_t k_same = binomial_draw(edge_rng, same_pool, p_same);
        const std::size_t k_diff = binomial_draw(edge_rng, diff_pool, p_diff);

        auto& adj = data.graph.out[u];
        adj.reserve(k_same + k_diff);
        chosen.clear();
        std::size_t added = 0;
        while (added < k_same) { // rejection over the same-category list
            const int v = members[cat][uniform_index(edge_rng, members[cat].size())];
            if (static_cast<std::size_t>(v) == u || !chosen.insert(v).second)
                continue;
            adj.push_back(v);
            ++added;
        }
        added = 0;
        while (added < k_diff) { // rejection over the complement
            const int v = static_cast<int>(uniform_index(edge_rng, config.nodes));
            if (static_cast<std::size_t>(v) == u ||
                homophily_cat[static_cast<std::size_t>(v)] == homophily_cat[u] ||
                !chosen.insert(v).second)
                continue;
            adj.push_back(v);
            ++added;
        }
        std::sort(adj.begin(), adj.end());
    }
    return data;
}

namespace {

// One IC trial from `roots`; returns activated nodes (roots included) with
// their activation round, in activation order.
void ic_trial(const DirectedGraph& graph, const std::vector<int>& roots, double activation_prob,
              Rng& rng, std::vector<std::uint32_t>& stamp, std::uint32_t trial,
              std::vector<std::pair<int, int>>& out) {
    out.clear();
    std::vector<int> frontier, next;
    for (const int r : roots) {
        stamp[static_cast<std::size_t>(r)] = trial;
        out.push_back({r, 0});
        frontier.push_back(r);
    }
    int round = 0;
    while (!frontier.empty()) {
        ++round;
        next.clear();
        for (const int u : frontier) {
            for (const int v : graph.out[static_cast<std::size_t>(u)]) {
                if (stamp[static_cast<std::size_t>(v)] == trial)
                    continue;
                if (uniform01(rng) < activation_prob) {
                    stamp[static_cast<std::size_t>(v)] = trial;
                    out.push_back({v, round});
                    next.push_back(v);
                }
            }
        }
        frontier.swap(next);
    }
}

} // namespace

CascadeLog simulate_ic_cascades(const DirectedGraph& graph,
                                const std::vector<std::string>& node_names,
                                std::size_t influencer_count, double activation_prob,
                                int cascades_per_influencer, std::uint64_t seed) {
    if (activation_prob < 0 || activation_prob > 1)
        throw DataError("activation probability must lie in [0,1]");
    if (influencer_count == 0 || influencer_count > graph.n)
        throw DataError("influencer count out of range");

    std::vector<Cascade> cascades;
    cascades.reserve(influencer_count * static_cast<std::size_t>(cascades_per_influencer));
    std::vector<std::uint32_t> stamp(graph.n, 0);
    std::vector<std::pair<int, int>> trial;
    std::size_t seq = 0;
    // round-robin over influencers so every influencer appears in every time
    // region of the log
    for (int j = 0; j < cascades_per_influencer; ++j) {
        for (std::size_t i = 0; i < influencer_count; ++i) {
            Cascade c;
            c.id = cascade_name(seq);
            const std::int64_t start = static_cast<std::int64_t>(seq) * kCascadeStride;
            Rng rng(derive_seed(seed, "casc:" + c.id));
            ic_trial(graph, {static_cast<int>(i)}, activation_prob, rng, stamp,
                     static_cast<std::uint32_t>(seq + 1), trial);
            c.events.reserve(trial.size());
            for (const auto& [node, round] : trial)
                c.events.push_back({node_names[static_cast<std::size_t>(node)], start + round});
            cascades.push_back(std::move(c));
            ++seq;
        }
    }
    return CascadeLog::from_cascades(std::move(cascades));
}

FlipAudit flip_attribute(const CascadeLog& log, ProfileTable& profiles, int attr,
                         int from_category, int to_category, double frac_influencers,
                         double frac_participants, Rng& rng) {
    if (from_category == to_category)
        throw DataError("from and to categories must differ");
    if (frac_influencers < 0 || frac_influencers > 1 || frac_participants < 0 ||
        frac_participants > 1)
        throw DataError("fractions must lie in [0,1]");

    FlipAudit audit;
    audit.attr = attr;
    audit.from_category = from_category;
    audit.to_category = to_category;

    const auto n_selected =
        static_cast<std::size_t>(std::floor(frac_influencers *
                                            static_cast<double>(log.influencers.size())));
    const auto picks = sample_without_replacement(rng, log.influencers.size(), n_selected);
    std::unordered_set<std::string> working;
    for (const std::size_t i : picks) {
        audit.selected_influencers.push_back(log.influencers[i]);
        working.insert(log.influencers[i]);
    }
    std::sort(audit.selected_influencers.begin(), audit.selected_influencers.end());

    // union of the selected influencers' cascade participants in from-category
    std::unordered_set<std::string> seen;
    std::vector<std::string> pool;
    for (const auto& c : log.cascades) {
        if (!working.count(c.initiator()))
            continue;
        for (std::size_t i = 1; i < c.events.size(); ++i) {
            const auto& user = c.events[i].user;
            if (profiles.category_of(user, attr) != from_category)
                continue;
            if (seen.insert(user).second)
                pool.push_back(user);
        }
    }
    std::sort(pool.begin(), pool.end()); // deterministic sampling base

    const auto n_flips = static_cast<std::size_t>(
        std::floor(frac_participants * static_cast<double>(pool.size())));
    for (const std::size_t i : sample_without_replacement(rng, pool.size(), n_flips))
        audit.flipped_users.push_back(pool[i]);
    std::sort(audit.flipped_users.begin(), audit.flipped_users.end());

    for (const auto& user : audit.flipped_users)
        profiles.entries.at(user)[static_cast<std::size_t>(attr)] = to_category;
    return audit;
}

void unflip(ProfileTable& profiles, const FlipAudit& audit) {
    for (const auto& user : audit.flipped_users)
        profiles.entries.at(user)[static_cast<std::size_t>(audit.attr)] = audit.from_category;
}

void write_flip_audit_json(const FlipAudit& audit, const AttributeSchema& schema,
                           std::ostream& out) {
    using json = nlohmann::ordered_json;
    const auto& attr = schema.attributes[static_cast<std::size_t>(audit.attr)];
    json j;
    j["attr"] = attr.name;
    j["from"] = attr.categories[static_cast<std::size_t>(audit.from_category)];
    j["to"] = attr.categories[static_cast<std::size_t>(audit.to_category)];
    j["selected_influencers"] = audit.selected_influencers;
    j["flipped_users"] = audit.flipped_users;
    out << j.dump(2) << '\n';
}

FlipAudit read_flip_audit_json(std::istream& in, const AttributeSchema& schema) {
    using json = nlohmann::json;
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed audit file: ") + e.what());
    }
    FlipAudit audit;
    const auto& attr = schema.attribute(j.at("attr").get<std::string>());
    audit.attr = schema.attribute_index(attr.name);
    const auto cat_index = [&](const std::string& label) {
        const auto it = std::find(attr.categories.begin(), attr.categories.end(), label);
        if (it == attr.categories.end())
            throw DataError("unknown category '" + label + "'");
        return static_cast<int>(it - attr.categories.begin());
    };
    audit.from_category = cat_index(j.at("from").get<std::string>());
    audit.to_category = cat_index(j.at("to").get<std::string>());
    audit.selected_influencers = j.at("selected_influencers").get<std::vector<std::string>>();
    audit.flipped_users = j.at("flipped_users").get<std::vector<std::string>>();
    return audit;
}

MonteCarloResult monte_carlo_spread(const DirectedGraph& graph, const std::vector<int>& seeds,
                                    double activation_prob, int runs,
                                    const ProfileTable& profiles,
                                    const std::vector<std::string>& node_names, int attr,
                                    const std::vector<long long>& population, std::uint64_t seed) {
    if (runs < 1)
        throw DataError("runs must be at least 1");
    std::vector<std::uint32_t> stamp(graph.n, 0);
    std::vector<std::pair<int, int>> trial;
    double sum = 0, sum_sq = 0, fairness_sum = 0;
    for (int r = 0; r < runs; ++r) {
        Rng rng(derive_seed(seed, "mc:" + std::to_string(r)));
        ic_trial(graph, seeds, activation_prob, rng, stamp, static_cast<std::uint32_t>(r + 1),
                 trial);
        std::vector<long long> counts(population.size(), 0);
        std::size_t influenced = 0;
        for (std::size_t i = seeds.size(); i < trial.size(); ++i) {
            ++influenced;
            const auto& user = node_names[static_cast<std::size_t>(trial[i].first)];
            ++counts[static_cast<std::size_t>(profiles.category_of(user, attr))];
        }
        sum += static_cast<double>(influenced);
        sum_sq += static_cast<double>(influenced) * static_cast<double>(influenced);
        fairness_sum += fairness_score(influenced_ratios(make_group_counts(counts, population))).value;
    }
    MonteCarloResult result;
    const double n = runs;
    result.mean_spread = sum / n;
    result.mean_fairness = fairness_sum / n;
    if (runs > 1) {
        const double var = std::max((sum_sq - sum * sum / n) / (n - 1), 0.0);
        result.stderr_spread = std::sqrt(var / n);
    }
    return result;
}

void write_edge_list(const DirectedGraph& graph, const std::vector<std::string>& node_names,
                     std::ostream& out) {
    for (std::size_t u = 0; u < graph.n; ++u)
        for (const int v : graph.out[u])
            out << node_names[u] << '\t' << node_names[static_cast<std::size_t>(v)] << '\n';
}

} // namespace fim
