#include "fim/selection.hpp"

#include "fim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <queue>

namespace fim {

void SelectionInputs::validate() const {
    if (probabilities.size() != num_influencers * num_nodes)
        throw DataError("diffusion matrix has wrong shape");
    if (lambda.size() != num_influencers || fairness.size() != num_influencers)
        throw DataError("lambda / fairness vectors have wrong length");
    for (const float p : probabilities)
        if (!(p > 0.0f && p < 1.0f))
            throw DataError("diffusion probabilities must lie in (0,1)");
    for (const int l : lambda)
        if (l < 1 || static_cast<std::size_t>(l) > num_nodes)
            throw DataError("lambda entries must lie in [1, |V|]");
    for (const double f : fairness)
        if (!(f > 0.0 && f <= 1.0))
            throw DataError("fairness entries must lie in (0,1]");
}

std::vector<float> diffusion_matrix(const EmbeddingModel& model, bool include_bias) {
    std::vector<float> d(model.num_influencers * model.num_nodes);
    for (std::size_t u = 0; u < model.num_influencers; ++u) {
        const auto tu = model.theta_row(u);
        for (std::size_t v = 0; v < model.num_nodes; ++v) {
            const auto tv = model.node_col(v);
            double z = include_bias ? static_cast<double>(model.bias_b[v]) : 0.0;
            for (std::size_t e = 0; e < model.embed_dim; ++e)
                z += static_cast<double>(tu[e]) * static_cast<double>(tv[e]);
            double p = 1.0 / (1.0 + std::exp(-z));
            p = std::min(std::max(p, 1e-7), 1.0 - 1e-7); // keep entries inside (0,1)
            d[u * model.num_nodes + v] = static_cast<float>(p);
        }
    }
    return d;
}

std::vector<int> expected_spread(const EmbeddingModel& model) {
    std::vector<double> norms(model.num_influencers);
    double total = 0;
    for (std::size_t u = 0; u < model.num_influencers; ++u) {
        double sq = 0;
        for (const float x : model.theta_row(u))
            sq += static_cast<double>(x) * static_cast<double>(x);
        norms[u] = std::sqrt(sq);
        total += norms[u];
    }
    if (total <= 0)
        throw DataError("expected_spread needs at least one non-zero influencer embedding");
    std::vector<int> lambda(model.num_influencers);
    const auto n_nodes = static_cast<double>(model.num_nodes);
    for (std::size_t u = 0; u < model.num_influencers; ++u) {
        const double share = norms[u] * n_nodes / total;
        auto l = static_cast<long long>(std::floor(share + 0.5));
        l = std::max<long long>(l, 1);
        l = std::min<long long>(l, static_cast<long long>(model.num_nodes));
        lambda[u] = static_cast<int>(l);
    }
    return lambda;
}

SelectionInputs build_selection_inputs(const EmbeddingModel& model, const CascadeLog& train_log,
                                       const ProfileTable& profiles, int attr,
                                       const std::vector<long long>& population,
                                       bool include_bias) {
    SelectionInputs inputs;
    inputs.num_influencers = model.num_influencers;
    inputs.num_nodes = model.num_nodes;
    inputs.influencer_ids = model.influencer_ids;
    inputs.node_ids = model.node_ids;
    inputs.probabilities = diffusion_matrix(model, include_bias);
    inputs.lambda = expected_spread(model);
    inputs.fairness.resize(model.num_influencers);
    inputs.fairness_flagged.assign(model.num_influencers, false);
    for (std::size_t u = 0; u < model.num_influencers; ++u) {
        const auto& id = model.influencer_ids[u];
        inputs.fairness[u] = influencer_fairness_avg(train_log, id, attr, profiles, population);
        bool any_participant = false;
        for (const auto& c : train_log.cascades)
            if (c.initiator() == id && c.participant_count() > 0) {
                any_participant = true;
                break;
            }
        inputs.fairness_flagged[u] = !any_participant;
    }
    return inputs;
}

namespace {

struct Candidate {
    double omega = 0;        // raw cumulative probability at evaluation time
    double omega_scaled = 0; // rescaled with the initial bounds
    double key = 0;
    std::vector<int> claimed;
    std::size_t evaluated_at = 0; // |S| when this snapshot was computed
};

// Ranking order of Alg. 1: key descending, ties by larger raw omega, then by
// smaller influencer index.
bool ranks_before(double key_a, double omega_a, std::size_t ua, double key_b, double omega_b,
                  std::size_t ub) {
    if (key_a != key_b)
        return key_a > key_b;
    if (omega_a != omega_b)
        return omega_a > omega_b;
    return ua < ub;
}

struct Pool {
    std::vector<char> available;
    std::size_t count = 0;

    explicit Pool(std::size_t n) : available(n, 1), count(n) {}
    void remove(const std::vector<int>& nodes) {
        for (const int v : nodes) {
            available[static_cast<std::size_t>(v)] = 0;
            --count;
        }
    }
};

// Top-min(lambda,|L|) available nodes by descending probability (node index
// breaks ties), and the probability mass they carry.
void evaluate_candidate(const SelectionInputs& inputs, std::size_t u, const Pool& pool,
                        Candidate& cand) {
    const float* row = inputs.probabilities.data() + u * inputs.num_nodes;
    std::vector<int> nodes;
    nodes.reserve(pool.count);
    for (std::size_t v = 0; v < inputs.num_nodes; ++v)
        if (pool.available[v])
            nodes.push_back(static_cast<int>(v));
    const std::size_t budget =
        std::min<std::size_t>(static_cast<std::size_t>(inputs.lambda[u]), nodes.size());
    const auto by_probability = [row](int a, int b) {
        if (row[a] != row[b])
            return row[a] > row[b];
        return a < b;
    };
    if (budget < nodes.size())
        std::nth_element(nodes.begin(), nodes.begin() + static_cast<long>(budget), nodes.end(),
                         by_probability);
    nodes.resize(budget);
    std::sort(nodes.begin(), nodes.end(), by_probability);
    double omega = 0;
    for (const int v : nodes)
        omega += static_cast<double>(row[static_cast<std::size_t>(v)]);
    cand.omega = omega;
    cand.claimed = std::move(nodes);
}

struct Bounds {
    double omega_lb = 0, omega_ub = 0, f_lb = 0, f_ub = 0;

    double rescale(double omega) const {
        if (omega_ub == omega_lb)
            return (f_lb + f_ub) / 2.0; // ranking falls back to F alone
        return f_lb + (omega - omega_lb) / (omega_ub - omega_lb) * (f_ub - f_lb);
    }
};

} // namespace

SeedSet fair_greedy(const SelectionInputs& inputs, int k, double alpha) {
    inputs.validate();
    if (k < 0 || static_cast<std::size_t>(k) > inputs.num_influencers)
        throw DataError("k must lie in [0, |I|]");
    if (alpha < 0 || alpha > 1)
        throw DataError("alpha must lie in [0, 1]");

    SeedSet result;
    result.alpha = alpha;
    result.k = k;

    Pool pool(inputs.num_nodes);
    std::vector<Candidate> cand(inputs.num_influencers);
    for (std::size_t u = 0; u < inputs.num_influencers; ++u) {
        evaluate_candidate(inputs, u, pool, cand[u]);
        ++result.evaluations;
    }
    Bounds bounds;
    bounds.omega_lb = bounds.omega_ub = cand[0].omega;
    for (const auto& c : cand) {
        bounds.omega_lb = std::min(bounds.omega_lb, c.omega);
        bounds.omega_ub = std::max(bounds.omega_ub, c.omega);
    }
    bounds.f_lb = *std::min_element(inputs.fairness.begin(), inputs.fairness.end());
    bounds.f_ub = *std::max_element(inputs.fairness.begin(), inputs.fairness.end());

    struct HeapEntry {
        double key;
        double omega;
        std::size_t u;
        std::uint64_t version;
    };
    const auto heap_less = [](const HeapEntry& a, const HeapEntry& b) {
        return ranks_before(b.key, b.omega, b.u, a.key, a.omega, a.u);
    };
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, decltype(heap_less)> heap(heap_less);
    std::vector<std::uint64_t> version(inputs.num_influencers, 0);
    for (std::size_t u = 0; u < inputs.num_influencers; ++u) {
        cand[u].omega_scaled = bounds.rescale(cand[u].omega);
        cand[u].key = (1.0 - alpha) * cand[u].omega_scaled + alpha * inputs.fairness[u];
        cand[u].evaluated_at = 0;
        heap.push({cand[u].key, cand[u].omega, u, 0});
    }

    while (result.seeds.size() < static_cast<std::size_t>(k) && !heap.empty()) {
        const HeapEntry top = heap.top();
        heap.pop();
        if (top.version != version[top.u])
            continue; // superseded snapshot
        Candidate& c = cand[top.u];
        if (c.evaluated_at == result.seeds.size()) {
            SeedInfo info;
            info.influencer = static_cast<int>(top.u);
            info.omega = c.omega;
            info.omega_scaled = c.omega_scaled;
            info.fairness = inputs.fairness[top.u];
            info.claimed = c.claimed;
            std::sort(info.claimed.begin(), info.claimed.end());
            pool.remove(info.claimed);
            result.seeds.push_back(std::move(info));
            version[top.u] = ~std::uint64_t{0}; // never re-enters the queue
        } else {
            evaluate_candidate(inputs, top.u, pool, c);
            ++result.evaluations;
            c.omega_scaled = bounds.rescale(c.omega);
            c.key = (1.0 - alpha) * c.omega_scaled + alpha * inputs.fairness[top.u];
            c.evaluated_at = result.seeds.size();
            heap.push({c.key, c.omega, top.u, ++version[top.u]});
        }
    }
    return result;
}

SeedSet naive_fair_greedy(const SelectionInputs& inputs, int k, double alpha) {
    inputs.validate();
    if (k < 0 || static_cast<std::size_t>(k) > inputs.num_influencers)
        throw DataError("k must lie in [0, |I|]");
    if (alpha < 0 || alpha > 1)
        throw DataError("alpha must lie in [0, 1]");

    SeedSet result;
    result.alpha = alpha;
    result.k = k;

    Pool pool(inputs.num_nodes);
    std::vector<char> selected(inputs.num_influencers, 0);

    // initial full pass fixes the min-max bounds, exactly as in the lazy variant
    Bounds bounds;
    {
        Candidate tmp;
        bool first = true;
        for (std::size_t u = 0; u < inputs.num_influencers; ++u) {
            evaluate_candidate(inputs, u, pool, tmp);
            if (first || tmp.omega < bounds.omega_lb)
                bounds.omega_lb = tmp.omega;
            if (first || tmp.omega > bounds.omega_ub)
                bounds.omega_ub = tmp.omega;
            first = false;
        }
    }
    bounds.f_lb = *std::min_element(inputs.fairness.begin(), inputs.fairness.end());
    bounds.f_ub = *std::max_element(inputs.fairness.begin(), inputs.fairness.end());

    for (int step = 0; step < k; ++step) {
        bool have_best = false;
        std::size_t best_u = 0;
        Candidate best;
        for (std::size_t u = 0; u < inputs.num_influencers; ++u) {
            if (selected[u])
                continue;
            Candidate c;
            evaluate_candidate(inputs, u, pool, c);
            ++result.evaluations;
            c.omega_scaled = bounds.rescale(c.omega);
            c.key = (1.0 - alpha) * c.omega_scaled + alpha * inputs.fairness[u];
            if (!have_best || ranks_before(c.key, c.omega, u, best.key, best.omega, best_u)) {
                have_best = true;
                best_u = u;
                best = std::move(c);
            }
        }
        if (!have_best)
            break;
        selected[best_u] = 1;
        SeedInfo info;
        info.influencer = static_cast<int>(best_u);
        info.omega = best.omega;
        info.omega_scaled = best.omega_scaled;
        info.fairness = inputs.fairness[best_u];
        info.claimed = best.claimed;
        std::sort(info.claimed.begin(), info.claimed.end());
        pool.remove(info.claimed);
        result.seeds.push_back(std::move(info));
    }
    return result;
}

void write_seed_set_json(const SeedSet& seeds, const SelectionInputs& inputs, std::ostream& out) {
    using json = nlohmann::ordered_json;
    json j;
    j["alpha"] = seeds.alpha;
    j["k"] = seeds.k;
    auto& arr = j["seeds"] = json::array();
    for (const auto& s : seeds.seeds) {
        json row;
        row["id"] = inputs.influencer_ids[static_cast<std::size_t>(s.influencer)];
        row["omega"] = s.omega;
        row["omega_scaled"] = s.omega_scaled;
        row["fairness"] = s.fairness;
        auto& claimed = row["claimed"] = json::array();
        for (const int v : s.claimed)
            claimed.push_back(inputs.node_ids[static_cast<std::size_t>(v)]);
        arr.push_back(std::move(row));
    }
    out << j.dump(2) << '\n';
}

SeedSet read_seed_set_json(std::istream& in, std::vector<std::string>* seed_ids) {
    using json = nlohmann::json;
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed seed file: ") + e.what());
    }
    SeedSet seeds;
    seeds.alpha = j.at("alpha").get<double>();
    seeds.k = j.at("k").get<int>();
    for (const auto& row : j.at("seeds")) {
        SeedInfo info;
        info.omega = row.at("omega").get<double>();
        info.omega_scaled = row.at("omega_scaled").get<double>();
        info.fairness = row.at("fairness").get<double>();
        if (seed_ids)
            seed_ids->push_back(row.at("id").get<std::string>());
        seeds.seeds.push_back(std::move(info));
    }
    return seeds;
}

} // namespace fim
