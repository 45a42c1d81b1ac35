#include "fim/embedding.hpp"

#include "fim/errors.hpp"
#include "fim/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <thread>

namespace fim {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(sigmoid(x)) without overflow for large |x|
double log_sigmoid(double x) {
    if (x >= 0)
        return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

void le_write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i)
        buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 4);
}

void le_write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i)
        buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

void le_write_f32(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    le_write_u32(out, bits);
}

std::uint32_t le_read_u32(std::istream& in) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in)
        throw ParseError("truncated model file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
    return v;
}

std::uint64_t le_read_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in)
        throw ParseError("truncated model file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

float le_read_f32(std::istream& in) {
    const std::uint32_t bits = le_read_u32(in);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

void write_id_table(std::ostream& out, const std::vector<std::string>& ids) {
    for (const auto& id : ids) {
        le_write_u32(out, static_cast<std::uint32_t>(id.size()));
        out.write(id.data(), static_cast<std::streamsize>(id.size()));
    }
}

std::vector<std::string> read_id_table(std::istream& in, std::size_t count) {
    std::vector<std::string> ids(count);
    for (auto& id : ids) {
        const std::uint32_t len = le_read_u32(in);
        id.resize(len);
        in.read(id.data(), len);
        if (!in)
            throw ParseError("truncated model file");
    }
    return ids;
}

constexpr std::uint32_t kModelVersion = 1;

} // namespace

const char* train_mode_name(TrainMode mode) {
    switch (mode) {
    case TrainMode::FPS:
        return "fps";
    case TrainMode::FAC:
        return "fac";
    case TrainMode::FPS_FAC:
        return "fps-fac";
    }
    return "?";
}

TrainMode parse_train_mode(const std::string& name) {
    if (name == "fps")
        return TrainMode::FPS;
    if (name == "fac")
        return TrainMode::FAC;
    if (name == "fps-fac" || name == "fps+fac")
        return TrainMode::FPS_FAC;
    throw DataError("unknown training mode '" + name + "'");
}

int EmbeddingModel::influencer_of(const std::string& id) const {
    const auto it = influencer_index.find(id);
    if (it == influencer_index.end())
        throw DataError("influencer '" + id + "' is not indexed by this model");
    return it->second;
}

int EmbeddingModel::node_of(const std::string& id) const {
    const auto it = node_index.find(id);
    if (it == node_index.end())
        throw DataError("node '" + id + "' is not indexed by this model");
    return it->second;
}

bool EmbeddingModel::all_finite() const {
    const auto ok = [](std::span<const float> xs) {
        return std::all_of(xs.begin(), xs.end(), [](float x) { return std::isfinite(x); });
    };
    return ok(theta) && ok(tmat) && ok(bias_b) && ok(umat) && std::isfinite(bias_c);
}

void EmbeddingModel::build_index_maps() {
    influencer_index.clear();
    node_index.clear();
    for (std::size_t i = 0; i < influencer_ids.size(); ++i)
        influencer_index.emplace(influencer_ids[i], static_cast<int>(i));
    for (std::size_t i = 0; i < node_ids.size(); ++i)
        node_index.emplace(node_ids[i], static_cast<int>(i));
}

EmbeddingModel init_model(std::vector<std::string> influencer_ids,
                          std::vector<std::string> node_ids, std::size_t embed_dim, Rng& rng) {
    if (influencer_ids.empty() || node_ids.empty() || embed_dim == 0)
        throw DataError("model dimensions must be positive");
    EmbeddingModel m;
    m.num_influencers = influencer_ids.size();
    m.num_nodes = node_ids.size();
    m.embed_dim = embed_dim;
    m.influencer_ids = std::move(influencer_ids);
    m.node_ids = std::move(node_ids);
    m.build_index_maps();

    const double half = 0.5 / static_cast<double>(embed_dim);
    m.theta.resize(m.num_influencers * embed_dim);
    for (auto& x : m.theta)
        x = static_cast<float>((uniform01(rng) - 0.5) * 2.0 * half);
    m.tmat.resize(m.num_nodes * embed_dim);
    for (auto& x : m.tmat)
        x = static_cast<float>((uniform01(rng) - 0.5) * 2.0 * half);
    m.bias_b.assign(m.num_nodes, 0.0f);
    m.umat.assign(embed_dim, 0.0f);
    m.bias_c = 0;
    return m;
}

double score_pair(const EmbeddingModel& model, int u, int v) {
    if (u < 0 || static_cast<std::size_t>(u) >= model.num_influencers || v < 0 ||
        static_cast<std::size_t>(v) >= model.num_nodes)
        throw DataError("score_pair index out of range");
    const auto tu = model.theta_row(static_cast<std::size_t>(u));
    const auto tv = model.node_col(static_cast<std::size_t>(v));
    double z = model.bias_b[static_cast<std::size_t>(v)];
    for (std::size_t e = 0; e < model.embed_dim; ++e)
        z += static_cast<double>(tu[e]) * static_cast<double>(tv[e]);
    return z;
}

double score_pair(const EmbeddingModel& model, const std::string& u, const std::string& v) {
    return score_pair(model, model.influencer_of(u), model.node_of(v));
}

void nce_gradients(const EmbeddingModel& model, int u, int positive, std::span<const int> negatives,
                   NceGradients& out) {
    out.loss = 0;
    out.dtheta.assign(model.embed_dim, 0.0);
    out.targets.clear();
    out.dt.clear();
    out.db.clear();

    const auto add_target = [&](int v, double g) {
        // merge duplicate draws of the same node
        for (std::size_t i = 0; i < out.targets.size(); ++i) {
            if (out.targets[i] == v) {
                out.db[i] += g;
                return i;
            }
        }
        out.targets.push_back(v);
        out.db.push_back(g);
        out.dt.resize(out.targets.size() * model.embed_dim, 0.0);
        return out.targets.size() - 1;
    };

    const auto tu = model.theta_row(static_cast<std::size_t>(u));
    const auto accumulate = [&](int v, bool is_positive) {
        const double z = score_pair(model, u, v);
        out.loss -= is_positive ? log_sigmoid(z) : log_sigmoid(-z);
        const double g = sigmoid(z) - (is_positive ? 1.0 : 0.0); // dL/dz
        add_target(v, g);
        const auto tv = model.node_col(static_cast<std::size_t>(v));
        for (std::size_t e = 0; e < model.embed_dim; ++e)
            out.dtheta[e] += g * static_cast<double>(tv[e]);
    };
    accumulate(positive, true);
    for (const int v : negatives) {
        if (v == positive)
            throw DataError("negative sample equals the positive");
        accumulate(v, false);
    }
    // dL/dT columns: g_v * theta_u, summed per unique target
    for (std::size_t i = 0; i < out.targets.size(); ++i) {
        double* dcol = out.dt.data() + i * model.embed_dim;
        for (std::size_t e = 0; e < model.embed_dim; ++e)
            dcol[e] = out.db[i] * static_cast<double>(tu[e]);
    }
}

NceGradients nce_gradients(const EmbeddingModel& model, int u, int positive,
                           std::span<const int> negatives) {
    NceGradients out;
    nce_gradients(model, u, positive, negatives, out);
    return out;
}

double nce_step(EmbeddingModel& model, int u, int positive, std::span<const int> negatives,
                double lr, NceGradients& scratch) {
    nce_gradients(model, u, positive, negatives, scratch);
    auto tu = model.theta_row(static_cast<std::size_t>(u));
    for (std::size_t i = 0; i < scratch.targets.size(); ++i) {
        const auto v = static_cast<std::size_t>(scratch.targets[i]);
        auto tv = model.node_col(v);
        const double* dcol = scratch.dt.data() + i * model.embed_dim;
        for (std::size_t e = 0; e < model.embed_dim; ++e)
            tv[e] = static_cast<float>(static_cast<double>(tv[e]) - lr * dcol[e]);
        model.bias_b[v] = static_cast<float>(static_cast<double>(model.bias_b[v]) - lr * scratch.db[i]);
    }
    for (std::size_t e = 0; e < model.embed_dim; ++e)
        tu[e] = static_cast<float>(static_cast<double>(tu[e]) - lr * scratch.dtheta[e]);
    return scratch.loss;
}

double nce_step(EmbeddingModel& model, int u, int positive, std::span<const int> negatives,
                double lr) {
    NceGradients scratch;
    return nce_step(model, u, positive, negatives, lr, scratch);
}

FairnessGradients fairness_gradients(const EmbeddingModel& model, int u, double target) {
    FairnessGradients out;
    const auto tu = model.theta_row(static_cast<std::size_t>(u));
    double z = model.bias_c;
    for (std::size_t e = 0; e < model.embed_dim; ++e)
        z += static_cast<double>(tu[e]) * static_cast<double>(model.umat[e]);
    const double o = sigmoid(z);
    out.output = o;
    const double err = target - o;
    out.loss = err * err;
    const double g = -2.0 * err * o * (1.0 - o); // dL/dz
    out.dtheta.resize(model.embed_dim);
    out.du.resize(model.embed_dim);
    for (std::size_t e = 0; e < model.embed_dim; ++e) {
        out.dtheta[e] = g * static_cast<double>(model.umat[e]);
        out.du[e] = g * static_cast<double>(tu[e]);
    }
    out.dc = g;
    return out;
}

double fairness_step(EmbeddingModel& model, int u, double target, double lr) {
    if (model.mode == TrainMode::FPS)
        throw DataError("fairness_step is not available in FPS mode");
    const auto grads = fairness_gradients(model, u, target);
    auto tu = model.theta_row(static_cast<std::size_t>(u));
    for (std::size_t e = 0; e < model.embed_dim; ++e) {
        tu[e] = static_cast<float>(static_cast<double>(tu[e]) - lr * grads.dtheta[e]);
        model.umat[e] = static_cast<float>(static_cast<double>(model.umat[e]) - lr * grads.du[e]);
    }
    model.bias_c = static_cast<float>(static_cast<double>(model.bias_c) - lr * grads.dc);
    return grads.loss;
}

int NoiseDistribution::sample(Rng& rng) const {
    return support[sample_cdf(cdf, uniform01(rng))];
}

double NoiseDistribution::probability(int node) const {
    const auto it = std::lower_bound(support.begin(), support.end(), node);
    if (it == support.end() || *it != node)
        return 0;
    const auto i = static_cast<std::size_t>(it - support.begin());
    return i == 0 ? cdf[0] : cdf[i] - cdf[i - 1];
}

NoiseDistribution build_noise_distribution(const std::vector<ContextSet>& contexts,
                                           const std::unordered_map<std::string, int>& node_index,
                                           double exponent) {
    std::map<int, std::size_t> freq; // ordered for a deterministic support
    for (const auto& ctx : contexts)
        for (const auto& participant : ctx.participants) {
            const auto it = node_index.find(participant);
            if (it == node_index.end())
                throw DataError("participant '" + participant + "' is not indexed");
            ++freq[it->second];
        }
    if (freq.empty())
        throw DataError("cannot build a noise distribution from empty contexts");
    NoiseDistribution dist;
    dist.support.reserve(freq.size());
    dist.cdf.reserve(freq.size());
    double total = 0;
    for (const auto& [node, count] : freq) {
        dist.support.push_back(node);
        total += std::pow(static_cast<double>(count), exponent);
        dist.cdf.push_back(total);
    }
    for (double& x : dist.cdf)
        x /= total;
    return dist;
}

void TrainConfig::validate() const {
    if (embed_dim < 1 || epochs < 1 || learning_rate <= 0 || negatives < 1)
        throw DataError("invalid training configuration");
    if (eta_percent <= 0 || min_cascade_floor < 1 || threads < 1)
        throw DataError("invalid training configuration");
}

void write_contexts_jsonl(const std::vector<ContextSet>& contexts, std::ostream& out) {
    using json = nlohmann::ordered_json;
    for (const auto& ctx : contexts) {
        json j;
        j["cascade"] = ctx.cascade_id;
        j["initiator"] = ctx.initiator;
        j["mode"] = ctx.mode == SampleMode::FPS ? "fps" : "fac";
        j["participants"] = ctx.participants;
        out << j.dump() << '\n';
    }
}

namespace {

struct IndexedContext {
    std::size_t cascade = 0; // position in the training log
    int initiator = -1;
    std::vector<int> participants;
};

// Draws `count` negatives for one positive, rejecting the positive itself.
void draw_negatives(const NoiseDistribution& noise, int positive, int count, Rng& rng,
                    std::vector<int>& out) {
    out.clear();
    for (int i = 0; i < count; ++i) {
        int v = -1;
        for (int attempts = 0; attempts < 100; ++attempts) {
            v = noise.sample(rng);
            if (v != positive)
                break;
            v = -1;
        }
        if (v >= 0)
            out.push_back(v);
    }
}

} // namespace

EmbeddingModel train(const CascadeLog& train_log, const ProfileTable& profiles,
                     const AttributeSchema& schema, int attr, const TrainConfig& config,
                     TrainTrace* trace) {
    config.validate();
    if (train_log.cascades.empty())
        throw DataError("training split is empty");
    if (attr < 0 || static_cast<std::size_t>(attr) >= schema.attributes.size())
        throw DataError("attribute index out of range");

    Rng init_rng(derive_seed(config.seed, "init"));
    EmbeddingModel model =
        init_model(train_log.influencers, train_log.nodes, config.embed_dim, init_rng);
    model.mode = config.mode;

    const auto population = category_population(
        train_log, profiles, attr, schema.attributes[static_cast<std::size_t>(attr)].categories.size());

    // Pooled fairness drives the FPS penalty; the FAC regression target is
    // pooled too unless configured to use the per-cascade average.
    const bool needs_penalty = config.mode != TrainMode::FAC;
    const bool needs_targets = config.mode != TrainMode::FPS;
    std::vector<double> penalty(model.num_influencers, 1.0);
    std::vector<double> target(model.num_influencers, 1.0);
    for (std::size_t i = 0; i < model.influencer_ids.size(); ++i) {
        const auto& id = model.influencer_ids[i];
        double pooled = 0;
        if (needs_penalty || (needs_targets && !config.fac_targets_averaged))
            pooled = influencer_fairness_pooled(train_log, id, attr, profiles, population);
        if (needs_penalty)
            penalty[i] = pooled;
        if (needs_targets)
            target[i] = config.fac_targets_averaged
                            ? influencer_fairness_avg(train_log, id, attr, profiles, population)
                            : pooled;
    }

    const bool fps_sampling = config.mode != TrainMode::FAC;
    const std::size_t n_cascades = train_log.cascades.size();

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const std::uint64_t epoch_seed = derive_seed(config.seed, "epoch:" + std::to_string(epoch));

        // per-cascade contexts, deterministic per (seed, epoch, cascade id)
        std::vector<ContextSet> contexts(n_cascades);
        for (std::size_t i = 0; i < n_cascades; ++i) {
            const Cascade& c = train_log.cascades[i];
            Rng rng(derive_seed(epoch_seed, c.id));
            if (c.participant_count() == 0) {
                contexts[i].cascade_id = c.id;
                contexts[i].initiator = c.initiator();
                contexts[i].mode = fps_sampling ? SampleMode::FPS : SampleMode::FAC;
                continue;
            }
            if (fps_sampling) {
                const auto u = static_cast<std::size_t>(model.influencer_of(c.initiator()));
                contexts[i] = sample_context_fps(c, penalty[u], config.eta_percent, rng);
            } else {
                contexts[i] = sample_context_fac(c, config.eta_percent, rng);
            }
        }
        if (fps_sampling)
            apply_min_cascade_floor(contexts, train_log.cascades, config.eta_percent,
                                    config.min_cascade_floor, epoch_seed);
        if (epoch == 0 && !config.dump_contexts_path.empty()) {
            std::ofstream dump(config.dump_contexts_path);
            if (!dump)
                throw DataError("cannot write '" + config.dump_contexts_path + "'");
            write_contexts_jsonl(contexts, dump);
        }

        const NoiseDistribution noise =
            build_noise_distribution(contexts, model.node_index, config.noise_exponent);

        // translate ids once per epoch
        std::vector<IndexedContext> indexed(n_cascades);
        for (std::size_t i = 0; i < n_cascades; ++i) {
            indexed[i].cascade = i;
            indexed[i].initiator = model.influencer_of(contexts[i].initiator);
            indexed[i].participants.reserve(contexts[i].participants.size());
            for (const auto& p : contexts[i].participants)
                indexed[i].participants.push_back(model.node_of(p));
        }

        Rng shuffle_rng(derive_seed(epoch_seed, "shuffle"));
        const auto order = sample_without_replacement(shuffle_rng, n_cascades, n_cascades);

        const auto process = [&](std::size_t begin, std::size_t end, double& nce_loss,
                                 std::size_t& nce_pairs, double& fair_loss,
                                 std::size_t& fair_steps) {
            NceGradients scratch;
            std::vector<int> negatives;
            for (std::size_t oi = begin; oi < end; ++oi) {
                const IndexedContext& ctx = indexed[order[oi]];
                const std::string& cascade_id = train_log.cascades[ctx.cascade].id;
                Rng neg_rng(derive_seed(epoch_seed, "neg:" + cascade_id));
                for (const int v : ctx.participants) {
                    draw_negatives(noise, v, config.negatives, neg_rng, negatives);
                    nce_loss += nce_step(model, ctx.initiator, v, negatives, config.learning_rate,
                                         scratch);
                    ++nce_pairs;
                }
                if (needs_targets) {
                    fair_loss += fairness_step(model, ctx.initiator,
                                               target[static_cast<std::size_t>(ctx.initiator)],
                                               config.learning_rate);
                    ++fair_steps;
                }
            }
        };

        double nce_loss = 0, fair_loss = 0;
        std::size_t nce_pairs = 0, fair_steps = 0;
        if (config.threads <= 1) {
            process(0, n_cascades, nce_loss, nce_pairs, fair_loss, fair_steps);
        } else {
            // hogwild shards; parameter updates race benignly, not bit-reproducible
            const auto n_threads = static_cast<std::size_t>(config.threads);
            std::vector<double> tl_nce(n_threads, 0), tl_fair(n_threads, 0);
            std::vector<std::size_t> tl_pairs(n_threads, 0), tl_steps(n_threads, 0);
            std::vector<std::thread> workers;
            for (std::size_t t = 0; t < n_threads; ++t) {
                const std::size_t begin = n_cascades * t / n_threads;
                const std::size_t end = n_cascades * (t + 1) / n_threads;
                workers.emplace_back([&, t, begin, end] {
                    process(begin, end, tl_nce[t], tl_pairs[t], tl_fair[t], tl_steps[t]);
                });
            }
            for (auto& w : workers)
                w.join();
            for (std::size_t t = 0; t < n_threads; ++t) {
                nce_loss += tl_nce[t];
                fair_loss += tl_fair[t];
                nce_pairs += tl_pairs[t];
                fair_steps += tl_steps[t];
            }
        }

        if (!std::isfinite(nce_loss) || !std::isfinite(fair_loss))
            throw NumericError("non-finite loss in epoch " + std::to_string(epoch));
        if (!model.all_finite())
            throw NumericError("non-finite parameter after epoch " + std::to_string(epoch));
        if (trace) {
            trace->epoch_mean_nce_loss.push_back(nce_pairs ? nce_loss / static_cast<double>(nce_pairs)
                                                           : 0.0);
            trace->epoch_mean_fairness_loss.push_back(
                fair_steps ? fair_loss / static_cast<double>(fair_steps) : 0.0);
        }
    }
    return model;
}

void save_model(const EmbeddingModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write model file '" + path + "'");
    out.write("FIMS", 4);
    le_write_u32(out, kModelVersion);
    le_write_u32(out, static_cast<std::uint32_t>(model.mode));
    le_write_u64(out, model.num_influencers);
    le_write_u64(out, model.num_nodes);
    le_write_u64(out, model.embed_dim);
    for (const float x : model.theta)
        le_write_f32(out, x);
    // T is |E| x |V| row-major on disk
    for (std::size_t e = 0; e < model.embed_dim; ++e)
        for (std::size_t v = 0; v < model.num_nodes; ++v)
            le_write_f32(out, model.tmat[v * model.embed_dim + e]);
    for (const float x : model.bias_b)
        le_write_f32(out, x);
    for (const float x : model.umat)
        le_write_f32(out, x);
    le_write_f32(out, model.bias_c);
    write_id_table(out, model.influencer_ids);
    write_id_table(out, model.node_ids);
    if (!out)
        throw DataError("failed writing model file '" + path + "'");
}

EmbeddingModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open model file '" + path + "'");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "FIMS", 4) != 0)
        throw ParseError("bad model magic in '" + path + "'");
    const std::uint32_t version = le_read_u32(in);
    if (version != kModelVersion)
        throw ParseError("unsupported model version " + std::to_string(version));
    EmbeddingModel m;
    const std::uint32_t mode = le_read_u32(in);
    if (mode > 2)
        throw ParseError("bad mode tag in model file");
    m.mode = static_cast<TrainMode>(mode);
    m.num_influencers = le_read_u64(in);
    m.num_nodes = le_read_u64(in);
    m.embed_dim = le_read_u64(in);
    m.theta.resize(m.num_influencers * m.embed_dim);
    for (auto& x : m.theta)
        x = le_read_f32(in);
    m.tmat.resize(m.num_nodes * m.embed_dim);
    for (std::size_t e = 0; e < m.embed_dim; ++e)
        for (std::size_t v = 0; v < m.num_nodes; ++v)
            m.tmat[v * m.embed_dim + e] = le_read_f32(in);
    m.bias_b.resize(m.num_nodes);
    for (auto& x : m.bias_b)
        x = le_read_f32(in);
    m.umat.resize(m.embed_dim);
    for (auto& x : m.umat)
        x = le_read_f32(in);
    m.bias_c = le_read_f32(in);
    m.influencer_ids = read_id_table(in, m.num_influencers);
    m.node_ids = read_id_table(in, m.num_nodes);
    m.build_index_maps();
    return m;
}

std::string model_summary_json(const EmbeddingModel& model, std::size_t top_k) {
    using json = nlohmann::ordered_json;
    json j;
    j["mode"] = train_mode_name(model.mode);
    j["influencers"] = model.num_influencers;
    j["nodes"] = model.num_nodes;
    j["embed_dim"] = model.embed_dim;

    std::vector<std::pair<double, std::size_t>> norms(model.num_influencers);
    for (std::size_t u = 0; u < model.num_influencers; ++u) {
        double sq = 0;
        for (const float x : model.theta_row(u))
            sq += static_cast<double>(x) * static_cast<double>(x);
        norms[u] = {std::sqrt(sq), u};
    }
    double total = 0, max_norm = 0;
    for (const auto& [n, u] : norms) {
        (void)u;
        total += n;
        max_norm = std::max(max_norm, n);
    }
    j["theta_norm_mean"] = total / static_cast<double>(model.num_influencers);
    j["theta_norm_max"] = max_norm;
    std::sort(norms.begin(), norms.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first)
            return a.first > b.first;
        return a.second < b.second;
    });
    auto& top = j["top_influencers"] = json::array();
    for (std::size_t i = 0; i < std::min(top_k, norms.size()); ++i) {
        const auto [norm, u] = norms[i];
        json row;
        row["id"] = model.influencer_ids[u];
        row["norm"] = norm;
        auto& head = row["theta_head"] = json::array();
        for (std::size_t e = 0; e < std::min<std::size_t>(8, model.embed_dim); ++e)
            head.push_back(model.theta_row(u)[e]);
        top.push_back(std::move(row));
    }
    return j.dump(2);
}

} // namespace fim
