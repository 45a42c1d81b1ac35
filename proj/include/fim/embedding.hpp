#pragma once

#include "fim/data.hpp"
#include "fim/rng.hpp"
#include "fim/sampling.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace fim {

enum class TrainMode : std::uint32_t { FPS = 0, FAC = 1, FPS_FAC = 2 };

const char* train_mode_name(TrainMode mode);
TrainMode parse_train_mode(const std::string& name);

// Two-layer network parameters. theta is row-major |I| x |E|; the susceptible
// matrix T (|E| x |V|) is stored node-major so each node's column is
// contiguous. umat/bias_c are the fairness-branch weights (zero unless FAC).
struct EmbeddingModel {
    TrainMode mode = TrainMode::FAC;
    std::size_t num_influencers = 0;
    std::size_t num_nodes = 0;
    std::size_t embed_dim = 0;

    std::vector<float> theta;
    std::vector<float> tmat;
    std::vector<float> bias_b;
    std::vector<float> umat;
    float bias_c = 0;

    std::vector<std::string> influencer_ids;
    std::vector<std::string> node_ids;
    std::unordered_map<std::string, int> influencer_index;
    std::unordered_map<std::string, int> node_index;

    std::span<float> theta_row(std::size_t u) { return {theta.data() + u * embed_dim, embed_dim}; }
    std::span<const float> theta_row(std::size_t u) const {
        return {theta.data() + u * embed_dim, embed_dim};
    }
    std::span<float> node_col(std::size_t v) { return {tmat.data() + v * embed_dim, embed_dim}; }
    std::span<const float> node_col(std::size_t v) const {
        return {tmat.data() + v * embed_dim, embed_dim};
    }

    int influencer_of(const std::string& id) const; // throws DataError when unindexed
    int node_of(const std::string& id) const;
    bool all_finite() const;
    void build_index_maps();
};

// theta/T uniform in [-0.5/|E|, +0.5/|E|]; biases and fairness branch zero.
EmbeddingModel init_model(std::vector<std::string> influencer_ids,
                          std::vector<std::string> node_ids, std::size_t embed_dim, Rng& rng);

// z = theta_u . T[:,v] + b_v, accumulated in double.
double score_pair(const EmbeddingModel& model, int u, int v);
double score_pair(const EmbeddingModel& model, const std::string& u, const std::string& v);

// Analytic gradients of one NCE step, computed in double precision. `targets`
// holds the touched nodes (positive first, duplicates merged); dt is
// targets.size() x |E| row-major.
struct NceGradients {
    double loss = 0;
    std::vector<double> dtheta;
    std::vector<int> targets;
    std::vector<double> dt;
    std::vector<double> db;
};

void nce_gradients(const EmbeddingModel& model, int u, int positive, std::span<const int> negatives,
                   NceGradients& out);
NceGradients nce_gradients(const EmbeddingModel& model, int u, int positive,
                           std::span<const int> negatives);

// One plain-SGD step on theta_u, the touched T columns and b entries. Returns
// the loss at the pre-update point.
double nce_step(EmbeddingModel& model, int u, int positive, std::span<const int> negatives,
                double lr, NceGradients& scratch);
double nce_step(EmbeddingModel& model, int u, int positive, std::span<const int> negatives,
                double lr);

struct FairnessGradients {
    double loss = 0;
    double output = 0; // sigmoid(theta_u . U + c)
    std::vector<double> dtheta;
    std::vector<double> du;
    double dc = 0;
};

FairnessGradients fairness_gradients(const EmbeddingModel& model, int u, double target);

// MSE step of the fairness branch; updates theta_u, U and c. FPS models have
// no fairness branch, calling this on one is an error.
double fairness_step(EmbeddingModel& model, int u, double target, double lr);

// Unigram-style noise distribution over the participants observed in contexts,
// probability proportional to frequency^exponent.
struct NoiseDistribution {
    std::vector<int> support; // node indices, ascending
    std::vector<double> cdf;  // cumulative probability over support

    int sample(Rng& rng) const;
    double probability(int node) const;
};

NoiseDistribution build_noise_distribution(const std::vector<ContextSet>& contexts,
                                           const std::unordered_map<std::string, int>& node_index,
                                           double exponent = 0.75);

struct TrainConfig {
    std::size_t embed_dim = 50;
    int epochs = 10;
    double learning_rate = 0.1;
    int negatives = 10;
    double eta_percent = 120.0;
    TrainMode mode = TrainMode::FAC;
    std::uint64_t seed = 1;
    double noise_exponent = 0.75;
    int min_cascade_floor = 3;
    bool fac_targets_averaged = false; // pooled per-influencer fairness by default
    int threads = 1;                   // >1 enables the non-deterministic hogwild path
    std::string dump_contexts_path;    // first epoch's sampled contexts, as jsonl

    void validate() const;
};

void write_contexts_jsonl(const std::vector<ContextSet>& contexts, std::ostream& out);

struct TrainTrace {
    std::vector<double> epoch_mean_nce_loss;
    std::vector<double> epoch_mean_fairness_loss;
};

EmbeddingModel train(const CascadeLog& train_log, const ProfileTable& profiles,
                     const AttributeSchema& schema, int attr, const TrainConfig& config,
                     TrainTrace* trace = nullptr);

void save_model(const EmbeddingModel& model, const std::string& path);
EmbeddingModel load_model(const std::string& path);

std::string model_summary_json(const EmbeddingModel& model, std::size_t top_k = 5);

} // namespace fim
