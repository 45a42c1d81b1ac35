#pragma once

#include "fim/data.hpp"
#include "fim/embedding.hpp"
#include "fim/fairness.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace fim {

// Inputs of the fair-greedy selector: diffusion matrix D (|I| x |V| row-major),
// expected spread lambda and the per-influencer average cascade fairness F.
struct SelectionInputs {
    std::size_t num_influencers = 0;
    std::size_t num_nodes = 0;
    std::vector<float> probabilities; // D
    std::vector<int> lambda;
    std::vector<double> fairness; // F
    std::vector<std::string> influencer_ids;
    std::vector<std::string> node_ids;
    std::vector<bool> fairness_flagged; // influencers with no participants (mu = 0 convention)

    float probability(std::size_t u, std::size_t v) const {
        return probabilities[u * num_nodes + v];
    }
    void validate() const;
};

// D[u,v] = sigmoid(theta_u . T[:,v]); the output bias is excluded unless
// include_bias is set.
std::vector<float> diffusion_matrix(const EmbeddingModel& model, bool include_bias = false);

// lambda[u] = round(|theta_u| * |V| / sum |theta|), half-up, clamped to [1,|V|].
std::vector<int> expected_spread(const EmbeddingModel& model);

SelectionInputs build_selection_inputs(const EmbeddingModel& model, const CascadeLog& train_log,
                                       const ProfileTable& profiles, int attr,
                                       const std::vector<long long>& population,
                                       bool include_bias = false);

struct SeedInfo {
    int influencer = -1;
    double omega = 0;        // cumulative diffusion probability of the claimed nodes
    double omega_scaled = 0; // omega min-max rescaled into [F_lb, F_ub]
    double fairness = 0;
    std::vector<int> claimed; // nodes removed from the pool by this seed
};

struct SeedSet {
    double alpha = 0;
    int k = 0;
    std::vector<SeedInfo> seeds;
    std::size_t evaluations = 0; // candidate (re-)evaluations performed
};

// CELF-style lazy greedy over the key (1-alpha)*omega_scaled + alpha*F[u].
// Candidates are re-ranked lazily; a seed is taken only when its cached entry
// was computed at the current seed-set size.
SeedSet fair_greedy(const SelectionInputs& inputs, int k, double alpha);

// Reference implementation: re-evaluates every candidate at every step.
SeedSet naive_fair_greedy(const SelectionInputs& inputs, int k, double alpha);

void write_seed_set_json(const SeedSet& seeds, const SelectionInputs& inputs, std::ostream& out);
SeedSet read_seed_set_json(std::istream& in, std::vector<std::string>* seed_ids = nullptr);

} // namespace fim
