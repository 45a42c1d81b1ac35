#pragma once

#include "fim/data.hpp"
#include "fim/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fim {

struct SynthConfig {
    std::size_t nodes = 2000;
    std::size_t influencers = 50;
    AttributeSchema schema;
    std::vector<std::vector<double>> marginals; // per attribute, sums to 1
    int homophily_attr = 0;
    double homophily = 0.0; // 0 = attribute-independent G(n,p), 1 = no cross-group edges
    double edge_prob = 0.01;
    double activation_prob = 0.1;
    int cascades_per_influencer = 10;
    std::uint64_t seed = 7;

    void validate() const;
};

SynthConfig weibo_like_config();
SynthConfig digg_like_config();

struct DirectedGraph {
    std::size_t n = 0;
    std::vector<std::vector<int>> out;

    std::size_t edge_count() const;
};

struct SynthData {
    DirectedGraph graph;
    AttributeSchema schema;
    ProfileTable profiles;
    std::vector<std::string> node_names; // node index -> id
    std::size_t influencer_count = 0;    // first influencer_count nodes start cascades
};

// Attributes i.i.d. from the marginals; edge (u,v) kept with probability
// p*(1+h) when same-category on the homophily attribute and p*(1-h) otherwise,
// renormalized so the expected degree stays p*(n-1).
SynthData gen_graph(const SynthConfig& config);

// Independent-cascade simulation; timestamps are BFS round numbers on top of a
// per-cascade start offset, the initiator sits at round 0.
CascadeLog simulate_ic_cascades(const DirectedGraph& graph,
                                const std::vector<std::string>& node_names,
                                std::size_t influencer_count, double activation_prob,
                                int cascades_per_influencer, std::uint64_t seed);

struct FlipAudit {
    int attr = -1;
    int from_category = -1;
    int to_category = -1;
    std::vector<std::string> selected_influencers;
    std::vector<std::string> flipped_users;
};

// The unbalancing perturbation: picks floor(frac_influencers*|I|) influencers,
// pools the participants of their cascades that sit in from-category, and
// flips the global profile of a frac_participants share of them (each user at
// most once).
FlipAudit flip_attribute(const CascadeLog& log, ProfileTable& profiles, int attr,
                         int from_category, int to_category, double frac_influencers,
                         double frac_participants, Rng& rng);

void unflip(ProfileTable& profiles, const FlipAudit& audit);

void write_flip_audit_json(const FlipAudit& audit, const AttributeSchema& schema,
                           std::ostream& out);
FlipAudit read_flip_audit_json(std::istream& in, const AttributeSchema& schema);

struct MonteCarloResult {
    double mean_spread = 0; // distinct influenced nodes beyond the seeds
    double stderr_spread = 0;
    double mean_fairness = 0;
};

MonteCarloResult monte_carlo_spread(const DirectedGraph& graph, const std::vector<int>& seeds,
                                    double activation_prob, int runs,
                                    const ProfileTable& profiles,
                                    const std::vector<std::string>& node_names, int attr,
                                    const std::vector<long long>& population, std::uint64_t seed);

void write_edge_list(const DirectedGraph& graph, const std::vector<std::string>& node_names,
                     std::ostream& out);

} // namespace fim
