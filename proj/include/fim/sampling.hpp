#pragma once

#include "fim/data.hpp"
#include "fim/rng.hpp"

#include <string>
#include <vector>

namespace fim {

enum class SampleMode { FPS, FAC };

// Training context for one cascade: (initiator, participant) pairs, stored as
// the shared initiator plus the drawn participant sequence.
struct ContextSet {
    std::string cascade_id;
    std::string initiator;
    std::vector<std::string> participants; // drawn i.i.d. with replacement
    SampleMode mode = SampleMode::FAC;

    bool empty() const { return participants.empty(); }
    std::size_t size() const { return participants.size(); }
};

// p(v|d) proportional to 1/(t_v - t_u) over the cascade's participants, in
// event order. Zero elapsed time is treated as one second.
std::vector<double> temporal_weights(const Cascade& cascade);

// round(eta/100 * participants * f), half-up, at least 1 while the cascade has
// participants and f > 0.
std::size_t context_length(std::size_t participants, double eta_percent, double f);

ContextSet sample_context_fac(const Cascade& cascade, double eta_percent, Rng& rng);

// f_u is the initiator's pooled fairness; oversampling and the fairness
// downsample collapse into one draw of round(eta/100 * |d| * f_u) pairs.
ContextSet sample_context_fps(const Cascade& cascade, double f_u, double eta_percent, Rng& rng);

// Guarantees each influencer at least `floor` non-empty contexts: where the
// penalty left fewer, its `floor` largest cascades (participant count, ties by
// cascade id) are re-sampled with f clamped to 1. Influencers with fewer than
// `floor` cascades keep all of theirs. `contexts` is parallel to `cascades`.
void apply_min_cascade_floor(std::vector<ContextSet>& contexts,
                             const std::vector<Cascade>& cascades, double eta_percent, int floor,
                             std::uint64_t seed);

} // namespace fim
