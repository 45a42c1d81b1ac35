#include "fim/sampling.hpp"

#include "fim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace fim {

std::vector<double> temporal_weights(const Cascade& cascade) {
    if (cascade.participant_count() == 0)
        throw DataError("cascade '" + cascade.id + "' has no participants");
    const std::int64_t t0 = cascade.start_time();
    std::vector<double> weights(cascade.participant_count());
    double total = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const std::int64_t elapsed = std::max<std::int64_t>(cascade.events[i + 1].time - t0, 1);
        weights[i] = 1.0 / static_cast<double>(elapsed);
        total += weights[i];
    }
    for (double& w : weights)
        w /= total;
    return weights;
}

std::size_t context_length(std::size_t participants, double eta_percent, double f) {
    if (participants == 0 || f <= 0)
        return 0;
    const double raw = eta_percent / 100.0 * static_cast<double>(participants) * f;
    const auto rounded = static_cast<std::size_t>(std::floor(raw + 0.5));
    return std::max<std::size_t>(rounded, 1);
}

namespace {

ContextSet sample_context(const Cascade& cascade, double f, double eta_percent, SampleMode mode,
                          Rng& rng) {
    if (eta_percent <= 0)
        throw DataError("eta_percent must be positive");
    ContextSet ctx;
    ctx.cascade_id = cascade.id;
    ctx.initiator = cascade.initiator();
    ctx.mode = mode;
    if (cascade.participant_count() == 0)
        return ctx;
    const auto weights = temporal_weights(cascade);
    std::vector<double> cdf(weights.size());
    std::partial_sum(weights.begin(), weights.end(), cdf.begin());
    const std::size_t count = context_length(cascade.participant_count(), eta_percent, f);
    ctx.participants.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t pick = sample_cdf(cdf, uniform01(rng));
        ctx.participants.push_back(cascade.events[pick + 1].user);
    }
    return ctx;
}

} // namespace

ContextSet sample_context_fac(const Cascade& cascade, double eta_percent, Rng& rng) {
    return sample_context(cascade, 1.0, eta_percent, SampleMode::FAC, rng);
}

ContextSet sample_context_fps(const Cascade& cascade, double f_u, double eta_percent, Rng& rng) {
    if (f_u <= 0 || f_u > 1)
        throw DataError("pooled fairness must be in (0, 1]");
    return sample_context(cascade, f_u, eta_percent, SampleMode::FPS, rng);
}

void apply_min_cascade_floor(std::vector<ContextSet>& contexts,
                             const std::vector<Cascade>& cascades, double eta_percent, int floor,
                             std::uint64_t seed) {
    if (floor < 1)
        throw DataError("floor must be at least 1");
    if (contexts.size() != cascades.size())
        throw DataError("contexts and cascades must be parallel");
    // cascade indices grouped per influencer, in input order
    std::map<std::string, std::vector<std::size_t>> by_influencer;
    for (std::size_t i = 0; i < cascades.size(); ++i)
        by_influencer[cascades[i].initiator()].push_back(i);

    for (const auto& [influencer, idx] : by_influencer) {
        (void)influencer;
        if (idx.size() < static_cast<std::size_t>(floor))
            continue;
        const auto non_empty = static_cast<std::size_t>(
            std::count_if(idx.begin(), idx.end(),
                          [&](std::size_t i) { return !contexts[i].empty(); }));
        if (non_empty >= static_cast<std::size_t>(floor))
            continue;
        std::vector<std::size_t> order = idx;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (cascades[a].participant_count() != cascades[b].participant_count())
                return cascades[a].participant_count() > cascades[b].participant_count();
            return cascades[a].id < cascades[b].id;
        });
        for (std::size_t i = 0; i < static_cast<std::size_t>(floor) && i < order.size(); ++i) {
            const std::size_t ci = order[i];
            if (cascades[ci].participant_count() == 0)
                continue; // nothing to restore from
            Rng rng(derive_seed(seed, "floor:" + cascades[ci].id));
            const SampleMode mode = contexts[ci].mode;
            contexts[ci] = sample_context(cascades[ci], 1.0, eta_percent, mode, rng);
        }
    }
}

} // namespace fim
