#include "fim/fairness.hpp"

#include "fim/errors.hpp"

#include <cmath>
#include <unordered_set>

namespace fim {

std::vector<long long> category_population(const CascadeLog& log, const ProfileTable& profiles,
                                           int attr, std::size_t n_categories) {
    std::vector<long long> pop(n_categories, 0);
    for (const auto& node : log.nodes)
        ++pop[static_cast<std::size_t>(profiles.category_of(node, attr))];
    return pop;
}

GroupCounts make_group_counts(const std::vector<long long>& influenced,
                              const std::vector<long long>& population) {
    GroupCounts counts;
    for (std::size_t i = 0; i < population.size(); ++i) {
        if (population[i] <= 0) {
            ++counts.excluded_categories;
            continue;
        }
        counts.influenced.push_back(i < influenced.size() ? influenced[i] : 0);
        counts.population.push_back(population[i]);
    }
    if (counts.population.empty())
        throw DataError("all categories have zero population");
    return counts;
}

std::vector<double> influenced_ratios(const GroupCounts& counts) {
    std::vector<double> ratios(counts.population.size());
    for (std::size_t i = 0; i < ratios.size(); ++i)
        ratios[i] = static_cast<double>(counts.influenced[i]) /
                    static_cast<double>(counts.population[i]);
    return ratios;
}

FairnessScore fairness_score(const std::vector<double>& ratios) {
    FairnessScore score;
    const auto n = static_cast<double>(ratios.size());
    double mu = 0;
    for (const double r : ratios)
        mu += r;
    mu /= n;
    double var = 0;
    for (const double r : ratios)
        var += (r - mu) * (r - mu);
    var /= n; // population formula, divide by |C_s|
    score.mu = mu;
    score.sigma = std::sqrt(var);
    if (mu == 0) {
        score.mu_zero = true;
        score.cv = 0;
    } else {
        score.cv = score.sigma / mu;
    }
    score.value = 2.0 / (1.0 + std::exp(score.cv));
    return score;
}

namespace {

// Counts cascade participants per category; the initiator influences, it is
// not influenced, so it is excluded.
std::vector<long long> participant_counts(const Cascade& cascade, const ProfileTable& profiles,
                                          int attr, std::size_t n_categories) {
    std::vector<long long> counts(n_categories, 0);
    for (std::size_t i = 1; i < cascade.events.size(); ++i)
        ++counts[static_cast<std::size_t>(profiles.category_of(cascade.events[i].user, attr))];
    return counts;
}

} // namespace

FairnessScore cascade_fairness(const Cascade& cascade, const ProfileTable& profiles, int attr,
                               const std::vector<long long>& population) {
    const auto influenced = participant_counts(cascade, profiles, attr, population.size());
    return fairness_score(influenced_ratios(make_group_counts(influenced, population)));
}

double influencer_fairness_pooled(const CascadeLog& log, const std::string& influencer, int attr,
                                  const ProfileTable& profiles,
                                  const std::vector<long long>& population) {
    if (!log.is_influencer(influencer))
        throw DataError("'" + influencer + "' is not an initiator in this log");
    std::unordered_set<std::string> pooled;
    for (const auto& c : log.cascades) {
        if (c.initiator() != influencer)
            continue;
        for (std::size_t i = 1; i < c.events.size(); ++i)
            pooled.insert(c.events[i].user);
    }
    std::vector<long long> influenced(population.size(), 0);
    for (const auto& user : pooled)
        ++influenced[static_cast<std::size_t>(profiles.category_of(user, attr))];
    return fairness_score(influenced_ratios(make_group_counts(influenced, population))).value;
}

double influencer_fairness_avg(const CascadeLog& log, const std::string& influencer, int attr,
                               const ProfileTable& profiles,
                               const std::vector<long long>& population) {
    if (!log.is_influencer(influencer))
        throw DataError("'" + influencer + "' is not an initiator in this log");
    double sum = 0;
    std::size_t count = 0;
    for (const auto& c : log.cascades) {
        if (c.initiator() != influencer)
            continue;
        sum += cascade_fairness(c, profiles, attr, population).value;
        ++count;
    }
    return sum / static_cast<double>(count);
}

FairnessScore spread_fairness(const std::vector<std::string>& influenced,
                              const ProfileTable& profiles, int attr,
                              const std::vector<long long>& population) {
    std::vector<long long> counts(population.size(), 0);
    for (const auto& user : influenced)
        ++counts[static_cast<std::size_t>(profiles.category_of(user, attr))];
    return fairness_score(influenced_ratios(make_group_counts(counts, population)));
}

} // namespace fim
