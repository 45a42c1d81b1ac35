#pragma once

#include "fim/data.hpp"

#include <string>
#include <vector>

namespace fim {

// Per-category influenced / population counts. Categories with zero population
// are excluded when the counts are built (their ratio is undefined).
struct GroupCounts {
    std::vector<long long> influenced;
    std::vector<long long> population;
    std::size_t excluded_categories = 0;
};

struct FairnessScore {
    double value = 1.0; // 2 / (1 + exp(cv)), in (0, 1]
    double cv = 0.0;
    double mu = 0.0;
    double sigma = 0.0;
    bool mu_zero = false; // nobody influenced; cv defined as 0, value 1
};

// Population size per category of `attr` over every node of the log.
// Unprofiled nodes raise DataError.
std::vector<long long> category_population(const CascadeLog& log, const ProfileTable& profiles,
                                           int attr, std::size_t n_categories);

// Drops zero-population categories (counted in excluded_categories).
GroupCounts make_group_counts(const std::vector<long long>& influenced,
                              const std::vector<long long>& population);

std::vector<double> influenced_ratios(const GroupCounts& counts);

FairnessScore fairness_score(const std::vector<double>& ratios);

// Equity score of one cascade's participants (initiator excluded).
FairnessScore cascade_fairness(const Cascade& cascade, const ProfileTable& profiles, int attr,
                               const std::vector<long long>& population);

// f_u^s: participants pooled over every cascade initiated by u, then scored.
double influencer_fairness_pooled(const CascadeLog& log, const std::string& influencer, int attr,
                                  const ProfileTable& profiles,
                                  const std::vector<long long>& population);

// F[u]: arithmetic mean of per-cascade scores over u's cascades.
double influencer_fairness_avg(const CascadeLog& log, const std::string& influencer, int attr,
                               const ProfileTable& profiles,
                               const std::vector<long long>& population);

// Equity score of an arbitrary influenced set against the full population.
FairnessScore spread_fairness(const std::vector<std::string>& influenced,
                              const ProfileTable& profiles, int attr,
                              const std::vector<long long>& population);

} // namespace fim
