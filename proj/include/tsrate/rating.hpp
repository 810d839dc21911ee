#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "tsrate/error.hpp"

namespace tsrate {

using ScoreMap = std::map<std::string, double>;

struct ScoredSystem {
    std::string system_id;
    double score = 0.0;
};

// Ascending by raw score; equal scores order by system_id so the result is
// deterministic.
inline std::vector<ScoredSystem> create_partial_order(const ScoreMap& scores) {
    if (scores.empty()) fail_validation("partial order: no systems");
    std::vector<ScoredSystem> order;
    order.reserve(scores.size());
    for (const auto& [system_id, score] : scores) {
        if (!std::isfinite(score))
            fail_validation("partial order: non-finite score for system '" +
                            system_id + "'");
        order.push_back({system_id, score});
    }
    std::sort(order.begin(), order.end(), [](const ScoredSystem& a, const ScoredSystem& b) {
        if (a.score != b.score) return a.score < b.score;
        return a.system_id < b.system_id;
    });
    return order;
}

// Contiguous partition into L groups: the first (len mod L) groups take
// ceil(len/L) items, the rest floor(len/L). Groups may be empty when
// len < L.
template <typename T>
std::vector<std::vector<T>> array_split(const std::vector<T>& items, std::size_t parts) {
    if (parts < 1) fail_validation("array_split: need at least one group");
    std::vector<std::vector<T>> groups(parts);
    const std::size_t base = items.size() / parts;
    const std::size_t extra = items.size() % parts;
    std::size_t pos = 0;
    for (std::size_t g = 0; g < parts; ++g) {
        const std::size_t take = base + (g < extra ? 1 : 0);
        groups[g].assign(items.begin() + static_cast<std::ptrdiff_t>(pos),
                         items.begin() + static_cast<std::ptrdiff_t>(pos + take));
        pos += take;
    }
    return groups;
}

// Bucketed ratings 1..L over the partial order. Rating follows group
// membership, so it is invariant to any positive rescaling of the scores.
// A single system rates 1 when its score is exactly zero and L otherwise.
inline std::map<std::string, int> assign_rating(const ScoreMap& scores, std::size_t levels) {
    if (levels < 1) fail_validation("assign_rating: rating level must be >= 1");
    const auto order = create_partial_order(scores);
    std::map<std::string, int> ratings;
    if (order.size() == 1) {
        ratings[order[0].system_id] = order[0].score == 0.0 ? 1 : static_cast<int>(levels);
        return ratings;
    }
    const auto groups = array_split(order, levels);
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (const auto& item : groups[g])
            ratings[item.system_id] = static_cast<int>(g + 1);
    return ratings;
}

// One rating row: the ordered raw scores and the bucketed ratings for a
// (metric, perturbation) cell.
struct RatingRow {
    std::string metric_id;
    std::string perturbation;
    std::vector<ScoredSystem> partial_order;
    std::map<std::string, int> ratings;
};

inline RatingRow make_rating_row(const std::string& metric_id,
                                 const std::string& perturbation,
                                 const ScoreMap& scores, std::size_t levels) {
    RatingRow row;
    row.metric_id = metric_id;
    row.perturbation = perturbation;
    row.partial_order = create_partial_order(scores);
    row.ratings = assign_rating(scores, levels);
    return row;
}

}  // namespace tsrate
