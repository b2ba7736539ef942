#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace recsmith {

/// Per-query ranked item lists. Rank is the 1-based position inside a
/// query's entry list; scores are non-increasing along it and (query, item)
/// pairs are unique. Lists may be shorter than k.
template <typename Id>
struct Recommendations {
    struct Entry {
        Id item;
        double score;
        bool operator==(const Entry&) const = default;
    };

    std::vector<Id> queries;                  // group keys, one per predicted query
    std::vector<std::vector<Entry>> entries;  // parallel to queries
    int k = 0;                                // requested cutoff

    std::size_t n_queries() const { return queries.size(); }

    std::size_t total_entries() const {
        std::size_t n = 0;
        for (const auto& list : entries) n += list.size();
        return n;
    }

    bool operator==(const Recommendations&) const = default;
};

using EncodedRecommendations = Recommendations<std::int32_t>;
using RawRecommendations = Recommendations<std::string>;

}  // namespace recsmith
