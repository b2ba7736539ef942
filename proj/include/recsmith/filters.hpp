#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <unordered_map>
#include <vector>

#include "recsmith/error.hpp"
#include "recsmith/log.hpp"

namespace recsmith {

enum class EntityKind { Query, Item };
enum class FilterScope { Global, PerQuery };
enum class KeepSide { First, Last };

constexpr std::int64_t kSecondsPerDay = 86400;

/// Declarative form of one preprocessing filter, as it appears in pipeline
/// configs. Applied in listed order via apply_filter.
struct FilterSpec {
    enum class Kind { MinCount, LowRating, TimePeriod, NumInteractions, NumDays };

    Kind kind = Kind::MinCount;
    // min_count
    std::int64_t threshold_count = 1;
    EntityKind entity = EntityKind::Query;
    // low_rating
    double rating_threshold = 0.0;
    // time_period, half-open [start, end)
    std::optional<std::int64_t> start;
    std::optional<std::int64_t> end;
    // num_interactions / num_days
    std::int64_t n = 0;
    FilterScope scope = FilterScope::Global;
    KeepSide keep = KeepSide::Last;
};

// All filters are pure functions returning a subsequence of the input log:
// surviving rows keep their relative order and nothing is mutated.

/// Keeps rows whose query (or item) occurs at least `threshold` times.
/// Single pass over the input counts; not iterated to a k-core fixed point
/// (re-apply the filter to compose that behaviour).
template <typename Id>
BasicLog<Id> min_count_filter(const BasicLog<Id>& log, std::int64_t threshold, EntityKind entity) {
    if (threshold < 1) {
        raise(ErrorCode::InvalidThreshold,
              "min_count threshold must be >= 1, got " + std::to_string(threshold));
    }
    const auto& column = entity == EntityKind::Query ? log.queries : log.items;
    std::unordered_map<Id, std::int64_t> counts;
    counts.reserve(log.size());
    for (const auto& token : column) ++counts[token];

    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < log.size(); ++r) {
        if (counts[column[r]] >= threshold) rows.push_back(r);
    }
    return log.gather(rows);
}

/// Keeps rows with rating >= threshold (threshold itself survives).
template <typename Id>
BasicLog<Id> low_rating_filter(const BasicLog<Id>& log, double threshold) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < log.size(); ++r) {
        if (log.ratings[r] >= threshold) rows.push_back(r);
    }
    return log.gather(rows);
}

/// Keeps rows with start <= t < end; a missing bound leaves that side open.
template <typename Id>
BasicLog<Id> time_period_filter(const BasicLog<Id>& log, std::optional<std::int64_t> start,
                                std::optional<std::int64_t> end) {
    if (start && end && *start >= *end) {
        raise(ErrorCode::InvalidPeriod, "time period requires start < end");
    }
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < log.size(); ++r) {
        const std::int64_t t = log.timestamps[r];
        if (start && t < *start) continue;
        if (end && t >= *end) continue;
        rows.push_back(r);
    }
    return log.gather(rows);
}

namespace detail {

// Rows of one group ordered by (timestamp, original index); returns the kept
// original indices, still sorted ascending so the output stays a subsequence.
inline std::vector<std::size_t> slice_by_time(const std::vector<std::size_t>& group,
                                              const std::vector<std::int64_t>& timestamps,
                                              std::int64_t n, KeepSide keep) {
    std::vector<std::size_t> order = group;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return timestamps[a] < timestamps[b];
    });
    const std::size_t take = std::min<std::size_t>(order.size(), n < 0 ? 0 : static_cast<std::size_t>(n));
    std::vector<std::size_t> kept;
    kept.reserve(take);
    if (keep == KeepSide::First) {
        kept.assign(order.begin(), order.begin() + take);
    } else {
        kept.assign(order.end() - take, order.end());
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

template <typename Id>
std::vector<std::vector<std::size_t>> group_rows_by_query(const BasicLog<Id>& log) {
    std::unordered_map<Id, std::size_t> slot;
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t r = 0; r < log.size(); ++r) {
        auto [it, added] = slot.try_emplace(log.queries[r], groups.size());
        if (added) groups.emplace_back();
        groups[it->second].push_back(r);
    }
    return groups;
}

}  // namespace detail

/// Keeps the n earliest (keep=first) or latest (keep=last) rows, globally or
/// per query. Timestamp ties break by original row index.
template <typename Id>
BasicLog<Id> take_num_interactions(const BasicLog<Id>& log, std::int64_t n, FilterScope scope,
                                   KeepSide keep) {
    if (n < 0) raise(ErrorCode::InvalidThreshold, "num_interactions requires n >= 0");
    std::vector<std::size_t> rows;
    if (scope == FilterScope::Global) {
        std::vector<std::size_t> all(log.size());
        std::iota(all.begin(), all.end(), 0);
        rows = detail::slice_by_time(all, log.timestamps, n, keep);
    } else {
        for (const auto& group : detail::group_rows_by_query(log)) {
            auto kept = detail::slice_by_time(group, log.timestamps, n, keep);
            rows.insert(rows.end(), kept.begin(), kept.end());
        }
        std::sort(rows.begin(), rows.end());
    }
    return log.gather(rows);
}

/// Keeps a trailing (keep=last: t >= T_max - d days) or leading
/// (keep=first: t < T_min + d days) window, globally or per query.
template <typename Id>
BasicLog<Id> take_num_days(const BasicLog<Id>& log, std::int64_t d, FilterScope scope,
                           KeepSide keep) {
    if (d < 1) raise(ErrorCode::InvalidThreshold, "num_days requires d >= 1");
    if (log.empty()) return {};

    auto window_keep = [&](std::int64_t t, std::int64_t t_min, std::int64_t t_max) {
        if (keep == KeepSide::Last) return t >= t_max - d * kSecondsPerDay;
        return t < t_min + d * kSecondsPerDay;
    };

    std::vector<std::size_t> rows;
    if (scope == FilterScope::Global) {
        const auto [lo, hi] = std::minmax_element(log.timestamps.begin(), log.timestamps.end());
        for (std::size_t r = 0; r < log.size(); ++r) {
            if (window_keep(log.timestamps[r], *lo, *hi)) rows.push_back(r);
        }
    } else {
        for (const auto& group : detail::group_rows_by_query(log)) {
            std::int64_t t_min = std::numeric_limits<std::int64_t>::max();
            std::int64_t t_max = std::numeric_limits<std::int64_t>::min();
            for (std::size_t r : group) {
                t_min = std::min(t_min, log.timestamps[r]);
                t_max = std::max(t_max, log.timestamps[r]);
            }
            for (std::size_t r : group) {
                if (window_keep(log.timestamps[r], t_min, t_max)) rows.push_back(r);
            }
        }
        std::sort(rows.begin(), rows.end());
    }
    return log.gather(rows);
}

template <typename Id>
BasicLog<Id> apply_filter(const BasicLog<Id>& log, const FilterSpec& spec) {
    switch (spec.kind) {
        case FilterSpec::Kind::MinCount:
            return min_count_filter(log, spec.threshold_count, spec.entity);
        case FilterSpec::Kind::LowRating:
            return low_rating_filter(log, spec.rating_threshold);
        case FilterSpec::Kind::TimePeriod:
            return time_period_filter(log, spec.start, spec.end);
        case FilterSpec::Kind::NumInteractions:
            return take_num_interactions(log, spec.n, spec.scope, spec.keep);
        case FilterSpec::Kind::NumDays:
            return take_num_days(log, spec.n, spec.scope, spec.keep);
    }
    raise(ErrorCode::ConfigError, "unknown filter kind");
}

template <typename Id>
BasicLog<Id> apply_filters(BasicLog<Id> log, const std::vector<FilterSpec>& specs) {
    for (const auto& spec : specs) log = apply_filter(log, spec);
    return log;
}

}  // namespace recsmith
