#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "recsmith/error.hpp"
#include "recsmith/log.hpp"
#include "recsmith/rng.hpp"

namespace recsmith {

enum class SplitStrategy { Random, ColdUserRandom, Time, LastN, NewUsers };
enum class LastNUnit { Interactions, Seconds };

struct SplitConfig {
    SplitStrategy strategy = SplitStrategy::Random;
    double test_ratio = 0.2;                    // random, cold_user_random, new_users
    std::optional<std::int64_t> time_threshold; // time (epoch seconds)
    std::optional<double> time_quantile;        // time (resolved to a timestamp)
    std::int64_t n = 1;                         // last_n
    LastNUnit unit = LastNUnit::Interactions;   // last_n
    std::uint64_t seed = 0;
    bool drop_cold_users = false;
    bool drop_cold_items = false;
};

template <typename Id>
struct SplitResult {
    BasicLog<Id> train;
    BasicLog<Id> test;
};

namespace detail {

// Partition rows by a test-membership flag, preserving original order.
template <typename Id>
SplitResult<Id> partition(const BasicLog<Id>& log, const std::vector<bool>& in_test) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t r = 0; r < log.size(); ++r) {
        (in_test[r] ? test_rows : train_rows).push_back(r);
    }
    return {log.gather(train_rows), log.gather(test_rows)};
}

template <typename Id>
std::vector<Id> distinct_queries(const BasicLog<Id>& log) {
    std::vector<Id> order;
    std::unordered_set<Id> seen;
    for (const auto& q : log.queries) {
        if (seen.insert(q).second) order.push_back(q);
    }
    return order;
}

inline void check_ratio(double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        raise(ErrorCode::InvalidRatio, "test_ratio must lie in (0, 1)");
    }
}

}  // namespace detail

/// Per-row Bernoulli(test_ratio) assignment under the seeded generator,
/// drawn in row order: u < test_ratio sends the row to test.
template <typename Id>
SplitResult<Id> random_split(const BasicLog<Id>& log, double test_ratio, std::uint64_t seed,
                             bool drop_cold_users = false, bool drop_cold_items = false);

/// All rows of ceil(test_ratio * n_queries) uniformly chosen queries go to
/// test; the choice is a seeded partial Fisher-Yates over the distinct-query
/// list in first-appearance order.
template <typename Id>
SplitResult<Id> cold_user_random_split(const BasicLog<Id>& log, double test_ratio,
                                       std::uint64_t seed, bool drop_cold_users = false,
                                       bool drop_cold_items = false);

/// Classic split by time: t < threshold to train, t >= threshold to test.
/// The quantile form resolves the threshold to the smallest observed
/// timestamp T with at least q*|log| rows strictly before it (no such T:
/// everything trains).
template <typename Id>
SplitResult<Id> time_split(const BasicLog<Id>& log, std::optional<std::int64_t> threshold,
                           std::optional<double> quantile, bool drop_cold_users = false,
                           bool drop_cold_items = false);

/// Per query: the last n interactions (unit=interactions, ties by original
/// row index) or the rows within the trailing n seconds (t > T_max - n) go
/// to test. Queries with <= n rows contribute everything to test.
template <typename Id>
SplitResult<Id> last_n_split(const BasicLog<Id>& log, std::int64_t n, LastNUnit unit,
                             bool drop_cold_users = false, bool drop_cold_items = false);

/// The latest-arriving ceil(test_ratio * n_queries) queries (ranked by first
/// interaction timestamp, ties by first-row index) contribute all rows to
/// test; everyone else trains.
template <typename Id>
SplitResult<Id> new_users_split(const BasicLog<Id>& log, double test_ratio,
                                bool drop_cold_users = false, bool drop_cold_items = false);

/// Removes test rows whose query (resp. item) never occurs in train, when
/// the corresponding flag is set. Train is untouched.
template <typename Id>
SplitResult<Id> apply_drop_cold(SplitResult<Id> split, bool drop_cold_users,
                                bool drop_cold_items) {
    if (!drop_cold_users && !drop_cold_items) return split;
    std::unordered_set<Id> train_queries(split.train.queries.begin(), split.train.queries.end());
    std::unordered_set<Id> train_items(split.train.items.begin(), split.train.items.end());

    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < split.test.size(); ++r) {
        if (drop_cold_users && !train_queries.count(split.test.queries[r])) continue;
        if (drop_cold_items && !train_items.count(split.test.items[r])) continue;
        rows.push_back(r);
    }
    split.test = split.test.gather(rows);
    return split;
}

template <typename Id>
SplitResult<Id> random_split(const BasicLog<Id>& log, double test_ratio, std::uint64_t seed,
                             bool drop_cold_users, bool drop_cold_items) {
    detail::check_ratio(test_ratio);
    SplitMix64 rng(seed);
    std::vector<bool> in_test(log.size());
    for (std::size_t r = 0; r < log.size(); ++r) in_test[r] = rng.next_double() < test_ratio;
    return apply_drop_cold(detail::partition(log, in_test), drop_cold_users, drop_cold_items);
}

template <typename Id>
SplitResult<Id> cold_user_random_split(const BasicLog<Id>& log, double test_ratio,
                                       std::uint64_t seed, bool drop_cold_users,
                                       bool drop_cold_items) {
    detail::check_ratio(test_ratio);
    std::vector<Id> queries = detail::distinct_queries(log);
    const std::size_t n_test =
        static_cast<std::size_t>(std::ceil(test_ratio * static_cast<double>(queries.size())));

    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < n_test && i + 1 < queries.size(); ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(queries.size() - i));
        std::swap(queries[i], queries[j]);
    }
    std::unordered_set<Id> test_queries(queries.begin(),
                                        queries.begin() + std::min(n_test, queries.size()));

    std::vector<bool> in_test(log.size());
    for (std::size_t r = 0; r < log.size(); ++r) in_test[r] = test_queries.count(log.queries[r]) > 0;
    return apply_drop_cold(detail::partition(log, in_test), drop_cold_users, drop_cold_items);
}

template <typename Id>
SplitResult<Id> time_split(const BasicLog<Id>& log, std::optional<std::int64_t> threshold,
                           std::optional<double> quantile, bool drop_cold_users,
                           bool drop_cold_items) {
    if (threshold.has_value() == quantile.has_value()) {
        raise(ErrorCode::InvalidThreshold,
              "time split takes exactly one of a timestamp threshold or a quantile");
    }
    std::int64_t resolved;
    if (threshold) {
        resolved = *threshold;
    } else {
        if (!(*quantile > 0.0 && *quantile < 1.0)) {
            raise(ErrorCode::InvalidThreshold, "time split quantile must lie in (0, 1)");
        }
        std::vector<std::int64_t> sorted = log.timestamps;
        std::sort(sorted.begin(), sorted.end());
        const double need = *quantile * static_cast<double>(log.size());
        resolved = std::numeric_limits<std::int64_t>::max();  // no qualifying T: all train
        // smallest observed T with |{t < T}| >= need; count(t < sorted[i]) == index
        // of the first occurrence of sorted[i]
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (i > 0 && sorted[i] == sorted[i - 1]) continue;
            if (static_cast<double>(i) >= need) {
                resolved = sorted[i];
                break;
            }
        }
    }

    std::vector<bool> in_test(log.size());
    for (std::size_t r = 0; r < log.size(); ++r) in_test[r] = log.timestamps[r] >= resolved;
    return apply_drop_cold(detail::partition(log, in_test), drop_cold_users, drop_cold_items);
}

template <typename Id>
SplitResult<Id> last_n_split(const BasicLog<Id>& log, std::int64_t n, LastNUnit unit,
                             bool drop_cold_users, bool drop_cold_items) {
    if (n < 1) raise(ErrorCode::InvalidThreshold, "last_n split requires n >= 1");

    std::vector<bool> in_test(log.size());
    std::unordered_map<Id, std::vector<std::size_t>> groups;
    for (std::size_t r = 0; r < log.size(); ++r) groups[log.queries[r]].push_back(r);

    for (auto& [query, rows] : groups) {
        if (unit == LastNUnit::Interactions) {
            std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
                return log.timestamps[a] < log.timestamps[b];
            });
            const std::size_t take = std::min<std::size_t>(rows.size(), static_cast<std::size_t>(n));
            for (std::size_t i = rows.size() - take; i < rows.size(); ++i) in_test[rows[i]] = true;
        } else {
            std::int64_t t_max = std::numeric_limits<std::int64_t>::min();
            for (std::size_t r : rows) t_max = std::max(t_max, log.timestamps[r]);
            for (std::size_t r : rows) {
                if (log.timestamps[r] > t_max - n) in_test[r] = true;
            }
        }
    }
    return apply_drop_cold(detail::partition(log, in_test), drop_cold_users, drop_cold_items);
}

template <typename Id>
SplitResult<Id> new_users_split(const BasicLog<Id>& log, double test_ratio, bool drop_cold_users,
                                bool drop_cold_items) {
    detail::check_ratio(test_ratio);

    struct Arrival {
        std::int64_t first_t;
        std::size_t first_row;
    };
    std::unordered_map<Id, Arrival> arrival;
    std::vector<Id> order = detail::distinct_queries(log);
    for (std::size_t r = 0; r < log.size(); ++r) {
        auto [it, added] = arrival.try_emplace(log.queries[r], Arrival{log.timestamps[r], r});
        if (!added && log.timestamps[r] < it->second.first_t) {
            it->second.first_t = log.timestamps[r];
            it->second.first_row = r;
        }
    }

    std::sort(order.begin(), order.end(), [&](const Id& a, const Id& b) {
        const Arrival& x = arrival.at(a);
        const Arrival& y = arrival.at(b);
        if (x.first_t != y.first_t) return x.first_t > y.first_t;  // latest first
        return x.first_row > y.first_row;
    });
    const std::size_t n_test =
        std::min(order.size(),
                 static_cast<std::size_t>(std::ceil(test_ratio * static_cast<double>(order.size()))));
    std::unordered_set<Id> test_queries(order.begin(), order.begin() + n_test);

    std::vector<bool> in_test(log.size());
    for (std::size_t r = 0; r < log.size(); ++r) in_test[r] = test_queries.count(log.queries[r]) > 0;
    return apply_drop_cold(detail::partition(log, in_test), drop_cold_users, drop_cold_items);
}

template <typename Id>
SplitResult<Id> split(const BasicLog<Id>& log, const SplitConfig& config) {
    switch (config.strategy) {
        case SplitStrategy::Random:
            return random_split(log, config.test_ratio, config.seed, config.drop_cold_users,
                                config.drop_cold_items);
        case SplitStrategy::ColdUserRandom:
            return cold_user_random_split(log, config.test_ratio, config.seed,
                                          config.drop_cold_users, config.drop_cold_items);
        case SplitStrategy::Time:
            return time_split(log, config.time_threshold, config.time_quantile,
                              config.drop_cold_users, config.drop_cold_items);
        case SplitStrategy::LastN:
            return last_n_split(log, config.n, config.unit, config.drop_cold_users,
                                config.drop_cold_items);
        case SplitStrategy::NewUsers:
            return new_users_split(log, config.test_ratio, config.drop_cold_users,
                                   config.drop_cold_items);
    }
    raise(ErrorCode::ConfigError, "unknown split strategy");
}

}  // namespace recsmith
