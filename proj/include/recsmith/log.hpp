#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace recsmith {

/// Columnar interaction event table: one entry per column per row.
/// `Id` is std::string for raw logs (tokens are opaque; integer ids travel as
/// their decimal strings) and std::int32_t after label encoding.
template <typename Id>
struct BasicLog {
    std::vector<Id> queries;
    std::vector<Id> items;
    std::vector<std::int64_t> timestamps;
    std::vector<double> ratings;

    std::size_t size() const { return queries.size(); }
    bool empty() const { return queries.empty(); }

    void reserve(std::size_t n) {
        queries.reserve(n);
        items.reserve(n);
        timestamps.reserve(n);
        ratings.reserve(n);
    }

    void push_back(Id query, Id item, std::int64_t timestamp, double rating) {
        queries.push_back(std::move(query));
        items.push_back(std::move(item));
        timestamps.push_back(timestamp);
        ratings.push_back(rating);
    }

    /// New log holding the given rows, in the given order.
    BasicLog gather(const std::vector<std::size_t>& rows) const {
        BasicLog out;
        out.reserve(rows.size());
        for (std::size_t r : rows) {
            out.push_back(queries[r], items[r], timestamps[r], ratings[r]);
        }
        return out;
    }

    bool operator==(const BasicLog& other) const = default;
};

using InteractionLog = BasicLog<std::string>;
using EncodedLog = BasicLog<std::int32_t>;

}  // namespace recsmith
