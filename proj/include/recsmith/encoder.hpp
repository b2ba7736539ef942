#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "recsmith/dataset.hpp"
#include "recsmith/log.hpp"
#include "recsmith/recommendations.hpp"

namespace recsmith {

enum class UnseenPolicy { Error, Drop };

/// Bidirectional raw-token <-> dense-index map for one categorical column.
/// Indices are exactly 0..size-1 with no gaps, assigned by first appearance.
struct ColumnMapping {
    std::unordered_map<std::string, std::int32_t> forward;
    std::vector<std::string> inverse;

    std::int32_t size() const { return static_cast<std::int32_t>(inverse.size()); }

    /// Returns the dense index, or -1 for an unseen token.
    std::int32_t lookup(const std::string& token) const {
        auto it = forward.find(token);
        return it == forward.end() ? -1 : it->second;
    }

    void insert_if_new(const std::string& token) {
        auto [it, added] = forward.try_emplace(token, size());
        if (added) inverse.push_back(token);
    }
};

/// Mappings for every encoded column, keyed by column name.
struct EncoderMapping {
    std::vector<std::pair<std::string, ColumnMapping>> columns;

    const ColumnMapping* find(const std::string& column) const;
    const ColumnMapping& at(const std::string& column) const;  // throws UnknownColumn
};

/// Fits mappings for the named categorical columns of the dataset.
/// Id columns scan interactions in row order, then the matching feature
/// table's keys; other categorical columns scan their table in row order.
EncoderMapping fit_encoder(const Dataset& dataset, const std::vector<std::string>& columns);

/// Fits the two hinted id columns (the usual case).
EncoderMapping fit_id_encoder(const Dataset& dataset);

/// A mapping over a bare token sequence, first-appearance order.
ColumnMapping fit_column_mapping(const std::vector<std::string>& tokens);

/// Replaces raw query/item tokens with dense indices. With UnseenPolicy::Drop
/// rows holding unseen tokens are removed, surviving rows keep their order.
EncodedLog encode(const EncoderMapping& mapping, const InteractionLog& log,
                  UnseenPolicy policy = UnseenPolicy::Error,
                  const std::string& query_column = "query_id",
                  const std::string& item_column = "item_id");

/// Inverse of encode for model output: dense item/query ids back to tokens.
/// Ranks and scores are unchanged.
RawRecommendations decode(const EncoderMapping& mapping, const EncodedRecommendations& recs,
                          const std::string& query_column = "query_id",
                          const std::string& item_column = "item_id");

}  // namespace recsmith
