#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "recsmith/log.hpp"
#include "recsmith/schema.hpp"

namespace recsmith {

/// Row-keyed side table (user or item features). Categorical columns hold
/// tokens, numerical columns doubles; both are parallel to `keys`.
struct FeatureTable {
    struct Column {
        std::string name;
        FeatureType type = FeatureType::Categorical;
        std::vector<std::string> categorical;  // used when type == Categorical
        std::vector<double> numerical;         // used when type == Numerical
    };

    std::vector<std::string> keys;
    std::vector<Column> columns;

    std::size_t size() const { return keys.size(); }
    const Column* find(const std::string& name) const;
};

/// Immutable container binding interactions with optional feature tables.
/// Cardinalities of the hinted id columns are computed at build time over
/// the union of interaction tokens and feature-table keys.
class Dataset {
public:
    const InteractionLog& interactions() const { return interactions_; }
    const std::optional<FeatureTable>& user_features() const { return user_features_; }
    const std::optional<FeatureTable>& item_features() const { return item_features_; }
    const FeatureSchema& schema() const { return schema_; }
    std::int64_t n_queries() const { return n_queries_; }
    std::int64_t n_items() const { return n_items_; }

    friend Dataset build_dataset(InteractionLog interactions,
                                 std::optional<FeatureTable> user_features,
                                 std::optional<FeatureTable> item_features,
                                 FeatureSchema schema);

private:
    Dataset() = default;

    InteractionLog interactions_;
    std::optional<FeatureTable> user_features_;
    std::optional<FeatureTable> item_features_;
    FeatureSchema schema_;
    std::int64_t n_queries_ = 0;
    std::int64_t n_items_ = 0;
};

/// Validates the schema against the supplied tables, rejects non-finite
/// ratings and duplicate feature keys, and fills observed cardinalities
/// into the returned dataset's schema. Inputs are moved, never mutated.
Dataset build_dataset(InteractionLog interactions,
                      std::optional<FeatureTable> user_features = std::nullopt,
                      std::optional<FeatureTable> item_features = std::nullopt,
                      FeatureSchema schema = FeatureSchema::interactions(
                          "query_id", "item_id", "timestamp", "rating"));

}  // namespace recsmith
