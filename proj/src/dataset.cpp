#include "recsmith/dataset.hpp"

#include <cmath>
#include <unordered_set>

#include "recsmith/error.hpp"

namespace recsmith {

const FeatureTable::Column* FeatureTable::find(const std::string& name) const {
    for (const auto& col : columns) {
        if (col.name == name) return &col;
    }
    return nullptr;
}

namespace {

void check_unique_keys(const FeatureTable& table, const char* which) {
    std::unordered_set<std::string> seen;
    seen.reserve(table.keys.size());
    for (const auto& key : table.keys) {
        if (!seen.insert(key).second) {
            raise(ErrorCode::DuplicateFeatureKey,
                  std::string(which) + " table repeats key '" + key + "'");
        }
    }
    for (const auto& col : table.columns) {
        const std::size_t n =
            col.type == FeatureType::Categorical ? col.categorical.size() : col.numerical.size();
        if (n != table.keys.size()) {
            raise(ErrorCode::MissingColumn, std::string(which) + " column '" + col.name +
                                                "' length does not match its key column");
        }
    }
}

// distinct tokens over interactions column plus optional feature keys
std::int64_t union_cardinality(const std::vector<std::string>& tokens,
                               const std::optional<FeatureTable>& table) {
    std::unordered_set<std::string> distinct(tokens.begin(), tokens.end());
    if (table) distinct.insert(table->keys.begin(), table->keys.end());
    return static_cast<std::int64_t>(distinct.size());
}

std::int64_t column_cardinality(const FeatureTable::Column& col) {
    if (col.type == FeatureType::Categorical) {
        std::unordered_set<std::string> distinct(col.categorical.begin(), col.categorical.end());
        return static_cast<std::int64_t>(distinct.size());
    }
    std::unordered_set<double> distinct(col.numerical.begin(), col.numerical.end());
    return static_cast<std::int64_t>(distinct.size());
}

}  // namespace

Dataset build_dataset(InteractionLog interactions, std::optional<FeatureTable> user_features,
                      std::optional<FeatureTable> item_features, FeatureSchema schema) {
    schema.validate();

    for (double r : interactions.ratings) {
        if (!std::isfinite(r)) {
            raise(ErrorCode::NonFiniteRating, "interaction log contains a non-finite rating");
        }
    }
    if (user_features) check_unique_keys(*user_features, "user_features");
    if (item_features) check_unique_keys(*item_features, "item_features");

    // Feature-source columns named by the schema must exist in their table.
    for (auto& col : schema.columns()) {
        if (col.source == ColumnSource::Interactions) continue;
        const std::optional<FeatureTable>& table =
            col.source == ColumnSource::UserFeatures ? user_features : item_features;
        if (!table) {
            raise(ErrorCode::MissingColumn, "schema names column '" + col.name + "' in absent " +
                                                to_string(col.source) + " table");
        }
        const FeatureTable::Column* found = table->find(col.name);
        if (!found) {
            raise(ErrorCode::MissingColumn, "column '" + col.name + "' not found in " +
                                                to_string(col.source) + " table");
        }
        if (found->type != col.feature_type) {
            raise(ErrorCode::NonCategoricalColumn,
                  "column '" + col.name + "' type does not match schema");
        }
        col.cardinality = column_cardinality(*found);
    }

    Dataset out;
    out.n_queries_ = union_cardinality(interactions.queries, user_features);
    out.n_items_ = union_cardinality(interactions.items, item_features);
    for (auto& col : schema.columns()) {
        if (col.hint == FeatureHint::QueryId) col.cardinality = out.n_queries_;
        if (col.hint == FeatureHint::ItemId) col.cardinality = out.n_items_;
    }

    out.interactions_ = std::move(interactions);
    out.user_features_ = std::move(user_features);
    out.item_features_ = std::move(item_features);
    out.schema_ = std::move(schema);
    return out;
}

}  // namespace recsmith
