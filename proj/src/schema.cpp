#include "recsmith/schema.hpp"

#include <unordered_set>

#include "recsmith/error.hpp"

namespace recsmith {

const char* to_string(FeatureType t) {
    return t == FeatureType::Categorical ? "categorical" : "numerical";
}

const char* to_string(ColumnSource s) {
    switch (s) {
        case ColumnSource::Interactions: return "interactions";
        case ColumnSource::UserFeatures: return "user_features";
        case ColumnSource::ItemFeatures: return "item_features";
    }
    return "?";
}

const char* to_string(FeatureHint h) {
    switch (h) {
        case FeatureHint::QueryId: return "query_id";
        case FeatureHint::ItemId: return "item_id";
        case FeatureHint::Timestamp: return "timestamp";
        case FeatureHint::Rating: return "rating";
    }
    return "?";
}

FeatureSchema::FeatureSchema(std::vector<ColumnSpec> columns) : columns_(std::move(columns)) {}

void FeatureSchema::validate() const {
    int n_query = 0, n_item = 0, n_ts = 0, n_rating = 0;
    for (const auto& col : columns_) {
        if (!col.hint) continue;
        switch (*col.hint) {
            case FeatureHint::QueryId: ++n_query; break;
            case FeatureHint::ItemId: ++n_item; break;
            case FeatureHint::Timestamp: ++n_ts; break;
            case FeatureHint::Rating: ++n_rating; break;
        }
        const bool id_hint = *col.hint == FeatureHint::QueryId || *col.hint == FeatureHint::ItemId;
        if (id_hint && col.feature_type != FeatureType::Categorical) {
            raise(ErrorCode::NonCategoricalColumn,
                  "column '" + col.name + "' carries an id hint and must be categorical");
        }
        if (!id_hint && col.feature_type != FeatureType::Numerical) {
            raise(ErrorCode::DuplicateHint,
                  "column '" + col.name + "' carries hint " + to_string(*col.hint) +
                      " and must be numerical");
        }
    }
    if (n_query > 1) raise(ErrorCode::DuplicateHint, "more than one query_id hint");
    if (n_item > 1) raise(ErrorCode::DuplicateHint, "more than one item_id hint");
    if (n_ts > 1) raise(ErrorCode::DuplicateHint, "more than one timestamp hint");
    if (n_rating > 1) raise(ErrorCode::DuplicateHint, "more than one rating hint");
    if (n_query == 0) raise(ErrorCode::MissingColumn, "schema has no query_id hint");
    if (n_item == 0) raise(ErrorCode::MissingColumn, "schema has no item_id hint");

    // names unique within a source
    std::unordered_set<std::string> seen;
    for (const auto& col : columns_) {
        std::string key = std::string(to_string(col.source)) + "/" + col.name;
        if (!seen.insert(std::move(key)).second) {
            raise(ErrorCode::DuplicateHint,
                  "duplicate column name '" + col.name + "' in source " + to_string(col.source));
        }
    }
}

const ColumnSpec* FeatureSchema::find(const std::string& name) const {
    for (const auto& col : columns_) {
        if (col.name == name) return &col;
    }
    return nullptr;
}

const ColumnSpec* FeatureSchema::try_hinted(FeatureHint hint) const {
    for (const auto& col : columns_) {
        if (col.hint && *col.hint == hint) return &col;
    }
    return nullptr;
}

const ColumnSpec& FeatureSchema::hinted(FeatureHint hint) const {
    const ColumnSpec* col = try_hinted(hint);
    if (!col) {
        raise(ErrorCode::MissingColumn, std::string("schema has no ") + to_string(hint) + " hint");
    }
    return *col;
}

FeatureSchema FeatureSchema::interactions(const std::string& query_col,
                                          const std::string& item_col,
                                          const std::string& timestamp_col,
                                          const std::string& rating_col) {
    std::vector<ColumnSpec> cols;
    cols.push_back({query_col, FeatureType::Categorical, ColumnSource::Interactions,
                    FeatureHint::QueryId, std::nullopt});
    cols.push_back({item_col, FeatureType::Categorical, ColumnSource::Interactions,
                    FeatureHint::ItemId, std::nullopt});
    cols.push_back({timestamp_col, FeatureType::Numerical, ColumnSource::Interactions,
                    FeatureHint::Timestamp, std::nullopt});
    cols.push_back({rating_col, FeatureType::Numerical, ColumnSource::Interactions,
                    FeatureHint::Rating, std::nullopt});
    return FeatureSchema(std::move(cols));
}

}  // namespace recsmith
