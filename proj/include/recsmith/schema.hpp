#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace recsmith {

enum class FeatureType { Categorical, Numerical };
enum class ColumnSource { Interactions, UserFeatures, ItemFeatures };
enum class FeatureHint { QueryId, ItemId, Timestamp, Rating };

const char* to_string(FeatureType t);
const char* to_string(ColumnSource s);
const char* to_string(FeatureHint h);

struct ColumnSpec {
    std::string name;
    FeatureType feature_type = FeatureType::Categorical;
    ColumnSource source = ColumnSource::Interactions;
    std::optional<FeatureHint> hint;
    // Distinct values observed at dataset build time; filled by build_dataset.
    std::optional<std::int64_t> cardinality;
};

/// Ordered column descriptions for a dataset. Exactly one query_id hint and
/// one item_id hint, at most one timestamp and one rating; hinted id columns
/// are categorical, timestamp/rating numerical; names unique per source.
class FeatureSchema {
public:
    FeatureSchema() = default;
    explicit FeatureSchema(std::vector<ColumnSpec> columns);

    /// Throws DuplicateHint / MissingColumn when the invariants above fail.
    void validate() const;

    const std::vector<ColumnSpec>& columns() const { return columns_; }
    std::vector<ColumnSpec>& columns() { return columns_; }

    const ColumnSpec* find(const std::string& name) const;
    const ColumnSpec& hinted(FeatureHint hint) const;  // throws if absent
    const ColumnSpec* try_hinted(FeatureHint hint) const;

    const std::string& query_column() const { return hinted(FeatureHint::QueryId).name; }
    const std::string& item_column() const { return hinted(FeatureHint::ItemId).name; }

    /// Convenience builder for the usual interactions-only schema.
    static FeatureSchema interactions(const std::string& query_col,
                                      const std::string& item_col,
                                      const std::string& timestamp_col,
                                      const std::string& rating_col);

private:
    std::vector<ColumnSpec> columns_;
};

}  // namespace recsmith
