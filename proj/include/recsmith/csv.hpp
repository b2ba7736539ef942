#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "recsmith/dataset.hpp"
#include "recsmith/log.hpp"
#include "recsmith/recommendations.hpp"

namespace recsmith {

/// Maps interaction roles to CSV header names. A missing rating column
/// defaults every rating to 1.0; the timestamp column is mandatory.
struct ColumnMap {
    std::string query = "query_id";
    std::string item = "item_id";
    std::string timestamp = "timestamp";
    std::optional<std::string> rating = "rating";
};

/// Epoch seconds from either a bare integer or `YYYY-MM-DD[ HH:MM:SS]` (UTC).
std::int64_t parse_timestamp(const std::string& text);

/// Shortest round-trip decimal form (std::to_chars), for reproducible files.
std::string format_double(double value);

/// Splits one CSV record. Single-character delimiters honour RFC-4180 double
/// quotes; longer delimiters (e.g. "::") split verbatim.
std::vector<std::string> split_csv_line(const std::string& line, const std::string& delimiter);

InteractionLog read_interactions_csv(const std::string& path, const ColumnMap& columns = {},
                                     const std::string& delimiter = ",");

void write_interactions_csv(const std::string& path, const InteractionLog& log,
                            const ColumnMap& columns = {}, const std::string& delimiter = ",");

/// Feature table from CSV: `key_column` plus the listed feature columns.
FeatureTable read_feature_table_csv(const std::string& path, const std::string& key_column,
                                    const std::vector<std::string>& categorical,
                                    const std::vector<std::string>& numerical,
                                    const std::string& delimiter = ",");

// Recommendation lists travel as `query_id,item_id,rank,score` with raw ids.
void write_recommendations_csv(const std::string& path, const RawRecommendations& recs);
RawRecommendations read_recommendations_csv(const std::string& path);

}  // namespace recsmith
