#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "recsmith/log.hpp"
#include "recsmith/recommendations.hpp"

namespace recsmith {

/// Relevant item sets per query, taken from test interactions. Queries whose
/// set comes out empty are excluded from accuracy averaging.
struct GroundTruth {
    std::unordered_map<std::int32_t, std::unordered_set<std::int32_t>> relevant;

    /// rating_threshold keeps only rows with rating >= threshold.
    static GroundTruth from_log(const EncodedLog& test,
                                std::optional<double> rating_threshold = std::nullopt);
};

using ItemSet = std::unordered_set<std::int32_t>;
using RankedItems = std::span<const std::int32_t>;

// ---- per-user metric primitives -------------------------------------------
// `ranked` is one query's recommendation list in rank order (may be shorter
// than k); `gt` its relevant set. All results lie in [0, 1].

double precision_at_k(RankedItems ranked, const ItemSet& gt, int k);
double recall_at_k(RankedItems ranked, const ItemSet& gt, int k);
/// AP@K normalized by min(K, |gt|); set normalize_by_gt to divide by |gt|.
double average_precision_at_k(RankedItems ranked, const ItemSet& gt, int k,
                              bool normalize_by_gt = false);
double reciprocal_rank_at_k(RankedItems ranked, const ItemSet& gt, int k);
/// Binary-gain NDCG with discount 1/log2(1 + rank).
double ndcg_at_k(RankedItems ranked, const ItemSet& gt, int k);
double hitrate_at_k(RankedItems ranked, const ItemSet& gt, int k);
/// Fraction of correctly ordered (relevant, irrelevant) pairs inside the
/// top-k list; empty when the list has no positives or no negatives there.
std::optional<double> rocauc_at_k(RankedItems ranked, const ItemSet& gt, int k);

/// Share of the top-k the user has not interacted with in train (out of k).
double novelty_at_k(RankedItems ranked, const ItemSet& user_history, int k);
/// Mean normalized self-information -log2(n_users(i)/n_queries)/log2(n_queries)
/// over the list's top-k slots; items unseen in train count 1.
double surprisal_at_k(RankedItems ranked, const std::vector<std::int64_t>& item_user_counts,
                      std::int64_t n_train_queries, int k);
/// Share of the top-k absent from the baseline's top-k (out of k).
double unexpectedness_at_k(RankedItems ranked, RankedItems baseline, int k);
/// Distinct categories among the top-k over min(k, list length).
double categorical_diversity_at_k(RankedItems ranked,
                                  const std::vector<std::string>& item_categories, int k);

// ---- batch evaluation ------------------------------------------------------

struct MetricSpec {
    std::string name;
    std::vector<int> k_values;  // ascending, unique
};

/// Parses "ndcg@10,map@1,map@10" into specs (one per metric name). Unknown
/// names raise UnknownMetric unless listed in `extra_names`.
std::vector<MetricSpec> parse_metric_list(const std::string& text,
                                          const std::vector<std::string>& extra_names = {});

/// User-supplied per-user metric averaged by the same machinery as the
/// built-ins (same eligible-user rule).
struct CustomMetric {
    std::string name;
    std::function<double(RankedItems ranked, const ItemSet& gt, int k)> fn;
};

struct EvaluationInputs {
    const EncodedRecommendations* recs = nullptr;
    const GroundTruth* ground_truth = nullptr;
    const EncodedLog* train = nullptr;                      // coverage, novelty, surprisal
    const EncodedRecommendations* baseline = nullptr;       // unexpectedness
    const std::vector<std::string>* item_categories = nullptr;  // per dense item id
};

struct EvaluationOptions {
    bool map_normalize_by_gt = false;
};

/// Computes every requested metric@k in one pass over shared per-user data.
/// Accuracy metrics average over queries that appear in the recommendations
/// and have non-empty ground truth; a query with an empty list contributes 0
/// (ROC-AUC instead skips its degenerate queries). Beyond-accuracy metrics
/// average over all recommendation queries. An empty averaging set raises
/// EmptyEvaluation; a missing required input raises MissingInput.
std::map<std::string, double> offline_metrics(const EvaluationInputs& inputs,
                                              const std::vector<MetricSpec>& specs,
                                              const EvaluationOptions& options = {},
                                              const std::vector<CustomMetric>& custom = {});

// ---- experiment table ------------------------------------------------------

/// Named-run by metric@k grid for side-by-side comparison. Re-adding a run
/// name overwrites that row.
class Experiment {
public:
    void add(const std::string& run_name, const std::map<std::string, double>& metrics);

    bool empty() const { return rows_.empty(); }
    const std::vector<std::string>& run_names() const { return order_; }
    /// Union of all rows' metric keys, ordered by (metric name, k).
    std::vector<std::string> columns() const;
    std::optional<double> cell(const std::string& run, const std::string& column) const;

    /// Rows sorted by `sort_column` descending (absent cells sort last, ties
    /// by run name); empty sort_column keeps insertion order.
    std::vector<std::string> sorted_runs(const std::string& sort_column) const;

    /// Plain-text table, one row per run, NA for absent cells.
    std::string render(const std::string& sort_column = "") const;
    std::string to_csv(const std::string& sort_column = "") const;

private:
    std::vector<std::string> order_;
    std::unordered_map<std::string, std::map<std::string, double>> rows_;
};

}  // namespace recsmith
