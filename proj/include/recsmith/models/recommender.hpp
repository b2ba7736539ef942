#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "recsmith/recommendations.hpp"
#include "recsmith/sparse.hpp"

namespace recsmith {

using ScoredItem = EncodedRecommendations::Entry;

/// Common fit/predict surface for every recommender.
///
/// predict returns, per requested query, up to k items sorted by score
/// descending with ties broken by ascending dense item id; with filter_seen
/// no item from the query's fit-time history appears. Queries unknown at fit
/// time get whatever the model can score without a history (personalized
/// models return an empty list). Calling predict before fit raises
/// UnfittedModel.
class Recommender {
public:
    struct Capabilities {
        bool needs_binary_ratings = false;
        bool item_to_item = false;
    };

    virtual ~Recommender() = default;

    virtual std::string name() const = 0;
    virtual Capabilities capabilities() const { return {}; }

    /// Aggregates the log into model state. Raises EmptyDataset on a log
    /// with no rows. Refitting replaces the previous state.
    void fit(const EncodedDataset& data);

    EncodedRecommendations predict(std::span<const std::int32_t> queries, int k,
                                   bool filter_seen = true) const;

    bool is_fitted() const { return fitted_; }
    std::int32_t fitted_queries() const { return n_queries_; }
    std::int32_t fitted_items() const { return n_items_; }

    /// Fit-time interaction structure; row q holds query q's seen items.
    const SparseInteractionMatrix& history() const { return history_; }

protected:
    friend class ModelArchive;

    virtual void do_fit(const EncodedDataset& data) = 0;

    /// Unsorted candidate scores for one query. Items the model cannot score
    /// are omitted; shorter-than-k lists are fine.
    virtual std::vector<ScoredItem> score_query(std::int32_t query) const = 0;

    /// Models whose candidates do not depend on the query return their full
    /// item ranking here (sorted score desc, id asc); predict then walks it
    /// instead of re-scoring per query.
    virtual const std::vector<ScoredItem>* global_ranking() const { return nullptr; }

    /// True when candidates are a subset of the query's own history, in
    /// which case filter_seen necessarily empties the output.
    virtual bool recommends_only_seen() const { return false; }

    /// Whether the interaction matrix keeps raw rating values (true) or is
    /// binarized by rating > 0 (false, default).
    virtual bool use_ratings() const { return false; }

    bool query_has_seen(std::int32_t query, std::int32_t item) const;

    // set by fit
    SparseInteractionMatrix history_;
    std::int32_t n_queries_ = 0;
    std::int32_t n_items_ = 0;
    bool fitted_ = false;
};

/// Sorts candidates by (score desc, item id asc) and truncates to k.
void rank_candidates(std::vector<ScoredItem>& candidates, int k);

}  // namespace recsmith
