#include "recsmith/models/recommender.hpp"

#include <algorithm>
#include <cstdio>

#include "recsmith/error.hpp"
#include "recsmith/parallel.hpp"

namespace recsmith {

namespace {
bool score_before(const ScoredItem& a, const ScoredItem& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item < b.item;
}
}  // namespace

void rank_candidates(std::vector<ScoredItem>& candidates, int k) {
    const std::size_t keep = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(k));
    std::partial_sort(candidates.begin(), candidates.begin() + keep, candidates.end(),
                      score_before);
    candidates.resize(keep);
}

void Recommender::fit(const EncodedDataset& data) {
    if (data.log.empty()) {
        raise(ErrorCode::EmptyDataset, name() + " cannot fit an empty interaction log");
    }
    fitted_ = false;
    n_queries_ = data.n_queries;
    n_items_ = data.n_items;
    history_ = SparseInteractionMatrix::from_log(data.log, data.n_queries, data.n_items,
                                                 use_ratings());
    do_fit(data);
    fitted_ = true;
}

bool Recommender::query_has_seen(std::int32_t query, std::int32_t item) const {
    if (query < 0 || query >= n_queries_) return false;
    const auto row = history_.row(query);
    return std::binary_search(row.idx, row.idx + row.size, item);
}

EncodedRecommendations Recommender::predict(std::span<const std::int32_t> queries, int k,
                                            bool filter_seen) const {
    if (!fitted_) raise(ErrorCode::UnfittedModel, name() + ": predict called before fit");
    if (k < 1) raise(ErrorCode::InvalidParameter, "predict requires k >= 1");
    if (filter_seen && recommends_only_seen()) {
        std::fprintf(stderr,
                     "warning: %s recommends only items from a query's own history; "
                     "filter_seen=true yields empty lists\n",
                     name().c_str());
    }

    EncodedRecommendations out;
    out.k = k;
    out.queries.assign(queries.begin(), queries.end());
    out.entries.resize(queries.size());

    const std::vector<ScoredItem>* ranking = global_ranking();
    parallel_for(0, queries.size(), [&](std::size_t g) {
        const std::int32_t query = queries[g];
        std::vector<ScoredItem>& list = out.entries[g];
        if (ranking) {
            list.reserve(static_cast<std::size_t>(k));
            for (const ScoredItem& cand : *ranking) {
                if (filter_seen && query_has_seen(query, cand.item)) continue;
                list.push_back(cand);
                if (static_cast<int>(list.size()) == k) break;
            }
        } else {
            std::vector<ScoredItem> candidates = score_query(query);
            if (filter_seen) {
                std::erase_if(candidates, [&](const ScoredItem& cand) {
                    return query_has_seen(query, cand.item);
                });
            }
            rank_candidates(candidates, k);
            list = std::move(candidates);
        }
    });
    return out;
}

}  // namespace recsmith
