#pragma once

#include <cstdint>
#include <vector>

#include "recsmith/models/recommender.hpp"

namespace recsmith {

/// Item-based nearest neighbours with shrunk cosine similarity over item
/// columns:
///   sim(i, j) = <c_i, c_j> / (||c_i|| * ||c_j|| + shrink)
/// Per item the top num_neighbors neighbours are kept (self excluded, sorted
/// by weight descending, ties by neighbour id). Prediction sums the kept
/// weights over the query's history:
///   score(q, i) = sum over j in history(q) of sim(i, j).
class ItemKnn final : public Recommender {
public:
    struct Params {
        std::int32_t num_neighbors = 100;
        double shrink = 0.0;
        bool use_ratings = false;
    };

    ItemKnn();
    explicit ItemKnn(Params params);

    std::string name() const override { return "item_knn"; }
    Capabilities capabilities() const override { return {.item_to_item = true}; }
    const Params& params() const { return params_; }

    struct Neighbor {
        std::int32_t item;
        double weight;
    };
    /// Truncated neighbour list of one item.
    std::span<const Neighbor> neighbors(std::int32_t item) const {
        return {neighbors_.data() + neighbor_ptr_[item],
                static_cast<std::size_t>(neighbor_ptr_[item + 1] - neighbor_ptr_[item])};
    }

protected:
    void do_fit(const EncodedDataset& data) override;
    std::vector<ScoredItem> score_query(std::int32_t query) const override;
    bool use_ratings() const override { return params_.use_ratings; }

private:
    friend class ModelArchive;
    Params params_;
    std::vector<std::int64_t> neighbor_ptr_;  // n_items + 1
    std::vector<Neighbor> neighbors_;
};

}  // namespace recsmith
