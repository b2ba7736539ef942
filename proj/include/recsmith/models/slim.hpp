#pragma once

#include <cstdint>
#include <vector>

#include "recsmith/models/recommender.hpp"

namespace recsmith {

/// Sparse linear item-item model. For each target item j it solves
///   min over w of  1/2 ||a_j - A w||^2 + l2/2 ||w||^2 + l1 ||w||_1
///   subject to w >= 0 (optional flag) and w_j = 0,
/// by cyclic coordinate descent with soft-thresholding, sweeping until the
/// largest coordinate change falls below tol or max_iters sweeps run.
/// The learned weight matrix W keeps a zero diagonal and stores no explicit
/// zeros. Prediction scores are the rows of A*W restricted to the query.
class Slim final : public Recommender {
public:
    struct Params {
        double l1 = 0.01;
        double l2 = 0.01;
        std::int32_t max_iters = 100;
        double tol = 1e-4;
        bool nonnegative = true;
        bool use_ratings = false;
    };

    Slim();
    explicit Slim(Params params);

    std::string name() const override { return "slim"; }
    const Params& params() const { return params_; }

    struct WeightEntry {
        std::int32_t item;  // source item i of weight w_ij
        double weight;
    };
    /// Incoming weights of target item j (column j of W), sorted by item id.
    std::span<const WeightEntry> column(std::int32_t target) const {
        return {weights_.data() + col_ptr_[target],
                static_cast<std::size_t>(col_ptr_[target + 1] - col_ptr_[target])};
    }

    /// Dense copy of column j, for inspection and tests.
    std::vector<double> dense_column(std::int32_t target) const;

protected:
    void do_fit(const EncodedDataset& data) override;
    std::vector<ScoredItem> score_query(std::int32_t query) const override;
    bool use_ratings() const override { return params_.use_ratings; }

private:
    friend class ModelArchive;
    void build_row_index();

    Params params_;
    std::vector<std::int64_t> col_ptr_;  // n_items + 1, column store of W
    std::vector<WeightEntry> weights_;
    // transposed view for prediction: outgoing weights per source item
    std::vector<std::int64_t> row_ptr_;
    std::vector<WeightEntry> row_entries_;
};

}  // namespace recsmith
