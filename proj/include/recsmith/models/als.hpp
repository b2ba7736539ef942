#pragma once

#include <cstdint>
#include <vector>

#include "recsmith/models/recommender.hpp"

namespace recsmith {

/// Implicit-feedback matrix factorization by alternating least squares.
/// Interactions carry confidence c = 1 + alpha * value and binary preference
/// p = [value > 0]; each alternation exactly solves the ridge systems for
/// all user rows, then all item rows, so the weighted objective
///   sum over all (u, i) of c_ui (p_ui - x_u . y_i)^2
///     + lambda (sum ||x_u||^2 + sum ||y_i||^2)
/// never increases. Factors are initialized uniform(-0.01, 0.01) from the
/// seeded generator; identical seeds reproduce factors bit-for-bit.
class Als final : public Recommender {
public:
    struct Params {
        std::int32_t rank = 10;
        double alpha = 40.0;
        double lambda = 0.1;
        std::int32_t iterations = 10;
        std::uint64_t seed = 0;
        bool use_ratings = false;
    };

    Als();
    explicit Als(Params params);

    std::string name() const override { return "als"; }
    const Params& params() const { return params_; }

    /// Row-major factor matrices (n_queries x rank, n_items x rank).
    const std::vector<double>& user_factors() const { return user_factors_; }
    const std::vector<double>& item_factors() const { return item_factors_; }

    /// Objective value at the current factors; one entry per alternation is
    /// also recorded during fit (index 0 = after initialization).
    double objective() const;
    const std::vector<double>& objective_trace() const { return objective_trace_; }

    double score(std::int32_t query, std::int32_t item) const;

protected:
    void do_fit(const EncodedDataset& data) override;
    std::vector<ScoredItem> score_query(std::int32_t query) const override;
    bool use_ratings() const override { return params_.use_ratings; }

private:
    friend class ModelArchive;
    Params params_;
    std::vector<double> user_factors_;
    std::vector<double> item_factors_;
    std::vector<double> objective_trace_;
};

}  // namespace recsmith
