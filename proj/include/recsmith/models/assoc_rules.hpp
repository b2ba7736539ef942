#pragma once

#include <cstdint>
#include <vector>

#include "recsmith/models/recommender.hpp"

namespace recsmith {

enum class RuleMetric { Confidence, Lift };

RuleMetric parse_rule_metric(const std::string& name);  // throws UnknownMetric

/// Item-to-item rules mined from distinct-user co-occurrence. For a rule
/// i -> j over user sets:
///   confidence = n_ij / n_i,   lift = confidence / (n_j / n_queries).
/// Pairs co-occurring fewer than min_pair_count times are dropped.
/// Prediction takes, per candidate item, the maximum weight of any rule
/// fired by the query's history under the selected metric.
class AssociationRules final : public Recommender {
public:
    struct Params {
        std::int64_t min_pair_count = 1;
        RuleMetric metric = RuleMetric::Confidence;
        bool use_ratings = false;  // affects matrix values only; counting is by user sets
    };

    AssociationRules();
    explicit AssociationRules(Params params);

    std::string name() const override { return "association_rules"; }
    Capabilities capabilities() const override { return {.item_to_item = true}; }
    const Params& params() const { return params_; }
    void set_metric(RuleMetric metric) { params_.metric = metric; }

    struct Rule {
        std::int32_t target;  // j of i -> j
        double confidence;
        double lift;
    };
    /// Outgoing rules of item i, sorted by confidence descending (ties by
    /// target id ascending).
    std::span<const Rule> rules(std::int32_t item) const {
        return {rules_.data() + rule_ptr_[item],
                static_cast<std::size_t>(rule_ptr_[item + 1] - rule_ptr_[item])};
    }

protected:
    void do_fit(const EncodedDataset& data) override;
    std::vector<ScoredItem> score_query(std::int32_t query) const override;
    bool use_ratings() const override { return params_.use_ratings; }

private:
    friend class ModelArchive;
    Params params_;
    std::vector<std::int64_t> rule_ptr_;  // n_items + 1
    std::vector<Rule> rules_;
};

}  // namespace recsmith
