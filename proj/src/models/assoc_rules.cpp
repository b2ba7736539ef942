#include "recsmith/models/assoc_rules.hpp"

#include <algorithm>

#include "recsmith/error.hpp"
#include "recsmith/parallel.hpp"

namespace recsmith {

RuleMetric parse_rule_metric(const std::string& name) {
    if (name == "confidence") return RuleMetric::Confidence;
    if (name == "lift") return RuleMetric::Lift;
    raise(ErrorCode::UnknownMetric, "unknown rule metric '" + name + "'");
}

AssociationRules::AssociationRules() : AssociationRules(Params{}) {}

AssociationRules::AssociationRules(Params params) : params_(params) {
    if (params_.min_pair_count < 1) {
        raise(ErrorCode::InvalidParameter, "association_rules requires min_pair_count >= 1");
    }
}

void AssociationRules::do_fit(const EncodedDataset& data) {
    (void)data;
    const SparseInteractionMatrix by_item = history_.transposed();
    const std::int32_t n_items = n_items_;
    const double n_queries = static_cast<double>(n_queries_);

    // distinct-user count per item
    std::vector<std::int64_t> item_users(static_cast<std::size_t>(n_items), 0);
    for (std::int32_t i = 0; i < n_items; ++i) {
        item_users[i] = by_item.row_ptr[i + 1] - by_item.row_ptr[i];
    }

    std::vector<std::vector<Rule>> lists(static_cast<std::size_t>(n_items));
    parallel_for(0, static_cast<std::size_t>(n_items), [&](std::size_t source) {
        const std::int32_t i = static_cast<std::int32_t>(source);
        if (item_users[i] == 0) return;

        // co-occurrence counts n_ij over the users of i
        std::vector<std::int64_t> pair_count(static_cast<std::size_t>(n_items), 0);
        std::vector<std::int32_t> touched;
        const auto col = by_item.row(i);
        for (std::size_t k = 0; k < col.size; ++k) {
            const auto row = history_.row(col.idx[k]);
            for (std::size_t m = 0; m < row.size; ++m) {
                const std::int32_t j = row.idx[m];
                if (j == i) continue;
                if (pair_count[j] == 0) touched.push_back(j);
                ++pair_count[j];
            }
        }

        std::vector<Rule>& out = lists[source];
        for (std::int32_t j : touched) {
            if (pair_count[j] < params_.min_pair_count) continue;
            const double confidence =
                static_cast<double>(pair_count[j]) / static_cast<double>(item_users[i]);
            const double lift = confidence / (static_cast<double>(item_users[j]) / n_queries);
            out.push_back({j, confidence, lift});
        }
        std::sort(out.begin(), out.end(), [](const Rule& a, const Rule& b) {
            if (a.confidence != b.confidence) return a.confidence > b.confidence;
            return a.target < b.target;
        });
    });

    rule_ptr_.assign(static_cast<std::size_t>(n_items) + 1, 0);
    std::size_t total = 0;
    for (std::int32_t i = 0; i < n_items; ++i) {
        total += lists[i].size();
        rule_ptr_[static_cast<std::size_t>(i) + 1] = static_cast<std::int64_t>(total);
    }
    rules_.clear();
    rules_.reserve(total);
    for (auto& list : lists) rules_.insert(rules_.end(), list.begin(), list.end());
}

std::vector<ScoredItem> AssociationRules::score_query(std::int32_t query) const {
    std::vector<ScoredItem> out;
    if (query < 0 || query >= n_queries_) return out;
    const auto row = history_.row(query);
    if (row.size == 0) return out;

    const bool by_lift = params_.metric == RuleMetric::Lift;
    std::vector<double> best(static_cast<std::size_t>(n_items_), 0.0);
    std::vector<char> seen(static_cast<std::size_t>(n_items_), 0);
    std::vector<std::int32_t> touched;
    for (std::size_t m = 0; m < row.size; ++m) {
        for (const Rule& rule : rules(row.idx[m])) {
            const double w = by_lift ? rule.lift : rule.confidence;
            if (!seen[rule.target]) {
                seen[rule.target] = 1;
                touched.push_back(rule.target);
                best[rule.target] = w;
            } else {
                best[rule.target] = std::max(best[rule.target], w);
            }
        }
    }
    out.reserve(touched.size());
    for (std::int32_t j : touched) out.push_back({j, best[j]});
    return out;
}

}  // namespace recsmith
