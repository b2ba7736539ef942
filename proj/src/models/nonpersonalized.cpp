#include "recsmith/models/nonpersonalized.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "recsmith/error.hpp"

namespace recsmith {

namespace {

std::vector<ScoredItem> all_items_ranked(const std::vector<double>& scores) {
    std::vector<ScoredItem> ranking(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        ranking[i] = {static_cast<std::int32_t>(i), scores[i]};
    }
    std::sort(ranking.begin(), ranking.end(), [](const ScoredItem& a, const ScoredItem& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.item < b.item;
    });
    return ranking;
}

std::vector<ScoredItem> as_candidates(const std::vector<double>& scores) {
    std::vector<ScoredItem> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = {static_cast<std::int32_t>(i), scores[i]};
    }
    return out;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

ItemStats ItemStats::from(const EncodedDataset& data) {
    ItemStats stats;
    const std::size_t n = static_cast<std::size_t>(data.n_items);
    stats.n_users.assign(n, 0);
    stats.n_pos.assign(n, 0);
    stats.n_trials.assign(n, 0);
    stats.total_trials = static_cast<std::int64_t>(data.log.size());

    for (std::size_t r = 0; r < data.log.size(); ++r) {
        const std::int32_t item = data.log.items[r];
        ++stats.n_trials[item];
        if (data.log.ratings[r] > 0.0) ++stats.n_pos[item];
    }
    // distinct users per item: one matrix entry per distinct (query, item) pair
    const SparseInteractionMatrix pairs = SparseInteractionMatrix::from_log(
        data.log, data.n_queries, data.n_items, /*use_ratings=*/false);
    for (std::int32_t item : pairs.col_idx) ++stats.n_users[item];
    return stats;
}

double wilson_lower_bound(std::int64_t n_pos, std::int64_t n_trials, double z) {
    const double n = static_cast<double>(n_trials);
    const double p = static_cast<double>(n_pos) / n;
    const double z2 = z * z;
    const double center = p + z2 / (2.0 * n);
    const double spread = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return (center - spread) / (1.0 + z2 / n);
}

double ucb_score(std::int64_t n_pos, std::int64_t n_trials, double total_trials, double c) {
    if (n_trials == 0) return kInf;
    const double p = static_cast<double>(n_pos) / static_cast<double>(n_trials);
    return p + std::sqrt(c * std::log(total_trials) / static_cast<double>(n_trials));
}

namespace {
// Bernoulli KL divergence with the usual 0*log(0) = 0 conventions.
double bernoulli_kl(double p, double q) {
    double kl = 0.0;
    if (p > 0.0) kl += p * std::log(p / q);
    if (p < 1.0) kl += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
    return kl;
}
}  // namespace

double klucb_score(std::int64_t n_pos, std::int64_t n_trials, double total_trials) {
    if (n_trials == 0) return kInf;
    const double n = static_cast<double>(n_trials);
    const double p = static_cast<double>(n_pos) / n;
    if (p >= 1.0) return 1.0;

    const double budget = std::log(total_trials);
    if (budget <= 0.0) return p;

    // Feasible set is [p, q*]; KL is increasing in q above p, so bisect and
    // return the feasible side of the final bracket.
    double lo = p;
    double hi = 1.0;
    while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        if (n * bernoulli_kl(p, mid) <= budget) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

double thompson_sample(std::int64_t n_pos, std::int64_t n_fail, SplitMix64& rng) {
    return rng.next_beta(1.0 + static_cast<double>(n_pos), 1.0 + static_cast<double>(n_fail));
}

// ---- PopRec ----------------------------------------------------------------

void PopRec::do_fit(const EncodedDataset& data) {
    const ItemStats stats = ItemStats::from(data);
    const double denom = static_cast<double>(n_queries_);
    scores_.assign(static_cast<std::size_t>(n_items_), 0.0);
    for (std::int32_t i = 0; i < n_items_; ++i) {
        const std::int64_t count =
            mode_ == CountMode::DistinctUsers ? stats.n_users[i] : stats.n_trials[i];
        scores_[i] = static_cast<double>(count) / denom;
    }
    ranking_ = all_items_ranked(scores_);
}

std::vector<ScoredItem> PopRec::score_query(std::int32_t) const { return as_candidates(scores_); }

// ---- QueryPopRec -----------------------------------------------------------

void QueryPopRec::do_fit(const EncodedDataset& data) {
    // interaction counts per (query, item) over the query's total
    std::vector<double> counts(static_cast<std::size_t>(history_.nnz()), 0.0);
    for (std::size_t r = 0; r < data.log.size(); ++r) {
        const std::int32_t q = data.log.queries[r];
        const auto row = history_.row(q);
        const auto* pos = std::lower_bound(row.idx, row.idx + row.size, data.log.items[r]);
        const std::size_t slot =
            static_cast<std::size_t>(history_.row_ptr[q] + (pos - row.idx));
        counts[slot] += 1.0;
    }
    shares_.assign(counts.size(), 0.0);
    for (std::int32_t q = 0; q < n_queries_; ++q) {
        double total = 0.0;
        for (std::int64_t k = history_.row_ptr[q]; k < history_.row_ptr[q + 1]; ++k) {
            total += counts[static_cast<std::size_t>(k)];
        }
        if (total <= 0.0) continue;
        for (std::int64_t k = history_.row_ptr[q]; k < history_.row_ptr[q + 1]; ++k) {
            shares_[static_cast<std::size_t>(k)] = counts[static_cast<std::size_t>(k)] / total;
        }
    }
}

std::vector<ScoredItem> QueryPopRec::score_query(std::int32_t query) const {
    std::vector<ScoredItem> out;
    if (query < 0 || query >= n_queries_) return out;
    const auto row = history_.row(query);
    out.reserve(row.size);
    for (std::size_t k = 0; k < row.size; ++k) {
        out.push_back({row.idx[k], shares_[static_cast<std::size_t>(history_.row_ptr[query]) + k]});
    }
    return out;
}

// ---- WilsonRec -------------------------------------------------------------

WilsonRec::WilsonRec(double z) : z_(z) {
    if (!(z > 0.0)) raise(ErrorCode::InvalidParameter, "wilson requires z > 0");
}

void WilsonRec::do_fit(const EncodedDataset& data) {
    for (double r : data.log.ratings) {
        if (r != 0.0 && r != 1.0) {
            raise(ErrorCode::NonBinaryRatings,
                  "wilson requires binary 0/1 ratings; found " + std::to_string(r));
        }
    }
    const ItemStats stats = ItemStats::from(data);
    scores_.assign(static_cast<std::size_t>(n_items_), 0.0);
    for (std::int32_t i = 0; i < n_items_; ++i) {
        if (stats.n_trials[i] > 0) {
            scores_[i] = wilson_lower_bound(stats.n_pos[i], stats.n_trials[i], z_);
        }
    }
    ranking_ = all_items_ranked(scores_);
}

std::vector<ScoredItem> WilsonRec::score_query(std::int32_t) const {
    return as_candidates(scores_);
}

// ---- UcbRec ----------------------------------------------------------------

UcbRec::UcbRec(double exploration) : exploration_(exploration) {
    if (!(exploration > 0.0)) raise(ErrorCode::InvalidParameter, "ucb requires c > 0");
}

void UcbRec::do_fit(const EncodedDataset& data) {
    const ItemStats stats = ItemStats::from(data);
    scores_.assign(static_cast<std::size_t>(n_items_), 0.0);
    for (std::int32_t i = 0; i < n_items_; ++i) {
        scores_[i] = ucb_score(stats.n_pos[i], stats.n_trials[i],
                               static_cast<double>(stats.total_trials), exploration_);
    }
    ranking_ = all_items_ranked(scores_);
}

std::vector<ScoredItem> UcbRec::score_query(std::int32_t) const { return as_candidates(scores_); }

// ---- KlUcbRec --------------------------------------------------------------

void KlUcbRec::do_fit(const EncodedDataset& data) {
    const ItemStats stats = ItemStats::from(data);
    scores_.assign(static_cast<std::size_t>(n_items_), 0.0);
    for (std::int32_t i = 0; i < n_items_; ++i) {
        scores_[i] = klucb_score(stats.n_pos[i], stats.n_trials[i],
                                 static_cast<double>(stats.total_trials));
    }
    ranking_ = all_items_ranked(scores_);
}

std::vector<ScoredItem> KlUcbRec::score_query(std::int32_t) const {
    return as_candidates(scores_);
}

// ---- ThompsonRec -----------------------------------------------------------

void ThompsonRec::do_fit(const EncodedDataset& data) {
    const ItemStats stats = ItemStats::from(data);
    n_pos_.assign(stats.n_pos.begin(), stats.n_pos.end());
    n_fail_.resize(n_pos_.size());
    for (std::size_t i = 0; i < n_pos_.size(); ++i) {
        n_fail_[i] = stats.n_trials[i] - stats.n_pos[i];
    }
}

std::vector<ScoredItem> ThompsonRec::score_query(std::int32_t query) const {
    SplitMix64 rng(derive_seed(seed_, static_cast<std::uint64_t>(query)));
    std::vector<ScoredItem> out(n_pos_.size());
    for (std::size_t i = 0; i < n_pos_.size(); ++i) {
        out[i] = {static_cast<std::int32_t>(i), thompson_sample(n_pos_[i], n_fail_[i], rng)};
    }
    return out;
}

}  // namespace recsmith
