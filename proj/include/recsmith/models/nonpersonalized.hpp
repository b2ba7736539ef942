#pragma once

#include <cstdint>
#include <vector>

#include "recsmith/models/recommender.hpp"
#include "recsmith/rng.hpp"

namespace recsmith {

/// Per-item aggregate counts shared by the popularity and bandit models.
struct ItemStats {
    std::vector<std::int64_t> n_users;   // distinct queries that interacted
    std::vector<std::int64_t> n_pos;     // interactions with rating > 0
    std::vector<std::int64_t> n_trials;  // all interactions
    std::int64_t total_trials = 0;

    static ItemStats from(const EncodedDataset& data);
};

// ---- scoring primitives -------------------------------------------------

/// Lower endpoint of the Wilson score interval for a binomial proportion:
///   (p + z^2/2n - z*sqrt(p(1-p)/n + z^2/4n^2)) / (1 + z^2/n),  p = k/n.
/// Requires 0 <= n_pos <= n_trials, n_trials >= 1; result lies in [0, p].
double wilson_lower_bound(std::int64_t n_pos, std::int64_t n_trials, double z);

/// UCB1 index p_hat + sqrt(c * ln(total_trials) / n_trials); an unexplored
/// arm (n_trials = 0) gets +infinity so it ranks first.
double ucb_score(std::int64_t n_pos, std::int64_t n_trials, double total_trials, double c);

/// KL-UCB index: the largest q in [p_hat, 1) with
///   n_trials * KL(p_hat, q) <= ln(total_trials),
/// KL the Bernoulli divergence, found by bisection to absolute 1e-6.
/// p_hat = 1 returns 1; n_trials = 0 returns +infinity.
double klucb_score(std::int64_t n_pos, std::int64_t n_trials, double total_trials);

/// One draw from Beta(1 + n_pos, 1 + n_fail) under the caller's generator.
double thompson_sample(std::int64_t n_pos, std::int64_t n_fail, SplitMix64& rng);

// ---- models --------------------------------------------------------------

/// Recommends by item popularity: score(i) = n_users(i) / n_queries by
/// default, or raw interaction counts over n_queries with
/// PopRec::CountMode::Interactions.
class PopRec final : public Recommender {
public:
    enum class CountMode { DistinctUsers, Interactions };

    explicit PopRec(CountMode mode = CountMode::DistinctUsers) : mode_(mode) {}

    std::string name() const override { return "pop_rec"; }
    const std::vector<double>& scores() const { return scores_; }
    CountMode count_mode() const { return mode_; }

protected:
    void do_fit(const EncodedDataset& data) override;
    std::vector<ScoredItem> score_query(std::int32_t) const override;
    const std::vector<ScoredItem>* global_ranking() const override { return &ranking_; }

private:
    friend class ModelArchive;
    CountMode mode_;
    std::vector<double> scores_;
    std::vector<ScoredItem> ranking_;
};

/// Scores a query's own history items by their share of the query's
/// interactions; per query the scores sum to 1. With filter_seen=true every
/// list is empty (warned, not an error).
class QueryPopRec final : public Recommender {
public:
    std::string name() const override { return "query_pop_rec"; }

protected:
    void do_fit(const EncodedDataset& data) override;
    std::vector<ScoredItem> score_query(std::int32_t query) const override;
    bool recommends_only_seen() const override { return true; }

private:
    friend class ModelArchive;
    // per-query normalized history scores, CSR layout aligned with history_
    std::vector<double> shares_;
};

/// Ranks items by the Wilson lower confidence bound of their positive rate.
/// Requires strictly binary 0/1 ratings at fit; zero-trial items score 0.
class WilsonRec final : public Recommender {
public:
    explicit WilsonRec(double z = 1.96);

    std::string name() const override { return "wilson"; }
    Capabilities capabilities() const override { return {.needs_binary_ratings = true}; }
    double z() const { return z_; }

protected:
    void do_fit(const EncodedDataset& data) override;
    std::vector<ScoredItem> score_query(std::int32_t) const override;
    const std::vector<ScoredItem>* global_ranking() const override { return &ranking_; }

private:
    friend class ModelArchive;
    double z_;
    std::vector<double> scores_;
    std::vector<ScoredItem> ranking_;
};

/// Classic UCB1 bandit over items; ratings binarized by rating > 0.
class UcbRec final : public Recommender {
public:
    explicit UcbRec(double exploration = 2.0);

    std::string name() const override { return "ucb"; }
    double exploration() const { return exploration_; }

protected:
    void do_fit(const EncodedDataset& data) override;
    std::vector<ScoredItem> score_query(std::int32_t) const override;
    const std::vector<ScoredItem>* global_ranking() const override { return &ranking_; }

private:
    friend class ModelArchive;
    double exploration_;
    std::vector<double> scores_;
    std::vector<ScoredItem> ranking_;
};

/// KL-UCB bandit over items; ratings binarized by rating > 0.
class KlUcbRec final : public Recommender {
public:
    std::string name() const override { return "klucb"; }

protected:
    void do_fit(const EncodedDataset& data) override;
    std::vector<ScoredItem> score_query(std::int32_t) const override;
    const std::vector<ScoredItem>* global_ranking() const override { return &ranking_; }

private:
    friend class ModelArchive;
    std::vector<double> scores_;
    std::vector<ScoredItem> ranking_;
};

/// Thompson sampling with a Beta(1 + successes, 1 + failures) posterior per
/// item. Each predicted query draws from its own generator seeded by
/// (seed, query id), so parallel prediction is deterministic.
class ThompsonRec final : public Recommender {
public:
    explicit ThompsonRec(std::uint64_t seed = 0) : seed_(seed) {}

    std::string name() const override { return "thompson"; }
    std::uint64_t seed() const { return seed_; }

protected:
    void do_fit(const EncodedDataset& data) override;
    std::vector<ScoredItem> score_query(std::int32_t query) const override;

private:
    friend class ModelArchive;
    std::uint64_t seed_;
    std::vector<std::int64_t> n_pos_;
    std::vector<std::int64_t> n_fail_;
};

}  // namespace recsmith
