#include "recsmith/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "recsmith/error.hpp"
#include "recsmith/parallel.hpp"

namespace recsmith {

namespace {

constexpr const char* kAccuracyNames[] = {"precision", "recall", "map",    "mrr",
                                          "ndcg",      "hitrate", "rocauc"};
constexpr const char* kBeyondNames[] = {"coverage", "novelty", "surprisal", "unexpectedness",
                                        "categorical_diversity"};

bool is_accuracy(const std::string& name) {
    for (const char* n : kAccuracyNames) {
        if (name == n) return true;
    }
    return false;
}

bool is_beyond(const std::string& name) {
    for (const char* n : kBeyondNames) {
        if (name == n) return true;
    }
    return false;
}

std::size_t top_slots(RankedItems ranked, int k) {
    return std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
}

// Neumaier-compensated accumulator; reductions run in fixed query order.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    double value() const { return sum + comp; }
};

std::pair<std::string, int> split_key(const std::string& key) {
    const std::size_t at = key.rfind('@');
    if (at == std::string::npos) return {key, 0};
    int k = 0;
    std::from_chars(key.data() + at + 1, key.data() + key.size(), k);
    return {key.substr(0, at), k};
}

}  // namespace

GroundTruth GroundTruth::from_log(const EncodedLog& test, std::optional<double> rating_threshold) {
    GroundTruth gt;
    for (std::size_t r = 0; r < test.size(); ++r) {
        if (rating_threshold && test.ratings[r] < *rating_threshold) continue;
        gt.relevant[test.queries[r]].insert(test.items[r]);
    }
    return gt;
}

double precision_at_k(RankedItems ranked, const ItemSet& gt, int k) {
    const std::size_t m = top_slots(ranked, k);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < m; ++r) hits += gt.count(ranked[r]);
    return static_cast<double>(hits) / static_cast<double>(k);
}

double recall_at_k(RankedItems ranked, const ItemSet& gt, int k) {
    if (gt.empty()) return 0.0;
    const std::size_t m = top_slots(ranked, k);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < m; ++r) hits += gt.count(ranked[r]);
    return static_cast<double>(hits) / static_cast<double>(gt.size());
}

double average_precision_at_k(RankedItems ranked, const ItemSet& gt, int k,
                              bool normalize_by_gt) {
    if (gt.empty()) return 0.0;
    const std::size_t m = top_slots(ranked, k);
    std::size_t hits = 0;
    double sum = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        if (gt.count(ranked[r])) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(r + 1);
        }
    }
    const std::size_t denom =
        normalize_by_gt ? gt.size() : std::min<std::size_t>(static_cast<std::size_t>(k), gt.size());
    return sum / static_cast<double>(denom);
}

double reciprocal_rank_at_k(RankedItems ranked, const ItemSet& gt, int k) {
    const std::size_t m = top_slots(ranked, k);
    for (std::size_t r = 0; r < m; ++r) {
        if (gt.count(ranked[r])) return 1.0 / static_cast<double>(r + 1);
    }
    return 0.0;
}

double ndcg_at_k(RankedItems ranked, const ItemSet& gt, int k) {
    if (gt.empty()) return 0.0;
    const std::size_t m = top_slots(ranked, k);
    double dcg = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        if (gt.count(ranked[r])) dcg += 1.0 / std::log2(static_cast<double>(r + 2));
    }
    const std::size_t ideal = std::min<std::size_t>(static_cast<std::size_t>(k), gt.size());
    double idcg = 0.0;
    for (std::size_t r = 0; r < ideal; ++r) idcg += 1.0 / std::log2(static_cast<double>(r + 2));
    return idcg > 0.0 ? dcg / idcg : 0.0;
}

double hitrate_at_k(RankedItems ranked, const ItemSet& gt, int k) {
    const std::size_t m = top_slots(ranked, k);
    for (std::size_t r = 0; r < m; ++r) {
        if (gt.count(ranked[r])) return 1.0;
    }
    return 0.0;
}

std::optional<double> rocauc_at_k(RankedItems ranked, const ItemSet& gt, int k) {
    const std::size_t m = top_slots(ranked, k);
    std::size_t pos_seen = 0, neg_seen = 0, correct = 0;
    for (std::size_t r = 0; r < m; ++r) {
        if (gt.count(ranked[r])) {
            ++pos_seen;
        } else {
            ++neg_seen;
            correct += pos_seen;  // every earlier positive beats this negative
        }
    }
    if (pos_seen == 0 || neg_seen == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(pos_seen * neg_seen);
}

double novelty_at_k(RankedItems ranked, const ItemSet& user_history, int k) {
    const std::size_t m = top_slots(ranked, k);
    std::size_t fresh = 0;
    for (std::size_t r = 0; r < m; ++r) fresh += user_history.count(ranked[r]) == 0;
    return static_cast<double>(fresh) / static_cast<double>(k);
}

double surprisal_at_k(RankedItems ranked, const std::vector<std::int64_t>& item_user_counts,
                      std::int64_t n_train_queries, int k) {
    const std::size_t m = top_slots(ranked, k);
    if (m == 0) return 0.0;
    const double log_n = n_train_queries > 1 ? std::log2(static_cast<double>(n_train_queries)) : 0.0;
    double sum = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        const std::int32_t item = ranked[r];
        const std::int64_t users =
            item >= 0 && static_cast<std::size_t>(item) < item_user_counts.size()
                ? item_user_counts[item]
                : 0;
        if (users <= 0) {
            sum += 1.0;  // unseen in train: maximal self-information
        } else if (log_n > 0.0) {
            sum += -std::log2(static_cast<double>(users) / static_cast<double>(n_train_queries)) /
                   log_n;
        }
    }
    return sum / static_cast<double>(m);
}

double unexpectedness_at_k(RankedItems ranked, RankedItems baseline, int k) {
    const std::size_t m = top_slots(ranked, k);
    const std::size_t bm = top_slots(baseline, k);
    ItemSet expected(baseline.begin(), baseline.begin() + bm);
    std::size_t unexpected = 0;
    for (std::size_t r = 0; r < m; ++r) unexpected += expected.count(ranked[r]) == 0;
    return static_cast<double>(unexpected) / static_cast<double>(k);
}

double categorical_diversity_at_k(RankedItems ranked,
                                  const std::vector<std::string>& item_categories, int k) {
    const std::size_t m = top_slots(ranked, k);
    if (m == 0) return 0.0;
    std::unordered_set<std::string> cats;
    for (std::size_t r = 0; r < m; ++r) {
        const std::int32_t item = ranked[r];
        if (item >= 0 && static_cast<std::size_t>(item) < item_categories.size()) {
            cats.insert(item_categories[item]);
        } else {
            cats.insert(std::string());
        }
    }
    return static_cast<double>(cats.size()) / static_cast<double>(m);
}

std::vector<MetricSpec> parse_metric_list(const std::string& text,
                                          const std::vector<std::string>& extra_names) {
    std::vector<MetricSpec> specs;
    auto spec_of = [&](const std::string& name) -> MetricSpec& {
        for (auto& s : specs) {
            if (s.name == name) return s;
        }
        specs.push_back({name, {}});
        return specs.back();
    };

    std::stringstream stream(text);
    std::string part;
    while (std::getline(stream, part, ',')) {
        if (part.empty()) continue;
        const std::size_t at = part.rfind('@');
        if (at == std::string::npos || at + 1 >= part.size()) {
            raise(ErrorCode::UnknownMetric, "metric '" + part + "' is not of the form name@k");
        }
        const std::string name = part.substr(0, at);
        int k = 0;
        const char* first = part.data() + at + 1;
        auto [ptr, ec] = std::from_chars(first, part.data() + part.size(), k);
        if (ec != std::errc() || ptr != part.data() + part.size() || k < 1) {
            raise(ErrorCode::UnknownMetric, "metric '" + part + "' has an invalid k");
        }
        const bool known = is_accuracy(name) || is_beyond(name) ||
                           std::find(extra_names.begin(), extra_names.end(), name) !=
                               extra_names.end();
        if (!known) raise(ErrorCode::UnknownMetric, "unknown metric '" + name + "'");
        auto& spec = spec_of(name);
        if (std::find(spec.k_values.begin(), spec.k_values.end(), k) == spec.k_values.end()) {
            spec.k_values.push_back(k);
        }
    }
    for (auto& spec : specs) std::sort(spec.k_values.begin(), spec.k_values.end());
    if (specs.empty()) raise(ErrorCode::UnknownMetric, "empty metric list");
    return specs;
}

namespace {

struct PerUserData {
    RankedItems ranked;
    const ItemSet* gt = nullptr;  // null or empty: not accuracy-eligible
};

struct TrainContext {
    std::unordered_map<std::int32_t, ItemSet> user_history;
    std::vector<std::int64_t> item_user_counts;
    std::int64_t n_train_queries = 0;
    std::int64_t n_train_items = 0;

    static TrainContext from(const EncodedLog& train) {
        TrainContext ctx;
        std::unordered_set<std::int32_t> items;
        std::int32_t max_item = -1;
        for (std::size_t r = 0; r < train.size(); ++r) {
            ctx.user_history[train.queries[r]].insert(train.items[r]);
            items.insert(train.items[r]);
            max_item = std::max(max_item, train.items[r]);
        }
        ctx.n_train_queries = static_cast<std::int64_t>(ctx.user_history.size());
        ctx.n_train_items = static_cast<std::int64_t>(items.size());
        ctx.item_user_counts.assign(static_cast<std::size_t>(max_item) + 1, 0);
        for (const auto& [user, history] : ctx.user_history) {
            for (std::int32_t item : history) ++ctx.item_user_counts[item];
        }
        return ctx;
    }
};

}  // namespace

std::map<std::string, double> offline_metrics(const EvaluationInputs& inputs,
                                              const std::vector<MetricSpec>& specs,
                                              const EvaluationOptions& options,
                                              const std::vector<CustomMetric>& custom) {
    if (!inputs.recs || !inputs.ground_truth) {
        raise(ErrorCode::MissingInput, "offline_metrics requires recommendations and ground truth");
    }
    if (specs.empty()) raise(ErrorCode::UnknownMetric, "no metrics requested");

    const EncodedRecommendations& recs = *inputs.recs;
    const GroundTruth& gt = *inputs.ground_truth;

    auto find_custom = [&](const std::string& name) -> const CustomMetric* {
        for (const auto& c : custom) {
            if (c.name == name) return &c;
        }
        return nullptr;
    };

    // validate inputs per requested metric up front
    bool needs_train = false, needs_baseline = false, needs_categories = false;
    for (const auto& spec : specs) {
        if (spec.name == "coverage" || spec.name == "novelty" || spec.name == "surprisal") {
            needs_train = true;
        } else if (spec.name == "unexpectedness") {
            needs_baseline = true;
        } else if (spec.name == "categorical_diversity") {
            needs_categories = true;
        } else if (!is_accuracy(spec.name) && !find_custom(spec.name)) {
            raise(ErrorCode::UnknownMetric, "unknown metric '" + spec.name + "'");
        }
        if (spec.k_values.empty()) {
            raise(ErrorCode::UnknownMetric, "metric '" + spec.name + "' lists no k");
        }
    }
    if (needs_train && !inputs.train) {
        raise(ErrorCode::MissingInput, "coverage/novelty/surprisal require the train log");
    }
    if (needs_baseline && !inputs.baseline) {
        raise(ErrorCode::MissingInput, "unexpectedness requires baseline recommendations");
    }
    if (needs_categories && !inputs.item_categories) {
        raise(ErrorCode::MissingInput, "categorical_diversity requires item categories");
    }

    // shared per-user views
    std::vector<PerUserData> users(recs.n_queries());
    std::vector<std::vector<std::int32_t>> ranked_storage(recs.n_queries());
    for (std::size_t g = 0; g < recs.n_queries(); ++g) {
        auto& items = ranked_storage[g];
        items.reserve(recs.entries[g].size());
        for (const auto& e : recs.entries[g]) items.push_back(e.item);
        users[g].ranked = items;
        auto it = gt.relevant.find(recs.queries[g]);
        users[g].gt = (it != gt.relevant.end() && !it->second.empty()) ? &it->second : nullptr;
    }

    std::optional<TrainContext> train_ctx;
    if (needs_train) train_ctx = TrainContext::from(*inputs.train);

    std::unordered_map<std::int32_t, RankedItems> baseline_of;
    std::vector<std::vector<std::int32_t>> baseline_storage;
    if (needs_baseline) {
        baseline_storage.resize(inputs.baseline->n_queries());
        for (std::size_t g = 0; g < inputs.baseline->n_queries(); ++g) {
            for (const auto& e : inputs.baseline->entries[g]) {
                baseline_storage[g].push_back(e.item);
            }
            baseline_of[inputs.baseline->queries[g]] = baseline_storage[g];
        }
    }

    const ItemSet empty_set;
    std::map<std::string, double> out;

    // per-user values computed in parallel into fixed slots, then reduced
    // with a compensated sum in query order so results are reproducible
    // regardless of the worker count
    std::vector<double> per_user(users.size());

    auto accuracy_mean = [&](const std::string& name, int k,
                             const std::function<double(const PerUserData&)>& fn) {
        parallel_for(0, users.size(), [&](std::size_t g) {
            per_user[g] = users[g].gt ? fn(users[g]) : 0.0;
        });
        KahanSum sum;
        std::size_t counted = 0;
        for (std::size_t g = 0; g < users.size(); ++g) {
            if (!users[g].gt) continue;
            sum.add(per_user[g]);
            ++counted;
        }
        if (counted == 0) {
            raise(ErrorCode::EmptyEvaluation,
                  name + "@" + std::to_string(k) + ": no query has non-empty ground truth");
        }
        return sum.value() / static_cast<double>(counted);
    };

    auto beyond_mean = [&](const std::string& name, int k,
                           const std::function<double(std::size_t)>& fn) {
        if (users.empty()) {
            raise(ErrorCode::EmptyEvaluation,
                  name + "@" + std::to_string(k) + ": no queries to evaluate");
        }
        parallel_for(0, users.size(), [&](std::size_t g) { per_user[g] = fn(g); });
        KahanSum sum;
        for (std::size_t g = 0; g < users.size(); ++g) sum.add(per_user[g]);
        return sum.value() / static_cast<double>(users.size());
    };

    for (const auto& spec : specs) {
        for (int k : spec.k_values) {
            const std::string key = spec.name + "@" + std::to_string(k);
            double value = 0.0;
            if (spec.name == "precision") {
                value = accuracy_mean(spec.name, k, [&](const PerUserData& u) {
                    return precision_at_k(u.ranked, *u.gt, k);
                });
            } else if (spec.name == "recall") {
                value = accuracy_mean(spec.name, k, [&](const PerUserData& u) {
                    return recall_at_k(u.ranked, *u.gt, k);
                });
            } else if (spec.name == "map") {
                value = accuracy_mean(spec.name, k, [&](const PerUserData& u) {
                    return average_precision_at_k(u.ranked, *u.gt, k,
                                                  options.map_normalize_by_gt);
                });
            } else if (spec.name == "mrr") {
                value = accuracy_mean(spec.name, k, [&](const PerUserData& u) {
                    return reciprocal_rank_at_k(u.ranked, *u.gt, k);
                });
            } else if (spec.name == "ndcg") {
                value = accuracy_mean(spec.name, k, [&](const PerUserData& u) {
                    return ndcg_at_k(u.ranked, *u.gt, k);
                });
            } else if (spec.name == "hitrate") {
                value = accuracy_mean(spec.name, k, [&](const PerUserData& u) {
                    return hitrate_at_k(u.ranked, *u.gt, k);
                });
            } else if (spec.name == "rocauc") {
                parallel_for(0, users.size(), [&](std::size_t g) {
                    const auto auc = users[g].gt ? rocauc_at_k(users[g].ranked, *users[g].gt, k)
                                                 : std::nullopt;
                    per_user[g] = auc.value_or(std::numeric_limits<double>::quiet_NaN());
                });
                KahanSum sum;
                std::size_t counted = 0;
                for (std::size_t g = 0; g < users.size(); ++g) {
                    if (std::isnan(per_user[g])) continue;
                    sum.add(per_user[g]);
                    ++counted;
                }
                if (counted == 0) {
                    raise(ErrorCode::EmptyEvaluation,
                          key + ": every query is degenerate (no positives or no negatives)");
                }
                value = sum.value() / static_cast<double>(counted);
            } else if (spec.name == "coverage") {
                ItemSet recommended;
                for (const auto& user : users) {
                    const std::size_t m = top_slots(user.ranked, k);
                    recommended.insert(user.ranked.begin(), user.ranked.begin() + m);
                }
                if (train_ctx->n_train_items == 0) {
                    raise(ErrorCode::EmptyEvaluation, key + ": train log has no items");
                }
                value = static_cast<double>(recommended.size()) /
                        static_cast<double>(train_ctx->n_train_items);
            } else if (spec.name == "novelty") {
                value = beyond_mean(spec.name, k, [&](std::size_t g) {
                    auto it = train_ctx->user_history.find(recs.queries[g]);
                    const ItemSet& history =
                        it != train_ctx->user_history.end() ? it->second : empty_set;
                    return novelty_at_k(users[g].ranked, history, k);
                });
            } else if (spec.name == "surprisal") {
                value = beyond_mean(spec.name, k, [&](std::size_t g) {
                    return surprisal_at_k(users[g].ranked, train_ctx->item_user_counts,
                                          train_ctx->n_train_queries, k);
                });
            } else if (spec.name == "unexpectedness") {
                value = beyond_mean(spec.name, k, [&](std::size_t g) {
                    auto it = baseline_of.find(recs.queries[g]);
                    const RankedItems base =
                        it != baseline_of.end() ? it->second : RankedItems{};
                    return unexpectedness_at_k(users[g].ranked, base, k);
                });
            } else if (spec.name == "categorical_diversity") {
                value = beyond_mean(spec.name, k, [&](std::size_t g) {
                    return categorical_diversity_at_k(users[g].ranked, *inputs.item_categories, k);
                });
            } else if (const CustomMetric* c = find_custom(spec.name)) {
                value = accuracy_mean(spec.name, k,
                                      [&](const PerUserData& u) { return c->fn(u.ranked, *u.gt, k); });
            }
            out[key] = value;
        }
    }
    return out;
}

void Experiment::add(const std::string& run_name, const std::map<std::string, double>& metrics) {
    if (!rows_.count(run_name)) order_.push_back(run_name);
    rows_[run_name] = metrics;
}

std::vector<std::string> Experiment::columns() const {
    std::vector<std::string> keys;
    for (const auto& run : order_) {
        for (const auto& [key, value] : rows_.at(run)) {
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
        }
    }
    std::sort(keys.begin(), keys.end(), [](const std::string& a, const std::string& b) {
        const auto [an, ak] = split_key(a);
        const auto [bn, bk] = split_key(b);
        if (an != bn) return an < bn;
        return ak < bk;
    });
    return keys;
}

std::optional<double> Experiment::cell(const std::string& run, const std::string& column) const {
    auto row = rows_.find(run);
    if (row == rows_.end()) return std::nullopt;
    auto it = row->second.find(column);
    if (it == row->second.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> Experiment::sorted_runs(const std::string& sort_column) const {
    std::vector<std::string> runs = order_;
    if (sort_column.empty()) return runs;
    std::stable_sort(runs.begin(), runs.end(), [&](const std::string& a, const std::string& b) {
        const auto va = cell(a, sort_column);
        const auto vb = cell(b, sort_column);
        if (va.has_value() != vb.has_value()) return va.has_value();
        if (va && vb && *va != *vb) return *va > *vb;
        return a < b;
    });
    return runs;
}

namespace {
std::string format_cell(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}
}  // namespace

std::string Experiment::render(const std::string& sort_column) const {
    const std::vector<std::string> cols = columns();
    const std::vector<std::string> runs = sorted_runs(sort_column);

    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header{"run"};
    header.insert(header.end(), cols.begin(), cols.end());
    grid.push_back(header);
    for (const auto& run : runs) {
        std::vector<std::string> row{run};
        for (const auto& col : cols) {
            const auto v = cell(run, col);
            row.push_back(v ? format_cell(*v) : "NA");
        }
        grid.push_back(std::move(row));
    }

    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& row : grid) {
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    }
    std::string out;
    for (std::size_t r = 0; r < grid.size(); ++r) {
        for (std::size_t c = 0; c < grid[r].size(); ++c) {
            if (c) out += "  ";
            out += grid[r][c];
            out.append(widths[c] - grid[r][c].size(), ' ');
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += '\n';
    }
    return out;
}

std::string Experiment::to_csv(const std::string& sort_column) const {
    const std::vector<std::string> cols = columns();
    std::string out = "run";
    for (const auto& col : cols) out += "," + col;
    out += '\n';
    for (const auto& run : sorted_runs(sort_column)) {
        out += run;
        for (const auto& col : cols) {
            const auto v = cell(run, col);
            out += ",";
            out += v ? format_cell(*v) : "NA";
        }
        out += '\n';
    }
    return out;
}

}  // namespace recsmith
