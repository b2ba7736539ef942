// Acceptance suite: one criterion per section, one [PASS]/[FAIL] line each.
// Exit status = number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "recsmith/metrics.hpp"
#include "recsmith/models/als.hpp"
#include "recsmith/models/nonpersonalized.hpp"
#include "recsmith/models/slim.hpp"
#include "recsmith/rng.hpp"
#include "recsmith/splitters.hpp"
#include "recsmith/tuning.hpp"

using namespace recsmith;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void fail(const std::string& message) {
        if (ok) detail = message;
        ok = false;
    }
    void expect(bool condition, const std::string& message) {
        if (!condition) fail(message);
    }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------- independent metric oracles (from definition) ----------

std::size_t hits_in(const std::vector<std::int32_t>& recs, const ItemSet& gt, int k) {
    std::size_t h = 0;
    for (std::size_t r = 0; r < recs.size() && r < static_cast<std::size_t>(k); ++r) {
        h += gt.count(recs[r]);
    }
    return h;
}

double oracle_precision(const std::vector<std::int32_t>& recs, const ItemSet& gt, int k) {
    return static_cast<double>(hits_in(recs, gt, k)) / k;
}

double oracle_recall(const std::vector<std::int32_t>& recs, const ItemSet& gt, int k) {
    return static_cast<double>(hits_in(recs, gt, k)) / static_cast<double>(gt.size());
}

double oracle_ap(const std::vector<std::int32_t>& recs, const ItemSet& gt, int k) {
    double sum = 0.0;
    std::size_t h = 0;
    for (std::size_t r = 0; r < recs.size() && r < static_cast<std::size_t>(k); ++r) {
        if (gt.count(recs[r])) {
            ++h;
            sum += static_cast<double>(h) / static_cast<double>(r + 1);
        }
    }
    return sum / static_cast<double>(std::min<std::size_t>(k, gt.size()));
}

double oracle_mrr(const std::vector<std::int32_t>& recs, const ItemSet& gt, int k) {
    for (std::size_t r = 0; r < recs.size() && r < static_cast<std::size_t>(k); ++r) {
        if (gt.count(recs[r])) return 1.0 / static_cast<double>(r + 1);
    }
    return 0.0;
}

double oracle_ndcg(const std::vector<std::int32_t>& recs, const ItemSet& gt, int k) {
    double dcg = 0.0;
    for (std::size_t r = 0; r < recs.size() && r < static_cast<std::size_t>(k); ++r) {
        if (gt.count(recs[r])) dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    }
    double idcg = 0.0;
    for (std::size_t r = 0; r < std::min<std::size_t>(k, gt.size()); ++r) {
        idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    }
    return idcg > 0.0 ? dcg / idcg : 0.0;
}

double oracle_hitrate(const std::vector<std::int32_t>& recs, const ItemSet& gt, int k) {
    return hits_in(recs, gt, k) > 0 ? 1.0 : 0.0;
}

std::vector<std::int32_t> random_ranking(SplitMix64& rng, int n_items, std::size_t len) {
    std::vector<std::int32_t> pool(n_items);
    for (int i = 0; i < n_items; ++i) pool[i] = i;
    for (int i = n_items - 1; i > 0; --i) {
        std::swap(pool[i], pool[rng.next_below(static_cast<std::uint64_t>(i) + 1)]);
    }
    pool.resize(len);
    return pool;
}

// ---------- criteria ----------

Check criterion_metric_oracles() {
    Check check;
    SplitMix64 rng(1001);
    for (int instance = 0; instance < 1000 && check.ok; ++instance) {
        const int n_users = 1 + static_cast<int>(rng.next_below(10));
        const int n_items = 2 + static_cast<int>(rng.next_below(19));
        const int k = 1 + static_cast<int>(rng.next_below(5));

        EncodedRecommendations recs;
        recs.k = k;
        GroundTruth gt;
        std::vector<std::vector<std::int32_t>> ranked(n_users);
        for (int u = 0; u < n_users; ++u) {
            ranked[u] = random_ranking(rng, n_items,
                                       rng.next_below(static_cast<std::uint64_t>(n_items) + 1));
            recs.queries.push_back(u);
            std::vector<EncodedRecommendations::Entry> list;
            double score = 1e9;
            for (std::int32_t item : ranked[u]) list.push_back({item, score--});
            recs.entries.push_back(std::move(list));
            for (int i = 0; i < n_items; ++i) {
                if (rng.next_double() < 0.35) gt.relevant[u].insert(i);
            }
        }
        // ensure at least one eligible user
        gt.relevant[0].insert(static_cast<std::int32_t>(rng.next_below(n_items)));

        EvaluationInputs inputs;
        inputs.recs = &recs;
        inputs.ground_truth = &gt;
        const std::vector<MetricSpec> specs{{"precision", {k}}, {"recall", {k}}, {"map", {k}},
                                            {"mrr", {k}},       {"ndcg", {k}},   {"hitrate", {k}}};
        const auto got = offline_metrics(inputs, specs);

        // oracle means over users with non-empty gt
        std::map<std::string, double> expected{{"precision", 0}, {"recall", 0}, {"map", 0},
                                               {"mrr", 0},       {"ndcg", 0},   {"hitrate", 0}};
        std::size_t counted = 0;
        for (int u = 0; u < n_users; ++u) {
            auto it = gt.relevant.find(u);
            if (it == gt.relevant.end() || it->second.empty()) continue;
            ++counted;
            expected["precision"] += oracle_precision(ranked[u], it->second, k);
            expected["recall"] += oracle_recall(ranked[u], it->second, k);
            expected["map"] += oracle_ap(ranked[u], it->second, k);
            expected["mrr"] += oracle_mrr(ranked[u], it->second, k);
            expected["ndcg"] += oracle_ndcg(ranked[u], it->second, k);
            expected["hitrate"] += oracle_hitrate(ranked[u], it->second, k);
        }
        for (auto& [name, sum] : expected) {
            const double mean = sum / static_cast<double>(counted);
            const double lib = got.at(name + "@" + std::to_string(k));
            if (std::abs(lib - mean) > 1e-12) {
                check.fail("instance " + std::to_string(instance) + ": " + name + " differs by " +
                           std::to_string(std::abs(lib - mean)));
            }
        }

        // ROC-AUC with its skip rule, against a pair-enumeration oracle
        double auc_sum = 0.0;
        std::size_t auc_counted = 0;
        for (int u = 0; u < n_users; ++u) {
            auto it = gt.relevant.find(u);
            if (it == gt.relevant.end() || it->second.empty()) continue;
            const std::size_t m = std::min<std::size_t>(ranked[u].size(), k);
            std::size_t pos = 0, neg = 0, correct = 0;
            for (std::size_t a = 0; a < m; ++a) {
                const bool a_pos = it->second.count(ranked[u][a]) > 0;
                (a_pos ? pos : neg) += 1;
                if (!a_pos) continue;
                for (std::size_t b = a + 1; b < m; ++b) {
                    if (!it->second.count(ranked[u][b])) ++correct;
                }
            }
            if (pos == 0 || neg == 0) continue;
            auc_sum += static_cast<double>(correct) / static_cast<double>(pos * neg);
            ++auc_counted;
        }
        if (auc_counted > 0) {
            const auto auc = offline_metrics(inputs, {{"rocauc", {k}}});
            const double mean = auc_sum / static_cast<double>(auc_counted);
            if (std::abs(auc.at("rocauc@" + std::to_string(k)) - mean) > 1e-12) {
                check.fail("instance " + std::to_string(instance) + ": rocauc differs");
            }
        }
    }
    return check;
}

Check criterion_exhaustive_enumeration() {
    Check check;
    // all rankings over 5 items with length <= 4
    std::vector<std::vector<std::int32_t>> rankings{{}};
    std::function<void(std::vector<std::int32_t>&)> extend = [&](std::vector<std::int32_t>& base) {
        if (base.size() == 4) return;
        for (std::int32_t i = 0; i < 5; ++i) {
            if (std::find(base.begin(), base.end(), i) != base.end()) continue;
            base.push_back(i);
            rankings.push_back(base);
            extend(base);
            base.pop_back();
        }
    };
    std::vector<std::int32_t> empty;
    extend(empty);

    std::size_t cases = 0;
    for (int mask = 1; mask < 32 && check.ok; ++mask) {
        ItemSet gt;
        for (int i = 0; i < 5; ++i) {
            if (mask & (1 << i)) gt.insert(i);
        }
        for (const auto& recs : rankings) {
            for (int k = 1; k <= 4; ++k) {
                ++cases;
                const bool exact =
                    ndcg_at_k(recs, gt, k) == oracle_ndcg(recs, gt, k) &&
                    average_precision_at_k(recs, gt, k) == oracle_ap(recs, gt, k) &&
                    reciprocal_rank_at_k(recs, gt, k) == oracle_mrr(recs, gt, k) &&
                    precision_at_k(recs, gt, k) == oracle_precision(recs, gt, k) &&
                    recall_at_k(recs, gt, k) == oracle_recall(recs, gt, k) &&
                    hitrate_at_k(recs, gt, k) == oracle_hitrate(recs, gt, k);
                if (!exact) {
                    check.fail("mismatch at gt mask " + std::to_string(mask));
                    break;
                }
            }
        }
    }
    check.expect(cases == 206u * 31u * 4u, "expected 206*31*4 cases, saw " + std::to_string(cases));
    return check;
}

InteractionLog random_raw_log(SplitMix64& rng, std::size_t rows, int queries, int items) {
    InteractionLog log;
    for (std::size_t r = 0; r < rows; ++r) {
        log.push_back("u" + std::to_string(rng.next_below(queries)),
                      "i" + std::to_string(rng.next_below(items)),
                      static_cast<std::int64_t>(rng.next_below(5000)),
                      static_cast<double>(rng.next_below(5)) + 1.0);
    }
    return log;
}

Check criterion_split_invariants() {
    Check check;
    SplitMix64 rng(3003);

    using Row = std::tuple<std::string, std::string, std::int64_t, double>;
    auto rows_of = [](const InteractionLog& log) {
        std::vector<Row> rows;
        for (std::size_t r = 0; r < log.size(); ++r) {
            rows.emplace_back(log.queries[r], log.items[r], log.timestamps[r], log.ratings[r]);
        }
        return rows;
    };

    for (int trial = 0; trial < 200 && check.ok; ++trial) {
        const InteractionLog log =
            random_raw_log(rng, 40 + rng.next_below(160), 4 + static_cast<int>(rng.next_below(12)),
                           5 + static_cast<int>(rng.next_below(15)));

        std::vector<SplitConfig> configs(5);
        configs[0].strategy = SplitStrategy::Random;
        configs[0].test_ratio = 0.3;
        configs[1].strategy = SplitStrategy::ColdUserRandom;
        configs[1].test_ratio = 0.3;
        configs[2].strategy = SplitStrategy::Time;
        configs[2].time_quantile = 0.6;
        configs[3].strategy = SplitStrategy::LastN;
        configs[3].n = 1 + static_cast<std::int64_t>(rng.next_below(3));
        configs[4].strategy = SplitStrategy::NewUsers;
        configs[4].test_ratio = 0.3;

        for (auto& config : configs) {
            config.seed = rng.next_u64();
            const auto result = split(log, config);

            // partition: multiset(train) + multiset(test) = multiset(input)
            auto all = rows_of(result.train);
            const auto test_rows = rows_of(result.test);
            all.insert(all.end(), test_rows.begin(), test_rows.end());
            std::sort(all.begin(), all.end());
            auto expected = rows_of(log);
            std::sort(expected.begin(), expected.end());
            check.expect(all == expected, "partition property violated");

            // determinism, bit for bit
            const auto again = split(log, config);
            check.expect(again.train == result.train && again.test == result.test,
                         "split not deterministic");

            // drop-cold subset contracts
            const auto dropped =
                apply_drop_cold(SplitResult<std::string>{result.train, result.test}, true, true);
            std::set<std::string> train_q(result.train.queries.begin(),
                                          result.train.queries.end());
            std::set<std::string> train_i(result.train.items.begin(), result.train.items.end());
            for (const auto& q : dropped.test.queries) {
                check.expect(train_q.count(q) == 1, "drop_cold_users left a cold user");
            }
            for (const auto& i : dropped.test.items) {
                check.expect(train_i.count(i) == 1, "drop_cold_items left a cold item");
            }
        }

        // time boundary: every train row strictly before, test at or after
        {
            const std::int64_t threshold = 2500;
            const auto result = time_split(log, threshold, std::nullopt);
            for (std::int64_t t : result.train.timestamps) {
                check.expect(t < threshold, "train row at or past the time threshold");
            }
            for (std::int64_t t : result.test.timestamps) {
                check.expect(t >= threshold, "test row before the time threshold");
            }
        }
        // last_n: |test_q| = min(n, k)
        {
            const std::int64_t n = 2;
            const auto result = last_n_split(log, n, LastNUnit::Interactions);
            std::map<std::string, std::int64_t> total, test_count;
            for (const auto& q : log.queries) ++total[q];
            for (const auto& q : result.test.queries) ++test_count[q];
            for (const auto& [q, count] : total) {
                check.expect(test_count[q] == std::min<std::int64_t>(n, count),
                             "last_n per-query test size mismatch");
            }
        }
        // new_users: every test user arrives no earlier than every train user
        {
            const auto result = new_users_split(log, 0.25);
            auto first_seen = [](const InteractionLog& l) {
                std::map<std::string, std::int64_t> first;
                for (std::size_t r = 0; r < l.size(); ++r) {
                    auto [it, added] = first.try_emplace(l.queries[r], l.timestamps[r]);
                    if (!added) it->second = std::min(it->second, l.timestamps[r]);
                }
                return first;
            };
            std::int64_t latest_train = std::numeric_limits<std::int64_t>::min();
            for (const auto& [q, t] : first_seen(result.train)) {
                latest_train = std::max(latest_train, t);
            }
            for (const auto& [q, t] : first_seen(result.test)) {
                check.expect(t >= latest_train, "new_users ordering violated");
            }
        }
    }
    return check;
}

Check criterion_closed_forms() {
    Check check;
    check.expect(std::abs(wilson_lower_bound(1, 1, 1.96) - 0.20655) <= 1e-4,
                 "wilson(1,1,1.96) off");
    check.expect(std::abs(wilson_lower_bound(1, 2, 1.96) - 0.09452) <= 1e-4,
                 "wilson(1,2,1.96) off");
    check.expect(std::abs(klucb_score(0, 1, std::exp(1.0)) - 0.63212) <= 1e-5,
                 "klucb(0,1,ln t=1) off");
    check.expect(std::abs(ucb_score(1, 2, 4.0, 2.0) - 1.67741) <= 1e-5, "ucb(1,2,4,c=2) off");
    return check;
}

std::vector<std::vector<double>> random_matrix(SplitMix64& rng, int rows, int cols,
                                               double density) {
    std::vector<std::vector<double>> m(rows, std::vector<double>(cols, 0.0));
    for (auto& row : m) {
        for (auto& cell : row) {
            if (rng.next_double() < density) cell = 1.0;
        }
    }
    return m;
}

EncodedDataset dataset_from_dense(const std::vector<std::vector<double>>& m) {
    EncodedDataset data;
    data.n_queries = static_cast<std::int32_t>(m.size());
    data.n_items = static_cast<std::int32_t>(m[0].size());
    std::int64_t t = 0;
    for (std::size_t q = 0; q < m.size(); ++q) {
        for (std::size_t i = 0; i < m[q].size(); ++i) {
            if (m[q][i] != 0.0) {
                data.log.push_back(static_cast<std::int32_t>(q), static_cast<std::int32_t>(i),
                                   ++t, 1.0);
            }
        }
    }
    return data;
}

Check criterion_slim_kkt() {
    Check check;
    SplitMix64 rng(5005);
    for (int trial = 0; trial < 50 && check.ok; ++trial) {
        const auto m = random_matrix(rng, 20, 15, 0.25 + 0.3 * rng.next_double());
        const double l1 = 0.01 + 0.1 * rng.next_double();
        const double l2 = 0.01 + 0.2 * rng.next_double();

        // constraints hold after every sweep, not only at convergence
        for (std::int32_t sweeps : {1, 2, 3}) {
            Slim partial(Slim::Params{.l1 = l1, .l2 = l2, .max_iters = sweeps, .tol = 1e-300,
                                      .nonnegative = true, .use_ratings = false});
            partial.fit(dataset_from_dense(m));
            for (std::int32_t j = 0; j < 15; ++j) {
                const auto w = partial.dense_column(j);
                check.expect(w[j] == 0.0, "nonzero diagonal mid-run");
                for (double x : w) check.expect(x >= 0.0, "negative weight mid-run");
            }
        }

        Slim model(Slim::Params{.l1 = l1, .l2 = l2, .max_iters = 2000, .tol = 1e-12,
                                .nonnegative = true, .use_ratings = false});
        model.fit(dataset_from_dense(m));

        auto column_of = [&](std::size_t c) {
            std::vector<double> col(m.size());
            for (std::size_t r = 0; r < m.size(); ++r) col[r] = m[r][c];
            return col;
        };
        for (std::size_t j = 0; j < 15; ++j) {
            const auto w = model.dense_column(static_cast<std::int32_t>(j));
            check.expect(w[j] == 0.0, "nonzero diagonal at convergence");
            std::vector<double> residual = column_of(j);
            for (std::size_t k = 0; k < 15; ++k) {
                if (w[k] == 0.0) continue;
                check.expect(w[k] >= 0.0, "negative converged weight");
                for (std::size_t u = 0; u < m.size(); ++u) residual[u] -= m[u][k] * w[k];
            }
            for (std::size_t k = 0; k < 15; ++k) {
                if (k == j) continue;
                double grad = l2 * w[k] + l1;
                const auto a_k = column_of(k);
                for (std::size_t u = 0; u < m.size(); ++u) grad -= a_k[u] * residual[u];
                if (w[k] > 1e-12) {
                    check.expect(std::abs(grad) <= 1e-6, "KKT stationarity violated");
                } else {
                    check.expect(grad >= -1e-6, "KKT sign condition violated");
                }
            }
        }
    }
    return check;
}

Check criterion_als() {
    Check check;
    SplitMix64 rng(6006);
    for (int trial = 0; trial < 20 && check.ok; ++trial) {
        const auto m = random_matrix(rng, 12 + static_cast<int>(rng.next_below(10)),
                                     8 + static_cast<int>(rng.next_below(10)),
                                     0.2 + 0.4 * rng.next_double());
        Als::Params params{.rank = 2 + static_cast<std::int32_t>(rng.next_below(4)),
                           .alpha = 5.0 + 30.0 * rng.next_double(),
                           .lambda = 0.05 + rng.next_double(),
                           .iterations = 10,
                           .seed = rng.next_u64(),
                           .use_ratings = false};
        Als model(params);
        model.fit(dataset_from_dense(m));
        const auto& trace = model.objective_trace();
        check.expect(trace.size() == 11, "expected 11 objective samples");
        for (std::size_t t = 1; t < trace.size(); ++t) {
            check.expect(trace[t] <= trace[t - 1] + 1e-9 * std::max(1.0, std::abs(trace[t - 1])),
                         "objective increased at iteration " + std::to_string(t));
        }

        Als again(params);
        again.fit(dataset_from_dense(m));
        const bool identical =
            again.user_factors().size() == model.user_factors().size() &&
            std::memcmp(again.user_factors().data(), model.user_factors().data(),
                        model.user_factors().size() * sizeof(double)) == 0 &&
            std::memcmp(again.item_factors().data(), model.item_factors().data(),
                        model.item_factors().size() * sizeof(double)) == 0;
        check.expect(identical, "same seed did not reproduce factors bit-for-bit");
    }
    return check;
}

int run_command(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

Check criterion_end_to_end(double* pipeline_seconds) {
    Check check;
    const fs::path dir =
        fs::temp_directory_path() / ("recsmith_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);

    const std::string data_csv = (dir / "interactions.csv").string();
    const int gen = run_command(std::string(RECSMITH_SYNTH_BIN) + " --out " + data_csv +
                                " --users 6040 --items 3706 --rows 1000209 --seed 42 2>" +
                                (dir / "synth.log").string());
    check.expect(gen == 0, "synthetic data generation failed");
    if (!check.ok) return check;

    nlohmann::json config;
    config["data"] = {{"path", data_csv},
                      {"columns",
                       {{"query_id", "user_id"},
                        {"item_id", "item_id"},
                        {"timestamp", "timestamp"},
                        {"rating", "rating"}}}};
    config["split"] = {{"strategy", "last_n"}, {"n", 1}, {"unit", "interactions"},
                       {"drop_cold_users", true}, {"drop_cold_items", true}};
    config["model"] = nlohmann::json::array(
        {{{"name", "pop_rec"}}, {{"name", "item_knn"}, {"num_neighbors", 100}}});
    config["predict"] = {{"k", 10}, {"filter_seen", true}};
    config["metrics"] = nlohmann::json::array({"ndcg@10", "map@10", "recall@10"});
    config["output"] = {{"recs_path", (dir / "recs.csv").string()},
                        {"report_path", (dir / "report").string()},
                        {"train_path", (dir / "train.csv").string()},
                        {"test_path", (dir / "test.csv").string()},
                        {"model_path", (dir / "model.bin").string()}};
    config["seed"] = 42;
    std::ofstream((dir / "config.json").string()) << config.dump(2);

    const auto start = std::chrono::steady_clock::now();
    const int run1 = run_command(std::string(RECSMITH_BIN) + " run --config " +
                                 (dir / "config.json").string() + " >" +
                                 (dir / "run1.log").string() + " 2>&1");
    *pipeline_seconds = seconds_since(start);
    check.expect(run1 == 0, "pipeline run failed");
    check.expect(*pipeline_seconds < 300.0, "pipeline exceeded 5 minutes");
    if (!check.ok) return check;

    nlohmann::json report;
    std::ifstream((dir / "report.json").string()) >> report;
    for (const char* key : {"ndcg@10", "map@10", "recall@10"}) {
        check.expect(report["runs"]["pop_rec"].contains(key),
                     std::string("report lacks pop_rec ") + key);
        check.expect(report["runs"]["item_knn"].contains(key),
                     std::string("report lacks item_knn ") + key);
    }
    const double knn_ndcg = report["runs"]["item_knn"]["ndcg@10"].get<double>();
    const double pop_ndcg = report["runs"]["pop_rec"]["ndcg@10"].get<double>();
    check.expect(knn_ndcg > pop_ndcg, "item_knn ndcg@10 (" + std::to_string(knn_ndcg) +
                                          ") does not exceed pop_rec (" +
                                          std::to_string(pop_ndcg) + ")");

    // identical seeds, byte-identical artifacts
    const std::string recs_pop = slurp(dir / "recs.pop_rec.csv");
    const std::string recs_knn = slurp(dir / "recs.item_knn.csv");
    const std::string report_text = slurp(dir / "report.json");
    const int run2 = run_command(std::string(RECSMITH_BIN) + " run --config " +
                                 (dir / "config.json").string() + " >" +
                                 (dir / "run2.log").string() + " 2>&1");
    check.expect(run2 == 0, "second pipeline run failed");
    check.expect(slurp(dir / "recs.pop_rec.csv") == recs_pop,
                 "pop_rec recommendations not byte-identical");
    check.expect(slurp(dir / "recs.item_knn.csv") == recs_knn,
                 "item_knn recommendations not byte-identical");
    check.expect(slurp(dir / "report.json") == report_text, "report not byte-identical");

    if (check.ok) fs::remove_all(dir);
    return check;
}

Check criterion_bandit_statistics() {
    Check check;
    SplitMix64 rng(8008);
    double sum = 0.0;
    for (int t = 0; t < 10000; ++t) sum += thompson_sample(1, 1, rng);
    const double mean = sum / 10000.0;
    check.expect(std::abs(mean - 0.5) <= 0.02,
                 "thompson Beta(2,2) mean " + std::to_string(mean) + " outside 0.5 +/- 0.02");

    // an unexplored item must take rank 1 under UCB
    EncodedDataset data;
    data.n_queries = 3;
    data.n_items = 4;
    std::int64_t t = 0;
    for (std::int32_t q = 0; q < 3; ++q) {
        data.log.push_back(q, 0, ++t, 1.0);
        data.log.push_back(q, 1, ++t, q == 0 ? 1.0 : 0.0);
        if (q > 0) data.log.push_back(q, 3, ++t, 1.0);
    }
    // item 2 unexplored
    UcbRec model;
    model.fit(data);
    const auto recs = model.predict(std::vector<std::int32_t>{0, 1, 2}, 4, false);
    for (const auto& list : recs.entries) {
        check.expect(!list.empty() && list[0].item == 2,
                     "unexplored item not at rank 1 under UCB");
        check.expect(std::isinf(list[0].score), "unexplored item lacks the +inf sentinel");
    }
    return check;
}

class OracleModel final : public Recommender {
public:
    explicit OracleModel(bool good) : good_(good) {}
    std::string name() const override { return good_ ? "good" : "bad"; }

protected:
    void do_fit(const EncodedDataset&) override {}
    std::vector<ScoredItem> score_query(std::int32_t query) const override {
        if (good_) return {{query % 4, 1.0}};
        return {{19, 1.0}};
    }

private:
    bool good_;
};

Check criterion_tuning() {
    Check check;
    EncodedDataset train;
    train.n_queries = 8;
    train.n_items = 20;
    EncodedLog valid;
    std::int64_t t = 0;
    for (std::int32_t q = 0; q < 8; ++q) {
        train.log.push_back(q, 10, ++t, 1.0);
        valid.push_back(q, q % 4, ++t, 1.0);
    }
    SearchSpace space;
    Dimension dim;
    dim.name = "quality";
    dim.kind = Dimension::Kind::Categorical;
    dim.choices = {ParamValue{std::string("good")}, ParamValue{std::string("bad")}};
    space.dimensions.push_back(dim);
    const ModelFactory factory = [](const Params& params) -> std::unique_ptr<Recommender> {
        return std::make_unique<OracleModel>(std::get<std::string>(params.at("quality")) ==
                                             "good");
    };

    const auto full = optimize(factory, space, 8, train, valid, "ndcg", 5, 31);
    check.expect(std::get<std::string>(full.best.params.at("quality")) == "good",
                 "budget-8 search missed the dominant choice");

    const auto half = optimize(factory, space, 4, train, valid, "ndcg", 5, 31);
    check.expect(half.trials.size() == 4 && full.trials.size() == 8, "budget not respected");
    for (std::size_t i = 0; i < half.trials.size(); ++i) {
        check.expect(half.trials[i].params == full.trials[i].params,
                     "trials 1..4 are not a prefix of trials 1..8");
    }
    check.expect(full.best.metric_value >= half.best.metric_value,
                 "doubling the budget worsened the best");
    return check;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* label;
        double limit_seconds;  // 0 = no limit
        std::function<Check()> body;
    };

    double pipeline_seconds = 0.0;
    const std::vector<Criterion> criteria = {
        {1, "metric oracle suite (1000 random instances, 1e-12)", 10.0,
         criterion_metric_oracles},
        {2, "exhaustive micro-enumeration (5 items, rankings <= 4, exact)", 30.0,
         criterion_exhaustive_enumeration},
        {3, "split invariants (200 logs x 5 strategies)", 30.0, criterion_split_invariants},
        {4, "closed-form checks (wilson / klucb / ucb)", 0.0, criterion_closed_forms},
        {5, "slim KKT fixpoints (50 random 20x15 matrices, 1e-6)", 60.0, criterion_slim_kkt},
        {6, "als monotone objective + bit-for-bit seeds (20 matrices)", 60.0, criterion_als},
        {7, "end-to-end demo-scale pipeline (leave-one-out, pop_rec vs item_knn)", 0.0,
         [&]() { return criterion_end_to_end(&pipeline_seconds); }},
        {8, "bandit statistics (thompson mean, ucb sentinel)", 0.0,
         criterion_bandit_statistics},
        {9, "tuning dominance fixture + prefix property", 0.0, criterion_tuning},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Check check = criterion.body();
        const double elapsed = seconds_since(start);
        if (criterion.limit_seconds > 0.0 && elapsed >= criterion.limit_seconds) {
            check.fail("runtime " + std::to_string(elapsed) + "s exceeds " +
                       std::to_string(criterion.limit_seconds) + "s");
        }
        if (check.ok) {
            std::printf("[PASS] %d. %s (%.2fs)\n", criterion.id, criterion.label, elapsed);
        } else {
            std::printf("[FAIL] %d. %s (%.2fs): %s\n", criterion.id, criterion.label, elapsed,
                        check.detail.c_str());
            ++failures;
        }
        std::fflush(stdout);
    }
    return failures;
}
