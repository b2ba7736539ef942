#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <unordered_set>

#include "recsmith/error.hpp"
#include "recsmith/rng.hpp"
#include "recsmith/splitters.hpp"

using namespace recsmith;

namespace {

using Row = std::tuple<std::string, std::string, std::int64_t, double>;

std::vector<Row> rows_of(const InteractionLog& log) {
    std::vector<Row> rows;
    for (std::size_t r = 0; r < log.size(); ++r) {
        rows.emplace_back(log.queries[r], log.items[r], log.timestamps[r], log.ratings[r]);
    }
    return rows;
}

InteractionLog random_log(std::uint64_t seed, std::size_t rows, int queries, int items) {
    SplitMix64 rng(seed);
    InteractionLog log;
    for (std::size_t r = 0; r < rows; ++r) {
        log.push_back("u" + std::to_string(rng.next_below(queries)),
                      "i" + std::to_string(rng.next_below(items)),
                      static_cast<std::int64_t>(rng.next_below(10000)),
                      static_cast<double>(rng.next_below(5)) + 1.0);
    }
    return log;
}

void check_partition(const InteractionLog& input, const SplitResult<std::string>& result) {
    auto all = rows_of(result.train);
    const auto test = rows_of(result.test);
    all.insert(all.end(), test.begin(), test.end());
    std::sort(all.begin(), all.end());
    auto expected = rows_of(input);
    std::sort(expected.begin(), expected.end());
    CHECK(all == expected);
}

}  // namespace

TEST_CASE("random_split") {
    const InteractionLog log = random_log(1, 10000, 50, 40);

    SUBCASE("same seed twice gives an identical result") {
        const auto a = random_split(log, 0.2, 99);
        const auto b = random_split(log, 0.2, 99);
        CHECK(a.train == b.train);
        CHECK(a.test == b.test);
    }
    SUBCASE("test fraction concentrates around the ratio") {
        const auto result = random_split(log, 0.2, 7);
        const double fraction = static_cast<double>(result.test.size()) / 10000.0;
        CHECK(fraction == doctest::Approx(0.2).epsilon(0.1));
        CHECK(std::abs(fraction - 0.2) <= 0.02);
        check_partition(log, result);
    }
    SUBCASE("drop_cold_items leaves only train items in test") {
        const auto result = random_split(log, 0.3, 11, false, true);
        std::unordered_set<std::string> train_items(result.train.items.begin(),
                                                    result.train.items.end());
        for (const auto& item : result.test.items) CHECK(train_items.count(item) == 1);
    }
    SUBCASE("ratio bounds") {
        try {
            random_split(log, 1.0, 3);
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidRatio);
        }
        CHECK_THROWS_AS(random_split(log, 0.0, 3), Error);
    }
}

TEST_CASE("cold_user_random_split") {
    const InteractionLog log = random_log(2, 400, 10, 10);

    const auto result = cold_user_random_split(log, 0.3, 5);
    std::unordered_set<std::string> train_users(result.train.queries.begin(),
                                                result.train.queries.end());
    std::unordered_set<std::string> test_users(result.test.queries.begin(),
                                               result.test.queries.end());

    SUBCASE("exactly ceil(0.3 * 10) = 3 users in test") {
        CHECK(test_users.size() == 3);
        CHECK(train_users.size() == 7);
    }
    SUBCASE("no user appears on both sides") {
        for (const auto& u : test_users) CHECK(train_users.count(u) == 0);
        check_partition(log, result);
    }
    SUBCASE("same seed picks the same users, another seed may differ") {
        const auto again = cold_user_random_split(log, 0.3, 5);
        CHECK(rows_of(again.test) == rows_of(result.test));
    }
}

TEST_CASE("time_split") {
    InteractionLog log;
    for (int t = 1; t <= 4; ++t) {
        log.push_back("u" + std::to_string(t % 2), "i" + std::to_string(t), t, 1.0);
    }

    SUBCASE("explicit threshold: boundary goes to test") {
        const auto result = time_split(log, std::int64_t{3}, std::nullopt);
        CHECK(result.train.timestamps == std::vector<std::int64_t>{1, 2});
        CHECK(result.test.timestamps == std::vector<std::int64_t>{3, 4});
    }
    SUBCASE("quantile 0.5 resolves to timestamp 3") {
        const auto result = time_split(log, std::nullopt, 0.5);
        CHECK(result.train.timestamps == std::vector<std::int64_t>{1, 2});
        CHECK(result.test.timestamps == std::vector<std::int64_t>{3, 4});
    }
    SUBCASE("quantile resolution matches the sort-and-scan oracle on random logs") {
        const InteractionLog big = random_log(3, 500, 10, 10);
        for (double q : {0.1, 0.25, 0.5, 0.9}) {
            const auto result = time_split(big, std::nullopt, q);

            // oracle: smallest observed T with |{t < T}| >= q * n
            std::vector<std::int64_t> sorted = big.timestamps;
            std::sort(sorted.begin(), sorted.end());
            std::int64_t resolved = std::numeric_limits<std::int64_t>::max();
            for (std::size_t i = 0; i < sorted.size(); ++i) {
                const std::size_t before =
                    std::lower_bound(sorted.begin(), sorted.end(), sorted[i]) - sorted.begin();
                if (static_cast<double>(before) >= q * static_cast<double>(sorted.size())) {
                    resolved = sorted[i];
                    break;
                }
            }
            for (std::int64_t t : result.train.timestamps) CHECK(t < resolved);
            for (std::int64_t t : result.test.timestamps) CHECK(t >= resolved);
            check_partition(big, result);
        }
    }
    SUBCASE("train max below test min when no boundary ties") {
        const auto result = time_split(log, std::int64_t{3}, std::nullopt);
        CHECK(*std::max_element(result.train.timestamps.begin(), result.train.timestamps.end()) <
              *std::min_element(result.test.timestamps.begin(), result.test.timestamps.end()));
    }
    SUBCASE("exactly one of threshold/quantile") {
        CHECK_THROWS_AS(time_split(log, std::int64_t{3}, 0.5), Error);
        CHECK_THROWS_AS(time_split(log, std::nullopt, std::nullopt), Error);
    }
}

TEST_CASE("last_n_split") {
    SUBCASE("leave-one-out") {
        InteractionLog log;
        log.push_back("u", "a", 1, 1.0);
        log.push_back("u", "b", 2, 1.0);
        log.push_back("u", "c", 3, 1.0);
        const auto result = last_n_split(log, 1, LastNUnit::Interactions);
        CHECK(result.train.timestamps == std::vector<std::int64_t>{1, 2});
        CHECK(result.test.timestamps == std::vector<std::int64_t>{3});
    }
    SUBCASE("single-interaction user goes entirely to test; drop_cold_users removes it") {
        InteractionLog log;
        log.push_back("u", "a", 1, 1.0);
        log.push_back("u", "b", 2, 1.0);
        log.push_back("lonely", "c", 5, 1.0);
        const auto keep = last_n_split(log, 1, LastNUnit::Interactions);
        CHECK(keep.test.size() == 2);  // u's last row and lonely's only row

        const auto dropped = last_n_split(log, 1, LastNUnit::Interactions, true, false);
        for (const auto& q : dropped.test.queries) CHECK(q != "lonely");
        CHECK(dropped.test.size() == 1);
    }
    SUBCASE("per-user test sets equal the stable-sort-and-slice oracle") {
        const InteractionLog big = random_log(4, 300, 12, 15);
        for (std::int64_t n : {1, 2, 5}) {
            const auto result = last_n_split(big, n, LastNUnit::Interactions);

            std::map<std::string, std::vector<std::size_t>> groups;
            for (std::size_t r = 0; r < big.size(); ++r) groups[big.queries[r]].push_back(r);
            std::set<std::size_t> expect_test;
            for (auto& [q, rows] : groups) {
                std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
                    return big.timestamps[a] < big.timestamps[b];
                });
                const std::size_t take =
                    std::min<std::size_t>(rows.size(), static_cast<std::size_t>(n));
                expect_test.insert(rows.end() - take, rows.end());
            }
            CHECK(result.test.size() == expect_test.size());
            // membership check through multiset equality of the partition
            check_partition(big, result);
            // |test_q| = min(n, k) per query
            std::map<std::string, std::int64_t> test_counts;
            for (const auto& q : result.test.queries) ++test_counts[q];
            for (const auto& [q, rows] : groups) {
                CHECK(test_counts[q] ==
                      std::min<std::int64_t>(n, static_cast<std::int64_t>(rows.size())));
            }
        }
    }
    SUBCASE("unit=seconds takes the strict trailing window per user") {
        InteractionLog log;
        log.push_back("u", "a", 100, 1.0);
        log.push_back("u", "b", 150, 1.0);  // 150 > 200 - 50 fails (not strict)
        log.push_back("u", "c", 200, 1.0);
        const auto result = last_n_split(log, 50, LastNUnit::Seconds);
        CHECK(result.test.timestamps == std::vector<std::int64_t>{200});
        CHECK(result.train.timestamps == std::vector<std::int64_t>{100, 150});
    }
}

TEST_CASE("new_users_split") {
    SUBCASE("latest first-seen user lands in test") {
        InteractionLog log;
        for (int u = 1; u <= 4; ++u) {
            log.push_back("u" + std::to_string(u), "i", u, 1.0);
            log.push_back("u" + std::to_string(u), "j", u + 100, 1.0);
        }
        const auto result = new_users_split(log, 0.25);
        const std::unordered_set<std::string> test_users(result.test.queries.begin(),
                                                         result.test.queries.end());
        CHECK(test_users == std::unordered_set<std::string>{"u4"});
    }
    SUBCASE("every test user's first interaction is at or after every train user's") {
        const InteractionLog big = random_log(9, 400, 25, 10);
        const auto result = new_users_split(big, 0.3);

        auto first_seen = [&](const InteractionLog& log) {
            std::map<std::string, std::int64_t> first;
            for (std::size_t r = 0; r < log.size(); ++r) {
                auto [it, added] = first.try_emplace(log.queries[r], log.timestamps[r]);
                if (!added) it->second = std::min(it->second, log.timestamps[r]);
            }
            return first;
        };
        const auto train_first = first_seen(result.train);
        const auto test_first = first_seen(result.test);
        std::int64_t train_latest = std::numeric_limits<std::int64_t>::min();
        for (const auto& [u, t] : train_first) train_latest = std::max(train_latest, t);
        for (const auto& [u, t] : test_first) CHECK(t >= train_latest);
        check_partition(big, result);
    }
    SUBCASE("chosen set equals the sort-by-first-timestamp oracle") {
        // 100 users with distinct first timestamps
        InteractionLog log;
        SplitMix64 rng(123);
        std::vector<std::int64_t> firsts;
        for (int u = 0; u < 100; ++u) {
            const std::int64_t t0 = u * 37 + static_cast<std::int64_t>(rng.next_below(10));
            firsts.push_back(t0);
            log.push_back("u" + std::to_string(u), "a", t0, 1.0);
            log.push_back("u" + std::to_string(u), "b", t0 + 5000, 1.0);
        }
        const auto result = new_users_split(log, 0.2);
        const std::unordered_set<std::string> test_users(result.test.queries.begin(),
                                                         result.test.queries.end());

        std::vector<int> order(100);
        for (int u = 0; u < 100; ++u) order[u] = u;
        std::sort(order.begin(), order.end(), [&](int a, int b) { return firsts[a] > firsts[b]; });
        std::unordered_set<std::string> expected;
        for (int i = 0; i < 20; ++i) expected.insert("u" + std::to_string(order[i]));
        CHECK(test_users == expected);
    }
}

TEST_CASE("apply_drop_cold") {
    InteractionLog train, test;
    train.push_back("u1", "a", 1, 1.0);
    train.push_back("u2", "b", 2, 1.0);
    test.push_back("u1", "zz", 3, 1.0);  // cold item
    test.push_back("u9", "a", 4, 1.0);   // cold user
    test.push_back("u2", "a", 5, 1.0);   // warm

    SUBCASE("cold item rows removed") {
        const auto out = apply_drop_cold(SplitResult<std::string>{train, test}, false, true);
        CHECK(out.test.size() == 2);
        for (const auto& i : out.test.items) CHECK((i == "a" || i == "b"));
        CHECK(out.train == train);
    }
    SUBCASE("both flags false is the identity") {
        const auto out = apply_drop_cold(SplitResult<std::string>{train, test}, false, false);
        CHECK(out.test == test);
    }
    SUBCASE("random split matches the membership oracle") {
        const InteractionLog big = random_log(6, 500, 20, 30);
        const auto base = random_split(big, 0.4, 17);
        const auto out = apply_drop_cold(SplitResult<std::string>{base.train, base.test}, true,
                                         true);
        const std::unordered_set<std::string> train_users(base.train.queries.begin(),
                                                          base.train.queries.end());
        const std::unordered_set<std::string> train_items(base.train.items.begin(),
                                                          base.train.items.end());
        InteractionLog expected;
        for (std::size_t r = 0; r < base.test.size(); ++r) {
            if (train_users.count(base.test.queries[r]) &&
                train_items.count(base.test.items[r])) {
                expected.push_back(base.test.queries[r], base.test.items[r],
                                   base.test.timestamps[r], base.test.ratings[r]);
            }
        }
        CHECK(out.test == expected);
        // subset contracts
        for (const auto& q : out.test.queries) CHECK(train_users.count(q) == 1);
        for (const auto& i : out.test.items) CHECK(train_items.count(i) == 1);
    }
}

TEST_CASE("split dispatch is deterministic bit-for-bit over all strategies") {
    const InteractionLog log = random_log(10, 250, 15, 12);
    std::vector<SplitConfig> configs(5);
    configs[0].strategy = SplitStrategy::Random;
    configs[0].test_ratio = 0.25;
    configs[1].strategy = SplitStrategy::ColdUserRandom;
    configs[1].test_ratio = 0.25;
    configs[2].strategy = SplitStrategy::Time;
    configs[2].time_quantile = 0.7;
    configs[3].strategy = SplitStrategy::LastN;
    configs[3].n = 2;
    configs[4].strategy = SplitStrategy::NewUsers;
    configs[4].test_ratio = 0.25;
    for (auto& config : configs) {
        config.seed = 424242;
        const auto a = split(log, config);
        const auto b = split(log, config);
        CHECK(a.train == b.train);
        CHECK(a.test == b.test);
        check_partition(log, a);
    }
}
