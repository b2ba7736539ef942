#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "recsmith/csv.hpp"
#include "recsmith/dataset.hpp"
#include "recsmith/error.hpp"

namespace fs = std::filesystem;

namespace {

struct Workspace {
    fs::path dir;

    Workspace() {
        dir = fs::temp_directory_path() /
              ("recsmith_cli_" + std::to_string(::getpid()) + "_" +
               std::to_string(counter()++));
        fs::create_directories(dir);
    }
    ~Workspace() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }

    static int& counter() {
        static int n = 0;
        return n;
    }

    std::string path(const std::string& name) const { return (dir / name).string(); }

    void write(const std::string& name, const std::string& content) const {
        std::ofstream out(path(name));
        out << content;
    }

    std::string read(const std::string& name) const {
        std::ifstream in(path(name));
        std::stringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(RECSMITH_BIN) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

// 3 users x 4 items, each user's last event is their held-out item
const char* kFixtureCsv =
    "user_id,item_id,timestamp,rating\n"
    "u1,a,1,5\n"
    "u1,b,2,4\n"
    "u1,c,3,4\n"
    "u1,d,4,5\n"
    "u2,b,5,3\n"
    "u2,c,6,5\n"
    "u2,d,7,4\n"
    "u2,a,8,5\n"
    "u3,c,9,4\n"
    "u3,d,10,5\n"
    "u3,a,11,3\n"
    "u3,b,12,4\n";

std::string base_config(const Workspace& ws, const std::string& model_json,
                        const std::string& metrics = "\"ndcg@2\",\"precision@2\"") {
    return std::string("{\n") +
           "  \"data\": {\"path\": \"" + ws.path("data.csv") + "\", \"columns\": " +
           "{\"query_id\": \"user_id\", \"item_id\": \"item_id\", \"timestamp\": " +
           "\"timestamp\", \"rating\": \"rating\"}},\n" +
           "  \"split\": {\"strategy\": \"last_n\", \"n\": 1, \"unit\": \"interactions\"},\n" +
           "  \"model\": " + model_json + ",\n" +
           "  \"predict\": {\"k\": 2, \"filter_seen\": true},\n" +
           "  \"metrics\": [" + metrics + "],\n" +
           "  \"output\": {\"recs_path\": \"" + ws.path("recs.csv") + "\", \"report_path\": \"" +
           ws.path("report") + "\", \"train_path\": \"" + ws.path("train.csv") +
           "\", \"test_path\": \"" + ws.path("test.csv") + "\", \"model_path\": \"" +
           ws.path("model.bin") + "\"},\n" +
           "  \"seed\": 7\n}\n";
}

std::size_t count_lines(const std::string& text) {
    std::size_t lines = 0;
    for (char c : text) lines += c == '\n';
    return lines;
}

}  // namespace

TEST_CASE("split writes two CSVs whose union is the input") {
    Workspace ws;
    ws.write("data.csv", kFixtureCsv);
    ws.write("config.json", base_config(ws, "{\"name\": \"pop_rec\"}"));
    REQUIRE(run_cli("split --config " + ws.path("config.json")) == 0);

    const std::string train = ws.read("train.csv");
    const std::string test = ws.read("test.csv");
    CHECK(count_lines(train) == 10);  // header + 9 rows
    CHECK(count_lines(test) == 4);
    // every input row lands on exactly one side
    for (const std::string row :
         {"u1,a,1,5", "u1,b,2,4", "u1,c,3,4", "u1,d,4,5", "u2,b,5,3", "u2,c,6,5", "u2,d,7,4",
          "u2,a,8,5", "u3,c,9,4", "u3,d,10,5", "u3,a,11,3", "u3,b,12,4"}) {
        const bool in_train = train.find(row) != std::string::npos;
        const bool in_test = test.find(row) != std::string::npos;
        CHECK(in_train != in_test);
    }
    // leave-one-out: the last event of each user is in test
    CHECK(test.find("u1,d,4,5") != std::string::npos);
    CHECK(test.find("u2,a,8,5") != std::string::npos);
    CHECK(test.find("u3,b,12,4") != std::string::npos);
}

TEST_CASE("evaluate reproduces hand-computed metric values") {
    Workspace ws;
    ws.write("train.csv",
             "user_id,item_id,timestamp,rating\n"
             "u1,x,1,1\n"
             "u2,x,2,1\n");
    ws.write("test.csv",
             "user_id,item_id,timestamp,rating\n"
             "u1,a,3,1\n"
             "u2,b,4,1\n");
    // u1: hit at rank 2 -> ndcg@2 = 1/log2(3), precision 0.5
    // u2: no hit -> 0
    ws.write("recs.csv",
             "query_id,item_id,rank,score\n"
             "u1,z,1,0.9\n"
             "u1,a,2,0.8\n"
             "u2,z,1,0.9\n"
             "u2,y,2,0.8\n");
    ws.write("data.csv", kFixtureCsv);
    ws.write("config.json", base_config(ws, "{\"name\": \"pop_rec\"}"));

    REQUIRE(run_cli("evaluate --config " + ws.path("config.json") + " --recs " + ws.path("recs.csv") +
                    " --test " + ws.path("test.csv") + " --train " + ws.path("train.csv") +
                    " --run-name handmade") == 0);
    const std::string report = ws.read("report.json");
    CHECK(report.find("handmade") != std::string::npos);
    // ndcg@2 mean over two users: (1/log2(3)) / 2
    CHECK(report.find("0.3154648767857287") != std::string::npos);
    CHECK(report.find("\"precision@2\": 0.25") != std::string::npos);
}

TEST_CASE("predict before fit reports an unfitted model (exit 4)") {
    Workspace ws;
    ws.write("data.csv", kFixtureCsv);
    ws.write("config.json", base_config(ws, "{\"name\": \"pop_rec\"}"));
    REQUIRE(run_cli("split --config " + ws.path("config.json")) == 0);
    CHECK(run_cli("predict --config " + ws.path("config.json")) == 4);
}

TEST_CASE("unknown model name fails config validation with no artifacts") {
    Workspace ws;
    ws.write("data.csv", kFixtureCsv);
    ws.write("config.json", base_config(ws, "{\"name\": \"neural_magic\"}"));
    CHECK(run_cli("run --config " + ws.path("config.json")) == 2);
    CHECK(!fs::exists(ws.path("recs.csv")));
    CHECK(!fs::exists(ws.path("report.json")));
    CHECK(!fs::exists(ws.path("train.csv")));
}

TEST_CASE("malformed config and missing data map to exit codes 2 and 3") {
    Workspace ws;
    ws.write("config.json", "{ not json");
    CHECK(run_cli("run --config " + ws.path("config.json")) == 2);

    ws.write("config.json", base_config(ws, "{\"name\": \"pop_rec\"}"));
    CHECK(run_cli("run --config " + ws.path("config.json")) == 3);  // data.csv missing
}

TEST_CASE("run is deterministic and composes from its stages") {
    Workspace ws;
    ws.write("data.csv", kFixtureCsv);
    ws.write("config.json", base_config(ws, "{\"name\": \"pop_rec\"}"));

    REQUIRE(run_cli("run --config " + ws.path("config.json")) == 0);
    const std::string recs_once = ws.read("recs.csv");
    const std::string report_once = ws.read("report.json");
    CHECK(!recs_once.empty());

    SUBCASE("second run is byte-identical") {
        REQUIRE(run_cli("run --config " + ws.path("config.json")) == 0);
        CHECK(ws.read("recs.csv") == recs_once);
        CHECK(ws.read("report.json") == report_once);
    }
    SUBCASE("chained subcommands produce the same bytes") {
        fs::remove(ws.path("recs.csv"));
        fs::remove(ws.path("report.json"));
        REQUIRE(run_cli("split --config " + ws.path("config.json")) == 0);
        REQUIRE(run_cli("fit --config " + ws.path("config.json")) == 0);
        REQUIRE(run_cli("predict --config " + ws.path("config.json")) == 0);
        REQUIRE(run_cli("evaluate --config " + ws.path("config.json") + " --run-name pop_rec") ==
                0);
        CHECK(ws.read("recs.csv") == recs_once);
        CHECK(ws.read("report.json") == report_once);
    }
}

TEST_CASE("metrics flag overrides the config list") {
    Workspace ws;
    ws.write("data.csv", kFixtureCsv);
    ws.write("config.json", base_config(ws, "{\"name\": \"pop_rec\"}"));
    REQUIRE(run_cli("run --config " + ws.path("config.json") + " --metrics hitrate@1") == 0);
    const std::string report = ws.read("report.json");
    CHECK(report.find("hitrate@1") != std::string::npos);
    CHECK(report.find("ndcg@2") == std::string::npos);
}

TEST_CASE("multi-model run writes one artifact set per model and a two-row table") {
    Workspace ws;
    ws.write("data.csv", kFixtureCsv);
    std::string config = base_config(ws, "[{\"name\": \"pop_rec\"}, {\"name\": \"item_knn\", "
                                         "\"num_neighbors\": 3}]");
    // exercise the filter chain too: both filters keep every fixture row
    config.insert(config.rfind("\n}"),
                  ",\n  \"filters\": [{\"kind\": \"min_count\", \"entity\": \"query\", "
                  "\"threshold\": 2}, {\"kind\": \"time_period\", \"start\": "
                  "\"1970-01-01\"}]");
    ws.write("config.json", config);
    REQUIRE(run_cli("run --config " + ws.path("config.json")) == 0);
    CHECK(fs::exists(ws.path("recs.pop_rec.csv")));
    CHECK(fs::exists(ws.path("recs.item_knn.csv")));
    const std::string csv = ws.read("report.csv");
    CHECK(csv.find("pop_rec") != std::string::npos);
    CHECK(csv.find("item_knn") != std::string::npos);
}

TEST_CASE("optimize subcommand writes a trials file with the best parameters") {
    Workspace ws;
    // clustered data so num_neighbors matters but every trial succeeds
    std::stringstream data;
    data << "user_id,item_id,timestamp,rating\n";
    for (int u = 0; u < 12; ++u) {
        for (int e = 0; e < 6; ++e) {
            data << "u" << u << ",i" << (u % 3) * 4 + (e % 4) << "," << u * 100 + e << ",1\n";
        }
    }
    ws.write("data.csv", data.str());
    std::string config = base_config(ws, "{\"name\": \"item_knn\"}");
    config.insert(config.rfind("\n}"), ",\n  \"search_space\": {\"num_neighbors\": "
                                       "{\"kind\": \"int_uniform\", \"low\": 1, \"high\": 8}},\n"
                                       "  \"optimize\": {\"budget\": 4, \"metric\": \"ndcg@2\"}");
    ws.write("config.json", config);
    REQUIRE(run_cli("split --config " + ws.path("config.json")) == 0);
    REQUIRE(run_cli("optimize --config " + ws.path("config.json")) == 0);
    const std::string trials = ws.read("trials.json");
    CHECK(trials.find("\"best_index\"") != std::string::npos);
    CHECK(trials.find("num_neighbors") != std::string::npos);
}

TEST_CASE("large-file ingest cardinalities match a hash-set oracle over the raw csv") {
    Workspace ws;
    const std::string synth = std::string(RECSMITH_SYNTH_BIN) + " --out " + ws.path("big.csv") +
                              " --users 400 --items 250 --rows 20000 --seed 3 2>/dev/null";
    REQUIRE(WEXITSTATUS(std::system(synth.c_str())) == 0);

    // independent oracle: split lines on commas, hash-set the id columns
    std::ifstream in(ws.path("big.csv"));
    std::string line;
    std::getline(in, line);  // header
    std::set<std::string> users, items;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        users.insert(line.substr(0, c1));
        items.insert(line.substr(c1 + 1, c2 - c1 - 1));
        ++rows;
    }

    recsmith::ColumnMap columns;
    columns.query = "user_id";
    columns.item = "item_id";
    const auto log = recsmith::read_interactions_csv(ws.path("big.csv"), columns);
    const auto dataset = recsmith::build_dataset(log);
    CHECK(log.size() == rows);
    CHECK(dataset.n_queries() == static_cast<std::int64_t>(users.size()));
    CHECK(dataset.n_items() == static_cast<std::int64_t>(items.size()));
}

TEST_CASE("seed flag overrides the config seed") {
    Workspace ws;
    ws.write("data.csv", kFixtureCsv);
    std::string config = base_config(ws, "{\"name\": \"pop_rec\"}");
    config.replace(config.find("\"strategy\": \"last_n\", \"n\": 1, \"unit\": \"interactions\""),
                   std::string("\"strategy\": \"last_n\", \"n\": 1, \"unit\": \"interactions\"")
                       .size(),
                   "\"strategy\": \"random\", \"test_ratio\": 0.4");
    ws.write("config.json", config);

    REQUIRE(run_cli("split --config " + ws.path("config.json") + " --seed 1") == 0);
    const std::string train1 = ws.read("train.csv");
    REQUIRE(run_cli("split --config " + ws.path("config.json") + " --seed 1") == 0);
    CHECK(ws.read("train.csv") == train1);
    REQUIRE(run_cli("split --config " + ws.path("config.json") + " --seed 2") == 0);
    CHECK(ws.read("train.csv") != train1);
}

TEST_CASE("worker count does not change pipeline output") {
    Workspace ws;
    ws.write("data.csv", kFixtureCsv);
    ws.write("config.json",
             base_config(ws, "{\"name\": \"item_knn\", \"num_neighbors\": 4}"));
    REQUIRE(run_cli("run --config " + ws.path("config.json") + " --threads 1") == 0);
    const std::string recs = ws.read("recs.csv");
    REQUIRE(run_cli("run --config " + ws.path("config.json") + " --threads 4") == 0);
    CHECK(ws.read("recs.csv") == recs);
}

TEST_CASE("timestamps parse as epoch or UTC dates") {
    CHECK(recsmith::parse_timestamp("0") == 0);
    CHECK(recsmith::parse_timestamp("978307200") == 978307200);
    CHECK(recsmith::parse_timestamp("1970-01-02") == 86400);
    CHECK(recsmith::parse_timestamp("2000-01-01 00:00:00") == 946684800);
    CHECK(recsmith::parse_timestamp("2000-01-01 01:02:03") == 946684800 + 3723);
    CHECK_THROWS_AS(recsmith::parse_timestamp("01/02/2000"), recsmith::Error);
    CHECK_THROWS_AS(recsmith::parse_timestamp("2000-13-01"), recsmith::Error);
}

TEST_CASE("optimize flags override the config budget and metric") {
    Workspace ws;
    ws.write("data.csv", kFixtureCsv);
    std::string config = base_config(ws, "{\"name\": \"item_knn\"}");
    config.insert(config.rfind("\n}"),
                  ",\n  \"search_space\": {\"num_neighbors\": {\"kind\": \"int_uniform\", "
                  "\"low\": 1, \"high\": 4}},\n  \"optimize\": {\"budget\": 2, \"metric\": "
                  "\"ndcg@2\"}");
    ws.write("config.json", config);
    REQUIRE(run_cli("split --config " + ws.path("config.json")) == 0);
    REQUIRE(run_cli("optimize --config " + ws.path("config.json") +
                    " --budget 5 --metric hitrate@1") == 0);
    const std::string trials = ws.read("trials.json");
    CHECK(trials.find("hitrate@1") != std::string::npos);
    CHECK(count_lines(trials) > 0);
    // 5 trials requested
    std::size_t n = 0;
    for (std::size_t pos = trials.find("\"index\""); pos != std::string::npos;
         pos = trials.find("\"index\"", pos + 1)) {
        ++n;
    }
    CHECK(n == 5);
}

TEST_CASE("multi-character delimiters split verbatim") {
    Workspace ws;
    ws.write("ml.dat",
             "user_id::item_id::timestamp::rating\n"
             "1::1193::978300760::5\n"
             "1::661::978302109::3\n"
             "2::1193::978298413::4\n");
    recsmith::ColumnMap columns;
    columns.query = "user_id";
    columns.item = "item_id";
    const auto log = recsmith::read_interactions_csv(ws.path("ml.dat"), columns, "::");
    REQUIRE(log.size() == 3);
    CHECK(log.queries == std::vector<std::string>{"1", "1", "2"});
    CHECK(log.items[0] == "1193");
    CHECK(log.timestamps[1] == 978302109);
    CHECK(log.ratings[2] == 4.0);

    SUBCASE("quoted fields survive a comma delimiter round trip") {
        recsmith::InteractionLog tricky;
        tricky.push_back("user, the \"first\"", "item,2", 5, 1.5);
        recsmith::write_interactions_csv(ws.path("tricky.csv"), tricky);
        const auto back = recsmith::read_interactions_csv(ws.path("tricky.csv"));
        REQUIRE(back.size() == 1);
        CHECK(back.queries[0] == "user, the \"first\"");
        CHECK(back.items[0] == "item,2");
        CHECK(back.ratings[0] == 1.5);
    }
}
