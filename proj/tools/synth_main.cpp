// Generates a synthetic implicit-feedback dataset with MovieLens-like shape:
// users with clustered tastes, popularity-skewed catalogs, per-user
// increasing timestamps and 1-5 ratings. Deterministic for a given seed, so
// pipeline runs over it are reproducible byte for byte.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "recsmith/rng.hpp"

namespace {

struct Options {
    std::string out = "interactions.csv";
    std::int64_t users = 6040;
    std::int64_t items = 3706;
    std::int64_t rows = 1000209;
    std::int64_t clusters = 24;
    double in_cluster = 0.75;
    std::uint64_t seed = 42;
};

// popularity-skewed index in [0, size): quadratic tilt toward low indices
std::int64_t skewed_index(recsmith::SplitMix64& rng, std::int64_t size) {
    const double u = rng.next_double();
    return std::min<std::int64_t>(size - 1, static_cast<std::int64_t>(u * u * size));
}

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    CLI::App app{"recsmith-synth - deterministic synthetic interaction data"};
    app.add_option("--out", opt.out, "output CSV path");
    app.add_option("--users", opt.users, "number of users")->check(CLI::PositiveNumber);
    app.add_option("--items", opt.items, "number of items")->check(CLI::PositiveNumber);
    app.add_option("--rows", opt.rows, "approximate number of interactions");
    app.add_option("--clusters", opt.clusters, "taste clusters")->check(CLI::PositiveNumber);
    app.add_option("--in-cluster", opt.in_cluster, "share of in-cluster interactions");
    app.add_option("--seed", opt.seed, "generator seed");
    CLI11_PARSE(app, argc, argv);

    recsmith::SplitMix64 rng(opt.seed);

    // cluster membership
    std::vector<std::int32_t> user_cluster(opt.users);
    for (auto& c : user_cluster) c = static_cast<std::int32_t>(rng.next_below(opt.clusters));
    std::vector<std::vector<std::int32_t>> cluster_items(opt.clusters);
    for (std::int64_t i = 0; i < opt.items; ++i) {
        cluster_items[rng.next_below(opt.clusters)].push_back(static_cast<std::int32_t>(i));
    }
    for (auto& items : cluster_items) {
        if (items.empty()) items.push_back(0);  // degenerate tiny catalogs
    }

    // per-user activity, heavy-tailed, floor of 20 events like classic
    // ratings datasets; scaled to approximately hit the row target
    std::vector<double> weight(opt.users);
    double total = 0.0;
    for (auto& w : weight) {
        const double u = rng.next_double();
        w = std::pow(1.0 - u, -0.8);  // Pareto-ish tail
        total += w;
    }
    const double base_rows = static_cast<double>(opt.rows) -
                             20.0 * static_cast<double>(opt.users);
    std::vector<std::int64_t> events(opt.users);
    for (std::int64_t u = 0; u < opt.users; ++u) {
        const double extra = base_rows > 0.0 ? base_rows * weight[u] / total : 0.0;
        events[u] = 20 + static_cast<std::int64_t>(extra);
        events[u] = std::min<std::int64_t>(events[u], opt.items);
    }
    // redistribute whatever the per-user cap cut off
    std::int64_t planned = 0;
    for (std::int64_t e : events) planned += e;
    std::int64_t deficit = opt.rows - planned;
    while (deficit > 0) {
        bool progressed = false;
        for (std::int64_t u = 0; u < opt.users && deficit > 0; ++u) {
            if (events[u] < opt.items) {
                ++events[u];
                --deficit;
                progressed = true;
            }
        }
        if (!progressed) break;  // every user already at the catalog cap
    }

    std::ofstream out(opt.out);
    if (!out) {
        std::fprintf(stderr, "recsmith-synth: cannot open '%s' for writing\n", opt.out.c_str());
        return 1;
    }
    out << "user_id,item_id,timestamp,rating\n";

    const std::int64_t epoch0 = 965000000;  // arbitrary fixed origin
    std::int64_t written = 0;
    std::unordered_set<std::int32_t> seen;
    for (std::int64_t u = 0; u < opt.users; ++u) {
        seen.clear();
        // users arrive over roughly two years
        std::int64_t t = epoch0 + static_cast<std::int64_t>(rng.next_below(63072000));
        const auto& own = cluster_items[user_cluster[u]];
        for (std::int64_t e = 0; e < events[u]; ++e) {
            std::int32_t item = -1;
            for (int attempt = 0; attempt < 80; ++attempt) {
                // heavy users saturate their cluster; widen to a uniform
                // draw once skewed sampling keeps colliding
                std::int32_t candidate;
                if (attempt < 20) {
                    const bool inside = rng.next_double() < opt.in_cluster;
                    candidate = inside
                                    ? own[skewed_index(rng, static_cast<std::int64_t>(own.size()))]
                                    : static_cast<std::int32_t>(skewed_index(rng, opt.items));
                } else {
                    candidate = static_cast<std::int32_t>(rng.next_below(opt.items));
                }
                if (!seen.count(candidate)) {
                    item = candidate;
                    break;
                }
            }
            if (item < 0) break;  // user exhausted their reachable catalog
            seen.insert(item);
            t += 60 + static_cast<std::int64_t>(rng.next_below(6 * 86400));
            const double r = rng.next_double();
            const int rating = r < 0.1 ? 2 : r < 0.35 ? 3 : r < 0.75 ? 4 : 5;
            out << u << ',' << item << ',' << t << ',' << rating << '\n';
            ++written;
        }
    }
    out.close();
    std::fprintf(stderr, "recsmith-synth: wrote %lld interactions for %lld users -> %s\n",
                 static_cast<long long>(written), static_cast<long long>(opt.users),
                 opt.out.c_str());
    return 0;
}
