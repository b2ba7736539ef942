#include "recsmith/models/item_knn.hpp"

#include <algorithm>
#include <cmath>

#include "recsmith/error.hpp"
#include "recsmith/parallel.hpp"

namespace recsmith {

ItemKnn::ItemKnn() : ItemKnn(Params{}) {}

ItemKnn::ItemKnn(Params params) : params_(params) {
    if (params_.num_neighbors < 1) {
        raise(ErrorCode::InvalidParameter, "item_knn requires num_neighbors >= 1");
    }
    if (!(params_.shrink >= 0.0)) {
        raise(ErrorCode::InvalidParameter, "item_knn requires shrink >= 0");
    }
}

void ItemKnn::do_fit(const EncodedDataset& data) {
    (void)data;
    const SparseInteractionMatrix by_item = history_.transposed();
    const std::int32_t n_items = n_items_;

    std::vector<double> norms(static_cast<std::size_t>(n_items), 0.0);
    for (std::int32_t i = 0; i < n_items; ++i) {
        double sq = 0.0;
        const auto col = by_item.row(i);
        for (std::size_t k = 0; k < col.size; ++k) sq += col.val[k] * col.val[k];
        norms[i] = std::sqrt(sq);
    }

    // One pass per item column: accumulate <c_i, c_j> for every co-rated j
    // through the user rows, then keep the top-M. Columns are independent,
    // so the loop parallelizes with disjoint writes.
    std::vector<std::vector<Neighbor>> lists(static_cast<std::size_t>(n_items));
    parallel_for(0, static_cast<std::size_t>(n_items), [&](std::size_t item) {
        const std::int32_t i = static_cast<std::int32_t>(item);
        std::vector<double> dot(static_cast<std::size_t>(n_items), 0.0);
        std::vector<char> seen(static_cast<std::size_t>(n_items), 0);
        std::vector<std::int32_t> touched;

        const auto col = by_item.row(i);
        for (std::size_t k = 0; k < col.size; ++k) {
            const std::int32_t user = col.idx[k];
            const double v = col.val[k];
            if (v == 0.0) continue;
            const auto row = history_.row(user);
            for (std::size_t m = 0; m < row.size; ++m) {
                const std::int32_t j = row.idx[m];
                if (j == i) continue;
                if (!seen[j]) {
                    seen[j] = 1;
                    touched.push_back(j);
                }
                dot[j] += v * row.val[m];
            }
        }

        std::vector<Neighbor>& out = lists[item];
        out.reserve(touched.size());
        for (std::int32_t j : touched) {
            if (dot[j] == 0.0) continue;
            const double denom = norms[i] * norms[j] + params_.shrink;
            if (denom <= 0.0) continue;
            out.push_back({j, dot[j] / denom});
        }
        std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
            if (a.weight != b.weight) return a.weight > b.weight;
            return a.item < b.item;
        });
        if (out.size() > static_cast<std::size_t>(params_.num_neighbors)) {
            out.resize(static_cast<std::size_t>(params_.num_neighbors));
        }
    });

    neighbor_ptr_.assign(static_cast<std::size_t>(n_items) + 1, 0);
    std::size_t total = 0;
    for (std::int32_t i = 0; i < n_items; ++i) {
        total += lists[i].size();
        neighbor_ptr_[static_cast<std::size_t>(i) + 1] = static_cast<std::int64_t>(total);
    }
    neighbors_.clear();
    neighbors_.reserve(total);
    for (auto& list : lists) {
        neighbors_.insert(neighbors_.end(), list.begin(), list.end());
    }
}

std::vector<ScoredItem> ItemKnn::score_query(std::int32_t query) const {
    std::vector<ScoredItem> out;
    if (query < 0 || query >= n_queries_) return out;
    const auto row = history_.row(query);
    if (row.size == 0) return out;

    std::vector<double> acc(static_cast<std::size_t>(n_items_), 0.0);
    std::vector<char> seen(static_cast<std::size_t>(n_items_), 0);
    std::vector<std::int32_t> touched;
    for (std::size_t m = 0; m < row.size; ++m) {
        for (const Neighbor& nb : neighbors(row.idx[m])) {
            if (!seen[nb.item]) {
                seen[nb.item] = 1;
                touched.push_back(nb.item);
            }
            acc[nb.item] += nb.weight;
        }
    }
    out.reserve(touched.size());
    for (std::int32_t i : touched) {
        if (acc[i] != 0.0) out.push_back({i, acc[i]});
    }
    return out;
}

}  // namespace recsmith
