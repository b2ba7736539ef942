#include "recsmith/models/slim.hpp"

#include <algorithm>
#include <cmath>

#include "recsmith/error.hpp"
#include "recsmith/parallel.hpp"

namespace recsmith {

Slim::Slim() : Slim(Params{}) {}

Slim::Slim(Params params) : params_(params) {
    if (!(params_.l1 >= 0.0) || !(params_.l2 >= 0.0)) {
        raise(ErrorCode::InvalidParameter, "slim requires l1 >= 0 and l2 >= 0");
    }
    if (params_.max_iters < 1) raise(ErrorCode::InvalidParameter, "slim requires max_iters >= 1");
    if (!(params_.tol > 0.0)) raise(ErrorCode::InvalidParameter, "slim requires tol > 0");
}

void Slim::do_fit(const EncodedDataset& data) {
    (void)data;
    const SparseInteractionMatrix by_item = history_.transposed();
    const std::int32_t n_items = n_items_;

    std::vector<double> col_sq(static_cast<std::size_t>(n_items), 0.0);
    double min_value = 0.0;
    for (std::int32_t i = 0; i < n_items; ++i) {
        const auto col = by_item.row(i);
        double sq = 0.0;
        for (std::size_t k = 0; k < col.size; ++k) {
            sq += col.val[k] * col.val[k];
            min_value = std::min(min_value, col.val[k]);
        }
        col_sq[i] = sq;
    }
    // With nonnegative weights over a nonnegative matrix, items sharing no
    // user with the target can never activate (their gradient stays >= l1),
    // so the coordinate set shrinks to co-occurring items.
    const bool restrict_to_cooccurring = params_.nonnegative && min_value >= 0.0;

    std::vector<std::vector<WeightEntry>> columns(static_cast<std::size_t>(n_items));
    parallel_for(0, static_cast<std::size_t>(n_items), [&](std::size_t target) {
        const std::int32_t j = static_cast<std::int32_t>(target);
        const auto a_j = by_item.row(j);
        if (a_j.size == 0) return;

        // candidate coordinates, ascending item id
        std::vector<std::int32_t> candidates;
        if (restrict_to_cooccurring) {
            std::vector<char> seen(static_cast<std::size_t>(n_items), 0);
            for (std::size_t k = 0; k < a_j.size; ++k) {
                const auto row = history_.row(a_j.idx[k]);
                for (std::size_t m = 0; m < row.size; ++m) {
                    const std::int32_t i = row.idx[m];
                    if (i != j && !seen[i]) {
                        seen[i] = 1;
                        candidates.push_back(i);
                    }
                }
            }
            std::sort(candidates.begin(), candidates.end());
        } else {
            candidates.reserve(static_cast<std::size_t>(n_items) - 1);
            for (std::int32_t i = 0; i < n_items; ++i) {
                if (i != j) candidates.push_back(i);
            }
        }
        if (candidates.empty()) return;

        // residual r = a_j - A w, dense over queries; w starts at zero
        std::vector<double> residual(static_cast<std::size_t>(n_queries_), 0.0);
        for (std::size_t k = 0; k < a_j.size; ++k) residual[a_j.idx[k]] = a_j.val[k];
        std::vector<double> w(candidates.size(), 0.0);

        for (std::int32_t sweep = 0; sweep < params_.max_iters; ++sweep) {
            double max_change = 0.0;
            for (std::size_t c = 0; c < candidates.size(); ++c) {
                const std::int32_t i = candidates[c];
                const double denom = col_sq[i] + params_.l2;
                if (denom <= 0.0) continue;

                const auto a_i = by_item.row(i);
                double rho = col_sq[i] * w[c];
                for (std::size_t k = 0; k < a_i.size; ++k) {
                    rho += a_i.val[k] * residual[a_i.idx[k]];
                }

                double next;
                if (params_.nonnegative) {
                    next = std::max(0.0, (rho - params_.l1) / denom);
                } else {
                    const double mag = std::max(0.0, std::abs(rho) - params_.l1);
                    next = std::copysign(mag, rho) / denom;
                }
                const double delta = w[c] - next;
                if (delta != 0.0) {
                    for (std::size_t k = 0; k < a_i.size; ++k) {
                        residual[a_i.idx[k]] += a_i.val[k] * delta;
                    }
                    w[c] = next;
                }
                max_change = std::max(max_change, std::abs(delta));
            }
            if (max_change < params_.tol) break;
        }

        std::vector<WeightEntry>& out = columns[target];
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (w[c] != 0.0) out.push_back({candidates[c], w[c]});
        }
    });

    col_ptr_.assign(static_cast<std::size_t>(n_items) + 1, 0);
    std::size_t total = 0;
    for (std::int32_t j = 0; j < n_items; ++j) {
        total += columns[j].size();
        col_ptr_[static_cast<std::size_t>(j) + 1] = static_cast<std::int64_t>(total);
    }
    weights_.clear();
    weights_.reserve(total);
    for (auto& col : columns) weights_.insert(weights_.end(), col.begin(), col.end());
    build_row_index();
}

void Slim::build_row_index() {
    const std::size_t n = static_cast<std::size_t>(n_items_);
    row_ptr_.assign(n + 1, 0);
    for (const WeightEntry& e : weights_) ++row_ptr_[static_cast<std::size_t>(e.item) + 1];
    for (std::size_t i = 0; i < n; ++i) row_ptr_[i + 1] += row_ptr_[i];

    row_entries_.resize(weights_.size());
    std::vector<std::int64_t> cursor(row_ptr_.begin(), row_ptr_.end() - 1);
    for (std::int32_t target = 0; target < n_items_; ++target) {
        for (const WeightEntry& e : column(target)) {
            row_entries_[cursor[e.item]++] = {target, e.weight};
        }
    }
}

std::vector<double> Slim::dense_column(std::int32_t target) const {
    std::vector<double> out(static_cast<std::size_t>(n_items_), 0.0);
    for (const WeightEntry& e : column(target)) out[e.item] = e.weight;
    return out;
}

std::vector<ScoredItem> Slim::score_query(std::int32_t query) const {
    std::vector<ScoredItem> out;
    if (query < 0 || query >= n_queries_) return out;
    const auto row = history_.row(query);
    if (row.size == 0) return out;

    // score(q, .) = a_q^T W via the row index of W
    std::vector<double> acc(static_cast<std::size_t>(n_items_), 0.0);
    std::vector<char> seen(static_cast<std::size_t>(n_items_), 0);
    std::vector<std::int32_t> touched;
    for (std::size_t m = 0; m < row.size; ++m) {
        const std::int32_t source = row.idx[m];
        const double v = row.val[m];
        if (v == 0.0) continue;
        for (std::int64_t k = row_ptr_[source]; k < row_ptr_[source + 1]; ++k) {
            const WeightEntry& e = row_entries_[static_cast<std::size_t>(k)];
            if (!seen[e.item]) {
                seen[e.item] = 1;
                touched.push_back(e.item);
            }
            acc[e.item] += v * e.weight;
        }
    }
    out.reserve(touched.size());
    for (std::int32_t i : touched) {
        if (acc[i] != 0.0) out.push_back({i, acc[i]});
    }
    return out;
}

}  // namespace recsmith
