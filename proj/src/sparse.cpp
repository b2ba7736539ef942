#include "recsmith/sparse.hpp"

#include <algorithm>
#include <numeric>

#include "recsmith/error.hpp"

namespace recsmith {

SparseInteractionMatrix SparseInteractionMatrix::from_log(const EncodedLog& log,
                                                          std::int32_t n_rows,
                                                          std::int32_t n_cols, bool use_ratings) {
    SparseInteractionMatrix m;
    m.n_rows = n_rows;
    m.n_cols = n_cols;

    std::vector<std::int64_t> counts(static_cast<std::size_t>(n_rows) + 1, 0);
    for (std::size_t r = 0; r < log.size(); ++r) {
        const std::int32_t q = log.queries[r];
        if (q < 0 || q >= n_rows || log.items[r] < 0 || log.items[r] >= n_cols) {
            raise(ErrorCode::IndexOutOfRange, "encoded id outside the dataset dimensions");
        }
        ++counts[static_cast<std::size_t>(q) + 1];
    }
    std::partial_sum(counts.begin(), counts.end(), counts.begin());

    std::vector<std::int32_t> cols(log.size());
    std::vector<double> vals(log.size());
    {
        std::vector<std::int64_t> cursor(counts.begin(), counts.end() - 1);
        for (std::size_t r = 0; r < log.size(); ++r) {
            const std::int64_t slot = cursor[log.queries[r]]++;
            cols[slot] = log.items[r];
            vals[slot] = use_ratings ? log.ratings[r] : (log.ratings[r] > 0.0 ? 1.0 : 0.0);
        }
    }

    // Sort each row by column and collapse duplicate pairs.
    m.row_ptr.assign(static_cast<std::size_t>(n_rows) + 1, 0);
    m.col_idx.reserve(log.size());
    m.values.reserve(log.size());
    std::vector<std::size_t> order;
    for (std::int32_t q = 0; q < n_rows; ++q) {
        const std::int64_t lo = counts[q], hi = counts[static_cast<std::size_t>(q) + 1];
        order.resize(static_cast<std::size_t>(hi - lo));
        std::iota(order.begin(), order.end(), static_cast<std::size_t>(lo));
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return cols[a] < cols[b]; });
        const std::size_t row_start = m.col_idx.size();
        for (std::size_t slot : order) {
            const std::int32_t c = cols[slot];
            const double v = vals[slot];
            if (m.col_idx.size() > row_start && m.col_idx.back() == c) {
                if (use_ratings) {
                    m.values.back() += v;
                } else {
                    m.values.back() = std::max(m.values.back(), v);
                }
            } else {
                m.col_idx.push_back(c);
                m.values.push_back(v);
            }
        }
        m.row_ptr[static_cast<std::size_t>(q) + 1] = static_cast<std::int64_t>(m.col_idx.size());
    }
    return m;
}

SparseInteractionMatrix SparseInteractionMatrix::transposed() const {
    SparseInteractionMatrix t;
    t.n_rows = n_cols;
    t.n_cols = n_rows;
    t.row_ptr.assign(static_cast<std::size_t>(n_cols) + 1, 0);
    for (std::int32_t c : col_idx) ++t.row_ptr[static_cast<std::size_t>(c) + 1];
    std::partial_sum(t.row_ptr.begin(), t.row_ptr.end(), t.row_ptr.begin());

    t.col_idx.resize(col_idx.size());
    t.values.resize(values.size());
    std::vector<std::int64_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (std::int32_t r = 0; r < n_rows; ++r) {
        for (std::int64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            const std::int64_t slot = cursor[col_idx[k]]++;
            t.col_idx[slot] = r;
            t.values[slot] = values[k];
        }
    }
    return t;
}

}  // namespace recsmith
