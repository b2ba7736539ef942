#pragma once

#include <cstdint>
#include <vector>

#include "recsmith/log.hpp"

namespace recsmith {

/// Dense-id view of a log plus the catalog dimensions models fit against.
struct EncodedDataset {
    EncodedLog log;
    std::int32_t n_queries = 0;
    std::int32_t n_items = 0;
};

/// Query-by-item matrix in compressed row form. Column indices are sorted
/// and unique within each row; duplicate (query, item) events are collapsed
/// (binarized mode: value 1.0; ratings mode: values summed).
struct SparseInteractionMatrix {
    std::int32_t n_rows = 0;
    std::int32_t n_cols = 0;
    std::vector<std::int64_t> row_ptr;  // size n_rows + 1
    std::vector<std::int32_t> col_idx;
    std::vector<double> values;

    std::int64_t nnz() const { return static_cast<std::int64_t>(col_idx.size()); }

    struct Row {
        const std::int32_t* idx;
        const double* val;
        std::size_t size;
    };
    Row row(std::int32_t r) const {
        const std::int64_t lo = row_ptr[r], hi = row_ptr[r + 1];
        return {col_idx.data() + lo, values.data() + lo, static_cast<std::size_t>(hi - lo)};
    }

    /// Every distinct (query, item) pair of the log gets one entry, so row
    /// structure doubles as the query's seen-item history. use_ratings=false
    /// binarizes: value 1.0 when any event of the pair has rating > 0, else
    /// 0.0; use_ratings=true sums the pair's ratings.
    static SparseInteractionMatrix from_log(const EncodedLog& log, std::int32_t n_rows,
                                            std::int32_t n_cols, bool use_ratings);

    /// The transpose in the same compressed layout (i.e. item-major columns).
    SparseInteractionMatrix transposed() const;
};

}  // namespace recsmith
