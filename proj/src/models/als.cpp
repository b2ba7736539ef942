#include "recsmith/models/als.hpp"

#include <Eigen/Dense>

#include <cstdio>

#include "recsmith/error.hpp"
#include "recsmith/parallel.hpp"
#include "recsmith/rng.hpp"

namespace recsmith {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Solves the ridge system for every row of X given the other side's factors:
//   x_u = (Y^T Y + Y^T (C_u - I) Y + lambda I)^-1  Y^T C_u p_u
// where the middle term runs only over u's observed entries.
void solve_side(const SparseInteractionMatrix& interactions, const Matrix& fixed, Matrix& solved,
                double alpha, double lambda) {
    const int rank = static_cast<int>(fixed.cols());
    const Eigen::MatrixXd gram = fixed.transpose() * fixed;

    parallel_for(0, static_cast<std::size_t>(interactions.n_rows), [&](std::size_t u) {
        const auto row = interactions.row(static_cast<std::int32_t>(u));
        Eigen::MatrixXd lhs = gram;
        lhs.diagonal().array() += lambda;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rank);
        for (std::size_t k = 0; k < row.size; ++k) {
            const auto y = fixed.row(row.idx[k]);
            const double c = 1.0 + alpha * row.val[k];
            const double p = row.val[k] > 0.0 ? 1.0 : 0.0;
            lhs.noalias() += (c - 1.0) * y.transpose() * y;
            rhs.noalias() += c * p * y.transpose();
        }
        solved.row(static_cast<Eigen::Index>(u)) = lhs.llt().solve(rhs).transpose();
    });
}

double weighted_objective(const SparseInteractionMatrix& interactions, const Matrix& users,
                          const Matrix& items, double alpha, double lambda) {
    // All-pairs term folded through the item Gram matrix: unobserved cells
    // have c = 1, p = 0, so  sum_all (x.y)^2 = sum_u x_u^T (Y^T Y) x_u,
    // and each observed cell swaps in c (p - x.y)^2 - (x.y)^2.
    const Eigen::MatrixXd gram = items.transpose() * items;
    double obj = 0.0;
    for (Eigen::Index u = 0; u < users.rows(); ++u) {
        obj += (users.row(u) * gram).dot(users.row(u));
    }
    for (std::int32_t u = 0; u < interactions.n_rows; ++u) {
        const auto row = interactions.row(u);
        for (std::size_t k = 0; k < row.size; ++k) {
            const double s = users.row(u).dot(items.row(row.idx[k]));
            const double c = 1.0 + alpha * row.val[k];
            const double p = row.val[k] > 0.0 ? 1.0 : 0.0;
            obj += c * (p - s) * (p - s) - s * s;
        }
    }
    obj += lambda * (users.squaredNorm() + items.squaredNorm());
    return obj;
}

Matrix map_factors(const std::vector<double>& data, std::int32_t rows, std::int32_t rank) {
    return Eigen::Map<const Matrix>(data.data(), rows, rank);
}

}  // namespace

Als::Als() : Als(Params{}) {}

Als::Als(Params params) : params_(params) {
    if (params_.rank < 1) raise(ErrorCode::InvalidParameter, "als requires rank >= 1");
    if (!(params_.alpha > 0.0)) raise(ErrorCode::InvalidParameter, "als requires alpha > 0");
    if (!(params_.lambda > 0.0)) raise(ErrorCode::InvalidParameter, "als requires lambda > 0");
    if (params_.iterations < 1) {
        raise(ErrorCode::InvalidParameter, "als requires iterations >= 1");
    }
}

void Als::do_fit(const EncodedDataset& data) {
    (void)data;
    if (params_.rank > std::min(n_queries_, n_items_)) {
        std::fprintf(stderr, "warning: als rank %d exceeds dataset dimensions (%d x %d)\n",
                     params_.rank, n_queries_, n_items_);
    }
    const SparseInteractionMatrix by_item = history_.transposed();

    Matrix users(n_queries_, params_.rank);
    Matrix items(n_items_, params_.rank);
    SplitMix64 rng(params_.seed);
    for (Eigen::Index r = 0; r < users.rows(); ++r) {
        for (int c = 0; c < params_.rank; ++c) users(r, c) = 0.02 * rng.next_double() - 0.01;
    }
    for (Eigen::Index r = 0; r < items.rows(); ++r) {
        for (int c = 0; c < params_.rank; ++c) items(r, c) = 0.02 * rng.next_double() - 0.01;
    }

    objective_trace_.clear();
    objective_trace_.push_back(
        weighted_objective(history_, users, items, params_.alpha, params_.lambda));
    for (std::int32_t it = 0; it < params_.iterations; ++it) {
        solve_side(history_, items, users, params_.alpha, params_.lambda);
        solve_side(by_item, users, items, params_.alpha, params_.lambda);
        objective_trace_.push_back(
            weighted_objective(history_, users, items, params_.alpha, params_.lambda));
    }

    user_factors_.assign(users.data(), users.data() + users.size());
    item_factors_.assign(items.data(), items.data() + items.size());
}

double Als::objective() const {
    return weighted_objective(history_, map_factors(user_factors_, n_queries_, params_.rank),
                              map_factors(item_factors_, n_items_, params_.rank), params_.alpha,
                              params_.lambda);
}

double Als::score(std::int32_t query, std::int32_t item) const {
    const double* x = user_factors_.data() + static_cast<std::size_t>(query) * params_.rank;
    const double* y = item_factors_.data() + static_cast<std::size_t>(item) * params_.rank;
    double s = 0.0;
    for (std::int32_t r = 0; r < params_.rank; ++r) s += x[r] * y[r];
    return s;
}

std::vector<ScoredItem> Als::score_query(std::int32_t query) const {
    std::vector<ScoredItem> out;
    if (query < 0 || query >= n_queries_) return out;
    out.resize(static_cast<std::size_t>(n_items_));
    for (std::int32_t i = 0; i < n_items_; ++i) out[i] = {i, score(query, i)};
    return out;
}

}  // namespace recsmith
