#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "recsmith/metrics.hpp"
#include "recsmith/models/recommender.hpp"
#include "recsmith/sparse.hpp"

namespace recsmith {

using ParamValue = std::variant<double, std::int64_t, std::string>;
using Params = std::map<std::string, ParamValue>;

std::string to_display(const ParamValue& value);

/// One search dimension. uniform/log_uniform draw doubles, int_uniform draws
/// inclusive integers, categorical picks from its choices.
struct Dimension {
    enum class Kind { Uniform, LogUniform, IntUniform, Categorical };

    std::string name;
    Kind kind = Kind::Uniform;
    double low = 0.0;
    double high = 1.0;
    std::int64_t int_low = 0;
    std::int64_t int_high = 0;
    std::vector<ParamValue> choices;
};

struct SearchSpace {
    std::vector<Dimension> dimensions;

    /// Throws InvalidSpace when a dimension's bounds or choices are inconsistent.
    void validate() const;
};

struct Trial {
    std::int64_t index = 0;
    Params params;
    double metric_value = 0.0;
    enum class Status { Ok, Failed } status = Status::Ok;
    std::string error;  // set for failed trials
};

/// Deterministic sample for trial `trial_index`: a pure function of
/// (space, seed, trial_index), uniform within each dimension's law. Trials
/// 1..B are therefore a prefix of trials 1..2B under the same seed.
Params suggest(const SearchSpace& space, std::uint64_t seed, std::int64_t trial_index);

/// Exhaustive Cartesian product in lexicographic order (first dimension
/// slowest). Only categorical and int_uniform dimensions are finite; others
/// raise NonFiniteSpace.
std::vector<Params> grid(const SearchSpace& space);

using ModelFactory = std::function<std::unique_ptr<Recommender>(const Params&)>;

struct OptimizeResult {
    Trial best;
    std::vector<Trial> trials;
};

/// Seeded random search: draws `budget` parameter sets, fits the factory's
/// model on `train`, predicts for the validation queries and scores one
/// accuracy metric against the validation ground truth. Failed trials are
/// recorded and count against the budget; if every trial fails the search
/// raises AllTrialsFailed. Best = highest metric, ties to the lowest index.
OptimizeResult optimize(const ModelFactory& factory, const SearchSpace& space,
                        std::int64_t budget, const EncodedDataset& train,
                        const EncodedLog& valid, const std::string& metric, int metric_k,
                        std::uint64_t seed, int predict_k = 0, bool filter_seen = true);

}  // namespace recsmith
