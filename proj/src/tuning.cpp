#include "recsmith/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "recsmith/error.hpp"
#include "recsmith/rng.hpp"

namespace recsmith {

std::string to_display(const ParamValue& value) {
    if (const auto* d = std::get_if<double>(&value)) return std::to_string(*d);
    if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
    return std::get<std::string>(value);
}

void SearchSpace::validate() const {
    if (dimensions.empty()) raise(ErrorCode::InvalidSpace, "search space has no dimensions");
    std::unordered_set<std::string> names;
    for (const auto& dim : dimensions) {
        if (dim.name.empty()) raise(ErrorCode::InvalidSpace, "dimension with empty name");
        if (!names.insert(dim.name).second) {
            raise(ErrorCode::InvalidSpace, "duplicate dimension '" + dim.name + "'");
        }
        switch (dim.kind) {
            case Dimension::Kind::Uniform:
                if (!(dim.low < dim.high)) {
                    raise(ErrorCode::InvalidSpace, dim.name + ": requires low < high");
                }
                break;
            case Dimension::Kind::LogUniform:
                if (!(dim.low < dim.high) || !(dim.low > 0.0)) {
                    raise(ErrorCode::InvalidSpace, dim.name + ": requires 0 < low < high");
                }
                break;
            case Dimension::Kind::IntUniform:
                if (dim.int_low >= dim.int_high) {
                    raise(ErrorCode::InvalidSpace, dim.name + ": requires low < high");
                }
                break;
            case Dimension::Kind::Categorical: {
                if (dim.choices.empty()) {
                    raise(ErrorCode::InvalidSpace, dim.name + ": categorical with no choices");
                }
                for (std::size_t a = 0; a < dim.choices.size(); ++a) {
                    for (std::size_t b = a + 1; b < dim.choices.size(); ++b) {
                        if (dim.choices[a] == dim.choices[b]) {
                            raise(ErrorCode::InvalidSpace,
                                  dim.name + ": duplicate categorical choice");
                        }
                    }
                }
                break;
            }
        }
    }
}

Params suggest(const SearchSpace& space, std::uint64_t seed, std::int64_t trial_index) {
    space.validate();
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(trial_index)));
    Params params;
    for (const auto& dim : space.dimensions) {
        switch (dim.kind) {
            case Dimension::Kind::Uniform:
                params[dim.name] = dim.low + (dim.high - dim.low) * rng.next_double();
                break;
            case Dimension::Kind::LogUniform: {
                const double lo = std::log(dim.low), hi = std::log(dim.high);
                params[dim.name] = std::exp(lo + (hi - lo) * rng.next_double());
                break;
            }
            case Dimension::Kind::IntUniform: {
                const std::uint64_t span =
                    static_cast<std::uint64_t>(dim.int_high - dim.int_low) + 1;
                params[dim.name] =
                    dim.int_low + static_cast<std::int64_t>(rng.next_below(span));
                break;
            }
            case Dimension::Kind::Categorical:
                params[dim.name] = dim.choices[rng.next_below(dim.choices.size())];
                break;
        }
    }
    return params;
}

std::vector<Params> grid(const SearchSpace& space) {
    space.validate();
    std::vector<std::vector<ParamValue>> axes;
    for (const auto& dim : space.dimensions) {
        std::vector<ParamValue> axis;
        if (dim.kind == Dimension::Kind::Categorical) {
            axis = dim.choices;
        } else if (dim.kind == Dimension::Kind::IntUniform) {
            for (std::int64_t v = dim.int_low; v <= dim.int_high; ++v) axis.emplace_back(v);
        } else {
            raise(ErrorCode::NonFiniteSpace,
                  dim.name + ": grid requires categorical or integer dimensions");
        }
        axes.push_back(std::move(axis));
    }

    std::vector<Params> out;
    std::vector<std::size_t> cursor(axes.size(), 0);
    for (;;) {
        Params p;
        for (std::size_t d = 0; d < axes.size(); ++d) {
            p[space.dimensions[d].name] = axes[d][cursor[d]];
        }
        out.push_back(std::move(p));
        std::size_t d = axes.size();
        while (d > 0) {
            --d;
            if (++cursor[d] < axes[d].size()) break;
            cursor[d] = 0;
            if (d == 0) return out;
        }
    }
}

OptimizeResult optimize(const ModelFactory& factory, const SearchSpace& space,
                        std::int64_t budget, const EncodedDataset& train,
                        const EncodedLog& valid, const std::string& metric, int metric_k,
                        std::uint64_t seed, int predict_k, bool filter_seen) {
    if (budget < 1) raise(ErrorCode::InvalidParameter, "optimize requires budget >= 1");
    if (metric_k < 1) raise(ErrorCode::InvalidParameter, "optimize requires metric k >= 1");
    const GroundTruth gt = GroundTruth::from_log(valid);
    bool any_relevant = false;
    for (const auto& [q, items] : gt.relevant) any_relevant |= !items.empty();
    if (!any_relevant) {
        raise(ErrorCode::EmptyEvaluation, "validation split has no ground truth");
    }

    // validation queries in first-appearance order
    std::vector<std::int32_t> queries;
    {
        std::unordered_set<std::int32_t> seen;
        for (std::int32_t q : valid.queries) {
            if (seen.insert(q).second) queries.push_back(q);
        }
    }
    if (predict_k < 1) predict_k = metric_k;
    predict_k = std::max(predict_k, metric_k);

    // params are pre-generated sequentially so parallel trial execution
    // could never change the trial set
    std::vector<Params> plan;
    plan.reserve(static_cast<std::size_t>(budget));
    for (std::int64_t t = 0; t < budget; ++t) plan.push_back(suggest(space, seed, t));

    const std::vector<MetricSpec> specs{{metric, {metric_k}}};
    const std::string key = metric + "@" + std::to_string(metric_k);

    OptimizeResult result;
    for (std::int64_t t = 0; t < budget; ++t) {
        Trial trial;
        trial.index = t;
        trial.params = plan[static_cast<std::size_t>(t)];
        try {
            std::unique_ptr<Recommender> model = factory(trial.params);
            model->fit(train);
            const EncodedRecommendations recs = model->predict(queries, predict_k, filter_seen);
            EvaluationInputs inputs;
            inputs.recs = &recs;
            inputs.ground_truth = &gt;
            inputs.train = &train.log;
            trial.metric_value = offline_metrics(inputs, specs).at(key);
        } catch (const Error& e) {
            trial.status = Trial::Status::Failed;
            trial.error = std::string(e.code_name()) + ": " + e.what();
        }
        result.trials.push_back(std::move(trial));
    }

    const Trial* best = nullptr;
    for (const Trial& t : result.trials) {
        if (t.status != Trial::Status::Ok) continue;
        if (!best || t.metric_value > best->metric_value) best = &t;
    }
    if (!best) raise(ErrorCode::AllTrialsFailed, "all " + std::to_string(budget) + " trials failed");
    result.best = *best;
    return result;
}

}  // namespace recsmith
