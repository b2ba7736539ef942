#include "recsmith/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <unordered_set>

#include "recsmith/dataset.hpp"
#include "recsmith/encoder.hpp"
#include "recsmith/error.hpp"
#include "recsmith/models/registry.hpp"

namespace recsmith {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& message) {
    raise(ErrorCode::ConfigError, path + ": " + message);
}

const json& require_key(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) {
        config_error(path + "." + key, "missing required key");
    }
    return obj.at(key);
}

void check_object_keys(const json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) config_error(path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok |= key == a;
        if (!ok) config_error(path + "." + key, "unknown key");
    }
}

template <typename T>
T as(const json& value, const std::string& path) {
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        config_error(path, "unexpected value type");
    }
}

template <typename T>
T key_or(const json& obj, const char* key, const std::string& path, T fallback) {
    if (obj.is_object() && obj.contains(key)) return as<T>(obj.at(key), path + "." + key);
    return fallback;
}

std::int64_t timestamp_value(const json& value, const std::string& path) {
    if (value.is_number_integer()) return value.get<std::int64_t>();
    if (value.is_string()) return parse_timestamp(value.get<std::string>());
    config_error(path, "expected epoch seconds or a date string");
}

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (path.empty() || base_dir.empty()) return path;
    fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(base_dir) / p).lexically_normal().string();
}

FilterSpec parse_filter(const json& obj, const std::string& path) {
    const std::string kind = as<std::string>(require_key(obj, "kind", path), path + ".kind");
    FilterSpec spec;
    if (kind == "min_count") {
        check_object_keys(obj, path, {"kind", "threshold", "entity"});
        spec.kind = FilterSpec::Kind::MinCount;
        spec.threshold_count =
            as<std::int64_t>(require_key(obj, "threshold", path), path + ".threshold");
        const std::string entity =
            as<std::string>(require_key(obj, "entity", path), path + ".entity");
        if (entity == "query") {
            spec.entity = EntityKind::Query;
        } else if (entity == "item") {
            spec.entity = EntityKind::Item;
        } else {
            config_error(path + ".entity", "must be 'query' or 'item'");
        }
    } else if (kind == "low_rating") {
        check_object_keys(obj, path, {"kind", "threshold"});
        spec.kind = FilterSpec::Kind::LowRating;
        spec.rating_threshold =
            as<double>(require_key(obj, "threshold", path), path + ".threshold");
    } else if (kind == "time_period") {
        check_object_keys(obj, path, {"kind", "start", "end"});
        spec.kind = FilterSpec::Kind::TimePeriod;
        if (obj.contains("start")) spec.start = timestamp_value(obj.at("start"), path + ".start");
        if (obj.contains("end")) spec.end = timestamp_value(obj.at("end"), path + ".end");
    } else if (kind == "num_interactions" || kind == "num_days") {
        check_object_keys(obj, path, {"kind", "n", "d", "scope", "keep"});
        spec.kind = kind == "num_interactions" ? FilterSpec::Kind::NumInteractions
                                               : FilterSpec::Kind::NumDays;
        const char* count_key = kind == "num_interactions" ? "n" : "d";
        spec.n = as<std::int64_t>(require_key(obj, count_key, path),
                                  path + "." + count_key);
        const std::string scope = key_or<std::string>(obj, "scope", path, "global");
        if (scope == "global") {
            spec.scope = FilterScope::Global;
        } else if (scope == "per_query") {
            spec.scope = FilterScope::PerQuery;
        } else {
            config_error(path + ".scope", "must be 'global' or 'per_query'");
        }
        const std::string keep = key_or<std::string>(obj, "keep", path, "last");
        if (keep == "first") {
            spec.keep = KeepSide::First;
        } else if (keep == "last") {
            spec.keep = KeepSide::Last;
        } else {
            config_error(path + ".keep", "must be 'first' or 'last'");
        }
    } else {
        config_error(path + ".kind", "unknown filter kind '" + kind + "'");
    }
    return spec;
}

SplitConfig parse_split(const json& obj, const std::string& path, std::uint64_t default_seed) {
    SplitConfig config;
    const std::string strategy =
        as<std::string>(require_key(obj, "strategy", path), path + ".strategy");
    config.seed = key_or<std::uint64_t>(obj, "seed", path, default_seed);
    config.drop_cold_users = key_or<bool>(obj, "drop_cold_users", path, false);
    config.drop_cold_items = key_or<bool>(obj, "drop_cold_items", path, false);

    const std::initializer_list<const char*> common = {"strategy", "seed", "drop_cold_users",
                                                       "drop_cold_items"};
    auto keys_with = [&](std::initializer_list<const char*> extra) {
        std::vector<const char*> keys(common);
        keys.insert(keys.end(), extra.begin(), extra.end());
        if (!obj.is_object()) config_error(path, "expected an object");
        for (const auto& [key, value] : obj.items()) {
            bool ok = false;
            for (const char* a : keys) ok |= key == a;
            if (!ok) config_error(path + "." + key, "unknown key for strategy " + strategy);
        }
    };

    if (strategy == "random" || strategy == "cold_user_random" || strategy == "new_users") {
        keys_with({"test_ratio"});
        config.strategy = strategy == "random"          ? SplitStrategy::Random
                          : strategy == "cold_user_random" ? SplitStrategy::ColdUserRandom
                                                           : SplitStrategy::NewUsers;
        config.test_ratio =
            as<double>(require_key(obj, "test_ratio", path), path + ".test_ratio");
    } else if (strategy == "time") {
        keys_with({"timestamp", "quantile"});
        config.strategy = SplitStrategy::Time;
        if (obj.contains("timestamp")) {
            config.time_threshold = timestamp_value(obj.at("timestamp"), path + ".timestamp");
        }
        if (obj.contains("quantile")) {
            config.time_quantile = as<double>(obj.at("quantile"), path + ".quantile");
        }
        if (config.time_threshold.has_value() == config.time_quantile.has_value()) {
            config_error(path, "time split takes exactly one of 'timestamp' or 'quantile'");
        }
    } else if (strategy == "last_n") {
        keys_with({"n", "unit"});
        config.strategy = SplitStrategy::LastN;
        config.n = as<std::int64_t>(require_key(obj, "n", path), path + ".n");
        const std::string unit = key_or<std::string>(obj, "unit", path, "interactions");
        if (unit == "interactions") {
            config.unit = LastNUnit::Interactions;
        } else if (unit == "seconds") {
            config.unit = LastNUnit::Seconds;
        } else {
            config_error(path + ".unit", "must be 'interactions' or 'seconds'");
        }
    } else {
        config_error(path + ".strategy", "unknown strategy '" + strategy + "'");
    }
    return config;
}

ModelConfig parse_model(const json& obj, const std::string& path, std::uint64_t seed) {
    ModelConfig model;
    model.name = as<std::string>(require_key(obj, "name", path), path + ".name");
    model.params = obj;
    model.params.erase("name");
    // seeded models default to the pipeline seed
    if ((model.name == "thompson" || model.name == "als") && !model.params.contains("seed")) {
        model.params["seed"] = seed;
    }
    return model;
}

Dimension parse_dimension(const std::string& name, const json& obj, const std::string& path) {
    Dimension dim;
    dim.name = name;
    const std::string kind = as<std::string>(require_key(obj, "kind", path), path + ".kind");
    if (kind == "uniform" || kind == "log_uniform") {
        check_object_keys(obj, path, {"kind", "low", "high"});
        dim.kind = kind == "uniform" ? Dimension::Kind::Uniform : Dimension::Kind::LogUniform;
        dim.low = as<double>(require_key(obj, "low", path), path + ".low");
        dim.high = as<double>(require_key(obj, "high", path), path + ".high");
    } else if (kind == "int_uniform") {
        check_object_keys(obj, path, {"kind", "low", "high"});
        dim.kind = Dimension::Kind::IntUniform;
        dim.int_low = as<std::int64_t>(require_key(obj, "low", path), path + ".low");
        dim.int_high = as<std::int64_t>(require_key(obj, "high", path), path + ".high");
    } else if (kind == "categorical") {
        check_object_keys(obj, path, {"kind", "choices"});
        const json& choices = require_key(obj, "choices", path);
        if (!choices.is_array()) config_error(path + ".choices", "expected an array");
        for (const auto& c : choices) {
            if (c.is_number_integer()) {
                dim.choices.emplace_back(c.get<std::int64_t>());
            } else if (c.is_number_float()) {
                dim.choices.emplace_back(c.get<double>());
            } else if (c.is_string()) {
                dim.choices.emplace_back(c.get<std::string>());
            } else {
                config_error(path + ".choices", "choices must be numbers or strings");
            }
        }
        dim.kind = Dimension::Kind::Categorical;
    } else {
        config_error(path + ".kind", "unknown dimension kind '" + kind + "'");
    }
    return dim;
}

std::vector<MetricSpec> parse_metrics(const json& value, const std::string& path) {
    std::string joined;
    if (value.is_string()) {
        joined = value.get<std::string>();
    } else if (value.is_array()) {
        for (const auto& v : value) {
            if (!v.is_string()) config_error(path, "metric entries must be 'name@k' strings");
            if (!joined.empty()) joined += ",";
            joined += v.get<std::string>();
        }
    } else {
        config_error(path, "expected a 'name@k' list");
    }
    return parse_metric_list(joined);
}

FeatureFileConfig parse_feature_file(const json& obj, const std::string& path,
                                     const std::string& base_dir) {
    check_object_keys(obj, path, {"path", "key", "categorical", "numerical"});
    FeatureFileConfig out;
    out.path = resolve(base_dir, as<std::string>(require_key(obj, "path", path), path + ".path"));
    out.key = as<std::string>(require_key(obj, "key", path), path + ".key");
    out.categorical = key_or<std::vector<std::string>>(obj, "categorical", path, {});
    out.numerical = key_or<std::vector<std::string>>(obj, "numerical", path, {});
    return out;
}

void require_file(const std::string& path, const char* what) {
    if (!fs::exists(path)) {
        raise(ErrorCode::IoError, std::string(what) + " file '" + path + "' does not exist");
    }
}

// ---- shared stage helpers ---------------------------------------------

InteractionLog read_log(const DataConfig& data, const std::string& path) {
    require_file(path, "interactions");
    return read_interactions_csv(path, data.columns, data.delimiter);
}

FeatureSchema schema_for(const DataConfig& data, bool with_features) {
    FeatureSchema schema = FeatureSchema::interactions(
        data.columns.query, data.columns.item, data.columns.timestamp,
        data.columns.rating.value_or("rating"));
    if (!with_features) return schema;
    auto add_columns = [&](const std::optional<FeatureFileConfig>& f, ColumnSource source) {
        if (!f) return;
        for (const auto& name : f->categorical) {
            schema.columns().push_back(
                {name, FeatureType::Categorical, source, std::nullopt, std::nullopt});
        }
        for (const auto& name : f->numerical) {
            schema.columns().push_back(
                {name, FeatureType::Numerical, source, std::nullopt, std::nullopt});
        }
    };
    add_columns(data.user_features, ColumnSource::UserFeatures);
    add_columns(data.item_features, ColumnSource::ItemFeatures);
    return schema;
}

std::optional<FeatureTable> load_features(const std::optional<FeatureFileConfig>& config,
                                          const std::string& delimiter) {
    if (!config) return std::nullopt;
    require_file(config->path, "features");
    return read_feature_table_csv(config->path, config->key, config->categorical,
                                  config->numerical, delimiter);
}

std::vector<std::string> distinct_in_order(const std::vector<std::string>& tokens) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& t : tokens) {
        if (seen.insert(t).second) out.push_back(t);
    }
    return out;
}

std::string first_metric_key(const std::vector<MetricSpec>& specs) {
    if (specs.empty() || specs.front().k_values.empty()) return "";
    return specs.front().name + "@" + std::to_string(specs.front().k_values.front());
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::ConfigError, "cannot open config file '" + path + "'");
    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception& e) {
        raise(ErrorCode::ConfigError, "config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(root, fs::path(path).parent_path().string());
}

PipelineConfig parse_config(const json& root, const std::string& base_dir) {
    check_object_keys(root, "$",
                      {"data", "filters", "split", "model", "predict", "metrics", "ground_truth",
                       "metrics_inputs", "output", "seed", "search_space", "optimize"});
    PipelineConfig config;
    config.seed = key_or<std::uint64_t>(root, "seed", "$", 0);

    const json& data = require_key(root, "data", "$");
    check_object_keys(data, "$.data",
                      {"path", "delimiter", "columns", "item_features", "user_features"});
    config.data.path = resolve(base_dir, key_or<std::string>(data, "path", "$.data", ""));
    config.data.delimiter = key_or<std::string>(data, "delimiter", "$.data", ",");
    if (config.data.delimiter.empty()) config_error("$.data.delimiter", "must not be empty");
    if (data.contains("columns")) {
        const json& cols = data.at("columns");
        check_object_keys(cols, "$.data.columns", {"query_id", "item_id", "timestamp", "rating"});
        config.data.columns.query =
            as<std::string>(require_key(cols, "query_id", "$.data.columns"),
                            "$.data.columns.query_id");
        config.data.columns.item = as<std::string>(
            require_key(cols, "item_id", "$.data.columns"), "$.data.columns.item_id");
        config.data.columns.timestamp =
            as<std::string>(require_key(cols, "timestamp", "$.data.columns"),
                            "$.data.columns.timestamp");
        if (cols.contains("rating")) {
            config.data.columns.rating = as<std::string>(cols.at("rating"),
                                                         "$.data.columns.rating");
        } else {
            config.data.columns.rating = std::nullopt;
        }
    }
    if (data.contains("item_features")) {
        config.data.item_features =
            parse_feature_file(data.at("item_features"), "$.data.item_features", base_dir);
    }
    if (data.contains("user_features")) {
        config.data.user_features =
            parse_feature_file(data.at("user_features"), "$.data.user_features", base_dir);
    }

    if (root.contains("filters")) {
        const json& filters = root.at("filters");
        if (!filters.is_array()) config_error("$.filters", "expected an array");
        for (std::size_t i = 0; i < filters.size(); ++i) {
            config.filters.push_back(
                parse_filter(filters[i], "$.filters[" + std::to_string(i) + "]"));
        }
    }

    if (root.contains("split")) {
        config.split = parse_split(root.at("split"), "$.split", config.seed);
    }

    if (root.contains("model")) {
        const json& model = root.at("model");
        if (model.is_array()) {
            for (std::size_t i = 0; i < model.size(); ++i) {
                config.models.push_back(
                    parse_model(model[i], "$.model[" + std::to_string(i) + "]", config.seed));
            }
        } else {
            config.models.push_back(parse_model(model, "$.model", config.seed));
        }
        // dry-run constructor validation so a bad model fails before artifacts
        for (const auto& m : config.models) make_model(m.name, m.params);
        std::unordered_set<std::string> names;
        for (const auto& m : config.models) {
            if (!names.insert(m.name).second) {
                config_error("$.model", "duplicate model name '" + m.name + "'");
            }
        }
    }

    if (root.contains("predict")) {
        const json& predict = root.at("predict");
        check_object_keys(predict, "$.predict", {"k", "filter_seen"});
        config.predict.k = key_or<int>(predict, "k", "$.predict", 10);
        config.predict.filter_seen = key_or<bool>(predict, "filter_seen", "$.predict", true);
        if (config.predict.k < 1) config_error("$.predict.k", "k must be >= 1");
    }

    if (root.contains("metrics")) {
        try {
            config.metrics = parse_metrics(root.at("metrics"), "$.metrics");
        } catch (const Error& e) {
            if (e.code() == ErrorCode::UnknownMetric) config_error("$.metrics", e.what());
            throw;
        }
    }

    if (root.contains("ground_truth")) {
        const json& gt = root.at("ground_truth");
        check_object_keys(gt, "$.ground_truth", {"rating_threshold"});
        if (gt.contains("rating_threshold") && !gt.at("rating_threshold").is_null()) {
            config.gt_rating_threshold =
                as<double>(gt.at("rating_threshold"), "$.ground_truth.rating_threshold");
        }
    }

    if (root.contains("metrics_inputs")) {
        const json& mi = root.at("metrics_inputs");
        check_object_keys(mi, "$.metrics_inputs", {"baseline_recs_path", "category_column"});
        if (mi.contains("baseline_recs_path")) {
            config.baseline_recs_path = resolve(
                base_dir,
                as<std::string>(mi.at("baseline_recs_path"), "$.metrics_inputs.baseline_recs_path"));
        }
        if (mi.contains("category_column")) {
            config.category_column =
                as<std::string>(mi.at("category_column"), "$.metrics_inputs.category_column");
        }
    }

    if (root.contains("output")) {
        const json& output = root.at("output");
        check_object_keys(output, "$.output",
                          {"recs_path", "report_path", "train_path", "test_path", "model_path",
                           "trials_path"});
        config.output.recs_path =
            key_or<std::string>(output, "recs_path", "$.output", config.output.recs_path);
        config.output.report_path =
            key_or<std::string>(output, "report_path", "$.output", config.output.report_path);
        config.output.train_path =
            key_or<std::string>(output, "train_path", "$.output", config.output.train_path);
        config.output.test_path =
            key_or<std::string>(output, "test_path", "$.output", config.output.test_path);
        config.output.model_path =
            key_or<std::string>(output, "model_path", "$.output", config.output.model_path);
        config.output.trials_path =
            key_or<std::string>(output, "trials_path", "$.output", config.output.trials_path);
    }
    config.output.recs_path = resolve(base_dir, config.output.recs_path);
    config.output.report_path = resolve(base_dir, config.output.report_path);
    config.output.train_path = resolve(base_dir, config.output.train_path);
    config.output.test_path = resolve(base_dir, config.output.test_path);
    config.output.model_path = resolve(base_dir, config.output.model_path);
    config.output.trials_path = resolve(base_dir, config.output.trials_path);

    if (root.contains("search_space")) {
        const json& space = root.at("search_space");
        if (!space.is_object()) config_error("$.search_space", "expected an object");
        SearchSpace parsed;
        for (const auto& [name, dim] : space.items()) {
            parsed.dimensions.push_back(
                parse_dimension(name, dim, "$.search_space." + name));
        }
        try {
            parsed.validate();
        } catch (const Error& e) {
            config_error("$.search_space", e.what());
        }
        config.search_space = std::move(parsed);
    }

    if (root.contains("optimize")) {
        const json& opt = root.at("optimize");
        check_object_keys(opt, "$.optimize", {"budget", "metric"});
        config.optimize.budget = key_or<std::int64_t>(opt, "budget", "$.optimize", 16);
        if (opt.contains("metric")) {
            const auto specs =
                parse_metrics(opt.at("metric"), "$.optimize.metric");
            if (specs.size() != 1 || specs[0].k_values.size() != 1) {
                config_error("$.optimize.metric", "expected a single name@k");
            }
            config.optimize.metric = specs[0].name;
            config.optimize.metric_k = specs[0].k_values[0];
        }
    }
    return config;
}

std::string model_suffixed(const std::string& path, const std::string& model_name,
                           bool multiple) {
    if (!multiple) return path;
    const fs::path p(path);
    fs::path out = p.parent_path() / (p.stem().string() + "." + model_name + p.extension().string());
    return out.string();
}

void cmd_split(const PipelineConfig& config) {
    if (!config.split) raise(ErrorCode::ConfigError, "config has no 'split' section");
    if (config.data.path.empty()) raise(ErrorCode::ConfigError, "config has no data.path");
    InteractionLog log = read_log(config.data, config.data.path);
    log = apply_filters(std::move(log), config.filters);
    const SplitResult<std::string> result = split(log, *config.split);
    write_interactions_csv(config.output.train_path, result.train, config.data.columns,
                           config.data.delimiter);
    write_interactions_csv(config.output.test_path, result.test, config.data.columns,
                           config.data.delimiter);
    std::fprintf(stderr, "split: %zu train rows -> %s, %zu test rows -> %s\n",
                 result.train.size(), config.output.train_path.c_str(), result.test.size(),
                 config.output.test_path.c_str());
}

namespace {

const ModelConfig& select_model(const PipelineConfig& config,
                                const std::optional<std::string>& model_name) {
    if (config.models.empty()) raise(ErrorCode::ConfigError, "config has no 'model' section");
    if (!model_name) return config.models.front();
    for (const auto& m : config.models) {
        if (m.name == *model_name) return m;
    }
    raise(ErrorCode::ConfigError, "config lists no model named '" + *model_name + "'");
}

struct FitArtifacts {
    std::unique_ptr<Recommender> model;
    EncoderMapping mapping;
};

FitArtifacts fit_on_log(const PipelineConfig& config, const ModelConfig& model_config,
                        const std::string& train_path) {
    InteractionLog log = read_log(config.data, train_path);
    Dataset dataset = build_dataset(
        std::move(log), load_features(config.data.user_features, config.data.delimiter),
        load_features(config.data.item_features, config.data.delimiter),
        schema_for(config.data, true));
    EncoderMapping mapping = fit_id_encoder(dataset);
    const ColumnMapping& queries = mapping.at(dataset.schema().query_column());
    const ColumnMapping& items = mapping.at(dataset.schema().item_column());

    EncodedDataset encoded;
    encoded.log = encode(mapping, dataset.interactions(), UnseenPolicy::Error,
                         dataset.schema().query_column(), dataset.schema().item_column());
    encoded.n_queries = queries.size();
    encoded.n_items = items.size();

    FitArtifacts out;
    out.model = make_model(model_config.name, model_config.params);
    out.model->fit(encoded);
    // canonical column names inside the model file
    out.mapping.columns.emplace_back("query_id", queries);
    out.mapping.columns.emplace_back("item_id", items);
    return out;
}

}  // namespace

void cmd_fit(const PipelineConfig& config, const std::string& train_path,
             const std::string& model_out, const std::optional<std::string>& model_name) {
    const ModelConfig& model_config = select_model(config, model_name);
    FitArtifacts artifacts = fit_on_log(config, model_config, train_path);
    save_model(model_out, *artifacts.model, artifacts.mapping);
    std::fprintf(stderr, "fit: %s on %s -> %s\n", model_config.name.c_str(), train_path.c_str(),
                 model_out.c_str());
}

void cmd_predict(const PipelineConfig& config, const std::string& model_in,
                 const std::string& queries_path, const std::string& recs_out) {
    if (!fs::exists(model_in)) {
        raise(ErrorCode::UnfittedModel,
              "model file '" + model_in + "' does not exist; run fit first");
    }
    LoadedModel loaded = load_model(model_in);
    EncoderMapping& mapping = loaded.mapping;
    const ColumnMapping& query_map = mapping.at("query_id");

    // queries to predict for: the distinct queries of the given file, or
    // every fitted query when no file is given
    std::vector<std::string> tokens;
    if (queries_path.empty()) {
        tokens = query_map.inverse;
    } else {
        const InteractionLog log = read_log(config.data, queries_path);
        tokens = distinct_in_order(log.queries);
    }

    // unknown queries get fresh ids past the fitted range; the models treat
    // them as history-less
    ColumnMapping extended = query_map;
    std::vector<std::int32_t> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) {
        extended.insert_if_new(t);
        ids.push_back(extended.lookup(t));
    }
    EncoderMapping decode_mapping;
    decode_mapping.columns.emplace_back("query_id", std::move(extended));
    decode_mapping.columns.emplace_back("item_id", mapping.at("item_id"));

    const EncodedRecommendations recs =
        loaded.model->predict(ids, config.predict.k, config.predict.filter_seen);
    write_recommendations_csv(recs_out, decode(decode_mapping, recs));
    std::fprintf(stderr, "predict: %zu queries -> %s\n", ids.size(), recs_out.c_str());
}

std::map<std::string, double> cmd_evaluate(const PipelineConfig& config,
                                           const std::string& recs_path,
                                           const std::string& test_path,
                                           const std::optional<std::string>& train_path,
                                           const std::string& run_name, Experiment& table) {
    if (config.metrics.empty()) raise(ErrorCode::ConfigError, "config has no 'metrics' section");
    require_file(recs_path, "recommendations");
    require_file(test_path, "test");

    const RawRecommendations raw_recs = read_recommendations_csv(recs_path);
    const InteractionLog test_log = read_log(config.data, test_path);
    std::optional<InteractionLog> train_log;
    if (train_path) {
        require_file(*train_path, "train");
        train_log = read_log(config.data, *train_path);
    }
    std::optional<RawRecommendations> baseline;
    if (config.baseline_recs_path) {
        require_file(*config.baseline_recs_path, "baseline recommendations");
        baseline = read_recommendations_csv(*config.baseline_recs_path);
    }

    // local dense ids over everything this evaluation touches
    ColumnMapping queries, items;
    auto absorb_log = [&](const InteractionLog& log) {
        for (const auto& t : log.queries) queries.insert_if_new(t);
        for (const auto& t : log.items) items.insert_if_new(t);
    };
    auto absorb_recs = [&](const RawRecommendations& recs) {
        for (const auto& q : recs.queries) queries.insert_if_new(q);
        for (const auto& list : recs.entries) {
            for (const auto& e : list) items.insert_if_new(e.item);
        }
    };
    if (train_log) absorb_log(*train_log);
    absorb_log(test_log);
    absorb_recs(raw_recs);
    if (baseline) absorb_recs(*baseline);

    auto encode_recs = [&](const RawRecommendations& recs) {
        EncodedRecommendations out;
        out.k = recs.k;
        for (std::size_t g = 0; g < recs.queries.size(); ++g) {
            out.queries.push_back(queries.lookup(recs.queries[g]));
            std::vector<EncodedRecommendations::Entry> list;
            list.reserve(recs.entries[g].size());
            for (const auto& e : recs.entries[g]) list.push_back({items.lookup(e.item), e.score});
            out.entries.push_back(std::move(list));
        }
        return out;
    };
    auto encode_log = [&](const InteractionLog& log) {
        EncodedLog out;
        out.reserve(log.size());
        for (std::size_t r = 0; r < log.size(); ++r) {
            out.push_back(queries.lookup(log.queries[r]), items.lookup(log.items[r]),
                          log.timestamps[r], log.ratings[r]);
        }
        return out;
    };

    const EncodedRecommendations recs = encode_recs(raw_recs);
    const GroundTruth gt = GroundTruth::from_log(encode_log(test_log), config.gt_rating_threshold);
    std::optional<EncodedLog> train_encoded;
    if (train_log) train_encoded = encode_log(*train_log);
    std::optional<EncodedRecommendations> baseline_encoded;
    if (baseline) baseline_encoded = encode_recs(*baseline);

    // per-item categories for categorical_diversity
    std::vector<std::string> categories;
    if (config.category_column) {
        if (!config.data.item_features) {
            raise(ErrorCode::MissingInput,
                  "category_column is set but the config has no item_features");
        }
        const auto features = load_features(config.data.item_features, config.data.delimiter);
        const FeatureTable::Column* column = features->find(*config.category_column);
        if (!column || column->type != FeatureType::Categorical) {
            raise(ErrorCode::MissingInput, "item_features has no categorical column '" +
                                               *config.category_column + "'");
        }
        categories.assign(static_cast<std::size_t>(items.size()), std::string());
        for (std::size_t r = 0; r < features->keys.size(); ++r) {
            const std::int32_t id = items.lookup(features->keys[r]);
            if (id >= 0) categories[id] = column->categorical[r];
        }
    }

    EvaluationInputs inputs;
    inputs.recs = &recs;
    inputs.ground_truth = &gt;
    if (train_encoded) inputs.train = &*train_encoded;
    if (baseline_encoded) inputs.baseline = &*baseline_encoded;
    if (config.category_column) inputs.item_categories = &categories;

    const std::map<std::string, double> values = offline_metrics(inputs, config.metrics);
    table.add(run_name, values);
    return values;
}

void write_report(const std::string& report_path, const Experiment& table,
                  const std::string& sort_column) {
    json runs = json::object();
    for (const auto& run : table.run_names()) {
        json row = json::object();
        for (const auto& col : table.columns()) {
            if (const auto v = table.cell(run, col)) row[col] = *v;
        }
        runs[run] = std::move(row);
    }
    json report;
    report["runs"] = std::move(runs);
    if (!sort_column.empty()) report["sorted_by"] = sort_column;

    std::ofstream json_out(report_path + ".json");
    if (!json_out) raise(ErrorCode::IoError, "cannot write '" + report_path + ".json'");
    json_out << report.dump(2) << '\n';

    std::ofstream csv_out(report_path + ".csv");
    if (!csv_out) raise(ErrorCode::IoError, "cannot write '" + report_path + ".csv'");
    csv_out << table.to_csv(sort_column);
}

void cmd_optimize(const PipelineConfig& config, const std::string& train_path,
                  const std::string& valid_path) {
    if (!config.search_space) raise(ErrorCode::ConfigError, "config has no 'search_space'");
    if (config.models.size() != 1) {
        raise(ErrorCode::ConfigError, "optimize requires exactly one model in the config");
    }
    const ModelConfig& model_config = config.models.front();

    const InteractionLog train_raw = read_log(config.data, train_path);
    const InteractionLog valid_raw = read_log(config.data, valid_path);

    ColumnMapping queries, items;
    for (const auto& log : {&train_raw, &valid_raw}) {
        for (const auto& t : log->queries) queries.insert_if_new(t);
        for (const auto& t : log->items) items.insert_if_new(t);
    }
    auto encode_log = [&](const InteractionLog& log) {
        EncodedLog out;
        out.reserve(log.size());
        for (std::size_t r = 0; r < log.size(); ++r) {
            out.push_back(queries.lookup(log.queries[r]), items.lookup(log.items[r]),
                          log.timestamps[r], log.ratings[r]);
        }
        return out;
    };
    EncodedDataset train;
    train.log = encode_log(train_raw);
    train.n_queries = queries.size();
    train.n_items = items.size();
    const EncodedLog valid = encode_log(valid_raw);

    ModelFactory factory = [&](const Params& trial_params) {
        json params = model_config.params;
        for (const auto& [key, value] : trial_params) {
            std::visit([&](const auto& v) { params[key] = v; }, value);
        }
        return make_model(model_config.name, params);
    };

    const OptimizeResult result =
        optimize(factory, *config.search_space, config.optimize.budget, train, valid,
                 config.optimize.metric, config.optimize.metric_k, config.seed,
                 config.predict.k, config.predict.filter_seen);

    const std::string key =
        config.optimize.metric + "@" + std::to_string(config.optimize.metric_k);
    json trials = json::array();
    Experiment table;
    for (const Trial& t : result.trials) {
        json entry;
        entry["index"] = t.index;
        json params = json::object();
        for (const auto& [name, value] : t.params) {
            std::visit([&](const auto& v) { params[name] = v; }, value);
        }
        entry["params"] = std::move(params);
        if (t.status == Trial::Status::Ok) {
            entry["status"] = "ok";
            entry[key] = t.metric_value;
            table.add("trial_" + std::to_string(t.index), {{key, t.metric_value}});
        } else {
            entry["status"] = "failed";
            entry["error"] = t.error;
        }
        trials.push_back(std::move(entry));
    }
    json out;
    out["metric"] = key;
    out["best_index"] = result.best.index;
    out["best_value"] = result.best.metric_value;
    json best_params = json::object();
    for (const auto& [name, value] : result.best.params) {
        std::visit([&](const auto& v) { best_params[name] = v; }, value);
    }
    out["best_params"] = std::move(best_params);
    out["trials"] = std::move(trials);

    std::ofstream trials_out(config.output.trials_path);
    if (!trials_out) {
        raise(ErrorCode::IoError, "cannot write '" + config.output.trials_path + "'");
    }
    trials_out << out.dump(2) << '\n';

    std::cout << table.render(key);
    std::fprintf(stderr, "optimize: best trial %lld %s=%.6f -> %s\n",
                 static_cast<long long>(result.best.index), key.c_str(),
                 result.best.metric_value, config.output.trials_path.c_str());
}

void cmd_run(const PipelineConfig& config) {
    if (config.models.empty()) raise(ErrorCode::ConfigError, "config has no 'model' section");
    if (config.metrics.empty()) raise(ErrorCode::ConfigError, "config has no 'metrics' section");

    cmd_split(config);

    const bool multiple = config.models.size() > 1;
    Experiment table;
    const std::string sort_column = first_metric_key(config.metrics);
    for (const auto& model : config.models) {
        const std::string model_path =
            model_suffixed(config.output.model_path, model.name, multiple);
        const std::string recs_path = model_suffixed(config.output.recs_path, model.name, multiple);
        cmd_fit(config, config.output.train_path, model_path, model.name);
        cmd_predict(config, model_path, config.output.test_path, recs_path);
        cmd_evaluate(config, recs_path, config.output.test_path, config.output.train_path,
                     model.name, table);
    }
    write_report(config.output.report_path, table, sort_column);
    std::cout << table.render(sort_column);
}

}  // namespace recsmith
