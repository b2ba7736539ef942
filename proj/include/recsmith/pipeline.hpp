#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "recsmith/csv.hpp"
#include "recsmith/filters.hpp"
#include "recsmith/metrics.hpp"
#include "recsmith/splitters.hpp"
#include "recsmith/tuning.hpp"

namespace recsmith {

struct FeatureFileConfig {
    std::string path;
    std::string key;
    std::vector<std::string> categorical;
    std::vector<std::string> numerical;
};

struct DataConfig {
    std::string path;
    std::string delimiter = ",";
    ColumnMap columns;
    std::optional<FeatureFileConfig> item_features;
    std::optional<FeatureFileConfig> user_features;
};

struct ModelConfig {
    std::string name;
    nlohmann::json params;  // object, may be empty
};

struct PredictConfig {
    int k = 10;
    bool filter_seen = true;
};

struct OutputConfig {
    std::string recs_path = "recommendations.csv";
    std::string report_path = "report";  // writes <report>.json and <report>.csv
    std::string train_path = "train.csv";
    std::string test_path = "test.csv";
    std::string model_path = "model.bin";
    std::string trials_path = "trials.json";
};

struct OptimizeConfig {
    std::int64_t budget = 16;
    std::string metric = "ndcg";
    int metric_k = 10;
};

/// Everything a pipeline run needs, parsed from one JSON file. Relative
/// paths resolve against the config file's directory.
struct PipelineConfig {
    DataConfig data;
    std::vector<FilterSpec> filters;
    std::optional<SplitConfig> split;
    std::vector<ModelConfig> models;
    PredictConfig predict;
    std::vector<MetricSpec> metrics;
    std::optional<double> gt_rating_threshold;
    std::optional<std::string> baseline_recs_path;  // extra input for unexpectedness
    std::optional<std::string> category_column;     // extra input for categorical_diversity
    OutputConfig output;
    std::uint64_t seed = 0;
    std::optional<SearchSpace> search_space;
    OptimizeConfig optimize;
};

/// Parses and validates; raises ConfigError with the offending JSON path.
PipelineConfig load_config(const std::string& path);
PipelineConfig parse_config(const nlohmann::json& root, const std::string& base_dir);

// Subcommand entry points. Optional arguments override the config's paths.
// All of them raise recsmith::Error on failure; artifacts are only written
// once their inputs validated.

void cmd_split(const PipelineConfig& config);

void cmd_fit(const PipelineConfig& config, const std::string& train_path,
             const std::string& model_out, const std::optional<std::string>& model_name);

void cmd_predict(const PipelineConfig& config, const std::string& model_in,
                 const std::string& queries_path, const std::string& recs_out);

/// Evaluates one recommendations file; returns the metric map and appends a
/// row to `table` under `run_name`.
std::map<std::string, double> cmd_evaluate(const PipelineConfig& config,
                                           const std::string& recs_path,
                                           const std::string& test_path,
                                           const std::optional<std::string>& train_path,
                                           const std::string& run_name, Experiment& table);

void cmd_optimize(const PipelineConfig& config, const std::string& train_path,
                  const std::string& valid_path);

/// Full pipeline: ingest -> filter -> split -> fit -> predict -> evaluate,
/// chaining the stage commands through the configured artifact paths and
/// printing the experiment table to stdout.
void cmd_run(const PipelineConfig& config);

/// Writes <report_path>.json and <report_path>.csv for the accumulated runs.
void write_report(const std::string& report_path, const Experiment& table,
                  const std::string& sort_column);

/// Suffixes a path with the model name before its extension when a config
/// lists several models ("recs.csv" -> "recs.item_knn.csv").
std::string model_suffixed(const std::string& path, const std::string& model_name,
                           bool multiple);

}  // namespace recsmith
