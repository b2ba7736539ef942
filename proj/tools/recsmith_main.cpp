#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

#include "recsmith/error.hpp"
#include "recsmith/parallel.hpp"
#include "recsmith/pipeline.hpp"

namespace {

// --threads flag, RECSMITH_THREADS env, hardware default, in that order
void configure_threads(int flag_value) {
    if (flag_value > 0) {
        recsmith::set_max_threads(static_cast<std::size_t>(flag_value));
        return;
    }
    if (const char* env = std::getenv("RECSMITH_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) recsmith::set_max_threads(static_cast<std::size_t>(n));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"recsmith - config-driven top-N recommendation pipeline"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    int threads = 0;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> metrics_override;
    app.add_option("--config", config_path, "pipeline config (JSON)")->required();
    app.add_option("--threads", threads, "max worker threads (default: all cores)");
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--metrics", metrics_override, "override config metrics, e.g. ndcg@10,map@10");

    CLI::App* split = app.add_subcommand("split", "filter the data and write train/test CSVs");

    CLI::App* fit = app.add_subcommand("fit", "fit a model on a train CSV and serialize it");
    std::string fit_train, fit_model_out, fit_model_name;
    fit->add_option("--train", fit_train, "train CSV (default: output.train_path)");
    fit->add_option("--model-out", fit_model_out, "model file (default: output.model_path)");
    fit->add_option("--model-name", fit_model_name, "which configured model to fit");

    CLI::App* predict = app.add_subcommand("predict", "load a model and write recommendations");
    std::string predict_model_in, predict_queries, predict_out;
    predict->add_option("--model-in", predict_model_in, "model file (default: output.model_path)");
    predict->add_option("--queries", predict_queries,
                        "interactions CSV whose distinct queries to predict for "
                        "(default: output.test_path; 'all' = every fitted query)");
    predict->add_option("--out", predict_out, "recommendations CSV (default: output.recs_path)");

    CLI::App* evaluate = app.add_subcommand("evaluate", "score a recommendations file");
    std::string eval_recs, eval_test, eval_train, eval_run_name = "recs";
    bool eval_no_train = false;
    evaluate->add_option("--recs", eval_recs, "recommendations CSV (default: output.recs_path)");
    evaluate->add_option("--test", eval_test, "test CSV (default: output.test_path)");
    evaluate->add_option("--train", eval_train, "train CSV (default: output.train_path)");
    evaluate->add_flag("--no-train", eval_no_train, "evaluate without a train log");
    evaluate->add_option("--run-name", eval_run_name, "row name in the report");

    CLI::App* optimize = app.add_subcommand("optimize", "hyperparameter search");
    std::string opt_train, opt_valid, opt_metric;
    std::int64_t opt_budget = 0;
    optimize->add_option("--train", opt_train, "train CSV (default: output.train_path)");
    optimize->add_option("--valid", opt_valid, "validation CSV (default: output.test_path)");
    optimize->add_option("--budget", opt_budget, "number of trials (overrides config)");
    optimize->add_option("--metric", opt_metric, "objective, e.g. ndcg@10 (overrides config)");

    CLI::App* run = app.add_subcommand("run", "full pipeline: split, fit, predict, evaluate");

    CLI11_PARSE(app, argc, argv);
    configure_threads(threads);

    try {
        recsmith::PipelineConfig config = recsmith::load_config(config_path);
        if (seed_override) {
            config.seed = *seed_override;
            if (config.split) config.split->seed = *seed_override;
        }
        if (metrics_override) config.metrics = recsmith::parse_metric_list(*metrics_override);

        if (split->parsed()) {
            recsmith::cmd_split(config);
        } else if (fit->parsed()) {
            recsmith::cmd_fit(config, fit_train.empty() ? config.output.train_path : fit_train,
                              fit_model_out.empty() ? config.output.model_path : fit_model_out,
                              fit_model_name.empty()
                                  ? std::nullopt
                                  : std::make_optional(fit_model_name));
        } else if (predict->parsed()) {
            std::string queries = predict_queries.empty() ? config.output.test_path
                                                          : predict_queries;
            if (queries == "all") queries.clear();
            recsmith::cmd_predict(
                config, predict_model_in.empty() ? config.output.model_path : predict_model_in,
                queries, predict_out.empty() ? config.output.recs_path : predict_out);
        } else if (evaluate->parsed()) {
            recsmith::Experiment table;
            std::optional<std::string> train;
            if (!eval_no_train) {
                train = eval_train.empty() ? config.output.train_path : eval_train;
            }
            recsmith::cmd_evaluate(config,
                                   eval_recs.empty() ? config.output.recs_path : eval_recs,
                                   eval_test.empty() ? config.output.test_path : eval_test, train,
                                   eval_run_name, table);
            std::string sort_column;
            if (!config.metrics.empty()) {
                sort_column = config.metrics.front().name + "@" +
                              std::to_string(config.metrics.front().k_values.front());
            }
            recsmith::write_report(config.output.report_path, table, sort_column);
            std::fputs(table.render(sort_column).c_str(), stdout);
        } else if (optimize->parsed()) {
            if (opt_budget > 0) config.optimize.budget = opt_budget;
            if (!opt_metric.empty()) {
                const auto specs = recsmith::parse_metric_list(opt_metric);
                if (specs.size() != 1 || specs[0].k_values.size() != 1) {
                    recsmith::raise(recsmith::ErrorCode::ConfigError,
                                    "--metric expects a single name@k");
                }
                config.optimize.metric = specs[0].name;
                config.optimize.metric_k = specs[0].k_values[0];
            }
            recsmith::cmd_optimize(config,
                                   opt_train.empty() ? config.output.train_path : opt_train,
                                   opt_valid.empty() ? config.output.test_path : opt_valid);
        } else if (run->parsed()) {
            recsmith::cmd_run(config);
        }
    } catch (const recsmith::Error& e) {
        std::fprintf(stderr, "recsmith: error [%s] %s\n", e.code_name(), e.what());
        return static_cast<int>(e.category());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "recsmith: error [Internal] %s\n", e.what());
        return 1;
    }
    return 0;
}
