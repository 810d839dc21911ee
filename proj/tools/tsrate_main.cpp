// Command line driver for the forecasting robustness rating pipeline:
//   prepare  -> windows, spectrogram images, exchange manifest
//   forecast -> built-in systems + imported external predictions
//   rate     -> residuals, statistical and causal analysis, rating tables
//   report   -> re-render rating tables from persisted scores
#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

#include "tsrate/config.hpp"
#include "tsrate/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    unsigned threads = 0;
};

tsrate::RunConfig load(const CommonArgs& args) {
    if (args.config_path.empty())
        tsrate::fail_validation("missing --config");
    tsrate::RunConfig cfg = tsrate::load_config(args.config_path);
    if (const char* ws = std::getenv("TSRATE_WORKSPACE"); ws && *ws)
        cfg.workspace = ws;
    return cfg;
}

unsigned worker_count(const CommonArgs& args) {
    if (args.threads > 0) return args.threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robustness rating for time-series forecasting systems"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string from_scores;
    std::string scores_out = "reports";
    std::size_t levels = 3;

    auto add_common = [&](CLI::App* cmd, bool config_required) {
        cmd->add_option("--config", args.config_path, "run configuration (JSON)")
            ->required(config_required);
        cmd->add_option("--threads", args.threads,
                        "worker threads (default: hardware concurrency)");
    };

    CLI::App* prepare = app.add_subcommand("prepare", "build windows, images and manifest");
    add_common(prepare, true);
    CLI::App* forecast = app.add_subcommand("forecast", "run forecasting systems");
    add_common(forecast, true);
    CLI::App* rate = app.add_subcommand("rate", "compute raw scores and ratings");
    add_common(rate, false);
    rate->add_option("--from-scores", from_scores,
                     "rate a raw score table (metric,perturbation,system,score) directly");
    rate->add_option("--out", scores_out, "report directory for --from-scores");
    rate->add_option("--levels", levels, "rating levels for --from-scores");
    CLI::App* report = app.add_subcommand("report", "re-render rating reports");
    add_common(report, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (prepare->parsed()) {
            const auto cfg = load(args);
            const auto summary = tsrate::run_prepare(cfg, worker_count(args));
            print_warnings(summary.warnings);
            std::cout << "entities=" << summary.entities
                      << " windows=" << summary.control_windows
                      << " numeric_variants=" << summary.numeric_variants
                      << " images=" << summary.images << "\n";
        } else if (forecast->parsed()) {
            const auto cfg = load(args);
            const auto summary = tsrate::run_forecast(cfg, worker_count(args));
            print_warnings(summary.warnings);
            std::cout << "systems=" << summary.systems
                      << " records=" << summary.records << "\n";
        } else if (rate->parsed()) {
            if (!from_scores.empty()) {
                const std::size_t rows =
                    tsrate::rate_from_scores(from_scores, scores_out, levels);
                std::cout << "rating_rows=" << rows << " out=" << scores_out << "\n";
            } else {
                const auto cfg = load(args);
                const auto summary = tsrate::run_rate(cfg, worker_count(args));
                print_warnings(summary.warnings);
                std::cout << "systems=" << summary.systems
                          << " perturbations=" << summary.perturbations
                          << " windows=" << summary.windows << "\n";
            }
        } else if (report->parsed()) {
            const auto cfg = load(args);
            const std::size_t rows = tsrate::run_report(cfg);
            std::cout << "rating_rows=" << rows << "\n";
        }
    } catch (const tsrate::Error& e) {
        std::cerr << "{\"error\":{\"kind\":\"" << e.kind_name() << "\",\"message\":\""
                  << e.what() << "\"}}\n";
        return e.kind() == tsrate::ErrorKind::Validation ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "{\"error\":{\"kind\":\"internal\",\"message\":\"" << e.what()
                  << "\"}}\n";
        return 1;
    }
    return 0;
}
