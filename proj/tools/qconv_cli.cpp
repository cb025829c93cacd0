// qconv: train, evaluate and report on hybrid quantum-classical CNN runs.
#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "qconv/error.hpp"
#include "qconv/experiment.hpp"
#include "qconv/io.hpp"

namespace {

int run(int argc, char **argv) {
    CLI::App app{"Hybrid quantum-classical CNN experiments"};
    app.require_subcommand(1);

    std::string train_config;
    auto *train_cmd = app.add_subcommand("train", "Train a model described by a JSON config");
    train_cmd->add_option("config", train_config, "Experiment config (JSON)")->required();
    bool quiet = false;
    train_cmd->add_flag("-q,--quiet", quiet, "Suppress per-epoch progress");

    std::string ckpt;
    std::string eval_config;
    std::string eval_out;
    auto *eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the configured eval split");
    eval_cmd->add_option("checkpoint", ckpt, "checkpoint.bin written by train")->required();
    eval_cmd->add_option("config", eval_config, "Experiment config the checkpoint was trained with")->required();
    eval_cmd->add_option("--out", eval_out, "Output directory (default: the checkpoint's directory)");

    std::vector<std::string> run_dirs;
    qconv::ReportOptions report_opts;
    std::string report_out;
    std::string units = "fraction";
    auto *report_cmd = app.add_subcommand("report", "Smoothness statistics of one or more run directories");
    report_cmd->add_option("runs", run_dirs, "Run directories containing run.csv")->required();
    report_cmd->add_option("--window", report_opts.window, "Savitzky-Golay window (odd)")->capture_default_str();
    report_cmd->add_option("--polyorder", report_opts.polyorder, "Savitzky-Golay polynomial order")
        ->capture_default_str();
    report_cmd->add_option("--out", report_out, "Write the CSV here instead of stdout");
    report_cmd->add_option("--accuracy-units", units, "fraction, percent or both")
        ->check(CLI::IsMember({"fraction", "percent", "both"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e);
    }

    if (*train_cmd) {
        const auto config = qconv::load_experiment_config(train_config);
        qconv::ProgressFn progress;
        if (!quiet) {
            progress = [](const std::string &line) { std::cerr << line << '\n'; };
        }
        const auto out = qconv::run_train(config, progress);
        std::cout << "wrote " << out.run_csv.string() << ", " << out.checkpoint.string() << ", "
                  << out.resolved_config.string() << '\n';
    } else if (*eval_cmd) {
        const auto config = qconv::load_experiment_config(eval_config);
        const std::filesystem::path dir =
            eval_out.empty() ? std::filesystem::path(ckpt).parent_path() : std::filesystem::path(eval_out);
        const auto out = qconv::run_eval(ckpt, config, dir.empty() ? "." : dir);
        std::cout << "accuracy " << qconv::format_double(out.result.accuracy) << " on " << out.samples
                  << " samples; wrote " << out.eval_csv.string() << ", " << out.confusion_csv.string() << '\n';
    } else if (*report_cmd) {
        report_opts.accuracy_units = units == "percent" ? qconv::AccuracyUnits::Percent
                                     : units == "both"  ? qconv::AccuracyUnits::Both
                                                        : qconv::AccuracyUnits::Fraction;
        std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
        const std::string csv = qconv::smoothness_csv(qconv::smoothness_report(dirs, report_opts));
        if (report_out.empty()) {
            std::cout << csv;
        } else {
            qconv::write_file_atomic(report_out, csv);
        }
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    try {
        return run(argc, argv);
    } catch (const qconv::Error &e) {
        std::cerr << "qconv: error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "qconv: error: " << e.what() << '\n';
        return 2;
    }
}
