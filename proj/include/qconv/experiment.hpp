#pragma once
/**
 * @file
 * Experiment configuration (flat JSON object) and the train / eval / report
 * pipelines behind the command-line tool.
 *
 * Every omitted key resolves to a documented default; the resolved object
 * is written next to the run outputs so a run directory is self-describing.
 */

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qconv/data.hpp"
#include "qconv/layers.hpp"
#include "qconv/train.hpp"

namespace qconv {

enum class DatasetKind { Mnist, FashionMnist, Cifar10Small };
enum class Architecture { HybridDense, HybridConv, ClassicalBenchmark };
/// Which samples fill the eval_accuracy column and `eval`.
enum class EvalSplit { Holdout, Train, None };

struct ExperimentConfig {
    DatasetKind dataset = DatasetKind::Cifar10Small;
    /// Directory holding the canonical file names; explicit paths win.
    std::filesystem::path data_dir;
    std::filesystem::path train_images;
    std::filesystem::path train_labels;
    std::vector<std::filesystem::path> cifar_batches;
    /// Training samples drawn from the full set (0 = all).
    std::size_t samples = 200;
    EvalSplit eval = EvalSplit::Holdout;
    std::size_t eval_samples = 200;
    /// Square target side for area downscaling (0 = native).
    std::size_t resolution = 10;

    Architecture architecture = Architecture::HybridDense;
    AnsatzKind ansatz = AnsatzKind::FQconv;
    std::size_t kernel_rows = 2;
    std::size_t kernel_cols = 2;
    /// 0 = pick per ansatz: S*T for FQconv on multi-channel kernels (every
    /// controlled pair crosses channels), 1 otherwise.
    std::size_t circuit_stride = 0;
    /// Empty = all kernel qubits.
    std::vector<std::size_t> observable;
    std::size_t filters = 8;
    /// 0 = kernel side on each axis.
    std::size_t spatial_stride = 0;
    std::size_t hidden = 32;
    std::size_t classes = 10;

    TrainConfig train;
    double noise_level = 0.0;
    std::size_t noise_trajectories = 8;
    std::size_t threads = 0;
    bool record_wall_time = true;
    std::filesystem::path output_dir = "run";
};

std::string_view to_string(DatasetKind kind);
std::string_view to_string(Architecture arch);
std::string_view to_string(EvalSplit split);

/// Parses a flat JSON object. Config error naming the key (or the line and
/// column of a syntax error); unknown keys are rejected. Relative paths are
/// resolved against `base_dir`.
ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path &base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path &path);

/// Every field, defaults included, as pretty-printed JSON.
std::string resolved_config_json(const ExperimentConfig &config);

/// Channels of the configured dataset (1 for IDX, 3 for CIFAR).
std::size_t dataset_channels(const ExperimentConfig &config);

/// Kernel and circuit built from the config; throws the builder's Config
/// error (citing the stride invariant) when they do not fit.
AnsatzConfig ansatz_config(const ExperimentConfig &config);

Network build_network(const ExperimentConfig &config);

struct PreparedData {
    LabeledImageSet train;
    std::optional<LabeledImageSet> eval;
};

/// Loads, splits (disjoint train / holdout draws from one seeded
/// permutation) and downscales. Io error naming any missing file.
PreparedData prepare_data(const ExperimentConfig &config);

struct TrainOutputs {
    RunRecord record;
    std::filesystem::path run_csv;
    std::filesystem::path checkpoint;
    std::filesystem::path resolved_config;
};

using ProgressFn = std::function<void(const std::string &)>;

/// Trains and writes run.csv, checkpoint.bin and config_resolved.json into
/// config.output_dir (each written atomically).
TrainOutputs run_train(const ExperimentConfig &config, const ProgressFn &progress = {});

struct EvalOutputs {
    EvalResult result;
    std::size_t samples;
    std::filesystem::path eval_csv;
    std::filesystem::path confusion_csv;
};

/// Evaluates a checkpoint on the configured eval split (training subset
/// when the split is "none") and writes eval.csv and confusion.csv into
/// `out_dir`.
EvalOutputs run_eval(const std::filesystem::path &checkpoint, const ExperimentConfig &config,
                     const std::filesystem::path &out_dir);

enum class AccuracyUnits { Fraction, Percent, Both };

struct ReportOptions {
    std::size_t window = kDefaultSmoothingWindow;
    std::size_t polyorder = kDefaultSmoothingOrder;
    AccuracyUnits accuracy_units = AccuracyUnits::Fraction;
};

/// Rows "<run>_loss" and "<run>_accuracy" (train accuracy; "_accuracy_pct"
/// in percentage points) for every run directory, in argument order.
std::vector<SmoothnessRow> smoothness_report(const std::vector<std::filesystem::path> &run_dirs,
                                             const ReportOptions &options);

} // namespace qconv
