#pragma once
/**
 * @file
 * Optimizers, the mini-batch training loop, evaluation and checkpoints.
 *
 * Every random choice (shuffle order, noisy trajectories) derives from the
 * configured seed, so a noiseless run is bit-reproducible.
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
#include "qconv/loss.hpp"
#include "qconv/metrics.hpp"

namespace qconv {

enum class OptimizerKind { Adam, Sgd };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view name);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

void validate(const OptimizerConfig &config);

/// Adam moments mirror the parameter blocks; SGD keeps them empty.
struct OptimizerState {
    std::uint64_t step = 0;
    Gradients m;
    Gradients v;

    friend bool operator==(const OptimizerState &, const OptimizerState &) = default;
};

OptimizerState make_optimizer_state(const Network &net, const OptimizerConfig &config);

/// One update of every block. Shape error if grads or state do not line up.
void optimizer_step(std::vector<ParamBlock> &params, const Gradients &grads, OptimizerState &state,
                    const OptimizerConfig &config);

struct TrainConfig {
    std::size_t epochs = 90;
    std::size_t batch_size = 10;
    OptimizerConfig optimizer;
    std::uint64_t seed = 0;
    /// Trajectories per noisy evaluation during evaluate() (training uses
    /// the layer's own count).
    std::size_t eval_trajectories = 256;
};

void validate(const TrainConfig &config);

/// Mean loss / gradient over a batch plus how many argmax predictions hit.
struct BatchResult {
    double loss;
    std::size_t correct;
    Gradients grads;
};

BatchResult batch_gradient(const Network &net, const LabeledImageSet &data, std::span<const std::size_t> indices,
                           const EvalContext &ctx = {});

struct EpochRecord {
    std::size_t epoch;
    double train_loss;
    double train_accuracy;
    std::optional<double> eval_accuracy;
    double wall_time_s;
};

struct TrainState {
    OptimizerState optimizer;
    std::size_t epochs_done = 0;
};

/// One seeded shuffled pass with an optimizer update after every batch.
/// Loss and accuracy are accumulated from the pre-update forward passes.
EpochRecord train_epoch(Network &net, const LabeledImageSet &data, const TrainConfig &config, TrainState &state);

std::size_t argmax(std::span<const double> values);

struct EvalResult {
    double accuracy;
    double loss;
    ConfusionMatrix confusion;
    std::vector<std::size_t> predictions;
};

/// Deterministic given weights and `config.seed`.
EvalResult evaluate(const Network &net, const LabeledImageSet &data, const TrainConfig &config = {});

struct RunRecord {
    std::vector<EpochRecord> epochs;
    std::optional<ConfusionMatrix> confusion;
};

inline constexpr const char *kRunCsvHeader = "epoch,train_loss,train_accuracy,eval_accuracy,wall_time_s";

std::string run_csv(const RunRecord &record);
/// Parses a run CSV back (confusion is not part of it). Format error with
/// the line number on malformed input.
RunRecord parse_run_csv(std::string_view text);

using EpochCallback = std::function<void(const EpochRecord &)>;

/// `config.epochs` epochs; evaluates `eval_set` after each when given.
/// The final confusion matrix comes from `eval_set`, else the training set.
RunRecord train(Network &net, const LabeledImageSet &train_set, const LabeledImageSet *eval_set,
                const TrainConfig &config, TrainState &state, const EpochCallback &on_epoch = {});

inline constexpr char kCheckpointMagic[4] = {'Q', 'C', 'N', 'V'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedBlock {
    std::string name;
    std::vector<double> values;

    friend bool operator==(const NamedBlock &, const NamedBlock &) = default;
};

std::string encode_checkpoint(const std::vector<NamedBlock> &blocks);
/// Format error citing the byte offset of the first problem; Version error
/// on an unknown format version.
std::vector<NamedBlock> decode_checkpoint(std::string_view bytes);

/// Parameters under their block names, then "optimizer.step" and the Adam
/// moments as "optimizer.m.<name>" / "optimizer.v.<name>".
std::vector<NamedBlock> checkpoint_blocks(const Network &net, const OptimizerState &state);

void save_checkpoint(const std::filesystem::path &path, const Network &net, const OptimizerState &state);

/// Fills `net` (whose architecture must match) and `state`. Nothing is
/// modified unless the whole file loads.
void load_checkpoint(const std::filesystem::path &path, Network &net, OptimizerState &state);

} // namespace qconv
