#pragma once
/**
 * @file
 * Quantum convolution layer and the classical layer stack.
 *
 * Images enter the network as H x W x C in [0, 1]. The quantum layer, when
 * present, is always first and emits F x H' x W'; every classical spatial
 * layer works channels-first. A network whose first layer is classical gets
 * its input transposed to C x H x W.
 */

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qconv/ansatz.hpp"
#include "qconv/grad.hpp"
#include "qconv/noise.hpp"
#include "qconv/tensor.hpp"

namespace qconv {

struct QuantumConvLayer {
    AnsatzConfig config;
    CircuitSpec circuit;
    std::size_t filters;
    std::vector<ParamVector> filter_params;
    /// Window step along image rows / columns.
    std::size_t stride_rows;
    std::size_t stride_cols;
    std::optional<NoiseConfig> noise;
};

/// Builds the circuit and draws every exponent uniformly from [-0.5, 0.5].
/// A zero stride means "kernel side" on that axis.
QuantumConvLayer make_qconv_layer(const AnsatzConfig &config, std::size_t filters, std::uint64_t seed,
                                  std::size_t stride_rows = 0, std::size_t stride_cols = 0,
                                  std::optional<NoiseConfig> noise = std::nullopt);

/// 2D cross-correlation, stride 1, no padding. weights: out x in x k x k.
struct Conv2d {
    std::size_t in_channels;
    std::size_t out_channels;
    std::size_t kernel = 2;
    std::vector<double> weights;
    std::vector<double> biases;
};

struct MaxPool {
    std::size_t size = 2;
};

struct Flatten {};

/// weights: outputs x inputs.
struct Dense {
    std::size_t inputs;
    std::size_t outputs;
    std::vector<double> weights;
    std::vector<double> biases;
};

struct ReLU {};
struct Softmax {};

using Layer = std::variant<QuantumConvLayer, Conv2d, MaxPool, Flatten, Dense, ReLU, Softmax>;

std::string layer_name(const Layer &layer);

struct Network {
    /// Image dims, H x W x C.
    std::vector<std::size_t> input_dims;
    std::vector<Layer> layers;
};

/// Output dims of every layer; throws Shape naming the first layer that
/// does not compose, Config if a quantum layer is not first or the last
/// layer is not Softmax.
std::vector<std::vector<std::size_t>> infer_shapes(const Network &net);
std::size_t num_classes(const Network &net);

/// Controls noisy evaluation. `stream` separates trajectory seeds between
/// batches; `trajectories` (0 = layer default) overrides the layer count.
struct EvalContext {
    std::uint64_t stream = 0;
    std::size_t trajectories = 0;
};

struct WindowGrid {
    std::size_t rows;
    std::size_t cols;
    [[nodiscard]] std::size_t count() const noexcept { return rows * cols; }
};

WindowGrid window_grid(const QuantumConvLayer &layer, std::size_t image_rows, std::size_t image_cols);

Tensor qconv_forward(const QuantumConvLayer &layer, const Tensor &image, const EvalContext &ctx = {});

/// One gradient vector per filter.
std::vector<ParamVector> qconv_backward(const QuantumConvLayer &layer, const Tensor &image, const Tensor &upstream,
                                        const EvalContext &ctx = {});

Tensor classical_forward(const Layer &layer, const Tensor &input);

struct LayerGradient {
    Tensor input;
    /// Weights then biases for Conv2d / Dense; empty otherwise.
    std::vector<std::vector<double>> params;
};

LayerGradient classical_backward(const Layer &layer, const Tensor &cached_input, const Tensor &upstream);

/// activations[0] is the (possibly transposed) input, activations[i + 1]
/// the output of layer i.
struct ForwardTrace {
    std::vector<Tensor> activations;
};

/// Class probabilities. Fills `trace` when given.
Tensor network_forward(const Network &net, const Tensor &image, const EvalContext &ctx = {},
                       ForwardTrace *trace = nullptr);

/// Named view of one trainable block. Order is stable: per layer, quantum
/// filters in order, or weights then biases.
struct ParamBlock {
    std::string name;
    std::span<double> values;
};

std::vector<ParamBlock> parameter_blocks(Network &net);
std::vector<std::string> parameter_names(const Network &net);
std::vector<std::size_t> parameter_sizes(const Network &net);
std::size_t parameter_count(const Network &net);

using Gradients = std::vector<std::vector<double>>;

struct BackwardResult {
    double loss;
    Tensor probabilities;
    Gradients grads;
};

/// Propagates `upstream` (gradient w.r.t. the network output) back through
/// a recorded trace.
Gradients backward_from_trace(const Network &net, const ForwardTrace &trace, const Tensor &upstream,
                              const EvalContext &ctx = {});

/// Cross-entropy loss and its gradient for one labelled image.
BackwardResult network_backward(const Network &net, const Tensor &image, std::size_t label,
                                const EvalContext &ctx = {});

/// Incremental builder that tracks shapes and initializes weights
/// (uniform +-sqrt(6/(fan_in+fan_out)), zero biases) from one seed.
class NetworkBuilder {
  public:
    NetworkBuilder(std::vector<std::size_t> image_dims, std::uint64_t seed);

    NetworkBuilder &qconv(const AnsatzConfig &config, std::size_t filters, std::size_t stride_rows = 0,
                          std::size_t stride_cols = 0, std::optional<NoiseConfig> noise = std::nullopt);
    NetworkBuilder &conv(std::size_t out_channels, std::size_t kernel = 2);
    NetworkBuilder &pool(std::size_t size = 2);
    NetworkBuilder &flatten();
    NetworkBuilder &dense(std::size_t outputs);
    NetworkBuilder &relu();
    NetworkBuilder &softmax();

    [[nodiscard]] const std::vector<std::size_t> &current_dims() const noexcept { return dims_; }
    Network build() const;

  private:
    std::uint64_t next_seed();

    Network net_;
    std::vector<std::size_t> dims_;
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

struct HybridOptions {
    AnsatzConfig ansatz;
    std::size_t filters = 8;
    std::size_t stride_rows = 0;
    std::size_t stride_cols = 0;
    std::size_t hidden = 32;
    std::size_t classes = 10;
    std::uint64_t seed = 0;
    std::optional<NoiseConfig> noise;
};

/// qconv -> flatten -> dense(hidden) -> ReLU -> dense(classes) -> softmax
Network hybrid_dense_net(const std::vector<std::size_t> &image_dims, const HybridOptions &options);

/// qconv -> conv(32) -> ReLU -> pool -> conv(64) -> ReLU -> flatten ->
/// dense(256) -> ReLU -> dense(classes) -> softmax
Network hybrid_conv_net(const std::vector<std::size_t> &image_dims, const HybridOptions &options);

/// conv(8) -> conv(32) -> pool -> conv(64) -> dense(256) -> dense(classes),
/// 2x2 kernels, ReLU after every hidden layer.
Network classical_benchmark_net(const std::vector<std::size_t> &image_dims, std::size_t classes,
                                std::uint64_t seed);

} // namespace qconv
