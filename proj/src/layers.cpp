#include "qconv/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qconv/error.hpp"
#include "qconv/loss.hpp"
#include "qconv/parallel.hpp"

namespace qconv {

namespace {

template <class... Ts> struct overloaded : Ts... {
    using Ts::operator()...;
};

void require_dims(const Tensor &t, const std::vector<std::size_t> &dims, const std::string &what) {
    if (t.dims != dims) {
        fail(ErrorKind::Shape, what + ": expected " + shape_string(dims) + ", got " + shape_string(t.dims));
    }
}

double uniform_between(NoiseRng &rng, double lo, double hi) { return lo + (hi - lo) * uniform_unit(rng); }

std::vector<double> glorot(NoiseRng &rng, std::size_t count, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::vector<double> w(count);
    for (double &v : w) {
        v = uniform_between(rng, -limit, limit);
    }
    return w;
}

std::size_t resolve_stride(std::size_t stride, std::size_t side) { return stride == 0 ? side : stride; }

/// Output dims of one layer given its input dims; throws with a bare message.
std::vector<std::size_t> layer_output_dims(const Layer &layer, const std::vector<std::size_t> &in) {
    return std::visit(
        overloaded{
            [&](const QuantumConvLayer &q) -> std::vector<std::size_t> {
                if (in.size() != 3) {
                    fail(ErrorKind::Shape, "quantum layer needs an H x W x C image, got " + shape_string(in));
                }
                if (in[2] != q.config.shape.channels) {
                    fail(ErrorKind::Shape, "image has " + std::to_string(in[2]) + " channels, kernel expects " +
                                               std::to_string(q.config.shape.channels));
                }
                const WindowGrid grid = window_grid(q, in[0], in[1]);
                return {q.filters, grid.rows, grid.cols};
            },
            [&](const Conv2d &c) -> std::vector<std::size_t> {
                if (in.size() != 3 || in[0] != c.in_channels) {
                    fail(ErrorKind::Shape, "conv expects " + std::to_string(c.in_channels) + " x H x W, got " +
                                               shape_string(in));
                }
                if (in[1] < c.kernel || in[2] < c.kernel) {
                    fail(ErrorKind::Shape, "conv input " + shape_string(in) + " smaller than kernel");
                }
                return {c.out_channels, in[1] - c.kernel + 1, in[2] - c.kernel + 1};
            },
            [&](const MaxPool &p) -> std::vector<std::size_t> {
                if (in.size() != 3 || in[1] < p.size || in[2] < p.size) {
                    fail(ErrorKind::Shape, "pool input " + shape_string(in) + " too small");
                }
                return {in[0], in[1] / p.size, in[2] / p.size};
            },
            [&](const Flatten &) -> std::vector<std::size_t> { return {element_count(in)}; },
            [&](const Dense &d) -> std::vector<std::size_t> {
                if (in.size() != 1 || in[0] != d.inputs) {
                    fail(ErrorKind::Shape,
                         "dense expects " + std::to_string(d.inputs) + " inputs, got " + shape_string(in));
                }
                return {d.outputs};
            },
            [&](const ReLU &) { return in; },
            [&](const Softmax &) -> std::vector<std::size_t> {
                if (in.size() != 1) {
                    fail(ErrorKind::Shape, "softmax expects a vector, got " + shape_string(in));
                }
                return in;
            },
        },
        layer);
}

bool is_quantum(const Layer &layer) { return std::holds_alternative<QuantumConvLayer>(layer); }

/// Gathers one window (rows x cols x C, channel fastest) starting at (r0, c0).
std::vector<double> window_pixels(const Tensor &image, const KernelShape &shape, std::size_t r0, std::size_t c0) {
    std::vector<double> out;
    out.reserve(shape.qubits());
    for (std::size_t r = 0; r < shape.rows; ++r) {
        for (std::size_t c = 0; c < shape.cols; ++c) {
            for (std::size_t ch = 0; ch < shape.channels; ++ch) {
                out.push_back(image(r0 + r, c0 + c, ch));
            }
        }
    }
    return out;
}

std::vector<std::vector<double>> window_angles(const QuantumConvLayer &layer, const Tensor &image,
                                               const WindowGrid &grid) {
    std::vector<std::vector<double>> angles;
    angles.reserve(grid.count());
    for (std::size_t i = 0; i < grid.rows; ++i) {
        for (std::size_t j = 0; j < grid.cols; ++j) {
            angles.push_back(encode_window(
                window_pixels(image, layer.config.shape, i * layer.stride_rows, j * layer.stride_cols),
                layer.config.shape));
        }
    }
    return angles;
}

bool noisy(const QuantumConvLayer &layer) { return layer.noise && layer.noise->level > 0.0; }

NoiseConfig task_noise(const QuantumConvLayer &layer, const EvalContext &ctx, std::size_t task) {
    NoiseConfig cfg = *layer.noise;
    cfg.seed = derive_seed(derive_seed(layer.noise->seed, ctx.stream), task);
    if (ctx.trajectories != 0) {
        cfg.trajectories = ctx.trajectories;
    }
    return cfg;
}

void check_image(const QuantumConvLayer &layer, const Tensor &image) {
    if (image.rank() != 3) {
        fail(ErrorKind::Shape, "quantum layer needs an H x W x C image, got " + shape_string(image.dims));
    }
    (void)layer_output_dims(layer, image.dims);
}

} // namespace

QuantumConvLayer make_qconv_layer(const AnsatzConfig &config, std::size_t filters, std::uint64_t seed,
                                  std::size_t stride_rows, std::size_t stride_cols, std::optional<NoiseConfig> noise) {
    if (filters == 0) {
        fail(ErrorKind::Config, "quantum layer needs at least one filter");
    }
    if (noise) {
        validate(*noise);
    }
    CircuitSpec circuit = build_ansatz(config);
    NoiseRng rng(seed);
    std::vector<ParamVector> params(filters, ParamVector(circuit.num_params()));
    for (auto &filter : params) {
        for (double &theta : filter) {
            theta = uniform_between(rng, -0.5, 0.5);
        }
    }
    return QuantumConvLayer{config,
                            std::move(circuit),
                            filters,
                            std::move(params),
                            resolve_stride(stride_rows, config.shape.rows),
                            resolve_stride(stride_cols, config.shape.cols),
                            noise};
}

std::string layer_name(const Layer &layer) {
    return std::visit(overloaded{
                          [](const QuantumConvLayer &) { return std::string("qconv"); },
                          [](const Conv2d &) { return std::string("conv"); },
                          [](const MaxPool &) { return std::string("pool"); },
                          [](const Flatten &) { return std::string("flatten"); },
                          [](const Dense &) { return std::string("dense"); },
                          [](const ReLU &) { return std::string("relu"); },
                          [](const Softmax &) { return std::string("softmax"); },
                      },
                      layer);
}

std::vector<std::vector<std::size_t>> infer_shapes(const Network &net) {
    if (net.layers.empty()) {
        fail(ErrorKind::Config, "network has no layers");
    }
    if (!std::holds_alternative<Softmax>(net.layers.back())) {
        fail(ErrorKind::Config, "last layer must be softmax");
    }
    if (net.input_dims.size() != 3) {
        fail(ErrorKind::Shape, "network input must be H x W x C, got " + shape_string(net.input_dims));
    }
    std::vector<std::size_t> dims = net.input_dims;
    if (!is_quantum(net.layers.front())) {
        dims = {dims[2], dims[0], dims[1]};
    }
    std::vector<std::vector<std::size_t>> shapes;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (i > 0 && is_quantum(net.layers[i])) {
            fail(ErrorKind::Config, "layer " + std::to_string(i) + ": quantum layer must come first");
        }
        try {
            dims = layer_output_dims(net.layers[i], dims);
        } catch (const Error &e) {
            fail(e.kind(), "layer " + std::to_string(i) + " (" + layer_name(net.layers[i]) + "): " + e.message());
        }
        shapes.push_back(dims);
    }
    return shapes;
}

std::size_t num_classes(const Network &net) { return infer_shapes(net).back().front(); }

WindowGrid window_grid(const QuantumConvLayer &layer, std::size_t image_rows, std::size_t image_cols) {
    const KernelShape &k = layer.config.shape;
    if (layer.stride_rows == 0 || layer.stride_cols == 0) {
        fail(ErrorKind::Config, "spatial stride must be at least 1");
    }
    if (image_rows < k.rows || image_cols < k.cols) {
        fail(ErrorKind::Shape, "image " + std::to_string(image_rows) + "x" + std::to_string(image_cols) +
                                   " smaller than kernel " + std::to_string(k.rows) + "x" + std::to_string(k.cols));
    }
    return {(image_rows - k.rows) / layer.stride_rows + 1, (image_cols - k.cols) / layer.stride_cols + 1};
}

Tensor qconv_forward(const QuantumConvLayer &layer, const Tensor &image, const EvalContext &ctx) {
    check_image(layer, image);
    const WindowGrid grid = window_grid(layer, image.dims[0], image.dims[1]);
    const auto angles = window_angles(layer, image, grid);
    const std::size_t windows = grid.count();
    Tensor out({layer.filters, grid.rows, grid.cols});
    parallel_for(layer.filters * windows, [&](std::size_t task) {
        const std::size_t f = task / windows;
        const std::size_t w = task % windows;
        const auto &params = layer.filter_params[f];
        out.values[task] = noisy(layer)
                               ? noisy_expectation(layer.circuit, params, angles[w], task_noise(layer, ctx, task))
                               : circuit_expectation(layer.circuit, params, angles[w]);
    });
    return out;
}

std::vector<ParamVector> qconv_backward(const QuantumConvLayer &layer, const Tensor &image, const Tensor &upstream,
                                        const EvalContext &ctx) {
    check_image(layer, image);
    const WindowGrid grid = window_grid(layer, image.dims[0], image.dims[1]);
    require_dims(upstream, {layer.filters, grid.rows, grid.cols}, "quantum layer upstream gradient");
    const auto angles = window_angles(layer, image, grid);
    const std::size_t windows = grid.count();
    const std::size_t p = layer.circuit.num_params();

    std::vector<std::vector<double>> partial(layer.filters * windows);
    parallel_for(partial.size(), [&](std::size_t task) {
        if (upstream.values[task] == 0.0) {
            return;
        }
        const std::size_t f = task / windows;
        const std::size_t w = task % windows;
        const auto &params = layer.filter_params[f];
        if (noisy(layer)) {
            const NoiseConfig cfg = task_noise(layer, ctx, task);
            partial[task] = shift_rule_gradient(layer.circuit, params, [&](std::span<const double> shifted) {
                return noisy_expectation(layer.circuit, shifted, angles[w], cfg);
            });
        } else {
            partial[task] = shift_rule_gradient(layer.circuit, params, angles[w]);
        }
    });

    std::vector<ParamVector> grads(layer.filters, ParamVector(p, 0.0));
    for (std::size_t task = 0; task < partial.size(); ++task) {
        if (partial[task].empty()) {
            continue;
        }
        const double u = upstream.values[task];
        auto &g = grads[task / windows];
        for (std::size_t i = 0; i < p; ++i) {
            g[i] += u * partial[task][i];
        }
    }
    return grads;
}

Tensor classical_forward(const Layer &layer, const Tensor &input) {
    const std::vector<std::size_t> out_dims = layer_output_dims(layer, input.dims);
    Tensor out(out_dims);
    std::visit(overloaded{
                   [&](const QuantumConvLayer &q) { out = qconv_forward(q, input); },
                   [&](const Conv2d &c) {
                       const std::size_t h = out_dims[1];
                       const std::size_t w = out_dims[2];
                       const std::size_t k = c.kernel;
                       for (std::size_t o = 0; o < c.out_channels; ++o) {
                           for (std::size_t i = 0; i < h; ++i) {
                               for (std::size_t j = 0; j < w; ++j) {
                                   double acc = c.biases[o];
                                   for (std::size_t ch = 0; ch < c.in_channels; ++ch) {
                                       const double *wk = &c.weights[((o * c.in_channels + ch) * k) * k];
                                       for (std::size_t u = 0; u < k; ++u) {
                                           for (std::size_t v = 0; v < k; ++v) {
                                               acc += wk[u * k + v] * input(ch, i + u, j + v);
                                           }
                                       }
                                   }
                                   out(o, i, j) = acc;
                               }
                           }
                       }
                   },
                   [&](const MaxPool &p) {
                       for (std::size_t ch = 0; ch < out_dims[0]; ++ch) {
                           for (std::size_t i = 0; i < out_dims[1]; ++i) {
                               for (std::size_t j = 0; j < out_dims[2]; ++j) {
                                   double best = -std::numeric_limits<double>::infinity();
                                   for (std::size_t u = 0; u < p.size; ++u) {
                                       for (std::size_t v = 0; v < p.size; ++v) {
                                           best = std::max(best, input(ch, i * p.size + u, j * p.size + v));
                                       }
                                   }
                                   out(ch, i, j) = best;
                               }
                           }
                       }
                   },
                   [&](const Flatten &) { out.values = input.values; },
                   [&](const Dense &d) {
                       for (std::size_t o = 0; o < d.outputs; ++o) {
                           double acc = d.biases[o];
                           const double *row = &d.weights[o * d.inputs];
                           for (std::size_t i = 0; i < d.inputs; ++i) {
                               acc += row[i] * input.values[i];
                           }
                           out.values[o] = acc;
                       }
                   },
                   [&](const ReLU &) {
                       for (std::size_t i = 0; i < input.size(); ++i) {
                           out.values[i] = std::max(0.0, input.values[i]);
                       }
                   },
                   [&](const Softmax &) {
                       const double peak = *std::max_element(input.values.begin(), input.values.end());
                       double total = 0.0;
                       for (std::size_t i = 0; i < input.size(); ++i) {
                           out.values[i] = std::exp(input.values[i] - peak);
                           total += out.values[i];
                       }
                       for (double &v : out.values) {
                           v /= total;
                       }
                   },
               },
               layer);
    return out;
}

LayerGradient classical_backward(const Layer &layer, const Tensor &cached_input, const Tensor &upstream) {
    if (cached_input.empty()) {
        fail(ErrorKind::State, layer_name(layer) + " backward called without a cached forward input");
    }
    const std::vector<std::size_t> out_dims = layer_output_dims(layer, cached_input.dims);
    require_dims(upstream, out_dims, layer_name(layer) + " upstream gradient");

    LayerGradient result{Tensor(cached_input.dims), {}};
    Tensor &dx = result.input;
    std::visit(overloaded{
                   [&](const QuantumConvLayer &) {
                       fail(ErrorKind::Unsupported, "input gradients through the quantum layer are not computed");
                   },
                   [&](const Conv2d &c) {
                       const std::size_t k = c.kernel;
                       std::vector<double> dw(c.weights.size(), 0.0);
                       std::vector<double> db(c.biases.size(), 0.0);
                       for (std::size_t o = 0; o < c.out_channels; ++o) {
                           for (std::size_t i = 0; i < out_dims[1]; ++i) {
                               for (std::size_t j = 0; j < out_dims[2]; ++j) {
                                   const double g = upstream(o, i, j);
                                   db[o] += g;
                                   for (std::size_t ch = 0; ch < c.in_channels; ++ch) {
                                       const std::size_t base = ((o * c.in_channels + ch) * k) * k;
                                       for (std::size_t u = 0; u < k; ++u) {
                                           for (std::size_t v = 0; v < k; ++v) {
                                               dw[base + u * k + v] += g * cached_input(ch, i + u, j + v);
                                               dx(ch, i + u, j + v) += g * c.weights[base + u * k + v];
                                           }
                                       }
                                   }
                               }
                           }
                       }
                       result.params = {std::move(dw), std::move(db)};
                   },
                   [&](const MaxPool &p) {
                       for (std::size_t ch = 0; ch < out_dims[0]; ++ch) {
                           for (std::size_t i = 0; i < out_dims[1]; ++i) {
                               for (std::size_t j = 0; j < out_dims[2]; ++j) {
                                   std::size_t bi = i * p.size;
                                   std::size_t bj = j * p.size;
                                   for (std::size_t u = 0; u < p.size; ++u) {
                                       for (std::size_t v = 0; v < p.size; ++v) {
                                           const std::size_t r = i * p.size + u;
                                           const std::size_t c = j * p.size + v;
                                           if (cached_input(ch, r, c) > cached_input(ch, bi, bj)) {
                                               bi = r;
                                               bj = c;
                                           }
                                       }
                                   }
                                   dx(ch, bi, bj) += upstream(ch, i, j);
                               }
                           }
                       }
                   },
                   [&](const Flatten &) { dx.values = upstream.values; },
                   [&](const Dense &d) {
                       std::vector<double> dw(d.weights.size());
                       for (std::size_t o = 0; o < d.outputs; ++o) {
                           const double g = upstream.values[o];
                           for (std::size_t i = 0; i < d.inputs; ++i) {
                               dw[o * d.inputs + i] = g * cached_input.values[i];
                               dx.values[i] += g * d.weights[o * d.inputs + i];
                           }
                       }
                       result.params = {std::move(dw), upstream.values};
                   },
                   [&](const ReLU &) {
                       for (std::size_t i = 0; i < dx.size(); ++i) {
                           dx.values[i] = cached_input.values[i] > 0.0 ? upstream.values[i] : 0.0;
                       }
                   },
                   [&](const Softmax &s) {
                       const Tensor probs = classical_forward(s, cached_input);
                       double dot = 0.0;
                       for (std::size_t i = 0; i < probs.size(); ++i) {
                           dot += probs.values[i] * upstream.values[i];
                       }
                       for (std::size_t i = 0; i < probs.size(); ++i) {
                           dx.values[i] = probs.values[i] * (upstream.values[i] - dot);
                       }
                   },
               },
               layer);
    return result;
}

Tensor network_forward(const Network &net, const Tensor &image, const EvalContext &ctx, ForwardTrace *trace) {
    infer_shapes(net);
    require_dims(image, net.input_dims, "network input");
    Tensor x = is_quantum(net.layers.front()) ? image : channels_first(image);
    if (trace) {
        trace->activations.clear();
        trace->activations.push_back(x);
    }
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const Layer &layer = net.layers[i];
        x = is_quantum(layer) ? qconv_forward(std::get<QuantumConvLayer>(layer), x, ctx) : classical_forward(layer, x);
        if (trace) {
            trace->activations.push_back(x);
        }
    }
    return x;
}

std::vector<ParamBlock> parameter_blocks(Network &net) {
    std::vector<ParamBlock> blocks;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const std::string prefix = "layer" + std::to_string(i) + ".";
        std::visit(overloaded{
                       [&](QuantumConvLayer &q) {
                           for (std::size_t f = 0; f < q.filters; ++f) {
                               blocks.push_back({prefix + "theta" + std::to_string(f), q.filter_params[f]});
                           }
                       },
                       [&](Conv2d &c) {
                           blocks.push_back({prefix + "weight", c.weights});
                           blocks.push_back({prefix + "bias", c.biases});
                       },
                       [&](Dense &d) {
                           blocks.push_back({prefix + "weight", d.weights});
                           blocks.push_back({prefix + "bias", d.biases});
                       },
                       [](auto &) {},
                   },
                   net.layers[i]);
    }
    return blocks;
}

std::vector<std::string> parameter_names(const Network &net) {
    Network copy = net;
    std::vector<std::string> names;
    for (auto &b : parameter_blocks(copy)) {
        names.push_back(b.name);
    }
    return names;
}

std::vector<std::size_t> parameter_sizes(const Network &net) {
    Network copy = net;
    std::vector<std::size_t> sizes;
    for (auto &b : parameter_blocks(copy)) {
        sizes.push_back(b.values.size());
    }
    return sizes;
}

std::size_t parameter_count(const Network &net) {
    std::size_t total = 0;
    for (std::size_t s : parameter_sizes(net)) {
        total += s;
    }
    return total;
}

Gradients backward_from_trace(const Network &net, const ForwardTrace &trace, const Tensor &upstream,
                              const EvalContext &ctx) {
    if (trace.activations.size() != net.layers.size() + 1) {
        fail(ErrorKind::State, "forward trace does not match the network (run network_forward first)");
    }
    // Per-layer gradient blocks, stitched in parameter_blocks order at the end.
    std::vector<Gradients> per_layer(net.layers.size());
    Tensor g = upstream;
    for (std::size_t i = net.layers.size(); i-- > 0;) {
        const Layer &layer = net.layers[i];
        if (is_quantum(layer)) {
            per_layer[i] = qconv_backward(std::get<QuantumConvLayer>(layer), trace.activations[i], g, ctx);
            break;
        }
        LayerGradient lg = classical_backward(layer, trace.activations[i], g);
        per_layer[i] = std::move(lg.params);
        g = std::move(lg.input);
    }
    Gradients grads;
    for (auto &blocks : per_layer) {
        for (auto &b : blocks) {
            grads.push_back(std::move(b));
        }
    }
    return grads;
}

BackwardResult network_backward(const Network &net, const Tensor &image, std::size_t label, const EvalContext &ctx) {
    ForwardTrace trace;
    Tensor probs = network_forward(net, image, ctx, &trace);
    const double loss = cross_entropy(probs.values, label);
    Tensor upstream(probs.dims);
    cross_entropy_gradient(probs.values, label, upstream.values);
    Gradients grads = backward_from_trace(net, trace, upstream, ctx);
    return {loss, std::move(probs), std::move(grads)};
}

NetworkBuilder::NetworkBuilder(std::vector<std::size_t> image_dims, std::uint64_t seed)
    : dims_(image_dims), seed_(seed) {
    if (image_dims.size() != 3 || element_count(image_dims) == 0) {
        fail(ErrorKind::Shape, "image dims must be H x W x C, got " + shape_string(image_dims));
    }
    net_.input_dims = std::move(image_dims);
}

std::uint64_t NetworkBuilder::next_seed() { return derive_seed(seed_, counter_++); }

NetworkBuilder &NetworkBuilder::qconv(const AnsatzConfig &config, std::size_t filters, std::size_t stride_rows,
                                      std::size_t stride_cols, std::optional<NoiseConfig> noise) {
    if (!net_.layers.empty()) {
        fail(ErrorKind::Config, "quantum layer must come first");
    }
    Layer layer = make_qconv_layer(config, filters, next_seed(), stride_rows, stride_cols, noise);
    dims_ = layer_output_dims(layer, dims_);
    net_.layers.push_back(std::move(layer));
    return *this;
}

NetworkBuilder &NetworkBuilder::conv(std::size_t out_channels, std::size_t kernel) {
    if (net_.layers.empty()) {
        dims_ = {dims_[2], dims_[0], dims_[1]};
    }
    if (dims_.size() != 3) {
        fail(ErrorKind::Shape, "conv needs a C x H x W input, got " + shape_string(dims_));
    }
    if (out_channels == 0 || kernel == 0) {
        fail(ErrorKind::Config, "conv needs positive channels and kernel");
    }
    const std::size_t in = dims_[0];
    NoiseRng rng(next_seed());
    Conv2d c{in, out_channels, kernel, glorot(rng, out_channels * in * kernel * kernel, in * kernel * kernel,
                                              out_channels * kernel * kernel),
             std::vector<double>(out_channels, 0.0)};
    Layer layer = std::move(c);
    dims_ = layer_output_dims(layer, dims_);
    net_.layers.push_back(std::move(layer));
    return *this;
}

NetworkBuilder &NetworkBuilder::pool(std::size_t size) {
    if (size == 0) {
        fail(ErrorKind::Config, "pool size must be positive");
    }
    Layer layer = MaxPool{size};
    dims_ = layer_output_dims(layer, dims_);
    net_.layers.push_back(std::move(layer));
    return *this;
}

NetworkBuilder &NetworkBuilder::flatten() {
    dims_ = {element_count(dims_)};
    net_.layers.emplace_back(Flatten{});
    return *this;
}

NetworkBuilder &NetworkBuilder::dense(std::size_t outputs) {
    if (dims_.size() != 1) {
        flatten();
    }
    if (outputs == 0) {
        fail(ErrorKind::Config, "dense needs at least one output");
    }
    const std::size_t in = dims_[0];
    NoiseRng rng(next_seed());
    net_.layers.emplace_back(Dense{in, outputs, glorot(rng, outputs * in, in, outputs), std::vector<double>(outputs, 0.0)});
    dims_ = {outputs};
    return *this;
}

NetworkBuilder &NetworkBuilder::relu() {
    net_.layers.emplace_back(ReLU{});
    return *this;
}

NetworkBuilder &NetworkBuilder::softmax() {
    Layer layer = Softmax{};
    dims_ = layer_output_dims(layer, dims_);
    net_.layers.push_back(std::move(layer));
    return *this;
}

Network NetworkBuilder::build() const {
    infer_shapes(net_);
    return net_;
}

Network hybrid_dense_net(const std::vector<std::size_t> &image_dims, const HybridOptions &options) {
    return NetworkBuilder(image_dims, options.seed)
        .qconv(options.ansatz, options.filters, options.stride_rows, options.stride_cols, options.noise)
        .flatten()
        .dense(options.hidden)
        .relu()
        .dense(options.classes)
        .softmax()
        .build();
}

Network hybrid_conv_net(const std::vector<std::size_t> &image_dims, const HybridOptions &options) {
    return NetworkBuilder(image_dims, options.seed)
        .qconv(options.ansatz, options.filters, options.stride_rows, options.stride_cols, options.noise)
        .conv(32)
        .relu()
        .pool()
        .conv(64)
        .relu()
        .flatten()
        .dense(256)
        .relu()
        .dense(options.classes)
        .softmax()
        .build();
}

Network classical_benchmark_net(const std::vector<std::size_t> &image_dims, std::size_t classes, std::uint64_t seed) {
    return NetworkBuilder(image_dims, seed)
        .conv(8)
        .relu()
        .conv(32)
        .relu()
        .pool()
        .conv(64)
        .relu()
        .flatten()
        .dense(256)
        .relu()
        .dense(classes)
        .softmax()
        .build();
}

} // namespace qconv
