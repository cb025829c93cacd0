#include "qconv/train.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "qconv/error.hpp"
#include "qconv/io.hpp"
#include "qconv/parallel.hpp"

namespace qconv {

namespace {

// Stream tags keep shuffle, training-noise and evaluation-noise seeds apart.
constexpr std::uint64_t kShuffleStream = 0x5348;
constexpr std::uint64_t kTrainNoiseStream = 0x544e;
constexpr std::uint64_t kEvalNoiseStream = 0x454e;

void check_aligned(const std::vector<ParamBlock> &params, const Gradients &grads, const std::string &what) {
    if (grads.size() != params.size()) {
        fail(ErrorKind::Shape, what + ": expected " + std::to_string(params.size()) + " blocks, got " +
                                   std::to_string(grads.size()));
    }
    for (std::size_t b = 0; b < params.size(); ++b) {
        if (grads[b].size() != params[b].values.size()) {
            fail(ErrorKind::Shape, what + ": block " + params[b].name + " expects " +
                                       std::to_string(params[b].values.size()) + " values, got " +
                                       std::to_string(grads[b].size()));
        }
    }
}

} // namespace

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::Adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer_kind(std::string_view name) {
    if (name == "adam") {
        return OptimizerKind::Adam;
    }
    if (name == "sgd") {
        return OptimizerKind::Sgd;
    }
    fail(ErrorKind::Config, "unknown optimizer '" + std::string(name) + "' (expected adam or sgd)");
}

void validate(const OptimizerConfig &config) {
    if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
        fail(ErrorKind::Config, "learning_rate must be positive");
    }
    if (!(config.beta1 >= 0.0 && config.beta1 < 1.0) || !(config.beta2 >= 0.0 && config.beta2 < 1.0)) {
        fail(ErrorKind::Config, "Adam betas must lie in [0, 1)");
    }
    if (!(config.epsilon > 0.0)) {
        fail(ErrorKind::Config, "Adam epsilon must be positive");
    }
}

OptimizerState make_optimizer_state(const Network &net, const OptimizerConfig &config) {
    OptimizerState state;
    if (config.kind == OptimizerKind::Adam) {
        for (std::size_t size : parameter_sizes(net)) {
            state.m.emplace_back(size, 0.0);
            state.v.emplace_back(size, 0.0);
        }
    }
    return state;
}

void optimizer_step(std::vector<ParamBlock> &params, const Gradients &grads, OptimizerState &state,
                    const OptimizerConfig &config) {
    validate(config);
    check_aligned(params, grads, "gradients");
    if (config.kind == OptimizerKind::Sgd) {
        for (std::size_t b = 0; b < params.size(); ++b) {
            for (std::size_t i = 0; i < grads[b].size(); ++i) {
                params[b].values[i] -= config.learning_rate * grads[b][i];
            }
        }
        ++state.step;
        return;
    }
    check_aligned(params, state.m, "Adam first moments");
    check_aligned(params, state.v, "Adam second moments");
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correct1 = 1.0 - std::pow(config.beta1, t);
    const double correct2 = 1.0 - std::pow(config.beta2, t);
    for (std::size_t b = 0; b < params.size(); ++b) {
        auto &m = state.m[b];
        auto &v = state.v[b];
        for (std::size_t i = 0; i < grads[b].size(); ++i) {
            const double g = grads[b][i];
            m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
            v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
            const double m_hat = m[i] / correct1;
            const double v_hat = v[i] / correct2;
            params[b].values[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
        }
    }
}

void validate(const TrainConfig &config) {
    validate(config.optimizer);
    if (config.batch_size == 0) {
        fail(ErrorKind::Config, "batch_size must be at least 1");
    }
    if (config.eval_trajectories == 0) {
        fail(ErrorKind::Config, "eval_trajectories must be at least 1");
    }
}

std::size_t argmax(std::span<const double> values) {
    return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

BatchResult batch_gradient(const Network &net, const LabeledImageSet &data, std::span<const std::size_t> indices,
                           const EvalContext &ctx) {
    if (indices.empty()) {
        fail(ErrorKind::Size, "empty batch");
    }
    std::vector<BackwardResult> results(indices.size());
    parallel_for(indices.size(), [&](std::size_t k) {
        const std::size_t i = indices[k];
        results[k] = network_backward(net, data.images.at(i), data.labels.at(i), ctx);
    });

    const double scale = 1.0 / static_cast<double>(indices.size());
    BatchResult out{0.0, 0, results.front().grads};
    for (auto &block : out.grads) {
        std::fill(block.begin(), block.end(), 0.0);
    }
    for (std::size_t k = 0; k < results.size(); ++k) {
        out.loss += results[k].loss;
        out.correct += argmax(results[k].probabilities.values) == data.labels[indices[k]] ? 1 : 0;
        for (std::size_t b = 0; b < out.grads.size(); ++b) {
            for (std::size_t i = 0; i < out.grads[b].size(); ++i) {
                out.grads[b][i] += results[k].grads[b][i];
            }
        }
    }
    out.loss *= scale;
    for (auto &block : out.grads) {
        for (double &g : block) {
            g *= scale;
        }
    }
    return out;
}

EpochRecord train_epoch(Network &net, const LabeledImageSet &data, const TrainConfig &config, TrainState &state) {
    validate(config);
    if (data.size() == 0) {
        fail(ErrorKind::Size, "training set is empty");
    }
    const auto start = std::chrono::steady_clock::now();
    const std::size_t epoch = state.epochs_done;
    const std::uint64_t epoch_seed = derive_seed(config.seed, epoch);
    const auto order = seeded_permutation(data.size(), derive_seed(epoch_seed, kShuffleStream));

    if (config.optimizer.kind == OptimizerKind::Adam && state.optimizer.m.empty()) {
        state.optimizer = make_optimizer_state(net, config.optimizer);
    }

    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t batch = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch) {
        const std::size_t end = std::min(order.size(), begin + config.batch_size);
        const std::span<const std::size_t> indices(order.data() + begin, end - begin);
        const EvalContext ctx{derive_seed(derive_seed(epoch_seed, kTrainNoiseStream), batch), 0};
        BatchResult r = batch_gradient(net, data, indices, ctx);
        loss_sum += r.loss * static_cast<double>(indices.size());
        correct += r.correct;
        auto params = parameter_blocks(net);
        optimizer_step(params, r.grads, state.optimizer, config.optimizer);
    }
    ++state.epochs_done;

    const double n = static_cast<double>(data.size());
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {state.epochs_done, loss_sum / n, static_cast<double>(correct) / n, std::nullopt, elapsed};
}

EvalResult evaluate(const Network &net, const LabeledImageSet &data, const TrainConfig &config) {
    if (data.size() == 0) {
        fail(ErrorKind::Size, "evaluation set is empty");
    }
    const std::size_t classes = num_classes(net);
    const std::uint64_t base = derive_seed(config.seed, kEvalNoiseStream);
    std::vector<double> losses(data.size());
    std::vector<std::size_t> predictions(data.size());
    parallel_for(data.size(), [&](std::size_t i) {
        const Tensor probs = network_forward(net, data.images[i], {derive_seed(base, i), config.eval_trajectories});
        losses[i] = cross_entropy(probs.values, data.labels[i]);
        predictions[i] = argmax(probs.values);
    });
    ConfusionMatrix confusion = confusion_matrix(predictions, data.labels, classes);
    double loss = 0.0;
    for (double l : losses) {
        loss += l;
    }
    const double accuracy = confusion.accuracy();
    return {accuracy, loss / static_cast<double>(data.size()), std::move(confusion), std::move(predictions)};
}

std::string run_csv(const RunRecord &record) {
    std::string out = std::string(kRunCsvHeader) + "\n";
    for (const auto &e : record.epochs) {
        out += std::to_string(e.epoch) + "," + format_double(e.train_loss) + "," + format_double(e.train_accuracy) +
               "," + (e.eval_accuracy ? format_double(*e.eval_accuracy) : std::string()) + "," +
               format_double(e.wall_time_s) + "\n";
    }
    return out;
}

RunRecord parse_run_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 1;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kRunCsvHeader) {
        fail(ErrorKind::Format, "run log line 1: expected header '" + std::string(kRunCsvHeader) + "'");
    }
    RunRecord record;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream row(line);
        std::string field;
        while (std::getline(row, field, ',')) {
            fields.push_back(field);
        }
        if (line.back() == ',') {
            fields.emplace_back();
        }
        if (fields.size() != 5) {
            fail(ErrorKind::Format, "run log line " + std::to_string(line_no) + ": expected 5 fields, got " +
                                        std::to_string(fields.size()));
        }
        auto number = [&](const std::string &s, const char *what) {
            try {
                std::size_t used = 0;
                const double v = std::stod(s, &used);
                if (used != s.size()) {
                    throw std::invalid_argument(s);
                }
                return v;
            } catch (const std::exception &) {
                fail(ErrorKind::Format, "run log line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
            }
        };
        EpochRecord e{};
        e.epoch = static_cast<std::size_t>(number(fields[0], "epoch"));
        e.train_loss = number(fields[1], "train_loss");
        e.train_accuracy = number(fields[2], "train_accuracy");
        if (!fields[3].empty()) {
            e.eval_accuracy = number(fields[3], "eval_accuracy");
        }
        e.wall_time_s = number(fields[4], "wall_time_s");
        record.epochs.push_back(e);
    }
    return record;
}

RunRecord train(Network &net, const LabeledImageSet &train_set, const LabeledImageSet *eval_set,
                const TrainConfig &config, TrainState &state, const EpochCallback &on_epoch) {
    validate(config);
    RunRecord record;
    std::optional<EvalResult> last_eval;
    for (std::size_t e = 0; e < config.epochs; ++e) {
        EpochRecord entry = train_epoch(net, train_set, config, state);
        if (eval_set) {
            const auto start = std::chrono::steady_clock::now();
            last_eval = evaluate(net, *eval_set, config);
            entry.eval_accuracy = last_eval->accuracy;
            entry.wall_time_s += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
        if (on_epoch) {
            on_epoch(entry);
        }
        record.epochs.push_back(entry);
    }
    if (!last_eval) {
        last_eval = evaluate(net, eval_set ? *eval_set : train_set, config);
    }
    record.confusion = last_eval->confusion;
    return record;
}

// Checkpoint container: "QCNV", u32 version, u32 block count, then per block
// u32 name length, name bytes, u64 value count, little-endian f64 values.
namespace {

template <class T> void put_le(std::string &out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

class Reader {
  public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    [[nodiscard]] std::size_t offset() const noexcept { return pos_; }
    [[nodiscard]] std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

    template <class T> T get(const char *what) {
        need(sizeof(T), what);
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(T);
        return v;
    }

    std::string_view take(std::size_t n, const char *what) {
        need(n, what);
        const auto out = bytes_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    void need(std::size_t n, const char *what) const {
        if (remaining() < n) {
            fail(ErrorKind::Format, std::string("checkpoint truncated reading ") + what + " at byte offset " +
                                        std::to_string(pos_));
        }
    }

  private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

} // namespace

std::string encode_checkpoint(const std::vector<NamedBlock> &blocks) {
    std::string out(kCheckpointMagic, sizeof kCheckpointMagic);
    put_le<std::uint32_t>(out, kCheckpointVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(blocks.size()));
    for (const auto &b : blocks) {
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(b.name.size()));
        out += b.name;
        put_le<std::uint64_t>(out, b.values.size());
        for (double v : b.values) {
            put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
        }
    }
    return out;
}

std::vector<NamedBlock> decode_checkpoint(std::string_view bytes) {
    Reader r(bytes);
    if (r.take(4, "magic") != std::string_view(kCheckpointMagic, 4)) {
        fail(ErrorKind::Format, "not a checkpoint: bad magic at byte offset 0");
    }
    const std::size_t version_at = r.offset();
    const auto version = r.get<std::uint32_t>("version");
    if (version != kCheckpointVersion) {
        fail(ErrorKind::Version, "checkpoint format version " + std::to_string(version) + " at byte offset " +
                                     std::to_string(version_at) + " is not supported (expected " +
                                     std::to_string(kCheckpointVersion) + ")");
    }
    const auto count = r.get<std::uint32_t>("block count");
    std::vector<NamedBlock> blocks;
    for (std::uint32_t b = 0; b < count; ++b) {
        const std::size_t block_at = r.offset();
        const auto name_len = r.get<std::uint32_t>("name length");
        NamedBlock block{std::string(r.take(name_len, "block name")), {}};
        const std::size_t count_at = r.offset();
        const auto values = r.get<std::uint64_t>("value count");
        if (values > r.remaining() / 8) {
            fail(ErrorKind::Format, "block '" + block.name + "' declares " + std::to_string(values) +
                                        " values but only " + std::to_string(r.remaining()) +
                                        " bytes follow (byte offset " + std::to_string(count_at) + ")");
        }
        block.values.resize(values);
        for (auto &v : block.values) {
            v = std::bit_cast<double>(r.get<std::uint64_t>("value"));
        }
        for (const auto &seen : blocks) {
            if (seen.name == block.name) {
                fail(ErrorKind::Format, "duplicate block '" + block.name + "' at byte offset " +
                                            std::to_string(block_at));
            }
        }
        blocks.push_back(std::move(block));
    }
    if (r.remaining() != 0) {
        fail(ErrorKind::Format, "trailing bytes after last block at byte offset " + std::to_string(r.offset()));
    }
    return blocks;
}

std::vector<NamedBlock> checkpoint_blocks(const Network &net, const OptimizerState &state) {
    Network copy = net;
    std::vector<NamedBlock> blocks;
    std::vector<std::string> names;
    for (auto &p : parameter_blocks(copy)) {
        names.push_back(p.name);
        blocks.push_back({p.name, std::vector<double>(p.values.begin(), p.values.end())});
    }
    blocks.push_back({"optimizer.step", {static_cast<double>(state.step)}});
    for (std::size_t b = 0; b < state.m.size() && b < names.size(); ++b) {
        blocks.push_back({"optimizer.m." + names[b], state.m[b]});
        blocks.push_back({"optimizer.v." + names[b], state.v[b]});
    }
    return blocks;
}

void save_checkpoint(const std::filesystem::path &path, const Network &net, const OptimizerState &state) {
    write_file_atomic(path, encode_checkpoint(checkpoint_blocks(net, state)));
}

void load_checkpoint(const std::filesystem::path &path, Network &net, OptimizerState &state) {
    const std::string bytes = read_file_text(path);
    const auto blocks = decode_checkpoint(bytes);
    std::map<std::string, const NamedBlock *> by_name;
    for (const auto &b : blocks) {
        by_name[b.name] = &b;
    }

    Network staged = net;
    OptimizerState staged_state;
    auto params = parameter_blocks(staged);
    auto fetch = [&](const std::string &name, std::size_t size) -> const std::vector<double> & {
        const auto it = by_name.find(name);
        if (it == by_name.end()) {
            fail(ErrorKind::Consistency, path.string() + ": missing block '" + name + "'");
        }
        if (it->second->values.size() != size) {
            fail(ErrorKind::Consistency, path.string() + ": block '" + name + "' has " +
                                             std::to_string(it->second->values.size()) + " values, network needs " +
                                             std::to_string(size));
        }
        return it->second->values;
    };
    for (auto &p : params) {
        const auto &values = fetch(p.name, p.values.size());
        std::copy(values.begin(), values.end(), p.values.begin());
    }
    const double step = fetch("optimizer.step", 1).front();
    if (!(step >= 0.0) || step != std::floor(step)) {
        fail(ErrorKind::Format, path.string() + ": optimizer.step is not a count");
    }
    staged_state.step = static_cast<std::uint64_t>(step);
    std::size_t moment_blocks = 0;
    for (const auto &b : blocks) {
        if (b.name.rfind("optimizer.m.", 0) == 0) {
            ++moment_blocks;
        }
    }
    if (moment_blocks != 0) {
        for (const auto &p : params) {
            staged_state.m.push_back(fetch("optimizer.m." + p.name, p.values.size()));
            staged_state.v.push_back(fetch("optimizer.v." + p.name, p.values.size()));
        }
    }
    const std::size_t expected = params.size() + 1 + 2 * staged_state.m.size();
    if (blocks.size() != expected) {
        fail(ErrorKind::Consistency, path.string() + ": holds " + std::to_string(blocks.size()) +
                                         " blocks, network expects " + std::to_string(expected));
    }
    net = std::move(staged);
    state = std::move(staged_state);
}

} // namespace qconv
