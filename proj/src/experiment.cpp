#include "qconv/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>

#include "qconv/error.hpp"
#include "qconv/io.hpp"
#include "qconv/parallel.hpp"

namespace qconv {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::uint64_t kDataStream = 0x4441;
constexpr std::uint64_t kInitStream = 0x494e;
constexpr std::uint64_t kLayerNoiseStream = 0x4c4e;

template <class E> struct NameTable {
    std::vector<std::pair<std::string_view, E>> entries;

    std::string_view name(E value) const {
        for (const auto &[n, v] : entries) {
            if (v == value) {
                return n;
            }
        }
        return "?";
    }

    E parse(const std::string &key, const std::string &text) const {
        for (const auto &[n, v] : entries) {
            if (n == text) {
                return v;
            }
        }
        std::string options;
        for (const auto &[n, v] : entries) {
            options += (options.empty() ? "" : ", ") + std::string(n);
        }
        fail(ErrorKind::Config, "field '" + key + "': unknown value '" + text + "' (expected one of " + options + ")");
    }
};

const NameTable<DatasetKind> kDatasets{{{"mnist", DatasetKind::Mnist},
                                        {"fashion_mnist", DatasetKind::FashionMnist},
                                        {"cifar10_small", DatasetKind::Cifar10Small}}};
const NameTable<Architecture> kArchitectures{{{"hybrid_dense", Architecture::HybridDense},
                                              {"hybrid_conv", Architecture::HybridConv},
                                              {"classical_benchmark", Architecture::ClassicalBenchmark}}};
const NameTable<EvalSplit> kSplits{{{"holdout", EvalSplit::Holdout}, {"train", EvalSplit::Train}, {"none", EvalSplit::None}}};

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

[[noreturn]] void bad_field(const std::string &key, const std::string &expected, const Json &value) {
    fail(ErrorKind::Config, "field '" + key + "': expected " + expected + ", got " + value.dump());
}

std::uint64_t as_count(const std::string &key, const Json &v) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        bad_field(key, "a non-negative integer", v);
    }
    return v.get<std::uint64_t>();
}

std::size_t as_positive(const std::string &key, const Json &v) {
    const auto n = as_count(key, v);
    if (n == 0) {
        bad_field(key, "a positive integer", v);
    }
    return static_cast<std::size_t>(n);
}

double as_real(const std::string &key, const Json &v) {
    if (!v.is_number()) {
        bad_field(key, "a number", v);
    }
    return v.get<double>();
}

std::string as_string(const std::string &key, const Json &v) {
    if (!v.is_string()) {
        bad_field(key, "a string", v);
    }
    return v.get<std::string>();
}

bool as_bool(const std::string &key, const Json &v) {
    if (!v.is_boolean()) {
        bad_field(key, "true or false", v);
    }
    return v.get<bool>();
}

std::filesystem::path as_path(const std::string &key, const Json &v, const std::filesystem::path &base) {
    std::filesystem::path p = as_string(key, v);
    if (p.empty()) {
        bad_field(key, "a non-empty path", v);
    }
    return p.is_absolute() || base.empty() ? p : base / p;
}

std::vector<std::filesystem::path> dataset_files(const ExperimentConfig &c) {
    if (c.dataset == DatasetKind::Cifar10Small) {
        if (!c.cifar_batches.empty()) {
            return c.cifar_batches;
        }
        if (c.data_dir.empty()) {
            fail(ErrorKind::Config, "field 'data_dir': required unless 'cifar_batches' is given");
        }
        std::vector<std::filesystem::path> out;
        for (int b = 1; b <= 5; ++b) {
            out.push_back(c.data_dir / ("data_batch_" + std::to_string(b) + ".bin"));
        }
        return out;
    }
    const auto images = !c.train_images.empty() ? c.train_images : c.data_dir / "train-images-idx3-ubyte";
    const auto labels = !c.train_labels.empty() ? c.train_labels : c.data_dir / "train-labels-idx1-ubyte";
    if (c.data_dir.empty() && (c.train_images.empty() || c.train_labels.empty())) {
        fail(ErrorKind::Config, "field 'data_dir': required unless 'train_images' and 'train_labels' are given");
    }
    return {images, labels};
}

void validate_config(const ExperimentConfig &c) {
    validate(c.train);
    if (c.train.epochs == 0) {
        fail(ErrorKind::Config, "field 'epochs': must be at least 1");
    }
    if (!(c.noise_level >= 0.0 && c.noise_level <= 1.0)) {
        fail(ErrorKind::Config, "field 'noise_level': must lie in [0, 1]");
    }
    if (c.classes < 2 || c.classes > 10) {
        fail(ErrorKind::Config, "field 'classes': must lie in 2..10");
    }
    if (c.eval == EvalSplit::Holdout && c.eval_samples == 0) {
        fail(ErrorKind::Config, "field 'eval_samples': must be positive for a holdout split");
    }
    if (c.architecture != Architecture::ClassicalBenchmark) {
        try {
            build_ansatz(ansatz_config(c));
        } catch (const Error &e) {
            fail(ErrorKind::Config, std::string("ansatz (fields 'ansatz', 'kernel_rows', 'kernel_cols', "
                                                "'circuit_stride', 'observable'): ") +
                                        e.message());
        }
    }
    (void)dataset_files(c);
}

} // namespace

std::string_view to_string(DatasetKind kind) { return kDatasets.name(kind); }
std::string_view to_string(Architecture arch) { return kArchitectures.name(arch); }
std::string_view to_string(EvalSplit split) { return kSplits.name(split); }

ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path &base_dir) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
        // Drop the library's own "[json.exception...] parse error at ...:" prefix.
        std::string detail = e.what();
        if (const auto at = detail.find(": ", detail.find("column")); at != std::string::npos) {
            detail = detail.substr(at + 2);
        }
        fail(ErrorKind::Config, "syntax error at line " + std::to_string(line) + ", column " +
                                    std::to_string(col) + ": " + detail);
    }
    if (!root.is_object()) {
        fail(ErrorKind::Config, "config must be a JSON object of key/value pairs");
    }

    ExperimentConfig c;
    using Setter = std::function<void(const std::string &, const Json &)>;
    const std::map<std::string, Setter> setters{
        {"dataset", [&](auto &k, auto &v) { c.dataset = kDatasets.parse(k, as_string(k, v)); }},
        {"data_dir", [&](auto &k, auto &v) { c.data_dir = as_path(k, v, base_dir); }},
        {"train_images", [&](auto &k, auto &v) { c.train_images = as_path(k, v, base_dir); }},
        {"train_labels", [&](auto &k, auto &v) { c.train_labels = as_path(k, v, base_dir); }},
        {"cifar_batches",
         [&](auto &k, auto &v) {
             if (!v.is_array()) {
                 bad_field(k, "an array of paths", v);
             }
             c.cifar_batches.clear();
             for (const auto &item : v) {
                 c.cifar_batches.push_back(as_path(k, item, base_dir));
             }
         }},
        {"samples", [&](auto &k, auto &v) { c.samples = as_count(k, v); }},
        {"eval", [&](auto &k, auto &v) { c.eval = kSplits.parse(k, as_string(k, v)); }},
        {"eval_samples", [&](auto &k, auto &v) { c.eval_samples = as_count(k, v); }},
        {"resolution", [&](auto &k, auto &v) { c.resolution = as_count(k, v); }},
        {"architecture", [&](auto &k, auto &v) { c.architecture = kArchitectures.parse(k, as_string(k, v)); }},
        {"ansatz",
         [&](auto &k, auto &v) {
             try {
                 c.ansatz = parse_ansatz_kind(as_string(k, v));
             } catch (const Error &e) {
                 fail(ErrorKind::Config, "field '" + k + "': " + e.message());
             }
         }},
        {"kernel_rows", [&](auto &k, auto &v) { c.kernel_rows = as_positive(k, v); }},
        {"kernel_cols", [&](auto &k, auto &v) { c.kernel_cols = as_positive(k, v); }},
        {"circuit_stride", [&](auto &k, auto &v) { c.circuit_stride = as_count(k, v); }},
        {"observable",
         [&](auto &k, auto &v) {
             if (!v.is_array()) {
                 bad_field(k, "an array of qubit indices", v);
             }
             c.observable.clear();
             for (const auto &item : v) {
                 c.observable.push_back(as_count(k, item));
             }
         }},
        {"filters", [&](auto &k, auto &v) { c.filters = as_positive(k, v); }},
        {"spatial_stride", [&](auto &k, auto &v) { c.spatial_stride = as_count(k, v); }},
        {"hidden", [&](auto &k, auto &v) { c.hidden = as_positive(k, v); }},
        {"classes", [&](auto &k, auto &v) { c.classes = as_positive(k, v); }},
        {"epochs", [&](auto &k, auto &v) { c.train.epochs = as_positive(k, v); }},
        {"batch_size", [&](auto &k, auto &v) { c.train.batch_size = as_positive(k, v); }},
        {"learning_rate", [&](auto &k, auto &v) { c.train.optimizer.learning_rate = as_real(k, v); }},
        {"optimizer",
         [&](auto &k, auto &v) {
             try {
                 c.train.optimizer.kind = parse_optimizer_kind(as_string(k, v));
             } catch (const Error &e) {
                 fail(ErrorKind::Config, "field '" + k + "': " + e.message());
             }
         }},
        {"adam_beta1", [&](auto &k, auto &v) { c.train.optimizer.beta1 = as_real(k, v); }},
        {"adam_beta2", [&](auto &k, auto &v) { c.train.optimizer.beta2 = as_real(k, v); }},
        {"adam_epsilon", [&](auto &k, auto &v) { c.train.optimizer.epsilon = as_real(k, v); }},
        {"seed", [&](auto &k, auto &v) { c.train.seed = as_count(k, v); }},
        {"noise_level", [&](auto &k, auto &v) { c.noise_level = as_real(k, v); }},
        {"noise_trajectories", [&](auto &k, auto &v) { c.noise_trajectories = as_positive(k, v); }},
        {"eval_trajectories", [&](auto &k, auto &v) { c.train.eval_trajectories = as_positive(k, v); }},
        {"threads", [&](auto &k, auto &v) { c.threads = as_count(k, v); }},
        {"record_wall_time", [&](auto &k, auto &v) { c.record_wall_time = as_bool(k, v); }},
        {"output_dir", [&](auto &k, auto &v) { c.output_dir = as_path(k, v, base_dir); }},
    };
    for (const auto &[key, value] : root.items()) {
        const auto it = setters.find(key);
        if (it == setters.end()) {
            fail(ErrorKind::Config, "unknown field '" + key + "'");
        }
        it->second(key, value);
    }
    if (c.circuit_stride == 0) {
        const bool cross = c.ansatz == AnsatzKind::FQconv && dataset_channels(c) > 1;
        c.circuit_stride = cross ? c.kernel_rows * c.kernel_cols : 1;
    }
    if (!root.contains("output_dir") && !base_dir.empty()) {
        c.output_dir = base_dir / c.output_dir;
    }
    validate_config(c);
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path &path) {
    const std::string text = read_file_text(path);
    ExperimentConfig c;
    try {
        c = parse_experiment_config(text, path.parent_path());
    } catch (const Error &e) {
        fail(e.kind(), path.string() + ": " + e.message());
    }
    for (const auto &file : dataset_files(c)) {
        if (!std::filesystem::exists(file)) {
            fail(ErrorKind::Io, "dataset file not found: " + file.string());
        }
    }
    return c;
}

std::string resolved_config_json(const ExperimentConfig &c) {
    Json j;
    j["dataset"] = to_string(c.dataset);
    // Unset paths are omitted; an empty string would not parse back.
    for (const auto &[key, p] : {std::pair<const char *, const std::filesystem::path &>{"data_dir", c.data_dir},
                                 {"train_images", c.train_images},
                                 {"train_labels", c.train_labels}}) {
        if (!p.empty()) {
            j[key] = p.string();
        }
    }
    if (!c.cifar_batches.empty()) {
        j["cifar_batches"] = Json::array();
        for (const auto &p : c.cifar_batches) {
            j["cifar_batches"].push_back(p.string());
        }
    }
    j["samples"] = c.samples;
    j["eval"] = to_string(c.eval);
    j["eval_samples"] = c.eval_samples;
    j["resolution"] = c.resolution;
    j["architecture"] = to_string(c.architecture);
    j["ansatz"] = to_string(c.ansatz);
    j["kernel_rows"] = c.kernel_rows;
    j["kernel_cols"] = c.kernel_cols;
    j["circuit_stride"] = c.circuit_stride;
    j["observable"] = c.observable;
    j["filters"] = c.filters;
    j["spatial_stride"] = c.spatial_stride;
    j["hidden"] = c.hidden;
    j["classes"] = c.classes;
    j["epochs"] = c.train.epochs;
    j["batch_size"] = c.train.batch_size;
    j["learning_rate"] = c.train.optimizer.learning_rate;
    j["optimizer"] = to_string(c.train.optimizer.kind);
    j["adam_beta1"] = c.train.optimizer.beta1;
    j["adam_beta2"] = c.train.optimizer.beta2;
    j["adam_epsilon"] = c.train.optimizer.epsilon;
    j["seed"] = c.train.seed;
    j["noise_level"] = c.noise_level;
    j["noise_trajectories"] = c.noise_trajectories;
    j["eval_trajectories"] = c.train.eval_trajectories;
    j["threads"] = c.threads;
    j["record_wall_time"] = c.record_wall_time;
    j["output_dir"] = c.output_dir.string();
    return j.dump(2) + "\n";
}

std::size_t dataset_channels(const ExperimentConfig &config) {
    return config.dataset == DatasetKind::Cifar10Small ? 3 : 1;
}

AnsatzConfig ansatz_config(const ExperimentConfig &config) {
    return {config.ansatz,
            {config.kernel_rows, config.kernel_cols, dataset_channels(config)},
            config.circuit_stride,
            config.observable};
}

Network build_network(const ExperimentConfig &config) {
    const std::size_t side = config.resolution != 0 ? config.resolution
                             : config.dataset == DatasetKind::Cifar10Small ? kCifarSide
                                                                           : 28;
    const std::vector<std::size_t> dims{side, side, dataset_channels(config)};
    const std::uint64_t init_seed = derive_seed(config.train.seed, kInitStream);
    if (config.architecture == Architecture::ClassicalBenchmark) {
        return classical_benchmark_net(dims, config.classes, init_seed);
    }
    HybridOptions opt;
    opt.ansatz = ansatz_config(config);
    opt.filters = config.filters;
    opt.stride_rows = config.spatial_stride;
    opt.stride_cols = config.spatial_stride;
    opt.hidden = config.hidden;
    opt.classes = config.classes;
    opt.seed = init_seed;
    if (config.noise_level > 0.0) {
        opt.noise = NoiseConfig{config.noise_level, config.noise_trajectories,
                                derive_seed(config.train.seed, kLayerNoiseStream)};
    }
    return config.architecture == Architecture::HybridDense ? hybrid_dense_net(dims, opt) : hybrid_conv_net(dims, opt);
}

PreparedData prepare_data(const ExperimentConfig &config) {
    const auto files = dataset_files(config);
    for (const auto &f : files) {
        if (!std::filesystem::exists(f)) {
            fail(ErrorKind::Io, "dataset file not found: " + f.string());
        }
    }
    LabeledImageSet full =
        config.dataset == DatasetKind::Cifar10Small ? load_cifar_batches(files) : load_idx(files[0], files[1]);
    validate(full, config.classes);

    const std::size_t holdout = config.eval == EvalSplit::Holdout ? config.eval_samples : 0;
    if (holdout > full.size()) {
        fail(ErrorKind::Size, "eval_samples " + std::to_string(holdout) + " exceeds the " +
                                  std::to_string(full.size()) + " available images");
    }
    const std::size_t train_n = config.samples != 0 ? config.samples : full.size() - holdout;
    if (train_n + holdout > full.size()) {
        fail(ErrorKind::Size, "samples + eval_samples = " + std::to_string(train_n + holdout) + " exceeds the " +
                                  std::to_string(full.size()) + " available images");
    }
    // One permutation feeds both splits, so they never overlap.
    const LabeledImageSet drawn = sample_subset(full, train_n + holdout, derive_seed(config.train.seed, kDataStream));
    auto slice = [&](std::size_t begin, std::size_t end, const std::string &tag) {
        LabeledImageSet part;
        part.source = drawn.source + "[" + tag + "]";
        part.images.assign(drawn.images.begin() + static_cast<std::ptrdiff_t>(begin),
                           drawn.images.begin() + static_cast<std::ptrdiff_t>(end));
        part.labels.assign(drawn.labels.begin() + static_cast<std::ptrdiff_t>(begin),
                           drawn.labels.begin() + static_cast<std::ptrdiff_t>(end));
        if (config.resolution != 0 && config.resolution != part.image_dims().at(0)) {
            part = resize_area(part, config.resolution, config.resolution);
        }
        return part;
    };

    PreparedData out{slice(0, train_n, "train"), std::nullopt};
    if (config.eval == EvalSplit::Holdout) {
        out.eval = slice(train_n, train_n + holdout, "holdout");
    } else if (config.eval == EvalSplit::Train) {
        out.eval = out.train;
    }
    return out;
}

TrainOutputs run_train(const ExperimentConfig &config, const ProgressFn &progress) {
    validate_config(config);
    set_parallelism(config.threads);
    const PreparedData data = prepare_data(config);
    Network net = build_network(config);
    TrainState state;
    auto on_epoch = [&](const EpochRecord &e) {
        if (progress) {
            std::string line = "epoch " + std::to_string(e.epoch) + "/" + std::to_string(config.train.epochs) +
                               " loss " + format_double(e.train_loss) + " acc " + format_double(e.train_accuracy);
            if (e.eval_accuracy) {
                line += " eval " + format_double(*e.eval_accuracy);
            }
            progress(line);
        }
    };
    RunRecord record = train(net, data.train, data.eval ? &*data.eval : nullptr, config.train, state, on_epoch);
    if (!config.record_wall_time) {
        for (auto &e : record.epochs) {
            e.wall_time_s = 0.0;
        }
    }

    std::filesystem::create_directories(config.output_dir);
    TrainOutputs out{std::move(record), config.output_dir / "run.csv", config.output_dir / "checkpoint.bin",
                     config.output_dir / "config_resolved.json"};
    write_file_atomic(out.resolved_config, resolved_config_json(config));
    save_checkpoint(out.checkpoint, net, state.optimizer);
    write_file_atomic(out.run_csv, run_csv(out.record));
    return out;
}

EvalOutputs run_eval(const std::filesystem::path &checkpoint, const ExperimentConfig &config,
                     const std::filesystem::path &out_dir) {
    validate_config(config);
    set_parallelism(config.threads);
    Network net = build_network(config);
    OptimizerState state;
    load_checkpoint(checkpoint, net, state);
    PreparedData data = prepare_data(config);
    const LabeledImageSet &set = data.eval ? *data.eval : data.train;
    EvalResult result = evaluate(net, set, config.train);

    std::filesystem::create_directories(out_dir);
    EvalOutputs out{std::move(result), set.size(), out_dir / "eval.csv", out_dir / "confusion.csv"};
    write_file_atomic(out.eval_csv, "samples,accuracy,loss\n" + std::to_string(out.samples) + "," +
                                        format_double(out.result.accuracy) + "," + format_double(out.result.loss) +
                                        "\n");
    write_file_atomic(out.confusion_csv, out.result.confusion.to_csv());
    return out;
}

std::vector<SmoothnessRow> smoothness_report(const std::vector<std::filesystem::path> &run_dirs,
                                             const ReportOptions &options) {
    std::vector<SmoothnessRow> rows;
    for (const auto &dir : run_dirs) {
        const auto csv_path = dir / "run.csv";
        if (!std::filesystem::exists(csv_path)) {
            fail(ErrorKind::Io, "missing run log: " + csv_path.string());
        }
        RunRecord record;
        try {
            record = parse_run_csv(read_file_text(csv_path));
        } catch (const Error &e) {
            fail(e.kind(), csv_path.string() + ": " + e.message());
        }
        std::string name = dir.filename().string();
        if (name.empty() || name == ".") {
            name = std::filesystem::absolute(dir).parent_path().filename().string();
        }
        std::vector<double> loss;
        std::vector<double> acc;
        for (const auto &e : record.epochs) {
            loss.push_back(e.train_loss);
            acc.push_back(e.train_accuracy);
        }
        auto add = [&](const std::string &suffix, const std::vector<double> &curve) {
            try {
                rows.push_back({name + suffix, options.window, options.polyorder,
                                smoothness_stats(curve, options.window, options.polyorder)});
            } catch (const Error &e) {
                fail(e.kind(), csv_path.string() + " (" + name + suffix + "): " + e.message());
            }
        };
        add("_loss", loss);
        if (options.accuracy_units != AccuracyUnits::Percent) {
            add("_accuracy", acc);
        }
        if (options.accuracy_units != AccuracyUnits::Fraction) {
            std::vector<double> pct(acc.size());
            std::transform(acc.begin(), acc.end(), pct.begin(), [](double a) { return 100.0 * a; });
            add("_accuracy_pct", pct);
        }
    }
    return rows;
}

} // namespace qconv
