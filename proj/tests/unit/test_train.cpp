#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "qconv/error.hpp"
#include "qconv/io.hpp"
#include "qconv/train.hpp"
#include "testkit.hpp"

using namespace qconv;
namespace fs = std::filesystem;

namespace {

fs::path fixture(const char *name) { return fs::path(QCONV_FIXTURE_DIR) / name; }

fs::path scratch(const std::string &name) {
    const fs::path dir = fs::temp_directory_path() / "qconv_test_train";
    fs::create_directories(dir);
    return dir / name;
}

template <class Fn> std::pair<ErrorKind, std::string> error_of(Fn &&fn) {
    try {
        fn();
    } catch (const Error &e) {
        return {e.kind(), e.what()};
    }
    ADD_FAILURE() << "no qconv::Error thrown";
    return {ErrorKind::Io, ""};
}

// 4x4 greyscale images: class 0 has a bright left half, class 1 a bright
// right half, plus seeded jitter.
LabeledImageSet halves(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(0.0, 0.2);
    LabeledImageSet set;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t label = i % 2;
        Tensor img({4, 4, 1});
        for (std::size_t r = 0; r < 4; ++r) {
            for (std::size_t c = 0; c < 4; ++c) {
                const bool bright = (c < 2) == (label == 0);
                img(r, c, 0) = bright ? 1.0 - jitter(rng) : jitter(rng);
            }
        }
        set.images.push_back(img);
        set.labels.push_back(label);
    }
    return set;
}

Network quantum_toy(std::uint64_t seed, std::size_t classes = 2) {
    return NetworkBuilder({4, 4, 1}, seed)
        .qconv({AnsatzKind::FQconv, {2, 2, 1}, 1, {}}, 2)
        .flatten()
        .dense(classes)
        .softmax()
        .build();
}

Network linear_toy(std::uint64_t seed, std::size_t classes = 3) {
    return NetworkBuilder({2, 2, 1}, seed).flatten().dense(classes).softmax().build();
}

Network dense_fixture_net() { return NetworkBuilder({1, 2, 1}, 0).flatten().dense(2).softmax().build(); }

std::vector<ParamBlock> blocks_of(std::vector<double> &values) { return {{"p", values}}; }

} // namespace

TEST(CrossEntropy, Examples) {
    const std::vector<double> onehot{0, 0, 1, 0};
    EXPECT_EQ(cross_entropy(onehot, 2), 0.0);
    const std::vector<double> uniform(10, 0.1);
    EXPECT_NEAR(cross_entropy(uniform, 4), std::log(10.0), 1e-12);
    const std::vector<double> half{0.5, 0.25, 0.25};
    EXPECT_NEAR(cross_entropy(half, 0), std::log(2.0), 1e-15);
}

TEST(CrossEntropy, FloorAvoidsInfinity) {
    const std::vector<double> p{1.0, 0.0};
    EXPECT_NEAR(cross_entropy(p, 1), -std::log(1e-12), 1e-9);
}

TEST(CrossEntropy, InvalidLabelAndNormalization) {
    const std::vector<double> p{0.5, 0.5};
    EXPECT_EQ(error_of([&] { cross_entropy(p, 2); }).first, ErrorKind::Label);
    const std::vector<double> bad{0.5, 0.6};
    EXPECT_EQ(error_of([&] { cross_entropy(bad, 0); }).first, ErrorKind::Normalization);
}

TEST(Optimizer, SgdStep) {
    std::vector<double> v{0.0};
    auto blocks = blocks_of(v);
    OptimizerState state;
    optimizer_step(blocks, {{1.0}}, state, {OptimizerKind::Sgd, 0.1});
    EXPECT_DOUBLE_EQ(v[0], -0.1);
}

TEST(Optimizer, ZeroGradientsLeaveParams) {
    std::vector<double> v{0.3, -2.0};
    auto blocks = blocks_of(v);
    OptimizerState sgd;
    optimizer_step(blocks, {{0.0, 0.0}}, sgd, {OptimizerKind::Sgd, 0.1});
    EXPECT_EQ(v, (std::vector<double>{0.3, -2.0}));
    OptimizerState adam{0, {{0, 0}}, {{0, 0}}};
    optimizer_step(blocks, {{0.0, 0.0}}, adam, {});
    EXPECT_EQ(v, (std::vector<double>{0.3, -2.0}));
}

TEST(Optimizer, AdamFirstStepMovesByLearningRate) {
    for (double g : {1e-3, 0.7, -25.0}) {
        std::vector<double> v{1.0};
        auto blocks = blocks_of(v);
        OptimizerState state{0, {{0}}, {{0}}};
        optimizer_step(blocks, {{g}}, state, {});
        EXPECT_NEAR(v[0], 1.0 - 0.01 * (g > 0 ? 1 : -1), 1e-7);
        EXPECT_EQ(state.step, 1u);
    }
}

TEST(Optimizer, ShapeMismatch) {
    std::vector<double> v{0.0, 1.0};
    auto blocks = blocks_of(v);
    OptimizerState state;
    EXPECT_EQ(error_of([&] { optimizer_step(blocks, {{1.0}}, state, {OptimizerKind::Sgd, 0.1}); }).first,
              ErrorKind::Shape);
    OptimizerState adam{0, {{0}}, {{0}}};
    EXPECT_EQ(error_of([&] { optimizer_step(blocks, {{1.0, 1.0}}, adam, {}); }).first, ErrorKind::Shape);
}

TEST(Training, SingleSampleLossDecreases) {
    Network net = linear_toy(1);
    LabeledImageSet one;
    one.images.push_back(Tensor({2, 2, 1}, std::vector<double>{0.1, 0.9, 0.4, 0.6}));
    one.labels.push_back(2);
    TrainConfig cfg;
    TrainState state;
    double prev = INFINITY;
    for (int e = 0; e < 10; ++e) {
        const auto rec = train_epoch(net, one, cfg, state);
        EXPECT_LT(rec.train_loss, prev);
        prev = rec.train_loss;
    }
    EXPECT_EQ(state.epochs_done, 10u);
}

TEST(Training, SeededRunsAreBitIdentical) {
    const auto data = halves(12, 3);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 5;
    cfg.seed = 77;
    auto run = [&] {
        Network net = quantum_toy(5);
        TrainState state;
        auto rec = train(net, data, &data, cfg, state);
        for (auto &e : rec.epochs) {
            e.wall_time_s = 0;
        }
        return std::pair{run_csv(rec), checkpoint_blocks(net, state.optimizer)};
    };
    EXPECT_EQ(run(), run());
}

TEST(Training, IdenticalBatchEqualsSingleSample) {
    const Network net = quantum_toy(6);
    auto data = halves(1, 4);
    data.images.resize(4, data.images[0]);
    data.labels.resize(4, data.labels[0]);
    const std::vector<std::size_t> single{0};
    const std::vector<std::size_t> batch{0, 1, 2, 3};
    const auto a = batch_gradient(net, data, single);
    const auto b = batch_gradient(net, data, batch);
    EXPECT_DOUBLE_EQ(a.loss, b.loss);
    ASSERT_EQ(a.grads.size(), b.grads.size());
    for (std::size_t k = 0; k < a.grads.size(); ++k) {
        for (std::size_t i = 0; i < a.grads[k].size(); ++i) {
            EXPECT_NEAR(a.grads[k][i], b.grads[k][i], 1e-15 * (1 + std::abs(a.grads[k][i])));
        }
    }
}

TEST(Training, RecordedNumbersAreBounded) {
    const auto data = halves(10, 5);
    Network net = quantum_toy(7);
    TrainConfig cfg;
    cfg.epochs = 2;
    TrainState state;
    for (const auto &e : train(net, data, nullptr, cfg, state).epochs) {
        EXPECT_GE(e.train_loss, 0.0);
        EXPECT_GE(e.train_accuracy, 0.0);
        EXPECT_LE(e.train_accuracy, 1.0);
        EXPECT_FALSE(e.eval_accuracy.has_value());
    }
}

TEST(Training, QuantumToySeparatesHalves) {
    const auto data = halves(10, 8);
    Network net = quantum_toy(9);
    TrainConfig cfg;
    cfg.batch_size = 5;
    TrainState state;
    double accuracy = 0.0;
    for (int e = 0; e < 200 && accuracy < 1.0; ++e) {
        train_epoch(net, data, cfg, state);
        accuracy = evaluate(net, data, cfg).accuracy;
    }
    EXPECT_EQ(accuracy, 1.0) << "after " << state.epochs_done << " epochs";
}

TEST(Training, NoisyTrainingIsSeeded) {
    const auto data = halves(6, 10);
    auto run = [&](std::uint64_t seed) {
        Network net = NetworkBuilder({4, 4, 1}, 3)
                          .qconv({AnsatzKind::FQconv, {2, 2, 1}, 1, {}}, 1, 0, 0, NoiseConfig{0.05, 2, 11})
                          .flatten()
                          .dense(2)
                          .softmax()
                          .build();
        TrainConfig cfg;
        cfg.epochs = 1;
        cfg.seed = seed;
        cfg.eval_trajectories = 4;
        TrainState state;
        const auto rec = train(net, data, &data, cfg, state);
        return std::pair{rec.epochs[0].train_loss, *rec.epochs[0].eval_accuracy};
    };
    EXPECT_EQ(run(1), run(1));
    EXPECT_NE(run(1).first, run(2).first);
}

TEST(Evaluate, ConstantClassZeroPredictor) {
    Network net = linear_toy(0, 10);
    auto &dense = std::get<Dense>(net.layers[1]);
    std::fill(dense.weights.begin(), dense.weights.end(), 0.0);
    dense.biases[0] = 5.0;
    LabeledImageSet zeros;
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) {
        zeros.images.push_back(testkit::random_image(rng, {2, 2, 1}));
        zeros.labels.push_back(0);
    }
    const auto r = evaluate(net, zeros);
    EXPECT_EQ(r.accuracy, 1.0);
    EXPECT_EQ(r.confusion.at(0, 0), 20u);

    LabeledImageSet uniform;
    for (int i = 0; i < 1000; ++i) {
        uniform.images.push_back(zeros.images[i % 20]);
        uniform.labels.push_back(rng() % 10);
    }
    const auto u = evaluate(net, uniform);
    EXPECT_NEAR(u.accuracy, 0.1, 0.03);
    EXPECT_DOUBLE_EQ(u.accuracy, static_cast<double>(u.confusion.trace()) / u.confusion.total());
    EXPECT_EQ(u.confusion.total(), 1000u);
}

TEST(RunCsv, RoundTrip) {
    RunRecord rec;
    rec.epochs.push_back({1, 2.302585092994046, 0.1, std::nullopt, 0.5});
    rec.epochs.push_back({2, 1.0 / 3.0, 0.25, 0.2, 1.25});
    const std::string csv = run_csv(rec);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), kRunCsvHeader);
    EXPECT_NE(csv.find("\n1,2.302585092994046,0.1,,0.5\n"), std::string::npos) << csv;
    const auto back = parse_run_csv(csv);
    ASSERT_EQ(back.epochs.size(), 2u);
    EXPECT_EQ(back.epochs[1].train_loss, 1.0 / 3.0);
    EXPECT_FALSE(back.epochs[0].eval_accuracy.has_value());
    EXPECT_EQ(*back.epochs[1].eval_accuracy, 0.2);
    EXPECT_EQ(run_csv(back), csv);
}

TEST(RunCsv, MalformedLinesCiteLineNumber) {
    const auto [kind, msg] = error_of([] { parse_run_csv(std::string(kRunCsvHeader) + "\n1,0.5,0.1,,0\n2,x,0,,0\n"); });
    EXPECT_EQ(kind, ErrorKind::Format);
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_EQ(error_of([] { parse_run_csv("epoch,loss\n"); }).first, ErrorKind::Format);
}

TEST(Checkpoint, HandCraftedFixtureLoads) {
    Network net = dense_fixture_net();
    OptimizerState state;
    load_checkpoint(fixture("checkpoint_dense.bin"), net, state);
    const auto &dense = std::get<Dense>(net.layers[1]);
    EXPECT_EQ(dense.weights, (std::vector<double>{0.5, -0.25, std::numbers::pi, -0.0}));
    EXPECT_TRUE(std::signbit(dense.weights[3]));
    EXPECT_EQ(dense.biases, (std::vector<double>{1e-300, -2.5}));
    EXPECT_EQ(state.step, 3u);
    EXPECT_TRUE(state.m.empty());
    EXPECT_EQ(encode_checkpoint(checkpoint_blocks(net, state)), read_file_text(fixture("checkpoint_dense.bin")));
}

TEST(Checkpoint, MalformedFixturesAreRejectedWithoutSideEffects) {
    struct Case {
        const char *file;
        ErrorKind kind;
        const char *needle;
    };
    const Case cases[] = {
        {"checkpoint_bad_magic.bin", ErrorKind::Format, "byte offset 0"},
        {"checkpoint_version2.bin", ErrorKind::Version, "version 2"},
        {"checkpoint_truncated.bin", ErrorKind::Format, "byte offset 126"},
        {"checkpoint_trailing.bin", ErrorKind::Format, "byte offset 142"},
    };
    for (const auto &c : cases) {
        Network net = dense_fixture_net();
        const Network before = net;
        OptimizerState state;
        const auto [kind, msg] = error_of([&] { load_checkpoint(fixture(c.file), net, state); });
        EXPECT_EQ(kind, c.kind) << c.file;
        EXPECT_NE(msg.find(c.needle), std::string::npos) << c.file << ": " << msg;
        EXPECT_EQ(std::get<Dense>(net.layers[1]).weights, std::get<Dense>(before.layers[1]).weights);
    }
}

TEST(Checkpoint, ArchitectureMismatchIsConsistencyError) {
    Network other = linear_toy(0, 4);
    OptimizerState state;
    EXPECT_EQ(error_of([&] { load_checkpoint(fixture("checkpoint_dense.bin"), other, state); }).first,
              ErrorKind::Consistency);
}

TEST(Checkpoint, RoundTripIsBitExact) {
    const auto data = halves(6, 12);
    Network net = quantum_toy(13, 3);
    TrainConfig cfg;
    cfg.epochs = 2;
    TrainState state;
    train(net, data, nullptr, cfg, state);
    save_checkpoint(scratch("toy.bin"), net, state.optimizer);

    Network fresh = quantum_toy(99, 3);
    OptimizerState restored;
    load_checkpoint(scratch("toy.bin"), fresh, restored);
    EXPECT_EQ(restored, state.optimizer);
    EXPECT_EQ(checkpoint_blocks(fresh, restored), checkpoint_blocks(net, state.optimizer));
    for (const auto &img : data.images) {
        EXPECT_EQ(network_forward(fresh, img), network_forward(net, img));
    }
}
