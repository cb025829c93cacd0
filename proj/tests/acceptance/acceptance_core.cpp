// Acceptance criteria that need no external data: simulator, gradients,
// ansatz structure, end-to-end backprop, smoothness metric, file formats.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <filesystem>
#include <random>
#include <span>

#include "acceptance_kit.hpp"
#include "qconv/ansatz.hpp"
#include "qconv/data.hpp"
#include "qconv/error.hpp"
#include "qconv/grad.hpp"
#include "qconv/io.hpp"
#include "qconv/layers.hpp"
#include "qconv/metrics.hpp"
#include "qconv/simcore.hpp"
#include "qconv/train.hpp"
#include "testkit.hpp"

using namespace qconv;
using namespace qconv::acceptance;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kOracleAmpTol = 1e-12;
constexpr double kNormDriftTol = 1e-10;
constexpr double kShiftFdRelTol = 1e-6;
constexpr double kShiftFdStep = 1e-5;
constexpr double kBackpropRelTol = 1e-5;
constexpr double kBackpropFdStep = 1e-5;
// Below this absolute gap a relative comparison is meaningless (both values
// are zero up to finite-difference noise).
constexpr double kAbsFloor = 1e-8;
constexpr double kCubicSmoothTol = 1e-9;

const fs::path kFixtures = QCONV_FIXTURE_DIR;

// Entry-wise comparison: |a - b| <= rel * |b| or |a - b| <= kAbsFloor. Also
// tracks the largest relative gap among entries with |b| >= 1e-3 for the log.
struct GapTally {
    double rel;
    std::size_t values = 0;
    std::size_t violations = 0;
    double worst_rel = 0.0;
    double worst_abs = 0.0;

    void add(std::span<const double> a, std::span<const double> b) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double gap = std::abs(a[i] - b[i]);
            ++values;
            violations += testkit::close_rel(a[i], b[i], rel, kAbsFloor) ? 0 : 1;
            worst_abs = std::max(worst_abs, gap);
            if (std::abs(b[i]) >= 1e-3) {
                worst_rel = std::max(worst_rel, gap / std::abs(b[i]));
            }
        }
    }

    [[nodiscard]] std::string summary() const {
        return std::to_string(violations) + "/" + std::to_string(values) + " values outside tolerance (rel " +
               fmt(rel) + ", abs floor " + fmt(kAbsFloor) + "); worst rel gap " + fmt(worst_rel) +
               ", worst abs gap " + fmt(worst_abs);
    }
};

Outcome simulator_correctness() {
    std::mt19937_64 rng(20240601);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng() % 5;
        const std::size_t gates = 1 + rng() % 20;
        auto rc = testkit::random_circuit(rng, n, gates);
        const auto fast = run_circuit(rc.circuit, rc.params, rc.data_angles);
        const auto oracle = testkit::oracle_state(rc.circuit, rc.params, rc.data_angles);
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            worst = std::max(worst, std::abs(fast.amplitudes()[i] - oracle[i]));
        }
    }
    double drift = 0.0;
    for (int chain = 0; chain < 3; ++chain) {
        auto rc = testkit::random_circuit(rng, 18, 100);
        const auto state = run_circuit(rc.circuit, rc.params, rc.data_angles);
        double norm = 0.0;
        for (const auto &a : state.amplitudes()) {
            norm += std::norm(a);
        }
        drift = std::max(drift, std::abs(norm - 1.0));
    }
    return {worst <= kOracleAmpTol && drift < kNormDriftTol,
            "max |amp - oracle| " + fmt(worst) + " (tol " + fmt(kOracleAmpTol) + "), 18-qubit norm drift " +
                fmt(drift) + " (tol " + fmt(kNormDriftTol) + ")"};
}

Outcome gradient_exactness() {
    std::mt19937_64 rng(424242);
    GapTally tally{kShiftFdRelTol};
    for (int trial = 0; trial < 50; ++trial) {
        auto rc = testkit::random_ansatz(rng, 4, 8);
        const auto exact = shift_rule_gradient(rc.circuit, rc.params, rc.data_angles);
        const auto fd = finite_difference_gradient(rc.circuit, rc.params, rc.data_angles, kShiftFdStep);
        tally.add(exact, fd);
    }
    return {tally.violations == 0, "50 circuits, h " + fmt(kShiftFdStep) + ": " + tally.summary()};
}

Outcome structural_counts() {
    const KernelShape rgb{2, 2, 3};
    const std::size_t hq = build_hqconv(rgb, 1).num_params();
    const std::size_t fq = build_fqconv(rgb, 4).num_params();
    // Every controlled pair must cross channels once the stride reaches S*T.
    std::size_t within = 0;
    std::size_t pairs = 0;
    for (std::size_t strd = rgb.pixels(); strd < rgb.qubits(); ++strd) {
        const auto c = build_fqconv(rgb, strd);
        for (const auto &g : c.gates()) {
            if (!g.control) {
                continue;
            }
            ++pairs;
            if (*g.control / rgb.pixels() == g.target / rgb.pixels()) {
                ++within;
            }
        }
    }
    return {hq == 22 && fq == 16 && within == 0 && pairs > 0,
            "HQconv(2x2x3, 1) params " + std::to_string(hq) + " (want 22), FQconv(2x2x3, 4) params " +
                std::to_string(fq) + " (want 16), within-channel pairs at stride >= S*T: " +
                std::to_string(within) + " of " + std::to_string(pairs)};
}

Outcome end_to_end_gradient() {
    std::mt19937_64 rng(99);
    GapTally tally{kBackpropRelTol};
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const Network net = NetworkBuilder({4, 4, 1}, seed)
                                .qconv({AnsatzKind::FQconv, {2, 2, 1}, 1, {}}, 2)
                                .flatten()
                                .dense(8)
                                .relu()
                                .dense(3)
                                .softmax()
                                .build();
        const Tensor image = testkit::random_image(rng, {4, 4, 1});
        const std::size_t label = rng() % 3;
        const auto analytic = network_backward(net, image, label).grads;
        const auto numeric = testkit::network_fd_gradient(net, image, label, kBackpropFdStep);
        for (std::size_t b = 0; b < analytic.size(); ++b) {
            tally.add(analytic[b], numeric[b]);
        }
    }
    return {tally.violations == 0, "3 toy nets, h " + fmt(kBackpropFdStep) + ": " + tally.summary()};
}

Outcome smoothness_pipeline() {
    const std::vector<double> constant(40, 0.7);
    const auto sc = smoothness_stats(constant);
    std::vector<double> cubic(60);
    for (std::size_t t = 0; t < cubic.size(); ++t) {
        const double x = static_cast<double>(t);
        cubic[t] = 2.0 - 0.1 * x + 0.003 * x * x - 0.00004 * x * x * x;
    }
    const auto cs = smoothness_stats(cubic, 9, 3);

    std::size_t monotone = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<double> noise(90);
        for (auto &v : noise) {
            v = u(rng);
        }
        double prev = -1.0;
        bool ok = true;
        for (double amp : {0.01, 0.05, 0.1}) {
            std::vector<double> curve(90);
            for (std::size_t t = 0; t < curve.size(); ++t) {
                curve[t] = std::exp(-0.03 * static_cast<double>(t)) + amp * noise[t];
            }
            const double l1 = smoothness_stats(curve).avg_l1;
            ok = ok && l1 > prev;
            prev = l1;
        }
        monotone += ok ? 1 : 0;
    }
    const std::string csv = smoothness_csv({{"run_loss", 9, 3, cs}});
    const bool layout = csv.rfind(std::string(kSmoothnessCsvHeader) + "\nrun_loss,9,3,", 0) == 0;
    const bool pass = sc.avg_l1 == 0.0 && sc.std_dev == 0.0 && cs.avg_l1 < kCubicSmoothTol &&
                      cs.std_dev < kCubicSmoothTol && monotone == 20 && layout;
    return {pass, "constant {" + fmt(sc.avg_l1) + ", " + fmt(sc.std_dev) + "}, cubic {" + fmt(cs.avg_l1) + ", " +
                      fmt(cs.std_dev) + "} (tol " + fmt(kCubicSmoothTol) + "), monotone in noise for " +
                      std::to_string(monotone) + "/20 seeds, csv layout " + (layout ? "ok" : "wrong")};
}

struct ExpectedError {
    std::function<void()> action;
    ErrorKind kind;
    std::string needle;
};

Outcome format_fidelity() {
    const fs::path tmp = fs::temp_directory_path() / "qconv_acceptance";
    fs::create_directories(tmp);
    auto fx = [](const char *name) { return kFixtures / name; };
    std::vector<std::string> problems;

    const auto idx = load_idx(fx("idx_three.images"), fx("idx_three.labels"));
    save_idx(idx, tmp / "three.images", tmp / "three.labels");
    if (read_file_bytes(tmp / "three.images") != read_file_bytes(fx("idx_three.images")) ||
        read_file_bytes(tmp / "three.labels") != read_file_bytes(fx("idx_three.labels"))) {
        problems.push_back("IDX round trip differs");
    }
    const auto cifar = load_cifar_batch(fx("cifar_two.bin"));
    save_cifar_batch(cifar, tmp / "two.bin");
    if (read_file_bytes(tmp / "two.bin") != read_file_bytes(fx("cifar_two.bin"))) {
        problems.push_back("CIFAR round trip differs");
    }

    const std::vector<std::pair<std::string, ExpectedError>> malformed{
        {"idx_bad_magic",
         {[&] { load_idx(fx("idx_bad_magic.images"), fx("idx_one.labels")); }, ErrorKind::Format, "0x00000802"}},
        {"idx_count_mismatch",
         {[&] { load_idx(fx("idx_one.images"), fx("idx_count_mismatch.labels")); }, ErrorKind::Consistency, ""}},
        {"idx_truncated",
         {[&] { load_idx(fx("idx_truncated.images"), fx("idx_one.labels")); }, ErrorKind::Format, "byte offset"}},
        {"idx_bad_label",
         {[&] { load_idx(fx("idx_one.images"), fx("idx_bad_label.labels")); }, ErrorKind::Label, ""}},
        {"cifar_truncated",
         {[&] { load_cifar_batch(fx("cifar_truncated.bin")); }, ErrorKind::Format, "byte offset 3073"}},
        {"checkpoint_bad_magic",
         {[&] { decode_checkpoint(read_file_text(fx("checkpoint_bad_magic.bin"))); }, ErrorKind::Format,
          "byte offset 0"}},
        {"checkpoint_version2",
         {[&] { decode_checkpoint(read_file_text(fx("checkpoint_version2.bin"))); }, ErrorKind::Version,
          "version 2"}},
        {"checkpoint_truncated",
         {[&] { decode_checkpoint(read_file_text(fx("checkpoint_truncated.bin"))); }, ErrorKind::Format,
          "byte offset 126"}},
        {"checkpoint_trailing",
         {[&] { decode_checkpoint(read_file_text(fx("checkpoint_trailing.bin"))); }, ErrorKind::Format,
          "byte offset 142"}},
    };
    for (const auto &[name, expect] : malformed) {
        try {
            expect.action();
            problems.push_back(name + " accepted");
        } catch (const Error &e) {
            if (e.kind() != expect.kind || std::string(e.what()).find(expect.needle) == std::string::npos) {
                problems.push_back(name + ": " + e.what());
            }
        }
    }

    // Hand-crafted checkpoint: load then save reproduces the file.
    Network dense = NetworkBuilder({1, 2, 1}, 0).flatten().dense(2).softmax().build();
    OptimizerState state;
    load_checkpoint(fx("checkpoint_dense.bin"), dense, state);
    save_checkpoint(tmp / "dense.bin", dense, state);
    if (read_file_bytes(tmp / "dense.bin") != read_file_bytes(fx("checkpoint_dense.bin"))) {
        problems.push_back("checkpoint re-save differs");
    }
    // A trained hybrid net: save, load into a differently seeded net, save again.
    std::mt19937_64 rng(5);
    Network hybrid = NetworkBuilder({4, 4, 1}, 1).qconv({AnsatzKind::FQconv, {2, 2, 1}, 1, {}}, 2).dense(3).softmax().build();
    LabeledImageSet set;
    for (std::size_t i = 0; i < 4; ++i) {
        set.images.push_back(testkit::random_image(rng, {4, 4, 1}));
        set.labels.push_back(i % 3);
    }
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 2;
    TrainState ts;
    train(hybrid, set, nullptr, cfg, ts);
    save_checkpoint(tmp / "hybrid.bin", hybrid, ts.optimizer);
    Network other = NetworkBuilder({4, 4, 1}, 2).qconv({AnsatzKind::FQconv, {2, 2, 1}, 1, {}}, 2).dense(3).softmax().build();
    OptimizerState restored;
    load_checkpoint(tmp / "hybrid.bin", other, restored);
    save_checkpoint(tmp / "hybrid2.bin", other, restored);
    if (read_file_bytes(tmp / "hybrid.bin") != read_file_bytes(tmp / "hybrid2.bin") || !(restored == ts.optimizer)) {
        problems.push_back("hybrid checkpoint not bit-identical");
    }
    const auto want = parameter_blocks(hybrid);
    const auto got = parameter_blocks(other);
    for (std::size_t b = 0; b < want.size(); ++b) {
        if (!std::ranges::equal(want[b].values, got[b].values,
                                [](double x, double y) { return std::bit_cast<std::uint64_t>(x) ==
                                                                std::bit_cast<std::uint64_t>(y); })) {
            problems.push_back("restored values differ in " + want[b].name);
        }
    }

    std::string detail = "IDX + CIFAR round trips, 9 malformed fixtures, 2 checkpoint round trips";
    if (!problems.empty()) {
        detail = problems.front() + (problems.size() > 1 ? " (+" + std::to_string(problems.size() - 1) + " more)" : "");
    }
    return {problems.empty(), detail};
}

} // namespace

int main() {
    return run_criteria({
        {1, "simulator matches dense oracle; norm preserved", 60, simulator_correctness},
        {2, "parameter-shift gradients match finite differences", 120, gradient_exactness},
        {3, "ansatz parameter counts and channel crossing", 0, structural_counts},
        {4, "end-to-end backprop matches loss finite differences", 60, end_to_end_gradient},
        {8, "smoothness statistic pipeline", 0, smoothness_pipeline},
        {9, "file format fidelity", 0, format_fidelity},
    });
}
