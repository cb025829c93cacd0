#include "qconv/ansatz.hpp"

#include <numbers>
#include <numeric>
#include <string>

#include "qconv/error.hpp"

namespace qconv {

std::string_view to_string(AnsatzKind kind) { return kind == AnsatzKind::HQconv ? "HQconv" : "FQconv"; }

AnsatzKind parse_ansatz_kind(std::string_view name) {
    if (name == "HQconv" || name == "hqconv") {
        return AnsatzKind::HQconv;
    }
    if (name == "FQconv" || name == "fqconv") {
        return AnsatzKind::FQconv;
    }
    fail(ErrorKind::Config, "unknown ansatz '" + std::string(name) + "' (expected HQconv or FQconv)");
}

void validate(const KernelShape &shape) {
    if (shape.rows == 0 || shape.cols == 0 || shape.channels == 0) {
        fail(ErrorKind::Config, "kernel dimensions must be positive");
    }
    const auto q = shape.qubits();
    if (q < 2 || q > kMaxQubits) {
        fail(ErrorKind::Config, "kernel needs 2.." + std::to_string(kMaxQubits) + " qubits (S*T*C), got " +
                                    std::to_string(q));
    }
}

std::size_t layout_qubit_index(const KernelShape &shape, std::size_t pixel, std::size_t channel) {
    if (pixel < 1 || pixel > shape.pixels()) {
        fail(ErrorKind::Index, "pixel ordinal " + std::to_string(pixel) + " outside 1.." +
                                   std::to_string(shape.pixels()));
    }
    if (channel < 1 || channel > shape.channels) {
        fail(ErrorKind::Index, "channel ordinal " + std::to_string(channel) + " outside 1.." +
                                   std::to_string(shape.channels));
    }
    return (channel - 1) * shape.pixels() + (pixel - 1);
}

namespace {

std::vector<std::size_t> all_qubits(std::size_t n) {
    std::vector<std::size_t> q(n);
    std::iota(q.begin(), q.end(), std::size_t{0});
    return q;
}

std::vector<GateApplication> encoding_layer(std::size_t qubits) {
    std::vector<GateApplication> gates;
    gates.reserve(qubits);
    for (std::size_t q = 0; q < qubits; ++q) {
        gates.push_back({GateKind::RxData, q, std::nullopt, q});
    }
    return gates;
}

// CZPow is applied first, then CXPow, each with a fresh parameter.
void push_pair(std::vector<GateApplication> &gates, std::size_t &next_param, std::size_t control,
               std::size_t target) {
    gates.push_back({GateKind::CZPow, target, control, next_param++});
    gates.push_back({GateKind::CXPow, target, control, next_param++});
}

} // namespace

CircuitSpec build_hqconv(const KernelShape &shape, std::size_t stride) {
    validate(shape);
    const std::size_t per_channel = shape.pixels();
    if (stride < 1 || stride >= per_channel) {
        fail(ErrorKind::Config, "HQconv circuit stride must satisfy 1 <= stride < S*T = " +
                                    std::to_string(per_channel) + ", got " + std::to_string(stride));
    }
    auto gates = encoding_layer(shape.qubits());
    std::size_t next_param = 0;
    for (std::size_t c = 1; c <= shape.channels; ++c) {
        for (std::size_t p = 1; p + stride <= per_channel; ++p) {
            push_pair(gates, next_param, layout_qubit_index(shape, p, c), layout_qubit_index(shape, p + stride, c));
        }
    }
    for (std::size_t c = 2; c <= shape.channels; ++c) {
        push_pair(gates, next_param, layout_qubit_index(shape, 1, c - 1), layout_qubit_index(shape, 1, c));
    }
    return CircuitSpec(shape.qubits(), std::move(gates), next_param, all_qubits(shape.qubits()));
}

CircuitSpec build_fqconv(const KernelShape &shape, std::size_t stride) {
    validate(shape);
    const std::size_t total = shape.qubits();
    if (stride < 1 || stride >= total) {
        fail(ErrorKind::Config, "FQconv circuit stride must satisfy 1 <= stride < S*T*C = " +
                                    std::to_string(total) + ", got " + std::to_string(stride));
    }
    auto gates = encoding_layer(total);
    std::size_t next_param = 0;
    for (std::size_t p = 1; p + stride <= total; ++p) {
        push_pair(gates, next_param, p - 1, p + stride - 1);
    }
    return CircuitSpec(total, std::move(gates), next_param, all_qubits(total));
}

CircuitSpec build_ansatz(const AnsatzConfig &config) {
    CircuitSpec circuit = config.kind == AnsatzKind::HQconv ? build_hqconv(config.shape, config.circuit_stride)
                                                            : build_fqconv(config.shape, config.circuit_stride);
    if (config.observable_subset.empty()) {
        return circuit;
    }
    return circuit.with_observable(config.observable_subset);
}

std::vector<double> encode_window(std::span<const double> window_pixels, const KernelShape &shape) {
    validate(shape);
    if (window_pixels.size() != shape.qubits()) {
        fail(ErrorKind::Shape, "window has " + std::to_string(window_pixels.size()) + " values, kernel needs " +
                                   std::to_string(shape.qubits()));
    }
    std::vector<double> angles(shape.qubits());
    for (std::size_t p = 0; p < shape.pixels(); ++p) {
        for (std::size_t c = 0; c < shape.channels; ++c) {
            const double x = window_pixels[p * shape.channels + c];
            if (!(x >= 0.0 && x <= 1.0)) {
                fail(ErrorKind::Normalization, "pixel value " + std::to_string(x) + " outside [0, 1]");
            }
            angles[c * shape.pixels() + p] = x * std::numbers::pi;
        }
    }
    return angles;
}

} // namespace qconv
