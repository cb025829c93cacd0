#include "qconv/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qconv/error.hpp"

namespace qconv {

namespace {

void check_inputs(std::span<const double> probs, std::size_t label) {
    if (label >= probs.size()) {
        fail(ErrorKind::Label,
             "label " + std::to_string(label) + " outside 0.." + std::to_string(probs.size() == 0 ? 0 : probs.size() - 1));
    }
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (!(std::abs(total - 1.0) <= 1e-6)) {
        fail(ErrorKind::Normalization, "probabilities sum to " + std::to_string(total));
    }
}

} // namespace

double cross_entropy(std::span<const double> probs, std::size_t label) {
    check_inputs(probs, label);
    return -std::log(std::max(probs[label], kProbabilityFloor));
}

void cross_entropy_gradient(std::span<const double> probs, std::size_t label, std::span<double> out) {
    check_inputs(probs, label);
    if (out.size() != probs.size()) {
        fail(ErrorKind::Shape, "gradient buffer size mismatch");
    }
    std::fill(out.begin(), out.end(), 0.0);
    if (probs[label] > kProbabilityFloor) {
        out[label] = -1.0 / probs[label];
    }
}

} // namespace qconv
