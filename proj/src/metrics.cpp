#include "qconv/metrics.hpp"

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <numeric>

#include "qconv/error.hpp"

namespace qconv {

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes) : classes(num_classes), counts(num_classes * num_classes, 0) {
    if (num_classes == 0) {
        fail(ErrorKind::Config, "confusion matrix needs at least one class");
    }
}

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

std::size_t ConfusionMatrix::trace() const {
    std::size_t t = 0;
    for (std::size_t k = 0; k < classes; ++k) {
        t += at(k, k);
    }
    return t;
}

std::size_t ConfusionMatrix::row_sum(std::size_t truth) const {
    std::size_t s = 0;
    for (std::size_t p = 0; p < classes; ++p) {
        s += at(truth, p);
    }
    return s;
}

double ConfusionMatrix::accuracy() const {
    const std::size_t n = total();
    return n == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(n);
}

std::string ConfusionMatrix::to_csv() const {
    std::string out;
    for (std::size_t t = 0; t < classes; ++t) {
        for (std::size_t p = 0; p < classes; ++p) {
            out += (p ? "," : "") + std::to_string(at(t, p));
        }
        out += '\n';
    }
    return out;
}

ConfusionMatrix confusion_matrix(std::span<const std::size_t> predictions, std::span<const std::size_t> labels,
                                 std::size_t classes) {
    if (predictions.size() != labels.size()) {
        fail(ErrorKind::Arity, "expected " + std::to_string(labels.size()) + " predictions, got " +
                                   std::to_string(predictions.size()));
    }
    ConfusionMatrix m(classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= classes || predictions[i] >= classes) {
            fail(ErrorKind::Label, "sample " + std::to_string(i) + " has a class outside 0.." +
                                       std::to_string(classes - 1));
        }
        ++m.at(labels[i], predictions[i]);
    }
    return m;
}

namespace {

void check_filter(std::size_t length, std::size_t window, std::size_t polyorder) {
    if (window == 0 || window % 2 == 0) {
        fail(ErrorKind::Config, "smoothing window must be odd, got " + std::to_string(window));
    }
    if (polyorder >= window) {
        fail(ErrorKind::Config, "polyorder " + std::to_string(polyorder) + " must be below window " +
                                    std::to_string(window));
    }
    if (length < window) {
        fail(ErrorKind::Config, "curve of length " + std::to_string(length) + " is shorter than window " +
                                    std::to_string(window));
    }
}

/// Hat matrix of the polynomial least-squares fit on offsets -m..m:
/// row t maps window samples to the fitted value at position t.
Eigen::MatrixXd hat_matrix(std::size_t window, std::size_t polyorder) {
    const auto w = static_cast<Eigen::Index>(window);
    const auto p = static_cast<Eigen::Index>(polyorder + 1);
    const double half = static_cast<double>(window / 2);
    Eigen::MatrixXd vander(w, p);
    for (Eigen::Index r = 0; r < w; ++r) {
        // Offsets scaled to [-1, 1] keep the basis well conditioned.
        const double x = half == 0.0 ? 0.0 : (static_cast<double>(r) - half) / half;
        double power = 1.0;
        for (Eigen::Index c = 0; c < p; ++c) {
            vander(r, c) = power;
            power *= x;
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(vander);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(w, p);
    return q * q.transpose();
}

} // namespace

std::vector<double> savgol_weights(std::size_t window, std::size_t polyorder, std::size_t position) {
    check_filter(window, window, polyorder);
    if (position >= window) {
        fail(ErrorKind::Index, "position " + std::to_string(position) + " outside window");
    }
    const Eigen::MatrixXd hat = hat_matrix(window, polyorder);
    std::vector<double> out(window);
    for (std::size_t k = 0; k < window; ++k) {
        out[k] = hat(static_cast<Eigen::Index>(position), static_cast<Eigen::Index>(k));
    }
    return out;
}

std::vector<double> savgol_baseline(std::span<const double> curve, std::size_t window, std::size_t polyorder) {
    check_filter(curve.size(), window, polyorder);
    const Eigen::MatrixXd hat = hat_matrix(window, polyorder);
    const std::size_t n = curve.size();
    const std::size_t m = window / 2;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t start;
        std::size_t row;
        if (i < m) {
            start = 0;
            row = i;
        } else if (i + m >= n) {
            start = n - window;
            row = i - start;
        } else {
            start = i - m;
            row = m;
        }
        // Differences from one sample keep constant stretches exact.
        const double ref = curve[start + row];
        double acc = 0.0;
        for (std::size_t k = 0; k < window; ++k) {
            acc += hat(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(k)) * (curve[start + k] - ref);
        }
        out[i] = ref + acc;
    }
    return out;
}

SmoothnessStats smoothness_stats(std::span<const double> curve, std::size_t window, std::size_t polyorder) {
    const auto baseline = savgol_baseline(curve, window, polyorder);
    const auto n = static_cast<double>(curve.size());
    std::vector<double> gap(curve.size());
    double l1 = 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        gap[i] = curve[i] - baseline[i];
        l1 += std::abs(gap[i]);
        mean += gap[i];
    }
    mean /= n;
    double var = 0.0;
    for (double g : gap) {
        var += (g - mean) * (g - mean);
    }
    return {l1 / n, std::sqrt(var / n)};
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string smoothness_csv(const std::vector<SmoothnessRow> &rows) {
    std::string out = std::string(kSmoothnessCsvHeader) + "\n";
    for (const auto &r : rows) {
        out += r.curve + "," + std::to_string(r.window) + "," + std::to_string(r.polyorder) + "," +
               format_double(r.stats.avg_l1) + "," + format_double(r.stats.std_dev) + "\n";
    }
    return out;
}

} // namespace qconv
