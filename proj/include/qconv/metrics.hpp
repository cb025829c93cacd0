#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace qconv {

/// counts[true * classes + predicted]
struct ConfusionMatrix {
    std::size_t classes = 10;
    std::vector<std::size_t> counts;

    explicit ConfusionMatrix(std::size_t num_classes = 10);

    std::size_t &at(std::size_t truth, std::size_t predicted) { return counts[truth * classes + predicted]; }
    [[nodiscard]] std::size_t at(std::size_t truth, std::size_t predicted) const {
        return counts[truth * classes + predicted];
    }
    [[nodiscard]] std::size_t total() const;
    [[nodiscard]] std::size_t trace() const;
    [[nodiscard]] std::size_t row_sum(std::size_t truth) const;
    /// trace / total; 0 for an empty matrix.
    [[nodiscard]] double accuracy() const;

    /// `classes` lines of comma-separated counts, rows = true class.
    [[nodiscard]] std::string to_csv() const;

    friend bool operator==(const ConfusionMatrix &, const ConfusionMatrix &) = default;
};

/// Arity error on length mismatch, Label error on out-of-range classes.
ConfusionMatrix confusion_matrix(std::span<const std::size_t> predictions, std::span<const std::size_t> labels,
                                 std::size_t classes = 10);

inline constexpr std::size_t kDefaultSmoothingWindow = 9;
inline constexpr std::size_t kDefaultSmoothingOrder = 3;

/// Savitzky-Golay smoothing: every point is the value of the least-squares
/// polynomial over its centred window. The first and last half-windows are
/// read off the fits of the first and last full windows.
std::vector<double> savgol_baseline(std::span<const double> curve, std::size_t window = kDefaultSmoothingWindow,
                                    std::size_t polyorder = kDefaultSmoothingOrder);

/// Weights w_k (k = 0..window-1) such that the fitted value at window
/// position `position` is sum_k w_k y_k.
std::vector<double> savgol_weights(std::size_t window, std::size_t polyorder, std::size_t position);

struct SmoothnessStats {
    double avg_l1;
    /// Population standard deviation of the gap curve - baseline.
    double std_dev;
};

SmoothnessStats smoothness_stats(std::span<const double> curve, std::size_t window = kDefaultSmoothingWindow,
                                 std::size_t polyorder = kDefaultSmoothingOrder);

struct SmoothnessRow {
    std::string curve;
    std::size_t window;
    std::size_t polyorder;
    SmoothnessStats stats;
};

inline constexpr const char *kSmoothnessCsvHeader = "curve,window,polyorder,avg_l1,std_dev";

std::string smoothness_csv(const std::vector<SmoothnessRow> &rows);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

} // namespace qconv
