#ifndef PRIVGUARD_EVALUATION_HPP
#define PRIVGUARD_EVALUATION_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>

namespace privguard {

/// Positive class is invasive (1).
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + tn + fp + fn; }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Each score is empty when its denominator is zero.
struct Metrics {
    std::optional<double> accuracy;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> specificity;
    std::optional<double> f1;
};

/// Throws DataError on length mismatch, empty input, or labels outside {0,1}.
ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred);

/// Throws DataError when the matrix is empty.
Metrics compute_metrics(const ConfusionMatrix& cm);

/// {"model","tp","tn","fp","fn","accuracy","precision","recall","specificity","f1"},
/// undefined scores as null.
std::string evaluation_report_json(std::string_view model, const ConfusionMatrix& cm, const Metrics& m);

}  // namespace privguard

#endif  // PRIVGUARD_EVALUATION_HPP
