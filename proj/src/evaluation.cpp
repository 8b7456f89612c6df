#include "privguard/evaluation.hpp"

#include "json.hpp"

#include "privguard/error.hpp"

namespace privguard {

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den)
{
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred)
{
    if (y_true.size() != y_pred.size()) {
        throw DataError("confusion_matrix: " + std::to_string(y_true.size()) + " labels but " + std::to_string(y_pred.size()) + " predictions");
    }
    if (y_true.empty()) throw DataError("confusion_matrix: no samples");

    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i];
        const int p = y_pred[i];
        if ((t != 0 && t != 1) || (p != 0 && p != 1)) throw DataError("confusion_matrix: labels must be 0 or 1");
        if (t == 1 && p == 1) ++cm.tp;
        else if (t == 0 && p == 0) ++cm.tn;
        else if (t == 0) ++cm.fp;
        else ++cm.fn;
    }
    return cm;
}

Metrics compute_metrics(const ConfusionMatrix& cm)
{
    if (cm.total() == 0) throw DataError("compute_metrics: empty confusion matrix");
    Metrics m;
    m.accuracy = ratio(cm.tp + cm.tn, cm.total());
    m.precision = ratio(cm.tp, cm.tp + cm.fp);
    m.recall = ratio(cm.tp, cm.tp + cm.fn);
    m.specificity = ratio(cm.tn, cm.tn + cm.fp);
    if (m.precision && m.recall && *m.precision + *m.recall > 0.0) {
        m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    }
    return m;
}

std::string evaluation_report_json(std::string_view model, const ConfusionMatrix& cm, const Metrics& m)
{
    auto score = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    nlohmann::json doc = {
        {"model", std::string(model)},
        {"tp", cm.tp},
        {"tn", cm.tn},
        {"fp", cm.fp},
        {"fn", cm.fn},
        {"accuracy", score(m.accuracy)},
        {"precision", score(m.precision)},
        {"recall", score(m.recall)},
        {"specificity", score(m.specificity)},
        {"f1", score(m.f1)},
    };
    return doc.dump(2);
}

}  // namespace privguard
