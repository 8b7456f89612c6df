#ifndef PRIVGUARD_CLASSIFIERS_HPP
#define PRIVGUARD_CLASSIFIERS_HPP

// Binary classifiers over real-valued rows. Labels are {0,1} with 1 the
// invasive class; every decision threshold tie resolves to 1.
//
//   logistic regression  full-batch gradient descent on mean log-loss
//   decision tree        CART over binary features, Gini criterion
//   linear SVM           Pegasos stochastic subgradient on the hinge loss

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "privguard/feature_pipeline.hpp"

namespace privguard {

using Rows = std::vector<std::vector<double>>;

Rows to_rows(std::span<const FeatureVector> vectors);

/// Numerically stable 1 / (1 + exp(-z)).
double logistic(double z);

// ------------------------------------------------------------ logistic regression

struct LRHyper {
    double learning_rate = 0.1;
    std::size_t iterations = 5000;
    double l2 = 0.0;

    friend bool operator==(const LRHyper&, const LRHyper&) = default;
};

struct LRModel {
    std::vector<double> weights;
    double bias = 0.0;
    std::string schema_hash;
    LRHyper hyper;

    friend bool operator==(const LRModel&, const LRModel&) = default;
};

struct LRGradient {
    std::vector<double> weights;
    double bias = 0.0;
};

/// Probability clamp used inside the log-loss.
inline constexpr double kLogLossEpsilon = 1e-12;

/// mean log-loss + (l2/2)·|w|², bias unregularized.
double lr_loss(std::span<const double> weights, double bias, const Rows& x, std::span<const int> y, double l2);

/// Analytic gradient of lr_loss.
LRGradient lr_gradient(std::span<const double> weights, double bias, const Rows& x, std::span<const int> y, double l2);

/// Called after each descent step with the 1-based step number.
using LRObserver = std::function<void(std::size_t step, const LRModel& current)>;

LRModel lr_fit(const Rows& x, std::span<const int> y, const LRHyper& hyper = {}, const LRObserver& observer = {});
double lr_predict_proba(const LRModel& m, std::span<const double> v);
int lr_predict(const LRModel& m, std::span<const double> v);

// ------------------------------------------------------------ decision tree

struct DTHyper {
    std::optional<std::size_t> max_depth;  // unbounded when empty
    std::size_t min_samples = 2;           // nodes with fewer samples become leaves

    friend bool operator==(const DTHyper&, const DTHyper&) = default;
};

/// Flat tree node. Internal nodes send value 0 left and 1 right.
struct DTNode {
    int feature = -1;  // -1 on leaves
    int left = -1;
    int right = -1;
    int label = 0;     // leaf class; majority of the node's samples for internal nodes

    bool is_leaf() const noexcept { return feature < 0; }

    friend bool operator==(const DTNode&, const DTNode&) = default;
};

struct DTModel {
    std::vector<DTNode> nodes;  // nodes[0] is the root, children after parents
    std::size_t n_features = 0;
    std::string schema_hash;
    DTHyper hyper;

    std::size_t depth() const;

    friend bool operator==(const DTModel&, const DTModel&) = default;
};

/// 1 - p0² - p1². Throws DataError on an empty list.
double gini_impurity(std::span<const int> labels);

/// Requires every feature value in {0,1}.
DTModel dt_fit(const Rows& x, std::span<const int> y, const DTHyper& hyper = {});
int dt_predict(const DTModel& m, std::span<const double> v);

/// Throws DataError if the node graph is not a well-formed tree over
/// `n_features` binary features (bad indices, cycles, a feature tested twice
/// on one path).
void validate_tree(const DTModel& m);

// ------------------------------------------------------------ linear SVM

struct SVMHyper {
    double lambda = 0.01;
    std::size_t iterations = 0;  // 0 selects max(10·n, 1000) steps
    std::uint64_t seed = 42;

    friend bool operator==(const SVMHyper&, const SVMHyper&) = default;
};

struct SVMModel {
    std::vector<double> weights;
    double bias = 0.0;
    std::string schema_hash;
    SVMHyper hyper;  // iterations holds the resolved step count

    friend bool operator==(const SVMModel&, const SVMModel&) = default;
};

/// Default step count for `n` training rows.
std::size_t svm_default_iterations(std::size_t n);

/// (lambda/2)·|w|² + mean max(0, 1 - s·(w·x + b)) with s = 2y - 1.
double hinge_objective(std::span<const double> w, double b, const Rows& x, std::span<const int> y, double lambda);

SVMModel svm_fit(const Rows& x, std::span<const int> y, const SVMHyper& hyper = {});
double svm_decision(const SVMModel& m, std::span<const double> v);
int svm_predict(const SVMModel& m, std::span<const double> v);

}  // namespace privguard

#endif  // PRIVGUARD_CLASSIFIERS_HPP
