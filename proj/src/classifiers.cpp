#include "privguard/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "privguard/error.hpp"
#include "privguard/random.hpp"

namespace privguard {

namespace {

void check_training_data(const Rows& x, std::span<const int> y, const char* who)
{
    if (x.empty()) throw DataError(std::string(who) + ": empty training data");
    if (x.size() != y.size()) {
        throw DataError(std::string(who) + ": " + std::to_string(x.size()) + " rows but " + std::to_string(y.size()) + " labels");
    }
    const std::size_t d = x.front().size();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].size() != d) throw DataError(std::string(who) + ": row " + std::to_string(i) + " has inconsistent length");
        if (y[i] != 0 && y[i] != 1) throw DataError(std::string(who) + ": label at row " + std::to_string(i) + " is not 0 or 1");
    }
}

void check_length(std::size_t expected, std::size_t got, const char* who)
{
    if (expected != got) {
        throw DataError(std::string(who) + ": vector has " + std::to_string(got) + " features, model expects " + std::to_string(expected));
    }
}

double dot(std::span<const double> a, std::span<const double> b)
{
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// ------------------------------------------------------------ tree growth

struct TreeBuilder {
    const Rows& x;
    std::span<const int> y;
    const DTHyper& hyper;
    std::size_t n_features;
    std::vector<DTNode> nodes;
    std::vector<bool> used;

    static int majority(std::span<const std::size_t> idx, std::span<const int> y)
    {
        std::size_t ones = 0;
        for (auto i : idx) ones += static_cast<std::size_t>(y[i]);
        return 2 * ones >= idx.size() ? 1 : 0;
    }

    // Weighted child Gini is minimized by maximizing
    //   S = (a²+b²)/nl + (c²+d²)/nr
    // where a,b / c,d are class counts in the left / right child. S is kept as
    // an exact fraction so ties (broken toward the lower index) are exact.
    std::optional<std::size_t> best_split(std::span<const std::size_t> idx) const
    {
        using u128 = unsigned __int128;
        std::optional<std::size_t> best;
        u128 best_num = 0, best_den = 1;
        for (std::size_t f = 0; f < n_features; ++f) {
            if (used[f]) continue;
            std::uint64_t cnt[2][2] = {{0, 0}, {0, 0}};
            for (auto i : idx) ++cnt[x[i][f] != 0.0][y[i]];
            const std::uint64_t nl = cnt[0][0] + cnt[0][1];
            const std::uint64_t nr = cnt[1][0] + cnt[1][1];
            if (nl == 0 || nr == 0) continue;
            const u128 sl = u128(cnt[0][0]) * cnt[0][0] + u128(cnt[0][1]) * cnt[0][1];
            const u128 sr = u128(cnt[1][0]) * cnt[1][0] + u128(cnt[1][1]) * cnt[1][1];
            const u128 num = sl * nr + sr * nl;
            const u128 den = u128(nl) * nr;
            if (!best || num * best_den > best_num * den) {
                best = f;
                best_num = num;
                best_den = den;
            }
        }
        return best;
    }

    int grow(std::vector<std::size_t> idx, std::size_t depth)
    {
        const int self = static_cast<int>(nodes.size());
        nodes.push_back(DTNode{-1, -1, -1, majority(idx, y)});

        const bool pure = std::all_of(idx.begin(), idx.end(), [&](std::size_t i) { return y[i] == y[idx.front()]; });
        const bool depth_capped = hyper.max_depth && depth >= *hyper.max_depth;
        if (pure || depth_capped || idx.size() < hyper.min_samples) return self;

        const auto feature = best_split(idx);
        if (!feature) return self;

        std::vector<std::size_t> left, right;
        for (auto i : idx) (x[i][*feature] != 0.0 ? right : left).push_back(i);

        used[*feature] = true;
        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        used[*feature] = false;

        nodes[static_cast<std::size_t>(self)].feature = static_cast<int>(*feature);
        nodes[static_cast<std::size_t>(self)].left = l;
        nodes[static_cast<std::size_t>(self)].right = r;
        return self;
    }
};

}  // namespace

Rows to_rows(std::span<const FeatureVector> vectors)
{
    Rows rows;
    rows.reserve(vectors.size());
    for (const auto& v : vectors) rows.push_back(v.as_reals());
    return rows;
}

double logistic(double z)
{
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// ------------------------------------------------------------ logistic regression

double lr_loss(std::span<const double> weights, double bias, const Rows& x, std::span<const int> y, double l2)
{
    check_training_data(x, y, "lr_loss");
    check_length(weights.size(), x.front().size(), "lr_loss");
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double p = std::clamp(logistic(dot(weights, x[i]) + bias), kLogLossEpsilon, 1.0 - kLogLossEpsilon);
        total -= y[i] ? std::log(p) : std::log(1.0 - p);
    }
    const double penalty = 0.5 * l2 * dot(weights, weights);
    return total / static_cast<double>(x.size()) + penalty;
}

LRGradient lr_gradient(std::span<const double> weights, double bias, const Rows& x, std::span<const int> y, double l2)
{
    check_training_data(x, y, "lr_gradient");
    check_length(weights.size(), x.front().size(), "lr_gradient");
    const std::size_t d = weights.size();
    LRGradient g{std::vector<double>(d, 0.0), 0.0};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double residual = logistic(dot(weights, x[i]) + bias) - y[i];
        for (std::size_t j = 0; j < d; ++j) g.weights[j] += residual * x[i][j];
        g.bias += residual;
    }
    const double inv_n = 1.0 / static_cast<double>(x.size());
    for (std::size_t j = 0; j < d; ++j) g.weights[j] = g.weights[j] * inv_n + l2 * weights[j];
    g.bias *= inv_n;
    return g;
}

LRModel lr_fit(const Rows& x, std::span<const int> y, const LRHyper& hyper, const LRObserver& observer)
{
    check_training_data(x, y, "lr_fit");
    if (!(hyper.learning_rate > 0.0) || !(hyper.l2 >= 0.0)) throw DataError("lr_fit: learning_rate must be > 0 and l2 >= 0");

    LRModel m;
    m.hyper = hyper;
    m.weights.assign(x.front().size(), 0.0);
    for (std::size_t step = 1; step <= hyper.iterations; ++step) {
        const LRGradient g = lr_gradient(m.weights, m.bias, x, y, hyper.l2);
        for (std::size_t j = 0; j < m.weights.size(); ++j) m.weights[j] -= hyper.learning_rate * g.weights[j];
        m.bias -= hyper.learning_rate * g.bias;
        if (observer) observer(step, m);
    }
    if (!std::isfinite(m.bias) || !std::all_of(m.weights.begin(), m.weights.end(), [](double w) { return std::isfinite(w); })) {
        throw DataError("lr_fit: training diverged (non-finite weights)");
    }
    return m;
}

double lr_predict_proba(const LRModel& m, std::span<const double> v)
{
    check_length(m.weights.size(), v.size(), "lr_predict");
    return logistic(dot(m.weights, v) + m.bias);
}

int lr_predict(const LRModel& m, std::span<const double> v)
{
    return lr_predict_proba(m, v) >= 0.5 ? 1 : 0;
}

// ------------------------------------------------------------ decision tree

double gini_impurity(std::span<const int> labels)
{
    if (labels.empty()) throw DataError("gini_impurity: empty label list");
    const double n = static_cast<double>(labels.size());
    const double p1 = static_cast<double>(std::count(labels.begin(), labels.end(), 1)) / n;
    const double p0 = 1.0 - p1;
    return 1.0 - p0 * p0 - p1 * p1;
}

std::size_t DTModel::depth() const
{
    if (nodes.empty()) return 0;
    std::vector<std::size_t> level(nodes.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, level[i]);
        if (!nodes[i].is_leaf()) {
            level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
            level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
        }
    }
    return deepest;
}

DTModel dt_fit(const Rows& x, std::span<const int> y, const DTHyper& hyper)
{
    check_training_data(x, y, "dt_fit");
    for (const auto& row : x) {
        for (double v : row) {
            if (v != 0.0 && v != 1.0) throw DataError("dt_fit: features must be binary");
        }
    }
    const std::size_t d = x.front().size();
    TreeBuilder builder{x, y, hyper, d, {}, std::vector<bool>(d, false)};
    std::vector<std::size_t> all(x.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    builder.grow(std::move(all), 0);

    DTModel m;
    m.nodes = std::move(builder.nodes);
    m.n_features = d;
    m.hyper = hyper;
    return m;
}

int dt_predict(const DTModel& m, std::span<const double> v)
{
    check_length(m.n_features, v.size(), "dt_predict");
    if (m.nodes.empty()) throw DataError("dt_predict: empty tree");
    std::size_t at = 0;
    for (std::size_t hops = 0; hops <= m.nodes.size(); ++hops) {
        const DTNode& node = m.nodes[at];
        if (node.is_leaf()) return node.label;
        at = static_cast<std::size_t>(v[static_cast<std::size_t>(node.feature)] != 0.0 ? node.right : node.left);
    }
    throw DataError("dt_predict: tree contains a cycle");
}

void validate_tree(const DTModel& m)
{
    if (m.nodes.empty()) throw DataError("decision tree has no nodes");
    const std::size_t count = m.nodes.size();
    std::vector<bool> visited(count, false);
    struct Frame {
        std::size_t node;
        std::vector<int> path;
    };
    std::vector<Frame> stack{{0, {}}};
    while (!stack.empty()) {
        Frame f = std::move(stack.back());
        stack.pop_back();
        if (visited[f.node]) throw DataError("decision tree node " + std::to_string(f.node) + " is reachable twice");
        visited[f.node] = true;
        const DTNode& n = m.nodes[f.node];
        if (n.label != 0 && n.label != 1) throw DataError("decision tree node " + std::to_string(f.node) + " has a non-binary class");
        if (n.is_leaf()) continue;
        if (static_cast<std::size_t>(n.feature) >= m.n_features) {
            throw DataError("decision tree node " + std::to_string(f.node) + " tests feature " + std::to_string(n.feature) + " outside the schema");
        }
        if (std::find(f.path.begin(), f.path.end(), n.feature) != f.path.end()) {
            throw DataError("decision tree tests feature " + std::to_string(n.feature) + " twice on one path");
        }
        for (int child : {n.left, n.right}) {
            if (child <= 0 || static_cast<std::size_t>(child) >= count || static_cast<std::size_t>(child) <= f.node) {
                throw DataError("decision tree node " + std::to_string(f.node) + " has an invalid child index");
            }
            Frame next{static_cast<std::size_t>(child), f.path};
            next.path.push_back(n.feature);
            stack.push_back(std::move(next));
        }
    }
    if (std::find(visited.begin(), visited.end(), false) != visited.end()) {
        throw DataError("decision tree has unreachable nodes");
    }
}

// ------------------------------------------------------------ linear SVM

std::size_t svm_default_iterations(std::size_t n)
{
    return std::max<std::size_t>(10 * n, 1000);
}

double hinge_objective(std::span<const double> w, double b, const Rows& x, std::span<const int> y, double lambda)
{
    check_training_data(x, y, "hinge_objective");
    check_length(w.size(), x.front().size(), "hinge_objective");
    double hinge = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = y[i] ? 1.0 : -1.0;
        hinge += std::max(0.0, 1.0 - s * (dot(w, x[i]) + b));
    }
    return 0.5 * lambda * dot(w, w) + hinge / static_cast<double>(x.size());
}

SVMModel svm_fit(const Rows& x, std::span<const int> y, const SVMHyper& hyper)
{
    check_training_data(x, y, "svm_fit");
    if (!(hyper.lambda > 0.0)) throw DataError("svm_fit: lambda must be > 0");

    const std::size_t n = x.size();
    const std::size_t d = x.front().size();
    const std::size_t steps = hyper.iterations ? hyper.iterations : svm_default_iterations(n);
    const double radius = 1.0 / std::sqrt(hyper.lambda);

    // Pegasos on the augmented vector (w, b) with a constant-1 input for b.
    std::vector<double> w(d, 0.0);
    double b = 0.0;
    // Pocket: the final answer is the checkpointed iterate with the lowest
    // objective, starting from the zero model.
    std::vector<double> best_w = w;
    double best_b = b;
    double best_objective = hinge_objective(w, b, x, y, hyper.lambda);
    const std::size_t checkpoint = std::max<std::size_t>(1, steps / 100);

    IndexSource source(hyper.seed);
    for (std::size_t t = 1; t <= steps; ++t) {
        const std::size_t i = source.below(n);
        const double eta = 1.0 / (hyper.lambda * static_cast<double>(t));
        const double s = y[i] ? 1.0 : -1.0;
        const double margin = s * (dot(w, x[i]) + b);
        const double shrink = 1.0 - eta * hyper.lambda;
        for (auto& wj : w) wj *= shrink;
        b *= shrink;
        if (margin < 1.0) {
            for (std::size_t j = 0; j < d; ++j) w[j] += eta * s * x[i][j];
            b += eta * s;
        }
        const double norm = std::sqrt(dot(w, w) + b * b);
        if (norm > radius) {
            const double scale = radius / norm;
            for (auto& wj : w) wj *= scale;
            b *= scale;
        }
        if (t % checkpoint == 0 || t == steps) {
            const double objective = hinge_objective(w, b, x, y, hyper.lambda);
            if (objective < best_objective) {
                best_objective = objective;
                best_w = w;
                best_b = b;
            }
        }
    }

    SVMModel m;
    m.weights = std::move(best_w);
    m.bias = best_b;
    m.hyper = hyper;
    m.hyper.iterations = steps;
    return m;
}

double svm_decision(const SVMModel& m, std::span<const double> v)
{
    check_length(m.weights.size(), v.size(), "svm_predict");
    return dot(m.weights, v) + m.bias;
}

int svm_predict(const SVMModel& m, std::span<const double> v)
{
    return svm_decision(m, v) >= 0.0 ? 1 : 0;
}

}  // namespace privguard
