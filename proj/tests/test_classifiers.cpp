#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <random>

#include "privguard/classifiers.hpp"
#include "privguard/error.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace privguard;
using privguard::testing::brute_force_root_split;
using privguard::testing::central_difference;
using privguard::testing::grid_search_2d;
using privguard::testing::make_separable_corpus;

namespace {

struct Binary {
    Rows x;
    std::vector<int> y;
};

Binary random_binary(std::mt19937_64& rng, std::size_t n, std::size_t d)
{
    Binary b;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(d);
        for (auto& v : row) v = static_cast<double>(rng() & 1u);
        b.x.push_back(std::move(row));
        b.y.push_back(static_cast<int>(rng() & 1u));
    }
    return b;
}

double vector_norm(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

template <typename Predict>
double train_accuracy(const Rows& x, const std::vector<int>& y, Predict&& predict)
{
    std::size_t ok = 0;
    for (std::size_t i = 0; i < x.size(); ++i) ok += predict(x[i]) == y[i];
    return static_cast<double>(ok) / static_cast<double>(x.size());
}

const Rows kXorX = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
const std::vector<int> kXorY = {0, 1, 1, 0};

}  // namespace

// ------------------------------------------------------------------ logistic

TEST_CASE("logistic values")
{
    CHECK(logistic(0.0) == 0.5);
    CHECK(std::abs(logistic(50.0) - 1.0) < 1e-9);
    CHECK(std::abs(logistic(std::log(3.0)) - 0.75) < 1e-12);
    CHECK(logistic(-800.0) >= 0.0);
    CHECK(logistic(800.0) <= 1.0);
    CHECK(std::isfinite(logistic(-800.0)));
}

TEST_CASE("logistic symmetry and monotonicity")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> z(-40.0, 40.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = z(rng), b = z(rng);
        CHECK(std::abs(logistic(-a) - (1.0 - logistic(a))) <= 1e-12);
        if (a < b) CHECK(logistic(a) <= logistic(b));
    }
}

// ------------------------------------------------------------------ logistic regression

TEST_CASE("lr_gradient matches central finite differences")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::size_t instances = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + rng() % 10;
        const std::size_t d = 1 + rng() % 6;
        Rows x(n, std::vector<double>(d));
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& v : x[i]) v = (trial % 2) ? static_cast<double>(rng() & 1u) : 2.0 * u(rng);
            y[i] = static_cast<int>(rng() & 1u);
        }
        std::vector<double> w(d);
        for (auto& v : w) v = u(rng);
        const double b = u(rng);
        const double l2 = (trial % 3 == 0) ? 0.0 : 0.5 * (u(rng) + 1.0);

        const LRGradient g = lr_gradient(w, b, x, y, l2);
        std::vector<double> analytic = g.weights, numeric(d + 1);
        analytic.push_back(g.bias);
        const double h = 1e-5;
        for (std::size_t j = 0; j < d; ++j) {
            numeric[j] = central_difference([&](double at) {
                auto ww = w;
                ww[j] = at;
                return lr_loss(ww, b, x, y, l2);
            }, w[j], h);
        }
        numeric[d] = central_difference([&](double at) { return lr_loss(w, at, x, y, l2); }, b, h);

        std::vector<double> diff(d + 1);
        for (std::size_t j = 0; j <= d; ++j) diff[j] = analytic[j] - numeric[j];
        const double rel = vector_norm(diff) / std::max(vector_norm(analytic) + vector_norm(numeric), 1e-300);
        CAPTURE(trial);
        CHECK(rel <= 1e-6);
        ++instances;
    }
    CHECK(instances >= 20);
}

TEST_CASE("lr_gradient at zero on balanced data is mean (0.5 - y)·x")
{
    const Rows x = {{1, 0}, {0, 1}, {1, 1}, {0, 0}};
    const std::vector<int> y = {1, 0, 1, 0};
    const LRGradient g = lr_gradient(std::vector<double>{0, 0}, 0.0, x, y, 0.0);
    CHECK(std::abs(g.weights[0] - (-0.5 - 0.5) / 4.0) < 1e-15);
    CHECK(std::abs(g.weights[1] - (0.5 - 0.5) / 4.0) < 1e-15);
    CHECK(std::abs(g.bias) < 1e-15);
}

TEST_CASE("lr_fit loss is non-increasing at learning rate 0.1")
{
    std::mt19937_64 rng(5);
    for (int fixture = 0; fixture < 5; ++fixture) {
        const Binary data = random_binary(rng, 12, 4);
        double previous = lr_loss(std::vector<double>(4, 0.0), 0.0, data.x, data.y, 0.0);
        bool monotone = true;
        LRHyper hyper;
        hyper.iterations = 1000;
        lr_fit(data.x, data.y, hyper, [&](std::size_t, const LRModel& m) {
            const double now = lr_loss(m.weights, m.bias, data.x, data.y, 0.0);
            monotone = monotone && now <= previous + 1e-15;
            previous = now;
        });
        CHECK(monotone);
    }
}

TEST_CASE("lr_fit examples")
{
    const Rows x = {{0}, {1}};
    const auto m = lr_fit(x, std::vector<int>{0, 1});
    CHECK(lr_predict(m, std::vector<double>{0}) == 0);
    CHECK(lr_predict(m, std::vector<double>{1}) == 1);
    CHECK(m.hyper == LRHyper{});

    const auto zeros = lr_fit(x, std::vector<int>{0, 0});
    CHECK(zeros.bias < 0.0);
    CHECK(lr_predict_proba(zeros, std::vector<double>{0}) < 0.5);
    CHECK(lr_predict_proba(zeros, std::vector<double>{1}) < 0.5);

    CHECK_THROWS_AS(lr_fit(Rows{}, std::vector<int>{}), DataError);
    CHECK_THROWS_AS(lr_fit(x, std::vector<int>{0}), DataError);
    CHECK_THROWS_AS(lr_fit(x, std::vector<int>{0, 2}), DataError);
}

TEST_CASE("lr prediction examples")
{
    LRModel m;
    m.weights = {0.0, 0.0};
    CHECK(lr_predict_proba(m, std::vector<double>{1, 0}) == 0.5);
    CHECK(lr_predict(m, std::vector<double>{1, 0}) == 1);

    m.weights = {1.0};
    CHECK(std::abs(lr_predict_proba(m, std::vector<double>{1}) - 0.7310585786300049) < 1e-12);
    CHECK(lr_predict_proba(m, std::vector<double>{0}) == 0.5);
    CHECK(lr_predict(m, std::vector<double>{1}) == 1);

    m.weights = {0.0};
    m.bias = std::log(0.49 / 0.51);
    CHECK(lr_predict(m, std::vector<double>{0}) == 0);
    m.bias = std::log(0.73 / 0.27);
    CHECK(lr_predict(m, std::vector<double>{0}) == 1);

    CHECK_THROWS_AS(lr_predict(m, std::vector<double>{0, 1}), DataError);
}

// ------------------------------------------------------------------ decision tree

TEST_CASE("gini_impurity examples")
{
    CHECK(gini_impurity(std::vector<int>{0, 0, 0, 0}) == 0.0);
    CHECK(gini_impurity(std::vector<int>{0, 1}) == 0.5);
    CHECK(std::abs(gini_impurity(std::vector<int>{1, 1, 1, 0}) - 0.375) < 1e-15);
    CHECK_THROWS_AS(gini_impurity(std::vector<int>{}), DataError);
}

TEST_CASE("dt root split equals exhaustive enumeration")
{
    std::mt19937_64 rng(2024);
    std::size_t checked = 0;
    for (int trial = 0; trial < 400 && checked < 200; ++trial) {
        const std::size_t d = 1 + rng() % 6;
        const std::size_t n = 2 + rng() % 31;
        const Binary data = random_binary(rng, n, d);
        const auto expected = brute_force_root_split(data.x, data.y);
        const DTModel m = dt_fit(data.x, data.y);
        CAPTURE(trial);
        if (expected) {
            REQUIRE_FALSE(m.nodes.front().is_leaf());
            CHECK(m.nodes.front().feature == static_cast<int>(*expected));
            ++checked;
        } else {
            CHECK(m.nodes.front().is_leaf());
        }
    }
    CHECK(checked >= 50);
}

TEST_CASE("dt reproduces XOR exactly")
{
    const DTModel m = dt_fit(kXorX, kXorY);
    CHECK(m.depth() == 2);
    for (std::size_t i = 0; i < 4; ++i) CHECK(dt_predict(m, kXorX[i]) == kXorY[i]);
    CHECK(m.nodes.size() == 7);
    CHECK_NOTHROW(validate_tree(m));
}

TEST_CASE("dt_fit examples")
{
    const Rows x = {{0, 1}, {1, 1}, {0, 0}, {1, 0}};
    const DTModel sep = dt_fit(x, std::vector<int>{0, 1, 0, 1});
    CHECK(sep.depth() == 1);
    CHECK(sep.nodes.front().feature == 0);
    CHECK(train_accuracy(x, {0, 1, 0, 1}, [&](const auto& v) { return dt_predict(sep, v); }) == 1.0);

    const DTModel constant = dt_fit(x, std::vector<int>{1, 1, 1, 1});
    REQUIRE(constant.nodes.size() == 1);
    CHECK(constant.nodes.front().label == 1);

    // identical rows with conflicting labels: majority, ties to 1
    const Rows same = {{1}, {1}, {1}};
    CHECK(dt_predict(dt_fit(same, std::vector<int>{0, 0, 1}), std::vector<double>{1}) == 0);
    CHECK(dt_predict(dt_fit(Rows{{1}, {1}}, std::vector<int>{0, 1}), std::vector<double>{1}) == 1);

    DTHyper stump;
    stump.max_depth = 1;
    CHECK(dt_fit(kXorX, kXorY, stump).depth() == 1);
    DTHyper big_leaves;
    big_leaves.min_samples = 5;
    CHECK(dt_fit(kXorX, kXorY, big_leaves).nodes.size() == 1);

    CHECK_THROWS_AS(dt_fit(Rows{}, std::vector<int>{}), DataError);
    CHECK_THROWS_AS(dt_fit(Rows{{0.5}}, std::vector<int>{1}), DataError);
}

TEST_CASE("dt_predict routing")
{
    DTModel leaf;
    leaf.n_features = 3;
    leaf.nodes = {DTNode{-1, -1, -1, 0}};
    CHECK(dt_predict(leaf, std::vector<double>{1, 1, 1}) == 0);

    DTModel stump;
    stump.n_features = 3;
    stump.nodes = {DTNode{2, 1, 2, 0}, DTNode{-1, -1, -1, 0}, DTNode{-1, -1, -1, 1}};
    CHECK_NOTHROW(validate_tree(stump));
    for (unsigned mask = 0; mask < 8; ++mask) {
        const std::vector<double> v = {double(mask & 1u), double((mask >> 1) & 1u), double((mask >> 2) & 1u)};
        CHECK(dt_predict(stump, v) == static_cast<int>(v[2]));
    }
    CHECK_THROWS_AS(dt_predict(stump, std::vector<double>{1, 1}), DataError);
}

TEST_CASE("validate_tree rejects malformed graphs")
{
    DTModel m;
    m.n_features = 2;
    m.nodes = {DTNode{0, 1, 1, 0}, DTNode{-1, -1, -1, 0}};
    CHECK_THROWS_AS(validate_tree(m), DataError);  // shared child
    m.nodes = {DTNode{0, 1, 2, 0}, DTNode{-1, -1, -1, 0}};
    CHECK_THROWS_AS(validate_tree(m), DataError);  // dangling index
    m.nodes = {DTNode{0, 1, 2, 0}, DTNode{0, 3, 4, 0}, DTNode{-1, -1, -1, 1}, DTNode{-1, -1, -1, 0}, DTNode{-1, -1, -1, 1}};
    CHECK_THROWS_AS(validate_tree(m), DataError);  // feature repeated on a path
    m.nodes = {DTNode{5, 1, 2, 0}, DTNode{-1, -1, -1, 0}, DTNode{-1, -1, -1, 1}};
    CHECK_THROWS_AS(validate_tree(m), DataError);  // feature out of range
    m.nodes = {DTNode{-1, -1, -1, 3}};
    CHECK_THROWS_AS(validate_tree(m), DataError);  // non-binary label
    m.nodes = {};
    CHECK_THROWS_AS(validate_tree(m), DataError);
}

TEST_CASE("dt fits any consistent labeling perfectly")
{
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = 1 + rng() % 6;
        Binary data = random_binary(rng, 1 + rng() % 40, d);
        std::map<std::vector<double>, int> truth;
        for (std::size_t i = 0; i < data.x.size(); ++i) {
            data.y[i] = truth.emplace(data.x[i], data.y[i]).first->second;
        }
        const DTModel m = dt_fit(data.x, data.y);
        CHECK_NOTHROW(validate_tree(m));
        CHECK(train_accuracy(data.x, data.y, [&](const auto& v) { return dt_predict(m, v); }) == 1.0);
    }
}

// ------------------------------------------------------------------ linear SVM

TEST_CASE("hinge_objective examples")
{
    const Rows x = {{1}, {-1}};
    const std::vector<int> y = {1, 0};
    CHECK(hinge_objective(std::vector<double>{0}, 0.0, x, y, 0.3) == 1.0);
    CHECK(hinge_objective(std::vector<double>{1}, 0.0, x, y, 1.0) == 0.5);
    CHECK(hinge_objective(std::vector<double>{0.5}, 0.0, x, y, 1.0) == 0.625);
    CHECK_THROWS_AS(hinge_objective(std::vector<double>{1, 2}, 0.0, x, y, 1.0), DataError);
}

TEST_CASE("svm on the 1D two-point fixture matches the grid-search minimizer")
{
    const Rows x = {{1}, {-1}};
    const std::vector<int> y = {1, 0};
    SVMHyper hyper;
    hyper.lambda = 1.0;
    const auto grid = grid_search_2d([&](double w, double b) { return hinge_objective(std::vector<double>{w}, b, x, y, 1.0); },
                                     -3.0, 3.0, 0.01);
    CHECK(std::abs(grid.w - 1.0) < 1e-9);
    CHECK(std::abs(grid.b) < 1e-9);

    const SVMModel m = svm_fit(x, y, hyper);
    CHECK(std::abs(m.weights[0] - grid.w) <= 0.1);
    CHECK(std::abs(m.bias - grid.b) <= 0.1);
}

TEST_CASE("svm objective never exceeds the zero model")
{
    std::mt19937_64 rng(9);
    for (int fixture = 0; fixture < 30; ++fixture) {
        const std::size_t d = 1 + rng() % 5;
        const Binary data = random_binary(rng, 2 + rng() % 30, d);
        SVMHyper hyper;
        hyper.lambda = std::vector<double>{0.01, 0.1, 1.0}[fixture % 3];
        hyper.seed = rng();
        const SVMModel m = svm_fit(data.x, data.y, hyper);
        CAPTURE(fixture);
        CHECK(hinge_objective(m.weights, m.bias, data.x, data.y, hyper.lambda) <=
              hinge_objective(std::vector<double>(d, 0.0), 0.0, data.x, data.y, hyper.lambda));
    }
}

TEST_CASE("svm examples")
{
    const Rows x = {{0, 1}, {1, 0}, {1, 1}};
    const SVMModel same = svm_fit(x, std::vector<int>{1, 1, 1});
    const int first = svm_predict(same, x[0]);
    for (const auto& v : x) CHECK(svm_predict(same, v) == first);

    SVMModel m;
    m.weights = {0.0, 0.0};
    CHECK(svm_predict(m, std::vector<double>{1, 0}) == 1);
    m.weights = {1.0};
    m.bias = -0.5;
    CHECK(svm_predict(m, std::vector<double>{1}) == 1);
    CHECK(svm_predict(m, std::vector<double>{0}) == 0);
    CHECK_THROWS_AS(svm_predict(m, std::vector<double>{0, 0}), DataError);

    CHECK(svm_default_iterations(5) == 1000);
    CHECK(svm_default_iterations(500) == 5000);
    CHECK(svm_fit(x, std::vector<int>{1, 0, 1}).hyper.iterations == 1000);
    CHECK_THROWS_AS(svm_fit(Rows{}, std::vector<int>{}), DataError);
    SVMHyper bad;
    bad.lambda = 0.0;
    CHECK_THROWS_AS(svm_fit(x, std::vector<int>{1, 0, 1}, bad), DataError);
}

TEST_CASE("svm_predict is invariant under positive scaling")
{
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 500; ++trial) {
        SVMModel m;
        m.weights = {u(rng), u(rng), u(rng)};
        m.bias = u(rng);
        const std::vector<double> v = {double(rng() & 1u), double(rng() & 1u), double(rng() & 1u)};
        SVMModel scaled = m;
        const double c = std::vector<double>{0.5, 2.0, 8.0, 1024.0}[trial % 4];
        for (auto& w : scaled.weights) w *= c;
        scaled.bias *= c;
        CHECK(svm_predict(m, v) == svm_predict(scaled, v));
    }
}

// ------------------------------------------------------------------ shared

TEST_CASE("all three classifiers fit a separable corpus perfectly")
{
    const auto corpus = make_separable_corpus(40, 4, 77);
    const LRModel lr = lr_fit(corpus.x, corpus.y);
    const DTModel dt = dt_fit(corpus.x, corpus.y);
    const SVMModel svm = svm_fit(corpus.x, corpus.y);
    CHECK(train_accuracy(corpus.x, corpus.y, [&](const auto& v) { return lr_predict(lr, v); }) == 1.0);
    CHECK(train_accuracy(corpus.x, corpus.y, [&](const auto& v) { return dt_predict(dt, v); }) == 1.0);
    CHECK(train_accuracy(corpus.x, corpus.y, [&](const auto& v) { return svm_predict(svm, v); }) == 1.0);
}

TEST_CASE("fits are deterministic")
{
    std::mt19937_64 rng(41);
    const Binary data = random_binary(rng, 25, 5);
    CHECK(lr_fit(data.x, data.y) == lr_fit(data.x, data.y));
    CHECK(dt_fit(data.x, data.y) == dt_fit(data.x, data.y));
    CHECK(svm_fit(data.x, data.y) == svm_fit(data.x, data.y));
    SVMHyper other;
    other.seed = 43;
    CHECK(svm_fit(data.x, data.y).weights != svm_fit(data.x, data.y, other).weights);
}
