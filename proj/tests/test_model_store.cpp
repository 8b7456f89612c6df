#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "json.hpp"

#include "privguard/error.hpp"
#include "privguard/model_store.hpp"

using namespace privguard;
using json = nlohmann::json;

namespace {

struct Fixture {
    FeatureSchema schema;
    Rows x;
    std::vector<int> y;
};

Fixture make_fixture(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Fixture f;
    f.schema = make_schema({kVerbFeature, kIsJsonFeature, "pl_appid", "pl_imp", "pl_isprebid"});
    for (int i = 0; i < 30; ++i) {
        std::vector<double> row(f.schema.size());
        for (auto& v : row) v = static_cast<double>(rng() & 1u);
        f.y.push_back(row[4] != 0.0 && row[1] != 0.0 ? 1 : static_cast<int>(rng() % 5 == 0));
        f.x.push_back(std::move(row));
    }
    return f;
}

ModelBundle make_bundle(ModelKind kind, std::uint64_t seed = 1)
{
    const Fixture f = make_fixture(seed);
    ModelBundle b;
    b.schema = f.schema;
    switch (kind) {
    case ModelKind::lr: {
        auto m = lr_fit(f.x, f.y);
        m.schema_hash = f.schema.schema_hash;
        b.model = m;
        break;
    }
    case ModelKind::dt: {
        auto m = dt_fit(f.x, f.y);
        m.schema_hash = f.schema.schema_hash;
        b.model = m;
        break;
    }
    case ModelKind::svm: {
        auto m = svm_fit(f.x, f.y);
        m.schema_hash = f.schema.schema_hash;
        b.model = m;
        break;
    }
    }
    b.split = SplitInfo{0.7, 42, false, "mt19937_64/rejection-bounded/fisher-yates"};
    b.created_at = format_utc(1700000000);
    b.training_fingerprint = std::string(64, 'a');
    return b;
}

BundleError::Kind load_error_kind(std::string_view bytes)
{
    try {
        load_bundle(bytes);
    } catch (const BundleError& e) {
        return e.kind();
    }
    FAIL("expected a BundleError");
    return BundleError::Kind::invalid;
}

const ModelKind kAllKinds[] = {ModelKind::lr, ModelKind::dt, ModelKind::svm};

}  // namespace

TEST_CASE("model kind names")
{
    for (ModelKind k : kAllKinds) CHECK(parse_model_kind(to_string(k)) == k);
    CHECK_FALSE(parse_model_kind("knn"));
    CHECK(format_utc(0) == "1970-01-01T00:00:00Z");
    CHECK(format_utc(1700000000) == "2023-11-14T22:13:20Z");
}

TEST_CASE("round trip preserves structure and predictions for every kind")
{
    std::mt19937_64 rng(99);
    for (ModelKind kind : kAllKinds) {
        CAPTURE(to_string(kind));
        const ModelBundle b = make_bundle(kind);
        const std::string bytes = save_bundle(b);
        const ModelBundle back = load_bundle(bytes);
        CHECK(back == b);
        CHECK(back.kind() == kind);
        for (int i = 0; i < 100; ++i) {
            std::vector<double> v(b.schema.size());
            for (auto& x : v) x = static_cast<double>(rng() & 1u);
            CHECK(predict(back.model, v) == predict(b.model, v));
        }
        CHECK(save_bundle(back) == bytes);
    }
}

TEST_CASE("doubles survive the round trip bit for bit")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    ModelBundle b = make_bundle(ModelKind::lr);
    for (int trial = 0; trial < 200; ++trial) {
        auto& m = std::get<LRModel>(b.model);
        for (auto& w : m.weights) w = trial % 2 ? u(rng) : u(rng) * 1e-300;
        m.bias = std::nextafter(u(rng), 0.0);
        CHECK(load_bundle(save_bundle(b)) == b);
    }
}

TEST_CASE("saves are canonical")
{
    for (ModelKind kind : kAllKinds) {
        const ModelBundle b = make_bundle(kind);
        const std::string first = save_bundle(b);
        CHECK(save_bundle(b) == first);
        CHECK(save_bundle(make_bundle(kind)) == first);
        CHECK(first.back() == '\n');
        CHECK(first.find(' ') == std::string::npos);
        // keys come out sorted at the top level
        const auto created = first.find("\"created_at\"");
        const auto version = first.find("\"format_version\"");
        const auto split = first.find("\"split\"");
        CHECK(created < version);
        CHECK(version < split);
    }
    ModelBundle no_split = make_bundle(ModelKind::dt);
    no_split.split.reset();
    CHECK(save_bundle(no_split).find("\"split\":null") != std::string::npos);
    CHECK(load_bundle(save_bundle(no_split)) == no_split);
}

TEST_CASE("load_bundle error kinds")
{
    const std::string good = save_bundle(make_bundle(ModelKind::lr));
    CHECK(load_error_kind(good.substr(0, good.size() / 2)) == BundleError::Kind::malformed);
    CHECK(load_error_kind("") == BundleError::Kind::malformed);
    CHECK(load_error_kind("[]") == BundleError::Kind::malformed);

    json doc = json::parse(good);
    doc["format_version"] = 999;
    CHECK(load_error_kind(doc.dump()) == BundleError::Kind::unknown_version);

    doc = json::parse(good);
    doc["schema"]["feature_names"].push_back("pl_zzz");
    CHECK(load_error_kind(doc.dump()) == BundleError::Kind::hash_mismatch);

    doc = json::parse(good);
    doc["model"]["schema_hash"] = std::string(64, '0');
    CHECK(load_error_kind(doc.dump()) == BundleError::Kind::hash_mismatch);

    doc = json::parse(good);
    doc["model"]["weights"].push_back(1.0);
    CHECK(load_error_kind(doc.dump()) == BundleError::Kind::invalid);

    doc = json::parse(good);
    doc["model_kind"] = "knn";
    CHECK(load_error_kind(doc.dump()) == BundleError::Kind::invalid);

    doc = json::parse(good);
    doc.erase("hyper");
    CHECK(load_error_kind(doc.dump()) == BundleError::Kind::malformed);

    doc = json::parse(save_bundle(make_bundle(ModelKind::dt)));
    doc["model"]["nodes"][0]["left"] = 0;
    CHECK(load_error_kind(doc.dump()) == BundleError::Kind::invalid);
}

TEST_CASE("save_bundle refuses bundles that break invariants")
{
    ModelBundle b = make_bundle(ModelKind::lr);
    std::get<LRModel>(b.model).schema_hash = "deadbeef";
    CHECK_THROWS_AS(save_bundle(b), BundleError);

    b = make_bundle(ModelKind::svm);
    std::get<SVMModel>(b.model).weights.pop_back();
    CHECK_THROWS_AS(save_bundle(b), BundleError);

    b = make_bundle(ModelKind::lr);
    std::get<LRModel>(b.model).bias = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(save_bundle(b), BundleError);

    b = make_bundle(ModelKind::dt);
    b.format_version = 2;
    try {
        save_bundle(b);
        FAIL("expected an error");
    } catch (const BundleError& e) {
        CHECK(e.kind() == BundleError::Kind::unknown_version);
    }
}
