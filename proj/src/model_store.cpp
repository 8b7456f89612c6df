#include "privguard/model_store.hpp"

#include <charconv>
#include <cmath>
#include <ctime>

#include "json.hpp"

#include "privguard/error.hpp"

namespace privguard {

using json = nlohmann::json;

namespace {

void dump_canonical(const json& j, std::string& out)
{
    switch (j.type()) {
    case json::value_t::object: {
        out.push_back('{');
        bool first = true;
        for (const auto& [key, value] : j.items()) {  // std::map storage: sorted keys
            if (!first) out.push_back(',');
            first = false;
            out += json(key).dump();
            out.push_back(':');
            dump_canonical(value, out);
        }
        out.push_back('}');
        break;
    }
    case json::value_t::array: {
        out.push_back('[');
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) out.push_back(',');
            dump_canonical(j[i], out);
        }
        out.push_back(']');
        break;
    }
    case json::value_t::number_float: {
        const double v = j.get<double>();
        if (!std::isfinite(v)) throw BundleError(BundleError::Kind::invalid, "bundle contains a non-finite number");
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
        out.append(buf, ptr);
        break;
    }
    default:
        out += j.dump();
        break;
    }
}

json schema_to_json(const FeatureSchema& s)
{
    return {{"version", s.version}, {"feature_names", s.feature_names}, {"schema_hash", s.schema_hash}};
}

struct Encoded {
    json model;
    json hyper;
};

Encoded model_to_json(const Model& model)
{
    return std::visit([](const auto& m) -> Encoded {
        using T = std::decay_t<decltype(m)>;
        Encoded e;
        if constexpr (std::is_same_v<T, LRModel>) {
            e.model = {{"weights", m.weights}, {"bias", m.bias}, {"schema_hash", m.schema_hash}};
            e.hyper = {{"learning_rate", m.hyper.learning_rate}, {"iterations", m.hyper.iterations}, {"l2", m.hyper.l2}};
        } else if constexpr (std::is_same_v<T, DTModel>) {
            json nodes = json::array();
            for (const auto& n : m.nodes) {
                nodes.push_back({{"feature", n.feature}, {"left", n.left}, {"right", n.right}, {"label", n.label}});
            }
            e.model = {{"nodes", nodes}, {"n_features", m.n_features}, {"schema_hash", m.schema_hash}};
            e.hyper = {{"max_depth", m.hyper.max_depth ? json(*m.hyper.max_depth) : json(nullptr)}, {"min_samples", m.hyper.min_samples}};
        } else {
            e.model = {{"weights", m.weights}, {"bias", m.bias}, {"schema_hash", m.schema_hash}};
            e.hyper = {{"lambda", m.hyper.lambda}, {"iterations", m.hyper.iterations}, {"seed", m.hyper.seed}};
        }
        return e;
    }, model);
}

Model model_from_json(ModelKind kind, const json& model, const json& hyper)
{
    switch (kind) {
    case ModelKind::lr: {
        LRModel m;
        m.weights = model.at("weights").get<std::vector<double>>();
        m.bias = model.at("bias").get<double>();
        m.schema_hash = model.at("schema_hash").get<std::string>();
        m.hyper.learning_rate = hyper.at("learning_rate").get<double>();
        m.hyper.iterations = hyper.at("iterations").get<std::size_t>();
        m.hyper.l2 = hyper.at("l2").get<double>();
        return m;
    }
    case ModelKind::dt: {
        DTModel m;
        for (const auto& n : model.at("nodes")) {
            m.nodes.push_back(DTNode{n.at("feature").get<int>(), n.at("left").get<int>(), n.at("right").get<int>(), n.at("label").get<int>()});
        }
        m.n_features = model.at("n_features").get<std::size_t>();
        m.schema_hash = model.at("schema_hash").get<std::string>();
        const json& depth = hyper.at("max_depth");
        if (!depth.is_null()) m.hyper.max_depth = depth.get<std::size_t>();
        m.hyper.min_samples = hyper.at("min_samples").get<std::size_t>();
        return m;
    }
    case ModelKind::svm: {
        SVMModel m;
        m.weights = model.at("weights").get<std::vector<double>>();
        m.bias = model.at("bias").get<double>();
        m.schema_hash = model.at("schema_hash").get<std::string>();
        m.hyper.lambda = hyper.at("lambda").get<double>();
        m.hyper.iterations = hyper.at("iterations").get<std::size_t>();
        m.hyper.seed = hyper.at("seed").get<std::uint64_t>();
        return m;
    }
    }
    throw BundleError(BundleError::Kind::invalid, "unknown model kind");
}

bool all_finite(const std::vector<double>& v, double extra)
{
    if (!std::isfinite(extra)) return false;
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace

std::string_view to_string(ModelKind kind)
{
    switch (kind) {
    case ModelKind::lr: return "lr";
    case ModelKind::dt: return "dt";
    case ModelKind::svm: return "svm";
    }
    return "lr";
}

std::optional<ModelKind> parse_model_kind(std::string_view text)
{
    if (text == "lr") return ModelKind::lr;
    if (text == "dt") return ModelKind::dt;
    if (text == "svm") return ModelKind::svm;
    return std::nullopt;
}

ModelKind kind_of(const Model& model)
{
    return static_cast<ModelKind>(model.index());
}

const std::string& schema_hash_of(const Model& model)
{
    return std::visit([](const auto& m) -> const std::string& { return m.schema_hash; }, model);
}

int predict(const Model& model, std::span<const double> v)
{
    return std::visit([&](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LRModel>) return lr_predict(m, v);
        else if constexpr (std::is_same_v<T, DTModel>) return dt_predict(m, v);
        else return svm_predict(m, v);
    }, model);
}

void check_bundle(const ModelBundle& b)
{
    using Kind = BundleError::Kind;
    if (b.format_version != kBundleFormatVersion) {
        throw BundleError(Kind::unknown_version, "unsupported bundle format_version " + std::to_string(b.format_version));
    }
    if (b.schema.schema_hash != compute_schema_hash(b.schema.feature_names)) {
        throw BundleError(Kind::hash_mismatch, "schema_hash does not match feature_names");
    }
    if (schema_hash_of(b.model) != b.schema.schema_hash) {
        throw BundleError(Kind::hash_mismatch, "model schema_hash does not match the bundle schema");
    }
    try {
        make_schema(b.schema.feature_names, b.schema.version);
    } catch (const DataError& e) {
        throw BundleError(Kind::invalid, std::string("invalid schema: ") + e.what());
    }

    const std::size_t d = b.schema.size();
    std::visit([&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DTModel>) {
            if (m.n_features != d) throw BundleError(Kind::invalid, "tree feature count does not match schema");
            try {
                validate_tree(m);
            } catch (const DataError& e) {
                throw BundleError(Kind::invalid, e.what());
            }
        } else {
            if (m.weights.size() != d) throw BundleError(Kind::invalid, "weight vector length does not match schema");
            if (!all_finite(m.weights, m.bias)) throw BundleError(Kind::invalid, "model has non-finite parameters");
        }
        if constexpr (std::is_same_v<T, SVMModel>) {
            if (!(m.hyper.lambda > 0.0)) throw BundleError(Kind::invalid, "svm lambda must be > 0");
        }
    }, b.model);
}

std::string save_bundle(const ModelBundle& b)
{
    check_bundle(b);
    const Encoded enc = model_to_json(b.model);
    json doc = {
        {"format_version", b.format_version},
        {"model_kind", std::string(to_string(b.kind()))},
        {"schema", schema_to_json(b.schema)},
        {"model", enc.model},
        {"hyper", enc.hyper},
        {"created_at", b.created_at},
        {"training_fingerprint", b.training_fingerprint},
        {"split", nullptr},
    };
    if (b.split) {
        doc["split"] = {{"ratio", b.split->ratio}, {"seed", b.split->seed}, {"stratified", b.split->stratified}, {"generator", b.split->generator}};
    }
    std::string out;
    dump_canonical(doc, out);
    out.push_back('\n');
    return out;
}

ModelBundle load_bundle(std::string_view bytes)
{
    using Kind = BundleError::Kind;
    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw BundleError(Kind::malformed, std::string("malformed bundle: ") + e.what());
    }

    ModelBundle b;
    try {
        if (!doc.is_object()) throw BundleError(Kind::malformed, "bundle is not a JSON object");
        b.format_version = doc.at("format_version").get<int>();
        if (b.format_version != kBundleFormatVersion) {
            throw BundleError(Kind::unknown_version, "unsupported bundle format_version " + std::to_string(b.format_version));
        }
        const auto kind = parse_model_kind(doc.at("model_kind").get<std::string>());
        if (!kind) throw BundleError(Kind::invalid, "unknown model_kind '" + doc.at("model_kind").get<std::string>() + "'");

        const json& schema = doc.at("schema");
        b.schema.version = schema.at("version").get<int>();
        b.schema.feature_names = schema.at("feature_names").get<std::vector<std::string>>();
        b.schema.schema_hash = schema.at("schema_hash").get<std::string>();
        b.model = model_from_json(*kind, doc.at("model"), doc.at("hyper"));
        b.created_at = doc.at("created_at").get<std::string>();
        b.training_fingerprint = doc.at("training_fingerprint").get<std::string>();
        if (const json& split = doc.at("split"); !split.is_null()) {
            b.split = SplitInfo{split.at("ratio").get<double>(), split.at("seed").get<std::uint64_t>(),
                                split.at("stratified").get<bool>(), split.at("generator").get<std::string>()};
        }
    } catch (const json::exception& e) {
        throw BundleError(Kind::malformed, std::string("malformed bundle: ") + e.what());
    }
    check_bundle(b);
    return b;
}

std::string format_utc(std::int64_t unix_seconds)
{
    const std::time_t t = static_cast<std::time_t>(unix_seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace privguard
