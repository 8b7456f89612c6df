#include "privguard/feature_pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "privguard/digest.hpp"
#include "privguard/error.hpp"
#include "privguard/random.hpp"

namespace privguard {

namespace {

std::string normalize_verb(std::string_view verb)
{
    while (!verb.empty() && std::isspace(static_cast<unsigned char>(verb.front()))) verb.remove_prefix(1);
    while (!verb.empty() && std::isspace(static_cast<unsigned char>(verb.back()))) verb.remove_suffix(1);
    std::string out(verb);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

std::uint8_t verb_bit(const LabeledRecord& rec)
{
    if (rec.req_type == "GET") return 0;
    if (rec.req_type == "POST") return 1;
    throw UnsupportedVerbError("unsupported verb '" + rec.req_type + "' for record '" + rec.url + "' (only GET and POST are encoded)");
}

// Number of rows that go to the training side. The small epsilon keeps
// products like 0.7 * 90 = 62.999... on the intended integer.
std::size_t train_count(double ratio, std::size_t n)
{
    return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
}

}  // namespace

std::pair<std::vector<LabeledRecord>, CleanReport> clean_records(std::vector<LabeledRecord> records)
{
    CleanReport report;
    std::vector<LabeledRecord> kept;
    kept.reserve(records.size());
    std::set<LabeledRecord> seen;

    for (auto& rec : records) {
        if (rec.invasive != 0 && rec.invasive != 1) {
            ++report.rejected;
            report.rejections.push_back("record '" + rec.url + "': invasive=" + std::to_string(rec.invasive) + " is not 0 or 1");
            continue;
        }
        std::string verb = normalize_verb(rec.req_type);
        if (verb != rec.req_type) {
            ++report.normalized;
            rec.req_type = std::move(verb);
        }
        if (!seen.insert(rec).second) {
            ++report.duplicates_removed;
            continue;
        }
        kept.push_back(std::move(rec));
    }
    return {std::move(kept), std::move(report)};
}

std::string compute_schema_hash(const std::vector<std::string>& feature_names)
{
    std::string joined;
    for (const auto& n : feature_names) {
        joined += n;
        joined += '\n';
    }
    return sha256_hex(joined);
}

FeatureSchema make_schema(std::vector<std::string> feature_names, int version)
{
    if (feature_names.size() < 2 || feature_names[0] != kVerbFeature || feature_names[1] != kIsJsonFeature) {
        throw DataError("schema must start with \"GET/POST\", \"is_json\"");
    }
    for (std::size_t i = 2; i < feature_names.size(); ++i) {
        if (feature_names[i].rfind("pl_", 0) != 0 || feature_names[i].size() <= 3) {
            throw DataError("schema feature '" + feature_names[i] + "' is not a pl_ column");
        }
        if (i > 2 && !(feature_names[i - 1] < feature_names[i])) {
            throw DataError("schema pl_ columns must be sorted and unique");
        }
    }
    FeatureSchema schema;
    schema.version = version;
    schema.schema_hash = compute_schema_hash(feature_names);
    schema.feature_names = std::move(feature_names);
    return schema;
}

FeatureSchema build_schema(const std::vector<LabeledRecord>& records)
{
    std::set<std::string> keys;
    for (const auto& rec : records) {
        verb_bit(rec);
        keys.insert(rec.payload_keys.begin(), rec.payload_keys.end());
    }
    std::vector<std::string> names = {kVerbFeature, kIsJsonFeature};
    for (const auto& k : keys) names.push_back("pl_" + k);
    return make_schema(std::move(names));
}

FeatureVector::FeatureVector(std::vector<std::uint8_t> values) : values_(std::move(values))
{
    for (auto v : values_) {
        if (v > 1) throw DataError("feature vector entries must be 0 or 1");
    }
}

std::vector<double> FeatureVector::as_reals() const
{
    return {values_.begin(), values_.end()};
}

FeatureVector encode_record(const LabeledRecord& rec, const FeatureSchema& schema, EncodeReport& report)
{
    std::vector<std::uint8_t> values(schema.size(), 0);
    values[0] = verb_bit(rec);
    values[1] = rec.is_json ? 1 : 0;
    for (const auto& key : rec.payload_keys) {
        const std::string name = "pl_" + key;
        // pl_ names are sorted, so binary search past the two fixed columns
        auto first = schema.feature_names.begin() + 2;
        auto it = std::lower_bound(first, schema.feature_names.end(), name);
        if (it != schema.feature_names.end() && *it == name) {
            values[static_cast<std::size_t>(it - schema.feature_names.begin())] = 1;
        } else {
            ++report.unseen_keys;
        }
    }
    return FeatureVector(std::move(values));
}

FeatureVector encode_record(const LabeledRecord& rec, const FeatureSchema& schema)
{
    EncodeReport ignored;
    return encode_record(rec, schema, ignored);
}

LabeledRecord decode_vector(const FeatureVector& v, const FeatureSchema& schema)
{
    if (v.size() != schema.size()) throw DataError("vector length does not match schema");
    LabeledRecord rec;
    rec.req_type = v[0] ? "POST" : "GET";
    rec.is_json = v[1];
    for (std::size_t i = 2; i < v.size(); ++i) {
        if (v[i]) rec.payload_keys.insert(schema.feature_names[i].substr(3));
    }
    return rec;
}

Dataset build_dataset(const std::vector<LabeledRecord>& cleaned)
{
    if (cleaned.empty()) throw DataError("empty dataset");
    EncodeReport report;
    return build_dataset(cleaned, build_schema(cleaned), report);
}

Dataset build_dataset(const std::vector<LabeledRecord>& cleaned, const FeatureSchema& schema, EncodeReport& report)
{
    if (cleaned.empty()) throw DataError("empty dataset");
    Dataset ds;
    ds.schema = schema;
    ds.x.reserve(cleaned.size());
    ds.y.reserve(cleaned.size());
    for (const auto& rec : cleaned) {
        if (rec.invasive != 0 && rec.invasive != 1) {
            throw DataError("record '" + rec.url + "' has label " + std::to_string(rec.invasive));
        }
        ds.x.push_back(encode_record(rec, schema, report));
        ds.y.push_back(rec.invasive);
    }
    return ds;
}

SplitDataset split_dataset(const Dataset& ds, double ratio, std::uint64_t seed, bool stratified)
{
    if (!(ratio > 0.0 && ratio < 1.0)) throw DataError("split ratio must be in (0, 1)");
    if (ds.x.size() != ds.y.size()) throw DataError("dataset has mismatched x/y lengths");
    const std::size_t n = ds.x.size();
    if (n < 2) throw DataError("split needs at least 2 rows");

    SplitDataset out;
    out.seed = seed;
    out.ratio = ratio;
    out.stratified = stratified;
    out.generator = kGeneratorName;

    if (!stratified) {
        const auto perm = seeded_permutation(n, seed);
        const std::size_t cut = train_count(ratio, n);
        out.train_indices.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(cut));
        out.test_indices.assign(perm.begin() + static_cast<std::ptrdiff_t>(cut), perm.end());
    } else {
        for (int label : {0, 1}) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < n; ++i) {
                if (ds.y[i] == label) members.push_back(i);
            }
            const auto perm = seeded_permutation(members.size(), seed + static_cast<std::uint64_t>(label));
            const std::size_t cut = train_count(ratio, members.size());
            for (std::size_t k = 0; k < perm.size(); ++k) {
                (k < cut ? out.train_indices : out.test_indices).push_back(members[perm[k]]);
            }
        }
    }

    if (out.train_indices.empty() || out.test_indices.empty()) {
        throw DataError("degenerate split: ratio " + std::to_string(ratio) + " on " + std::to_string(n) + " rows leaves one side empty");
    }
    for (auto i : out.train_indices) {
        out.x_train.push_back(ds.x[i]);
        out.y_train.push_back(ds.y[i]);
    }
    for (auto i : out.test_indices) {
        out.x_test.push_back(ds.x[i]);
        out.y_test.push_back(ds.y[i]);
    }
    return out;
}

std::string dataset_fingerprint(const Dataset& ds)
{
    std::string buf = ds.schema.schema_hash;
    buf += '\n';
    for (std::size_t i = 0; i < ds.x.size(); ++i) {
        for (auto v : ds.x[i].values()) buf.push_back(static_cast<char>('0' + v));
        buf.push_back(':');
        buf += std::to_string(ds.y[i]);
        buf.push_back('\n');
    }
    return sha256_hex(buf);
}

}  // namespace privguard
