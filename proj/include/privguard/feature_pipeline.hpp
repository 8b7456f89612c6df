#ifndef PRIVGUARD_FEATURE_PIPELINE_HPP
#define PRIVGUARD_FEATURE_PIPELINE_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "privguard/request_ingest.hpp"

namespace privguard {

/// Name of the one-hot verb column. GET encodes as 0, POST as 1.
inline constexpr const char* kVerbFeature = "GET/POST";
inline constexpr const char* kIsJsonFeature = "is_json";

struct CleanReport {
    std::size_t duplicates_removed = 0;
    std::size_t normalized = 0;
    std::size_t rejected = 0;
    std::vector<std::string> rejections;  // one message per rejected record
};

/// Drops records whose label is outside {0,1}, trims and uppercases
/// req_type, then removes exact duplicates keeping the first occurrence.
std::pair<std::vector<LabeledRecord>, CleanReport> clean_records(std::vector<LabeledRecord> records);

struct FeatureSchema {
    int version = 1;
    std::vector<std::string> feature_names;
    std::string schema_hash;

    std::size_t size() const noexcept { return feature_names.size(); }

    friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;
};

/// SHA-256 over the feature names, each terminated by '\n'.
std::string compute_schema_hash(const std::vector<std::string>& feature_names);

/// Build a schema from explicit names (validated: starts with the verb and
/// is_json columns, pl_ names sorted and unique).
FeatureSchema make_schema(std::vector<std::string> feature_names, int version = 1);

/// ["GET/POST", "is_json", pl_<k>... sorted]. url never becomes a feature.
/// Throws UnsupportedVerbError for any req_type other than GET or POST.
FeatureSchema build_schema(const std::vector<LabeledRecord>& records);

class FeatureVector {
public:
    FeatureVector() = default;
    explicit FeatureVector(std::vector<std::uint8_t> values);

    const std::vector<std::uint8_t>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::uint8_t operator[](std::size_t i) const { return values_[i]; }

    std::vector<double> as_reals() const;

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

private:
    std::vector<std::uint8_t> values_;
};

struct EncodeReport {
    std::size_t unseen_keys = 0;  // payload keys with no column in the schema
};

/// Throws UnsupportedVerbError for verbs other than GET/POST.
FeatureVector encode_record(const LabeledRecord& rec, const FeatureSchema& schema, EncodeReport& report);
FeatureVector encode_record(const LabeledRecord& rec, const FeatureSchema& schema);

/// Inverse view of an encoded vector: the record a DTO describes (url empty,
/// invasive 0).
LabeledRecord decode_vector(const FeatureVector& v, const FeatureSchema& schema);

struct Dataset {
    FeatureSchema schema;
    std::vector<FeatureVector> x;
    std::vector<int> y;
};

/// clean_records' output -> schema + encoded rows. Throws DataError when empty.
Dataset build_dataset(const std::vector<LabeledRecord>& cleaned);

/// Same as above but against an existing schema (serving / evaluation side).
Dataset build_dataset(const std::vector<LabeledRecord>& cleaned, const FeatureSchema& schema, EncodeReport& report);

struct SplitDataset {
    std::vector<FeatureVector> x_train, x_test;
    std::vector<int> y_train, y_test;
    std::vector<std::size_t> train_indices, test_indices;  // into the source dataset
    std::uint64_t seed = 0;
    double ratio = 0.0;
    bool stratified = false;
    std::string generator;
};

/// Seeded shuffle, then the first floor(ratio * n) rows train and the rest
/// test. With `stratified`, each label class is shuffled and cut separately
/// (floor per class) and the two train/test lists are concatenated class 0
/// first. Throws DataError for ratio outside (0,1), fewer than two rows, or
/// an empty side.
SplitDataset split_dataset(const Dataset& ds, double ratio, std::uint64_t seed, bool stratified = false);

/// SHA-256 over schema hash, encoded rows and labels; identifies the data a
/// model was trained from.
std::string dataset_fingerprint(const Dataset& ds);

}  // namespace privguard

#endif  // PRIVGUARD_FEATURE_PIPELINE_HPP
