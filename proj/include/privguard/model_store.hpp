#ifndef PRIVGUARD_MODEL_STORE_HPP
#define PRIVGUARD_MODEL_STORE_HPP

// Self-describing model bundles (`*.pgmodel.json`).
//
// A bundle is canonical JSON: object keys sorted, no insignificant
// whitespace, every floating-point value printed with 17 significant digits.
// Equal bundles therefore serialize to identical bytes, and every double
// survives the round trip exactly.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "privguard/classifiers.hpp"
#include "privguard/feature_pipeline.hpp"

namespace privguard {

inline constexpr int kBundleFormatVersion = 1;
inline constexpr const char* kBundleExtension = ".pgmodel.json";

enum class ModelKind { lr, dt, svm };

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view text);

using Model = std::variant<LRModel, DTModel, SVMModel>;

ModelKind kind_of(const Model& model);
const std::string& schema_hash_of(const Model& model);

/// Prediction of any model kind on a schema-ordered vector.
int predict(const Model& model, std::span<const double> v);

/// How the training rows were carved out of the source dataset.
struct SplitInfo {
    double ratio = 0.0;
    std::uint64_t seed = 0;
    bool stratified = false;
    std::string generator;

    friend bool operator==(const SplitInfo&, const SplitInfo&) = default;
};

struct ModelBundle {
    int format_version = kBundleFormatVersion;
    FeatureSchema schema;
    Model model;
    std::optional<SplitInfo> split;
    std::string created_at;            // RFC 3339 UTC, e.g. 2024-01-01T00:00:00Z
    std::string training_fingerprint;  // dataset_fingerprint of the full cleaned dataset

    ModelKind kind() const { return kind_of(model); }

    friend bool operator==(const ModelBundle&, const ModelBundle&) = default;
};

/// Throws BundleError(invalid) when the bundle's invariants do not hold.
void check_bundle(const ModelBundle& b);

std::string save_bundle(const ModelBundle& b);

/// Throws BundleError with kind malformed, unknown_version, hash_mismatch
/// or invalid.
ModelBundle load_bundle(std::string_view bytes);

/// RFC 3339 UTC text for a Unix timestamp.
std::string format_utc(std::int64_t unix_seconds);

}  // namespace privguard

#endif  // PRIVGUARD_MODEL_STORE_HPP
