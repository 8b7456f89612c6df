#ifndef PRIVGUARD_ERROR_HPP
#define PRIVGUARD_ERROR_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace privguard {

/// Root of every exception the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input text (HAR, curl file, CSV, JSON) could not be parsed.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Well-formed input that violates a data invariant (empty dataset, bad label, ...).
class DataError : public Error {
public:
    using Error::Error;
};

/// A request verb the feature encoding has no column for.
class UnsupportedVerbError : public DataError {
public:
    using DataError::DataError;
};

/// Persisted model bundle problems, each a distinct kind.
class BundleError : public Error {
public:
    enum class Kind { malformed, unknown_version, hash_mismatch, invalid };

    BundleError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// A prediction DTO that does not match the schema. `fields` names every offender.
class ValidationError : public Error {
public:
    struct Issue {
        std::string field;
        std::string reason;  // "missing" | "unknown" | "non_binary"
    };

    explicit ValidationError(std::vector<Issue> issues);

    const std::vector<Issue>& issues() const noexcept { return issues_; }
    std::vector<std::string> fields() const;

private:
    std::vector<Issue> issues_;
};

/// A prediction route with no model loaded.
class ServiceUnavailable : public Error {
public:
    using Error::Error;
};

}  // namespace privguard

#endif  // PRIVGUARD_ERROR_HPP
