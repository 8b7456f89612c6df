#ifndef PRIVGUARD_PREDICT_SERVICE_HPP
#define PRIVGUARD_PREDICT_SERVICE_HPP

// Strict prediction endpoints over loaded model bundles.
//
//   POST /api/predict/{lr,dt,svm}   body: one 0/1 field per schema feature
//   GET  /api/health
//
// A DTO must carry exactly the schema's feature names; missing, unknown and
// non-binary fields are all reported back and no prediction is made.
// Bundles are loaded before serving starts and never mutated afterwards, so
// handlers run concurrently without locking.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "privguard/model_store.hpp"

namespace privguard {

/// Throws ValidationError listing every offending field. Accepted values are
/// the integers 0/1 and the booleans false/true.
FeatureVector validate_dto(const nlohmann::json& body, const FeatureSchema& schema);

/// The DTO a client would send for `v`.
nlohmann::json make_dto(const FeatureVector& v, const FeatureSchema& schema);

struct PredictionResponse {
    int prediction = 0;
    ModelKind model_kind = ModelKind::lr;
    int schema_version = 1;

    nlohmann::json to_json() const;

    friend bool operator==(const PredictionResponse&, const PredictionResponse&) = default;
};

class PredictService {
public:
    /// Register a bundle for its own model kind, replacing any earlier one.
    /// Only valid before the service is shared between threads.
    void load(ModelBundle bundle);
    void load_file(const std::string& path);

    bool has(ModelKind kind) const { return bundles_.contains(kind); }
    std::vector<ModelKind> loaded() const;

    /// Throws ServiceUnavailable when `route` has no bundle, ValidationError
    /// for a bad DTO.
    PredictionResponse handle_predict(ModelKind route, const nlohmann::json& dto) const;

private:
    std::map<ModelKind, ModelBundle> bundles_;
};

/// HTTP status and JSON body for one request, independent of the transport.
struct HttpReply {
    int status = 200;
    std::string body;
};

HttpReply dispatch_predict(const PredictService& service, ModelKind route, const std::string& request_body);
HttpReply dispatch_health(const PredictService& service);

/// cpp-httplib front end for a PredictService.
class PredictServer {
public:
    explicit PredictServer(std::shared_ptr<const PredictService> service);
    ~PredictServer();

    PredictServer(const PredictServer&) = delete;
    PredictServer& operator=(const PredictServer&) = delete;

    /// Bind `host:port` (port 0 picks a free port). Returns the bound port or
    /// nullopt when binding fails.
    std::optional<int> bind(const std::string& host, int port);

    /// Serve until stop(). Requires a successful bind().
    bool listen();
    /// Block until a concurrent listen() is accepting connections.
    void wait_until_ready() const;
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace privguard

#endif  // PRIVGUARD_PREDICT_SERVICE_HPP
