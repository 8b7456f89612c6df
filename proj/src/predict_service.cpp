#include "privguard/predict_service.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <sys/socket.h>
#include <unistd.h>

#include "httplib.h"

#include "privguard/error.hpp"

namespace privguard {

using json = nlohmann::json;

FeatureVector validate_dto(const json& body, const FeatureSchema& schema)
{
    if (!body.is_object()) throw ParseError("DTO must be a JSON object");

    std::vector<ValidationError::Issue> issues;
    std::vector<std::uint8_t> values(schema.size(), 0);
    for (std::size_t i = 0; i < schema.size(); ++i) {
        const std::string& name = schema.feature_names[i];
        auto it = body.find(name);
        if (it == body.end()) {
            issues.push_back({name, "missing"});
        } else if (it->is_boolean()) {
            values[i] = it->get<bool>() ? 1 : 0;
        } else if (it->is_number_integer() && (*it == 0 || *it == 1)) {
            values[i] = it->get<int>() == 1 ? 1 : 0;
        } else {
            issues.push_back({name, "non_binary"});
        }
    }
    const std::set<std::string> known(schema.feature_names.begin(), schema.feature_names.end());
    for (const auto& item : body.items()) {
        if (!known.contains(item.key())) issues.push_back({item.key(), "unknown"});
    }
    if (!issues.empty()) throw ValidationError(std::move(issues));
    return FeatureVector(std::move(values));
}

json make_dto(const FeatureVector& v, const FeatureSchema& schema)
{
    if (v.size() != schema.size()) throw DataError("vector length does not match schema");
    json dto = json::object();
    for (std::size_t i = 0; i < v.size(); ++i) dto[schema.feature_names[i]] = static_cast<int>(v[i]);
    return dto;
}

json PredictionResponse::to_json() const
{
    return {{"prediction", prediction}, {"model_kind", std::string(to_string(model_kind))}, {"schema_version", schema_version}};
}

void PredictService::load(ModelBundle bundle)
{
    check_bundle(bundle);
    const ModelKind kind = bundle.kind();
    bundles_.insert_or_assign(kind, std::move(bundle));
}

void PredictService::load_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read bundle '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    load(load_bundle(ss.str()));
}

std::vector<ModelKind> PredictService::loaded() const
{
    std::vector<ModelKind> out;
    for (const auto& [kind, _] : bundles_) out.push_back(kind);
    return out;
}

PredictionResponse PredictService::handle_predict(ModelKind route, const json& dto) const
{
    auto it = bundles_.find(route);
    if (it == bundles_.end()) {
        throw ServiceUnavailable("no " + std::string(to_string(route)) + " model loaded");
    }
    const ModelBundle& bundle = it->second;
    const FeatureVector v = validate_dto(dto, bundle.schema);
    const std::vector<double> reals = v.as_reals();
    return PredictionResponse{predict(bundle.model, reals), route, bundle.schema.version};
}

HttpReply dispatch_predict(const PredictService& service, ModelKind route, const std::string& request_body)
{
    const json body = json::parse(request_body, nullptr, false);
    try {
        if (body.is_discarded()) throw ParseError("request body is not JSON");
        return {200, service.handle_predict(route, body).to_json().dump()};
    } catch (const ServiceUnavailable& e) {
        return {503, json{{"error", "unavailable"}, {"model", std::string(to_string(route))}, {"message", e.what()}}.dump()};
    } catch (const ValidationError& e) {
        json detail = json::array();
        for (const auto& i : e.issues()) detail.push_back({{"field", i.field}, {"reason", i.reason}});
        return {400, json{{"error", "validation"}, {"fields", e.fields()}, {"detail", detail}}.dump()};
    } catch (const ParseError& e) {
        return {400, json{{"error", "malformed"}, {"fields", json::array()}, {"message", e.what()}}.dump()};
    }
}

HttpReply dispatch_health(const PredictService& service)
{
    json models = json::array();
    for (auto k : service.loaded()) models.push_back(std::string(to_string(k)));
    return {200, json{{"status", "ok"}, {"models", models}}.dump()};
}

struct PredictServer::Impl {
    std::shared_ptr<const PredictService> service;
    httplib::Server server;
    socket_t bound_socket = INVALID_SOCKET;  // owned here until listen() takes over
};

PredictServer::PredictServer(std::shared_ptr<const PredictService> service) : impl_(std::make_unique<Impl>())
{
    impl_->service = std::move(service);
    // httplib defaults to SO_REUSEPORT, which lets a second server bind the
    // same port and split traffic. Only allow rebinding over TIME_WAIT.
    impl_->server.set_socket_options([this](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
        impl_->bound_socket = sock;
    });
    auto reply = [](httplib::Response& res, const HttpReply& r) {
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    for (ModelKind kind : {ModelKind::lr, ModelKind::dt, ModelKind::svm}) {
        const std::string route = "/api/predict/" + std::string(to_string(kind));
        impl_->server.Post(route, [this, kind, reply](const httplib::Request& req, httplib::Response& res) {
            reply(res, dispatch_predict(*impl_->service, kind, req.body));
        });
    }
    impl_->server.Get("/api/health", [this, reply](const httplib::Request&, httplib::Response& res) {
        reply(res, dispatch_health(*impl_->service));
    });
}

PredictServer::~PredictServer()
{
    stop();
    if (impl_->bound_socket != INVALID_SOCKET) close(impl_->bound_socket);
}

std::optional<int> PredictServer::bind(const std::string& host, int port)
{
    const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound <= 0) {
        impl_->bound_socket = INVALID_SOCKET;
        return std::nullopt;
    }
    return bound;
}

bool PredictServer::listen()
{
    impl_->bound_socket = INVALID_SOCKET;
    return impl_->server.listen_after_bind();
}

void PredictServer::wait_until_ready() const
{
    impl_->server.wait_until_ready();
}

void PredictServer::stop()
{
    if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace privguard
