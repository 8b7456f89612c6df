#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "privguard/classifiers.hpp"
#include "privguard/cli.hpp"
#include "privguard/error.hpp"
#include "privguard/evaluation.hpp"
#include "privguard/feature_pipeline.hpp"
#include "privguard/model_store.hpp"
#include "privguard/predict_service.hpp"
#include "privguard/request_ingest.hpp"

namespace py = pybind11;
using namespace privguard;

namespace {

ModelKind kind_arg(const std::string& name)
{
    auto kind = parse_model_kind(name);
    if (!kind) throw DataError("unknown model kind '" + name + "'");
    return *kind;
}

/// Fit a model of `kind` on raw rows and wrap it in a bundle for `schema`.
ModelBundle fit_bundle(const std::string& kind, const FeatureSchema& schema, const Rows& x, const std::vector<int>& y, std::uint64_t seed)
{
    ModelBundle b;
    b.schema = schema;
    switch (kind_arg(kind)) {
    case ModelKind::lr: b.model = lr_fit(x, y); break;
    case ModelKind::dt: b.model = dt_fit(x, y); break;
    case ModelKind::svm: {
        SVMHyper h;
        h.seed = seed;
        b.model = svm_fit(x, y, h);
        break;
    }
    }
    std::visit([&](auto& m) { m.schema_hash = schema.schema_hash; }, b.model);
    b.created_at = format_utc(0);
    return b;
}

py::dict metrics_dict(const Metrics& m)
{
    auto cell = [](const std::optional<double>& v) { return v ? py::object(py::float_(*v)) : py::object(py::none()); };
    py::dict d;
    d["accuracy"] = cell(m.accuracy);
    d["precision"] = cell(m.precision);
    d["recall"] = cell(m.recall);
    d["specificity"] = cell(m.specificity);
    d["f1"] = cell(m.f1);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Request classification core: ingest, features, classifiers, bundles, serving";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", base);
    auto data = py::register_exception<DataError>(m, "DataError", base);
    py::register_exception<UnsupportedVerbError>(m, "UnsupportedVerbError", data);
    py::register_exception<BundleError>(m, "BundleError", base);
    py::register_exception<ValidationError>(m, "ValidationError", base);
    py::register_exception<ServiceUnavailable>(m, "ServiceUnavailable", base);

    // ------------------------------------------------------------ ingest
    py::class_<RawRequest>(m, "RawRequest")
        .def_readonly("method", &RawRequest::method)
        .def_readonly("url", &RawRequest::url)
        .def_readonly("host", &RawRequest::host)
        .def_readonly("content_type", &RawRequest::content_type)
        .def_readonly("body", &RawRequest::body)
        .def("__repr__", [](const RawRequest& r) { return "<RawRequest " + r.method + " " + r.url + ">"; });

    py::class_<PayloadProfile>(m, "PayloadProfile")
        .def_readonly("is_json", &PayloadProfile::is_json)
        .def_readonly("top_level_keys", &PayloadProfile::top_level_keys);

    py::class_<ScreenVerdict>(m, "ScreenVerdict")
        .def_readonly("suspicious_payload", &ScreenVerdict::suspicious_payload)
        .def_readonly("unrelated_domain", &ScreenVerdict::unrelated_domain)
        .def_property_readonly("recommended_label", [](const ScreenVerdict& v) { return std::string(to_string(v.recommended_label)); });

    py::class_<LabeledRecord>(m, "LabeledRecord")
        .def(py::init([](int invasive, std::string url, std::string req_type, int is_json, std::set<std::string> keys) {
                 return LabeledRecord{invasive, std::move(url), std::move(req_type), is_json, std::move(keys)};
             }),
             py::arg("invasive"), py::arg("url"), py::arg("req_type"), py::arg("is_json"), py::arg("payload_keys") = std::set<std::string>{})
        .def_readwrite("invasive", &LabeledRecord::invasive)
        .def_readwrite("url", &LabeledRecord::url)
        .def_readwrite("req_type", &LabeledRecord::req_type)
        .def_readwrite("is_json", &LabeledRecord::is_json)
        .def_readwrite("payload_keys", &LabeledRecord::payload_keys)
        .def("__eq__", [](const LabeledRecord& a, const LabeledRecord& b) { return a == b; })
        .def("__repr__", [](const LabeledRecord& r) {
            return "<LabeledRecord " + std::to_string(r.invasive) + " " + r.req_type + " " + r.url + ">";
        });

    m.def("parse_har", [](const std::string& text) {
        auto r = parse_har(text);
        return py::make_tuple(r.requests, r.skipped);
    }, py::arg("text"), "Requests in a HAR document and the number of skipped entries.");
    m.def("parse_curl_file", &parse_curl_file, py::arg("text"));
    m.def("profile_payload", &profile_payload, py::arg("request"));
    m.def("screen_request", &screen_request, py::arg("request"), py::arg("profile"), py::arg("site_domain"),
          py::arg("suspect_keys") = default_suspect_keys(), py::arg("related_domains") = std::set<std::string>{});
    m.def("default_suspect_keys", &default_suspect_keys);
    m.def("export_dataset_csv", [](const std::vector<LabeledRecord>& records) { return export_dataset_csv(records); }, py::arg("records"));
    m.def("parse_dataset_csv", &parse_dataset_csv, py::arg("text"));
    m.def("emit_blocklist", [](const std::vector<LabeledRecord>& records, const std::string& sink) { return emit_blocklist(records, sink); },
          py::arg("records"), py::arg("sink") = "0.0.0.0");

    // ------------------------------------------------------------ features
    py::class_<FeatureSchema>(m, "FeatureSchema")
        .def_readonly("version", &FeatureSchema::version)
        .def_readonly("feature_names", &FeatureSchema::feature_names)
        .def_readonly("schema_hash", &FeatureSchema::schema_hash)
        .def("__len__", &FeatureSchema::size);

    m.def("clean_records", [](std::vector<LabeledRecord> records) {
        auto [cleaned, report] = clean_records(std::move(records));
        py::dict r;
        r["duplicates_removed"] = report.duplicates_removed;
        r["normalized"] = report.normalized;
        r["rejected"] = report.rejected;
        r["rejections"] = report.rejections;
        return py::make_tuple(cleaned, r);
    }, py::arg("records"));
    m.def("build_schema", &build_schema, py::arg("records"));
    m.def("make_schema", &make_schema, py::arg("feature_names"), py::arg("version") = 1);
    m.def("encode_record", [](const LabeledRecord& r, const FeatureSchema& s) { return encode_record(r, s).values(); },
          py::arg("record"), py::arg("schema"));
    m.def("split_indices", [](const std::vector<LabeledRecord>& cleaned, double ratio, std::uint64_t seed, bool stratified) {
        const auto split = split_dataset(build_dataset(cleaned), ratio, seed, stratified);
        return py::make_tuple(split.train_indices, split.test_indices);
    }, py::arg("records"), py::arg("ratio"), py::arg("seed"), py::arg("stratified") = false,
       "Train and test row indices of the seeded split.");

    // ------------------------------------------------------------ models
    py::class_<ModelBundle>(m, "ModelBundle")
        .def_readonly("schema", &ModelBundle::schema)
        .def_readonly("created_at", &ModelBundle::created_at)
        .def_property_readonly("kind", [](const ModelBundle& b) { return std::string(to_string(b.kind())); })
        .def("predict", [](const ModelBundle& b, const std::vector<double>& v) {
            if (v.size() != b.schema.size()) throw DataError("vector length does not match schema");
            return predict(b.model, v);
        }, py::arg("vector"))
        .def("save", [](const ModelBundle& b) { return save_bundle(b); })
        .def("__eq__", [](const ModelBundle& a, const ModelBundle& b) { return a == b; });

    m.def("fit", [](const std::string& kind, const FeatureSchema& schema, const Rows& x,
                    const std::vector<int>& y, std::uint64_t seed) { return fit_bundle(kind, schema, x, y, seed); },
          py::arg("kind"), py::arg("schema"), py::arg("x"), py::arg("y"), py::arg("seed") = 42);
    m.def("load_bundle", [](const std::string& bytes) { return load_bundle(bytes); }, py::arg("text"));
    m.def("logistic", &logistic, py::arg("z"));
    m.def("gini_impurity", [](const std::vector<int>& labels) { return gini_impurity(labels); }, py::arg("labels"));
    m.def("hinge_objective", [](const std::vector<double>& w, double b, const Rows& x,
                                const std::vector<int>& y, double lambda) { return hinge_objective(w, b, x, y, lambda); },
          py::arg("w"), py::arg("b"), py::arg("x"), py::arg("y"), py::arg("lam"));

    // ------------------------------------------------------------ evaluation
    m.def("confusion_matrix", [](const std::vector<int>& y_true, const std::vector<int>& y_pred) {
        const auto cm = confusion_matrix(y_true, y_pred);
        py::dict d;
        d["tp"] = cm.tp;
        d["tn"] = cm.tn;
        d["fp"] = cm.fp;
        d["fn"] = cm.fn;
        return d;
    }, py::arg("y_true"), py::arg("y_pred"));
    m.def("compute_metrics", [](std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn) {
        return metrics_dict(compute_metrics({tp, tn, fp, fn}));
    }, py::arg("tp"), py::arg("tn"), py::arg("fp"), py::arg("fn"));

    // ------------------------------------------------------------ serving
    py::class_<PredictService>(m, "PredictService")
        .def(py::init<>())
        .def("load", &PredictService::load, py::arg("bundle"))
        .def("load_file", &PredictService::load_file, py::arg("path"))
        .def("loaded", [](const PredictService& s) {
            std::vector<std::string> out;
            for (auto k : s.loaded()) out.emplace_back(to_string(k));
            return out;
        })
        .def("dispatch", [](const PredictService& s, const std::string& route, const std::string& body) {
            const auto reply = dispatch_predict(s, kind_arg(route), body);
            return py::make_tuple(reply.status, reply.body);
        }, py::arg("route"), py::arg("body"), "HTTP status and JSON body for a predict request.");

    // ------------------------------------------------------------ cli
    m.def("run_cli", [](const std::vector<std::string>& argv, const std::string& stdin_text) {
        std::istringstream in(stdin_text);
        std::ostringstream out, err;
        int code;
        {
            py::gil_scoped_release release;
            code = cli::run_command(argv, in, out, err).exit_code;
        }
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("argv"), py::arg("stdin") = "", "Exit code, stdout and stderr of one privguard invocation.");
}
