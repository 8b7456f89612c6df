#include "privguard/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "privguard/classifiers.hpp"
#include "privguard/error.hpp"
#include "privguard/evaluation.hpp"
#include "privguard/feature_pipeline.hpp"
#include "privguard/model_store.hpp"
#include "privguard/predict_service.hpp"
#include "privguard/request_ingest.hpp"

namespace privguard::cli {

namespace {

/// Failure writing an output file; maps to the runtime exit code.
class IoError : public Error {
public:
    using Error::Error;
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(content.data(), static_cast<std::streamsize>(content.size())) || !out.flush()) {
        throw IoError("cannot write '" + path + "'");
    }
}

std::set<std::string> split_list(const std::string& text)
{
    std::set<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.insert(item);
    }
    return out;
}

std::string join(const std::set<std::string>& items)
{
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += ',';
        out += s;
    }
    return out;
}

std::optional<std::string> env(const char* name)
{
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

std::string resolve_created_at(const std::string& flag)
{
    std::string raw = flag;
    if (raw.empty()) raw = env("SOURCE_DATE_EPOCH").value_or("0");
    if (!raw.empty() && std::all_of(raw.begin(), raw.end(), [](unsigned char c) { return std::isdigit(c); })) {
        return format_utc(std::stoll(raw));
    }
    return raw;
}

// Runs `fn`, prefixing any ParseError with the file it came from.
template <typename Fn>
auto parsing(const std::string& path, Fn&& fn)
{
    try {
        return fn();
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

struct Labeled {
    std::vector<LabeledRecord> cleaned;
    CleanReport report;
};

Labeled load_dataset(const std::string& path)
{
    const std::string text = read_file(path);
    auto [cleaned, report] = clean_records(parsing(path, [&] { return parse_dataset_csv(text); }));
    if (cleaned.empty()) throw DataError("'" + path + "' has no usable records");
    return {std::move(cleaned), std::move(report)};
}

void print_clean_report(const CleanReport& r, std::ostream& out, std::ostream& err)
{
    out << "clean: duplicates_removed=" << r.duplicates_removed << " normalized=" << r.normalized << " rejected=" << r.rejected << "\n";
    for (const auto& msg : r.rejections) err << "rejected " << msg << "\n";
}

// ------------------------------------------------------------ ingest

struct IngestArgs {
    std::string format;
    std::vector<std::string> paths;
    std::string out;
    std::string site;
    std::string suspect_keys;
    std::string related;
};

std::string run_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err)
{
    const std::set<std::string> suspect = a.suspect_keys.empty() ? default_suspect_keys() : split_list(a.suspect_keys);
    const std::set<std::string> related = split_list(a.related);

    std::vector<ReviewRow> rows;
    std::size_t skipped = 0;
    for (const auto& path : a.paths) {
        const std::string text = read_file(path);
        std::vector<RawRequest> requests;
        if (a.format == "har") {
            auto parsed = parsing(path, [&] { return parse_har(text); });
            requests = std::move(parsed.requests);
            skipped += parsed.skipped;
            if (parsed.skipped) err << path << ": skipped " << parsed.skipped << " entries without a usable URL or method\n";
        } else {
            requests = parsing(path, [&] { return parse_curl_file(text); });
        }
        for (const auto& req : requests) {
            const PayloadProfile profile = profile_payload(req);
            rows.push_back(make_review_row(req, profile, screen_request(req, profile, a.site, suspect, related)));
        }
    }
    if (rows.empty()) throw DataError("no requests found in input");
    write_file(a.out, export_review_csv(rows));

    std::map<Verdict, std::size_t> counts;
    for (const auto& r : rows) ++counts[r.verdict];
    std::ostringstream report;
    report << "ingested " << rows.size() << " requests (" << skipped << " skipped): invasive=" << counts[Verdict::invasive]
           << " benign=" << counts[Verdict::benign] << " needs-review=" << counts[Verdict::needs_review]
           << " suspect-keys=" << join(suspect) << " -> " << a.out << "\n";
    out << report.str();
    return report.str();
}

// ------------------------------------------------------------ label

struct LabelArgs {
    std::string review;
    std::string out;
    std::optional<int> fallback;
    bool all = false;
};

std::string describe(const ReviewRow& row)
{
    std::string keys;
    for (const auto& k : row.record.payload_keys) {
        if (!keys.empty()) keys += ',';
        keys += k;
    }
    return row.record.req_type + " " + row.record.url + " is_json=" + std::to_string(row.record.is_json) + " keys={" + keys + "} screened=" + std::string(to_string(row.verdict));
}

std::optional<int> parse_answer(std::string line)
{
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    std::transform(line.begin(), line.end(), line.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (line == "1" || line == "y" || line == "yes" || line == "i" || line == "invasive") return 1;
    if (line == "0" || line == "n" || line == "no" || line == "b" || line == "benign") return 0;
    return std::nullopt;
}

CommandOutcome run_label(const LabelArgs& a, std::istream& in, std::ostream& out, std::ostream& err)
{
    const std::string text = read_file(a.review);
    auto rows = parsing(a.review, [&] { return parse_review_csv(text); });
    const std::size_t total = rows.size();
    std::size_t prompted = 0;

    for (std::size_t i = 0; i < total; ++i) {
        ReviewRow& row = rows[i];
        if (row.invasive && !a.all) continue;
        if (!row.invasive && a.fallback) {
            row.invasive = *a.fallback;
            row.record.invasive = *a.fallback;
            continue;
        }
        ++prompted;
        while (true) {
            out << "[" << (i + 1) << "/" << total << "] " << describe(row) << "\n  invasive? [0/1]";
            if (row.invasive) out << " (enter keeps " << *row.invasive << ")";
            out << ": " << std::flush;
            std::string line;
            if (!std::getline(in, line)) {
                write_file(a.review, export_review_csv(rows));
                const auto open = std::count_if(rows.begin(), rows.end(), [](const ReviewRow& r) { return !r.invasive; });
                err << "\nlabeling incomplete: " << open << " rows unlabeled; progress saved to " << a.review << "\n";
                return {kDataError, "labeling incomplete"};
            }
            if (line.find_first_not_of(" \t\r") == std::string::npos && row.invasive) break;
            if (auto answer = parse_answer(line)) {
                row.invasive = *answer;
                row.record.invasive = *answer;
                break;
            }
            out << "  please answer 0 (benign) or 1 (invasive)\n";
        }
    }

    std::vector<LabeledRecord> records;
    records.reserve(total);
    for (const auto& r : rows) records.push_back(r.record);
    write_file(a.out, export_dataset_csv(records));
    const auto invasive = std::count_if(records.begin(), records.end(), [](const LabeledRecord& r) { return r.invasive == 1; });
    std::ostringstream report;
    report << "labeled " << total << " rows (" << prompted << " prompted): invasive=" << invasive << " benign=" << (static_cast<long>(total) - invasive)
           << " -> " << a.out << "\n";
    out << report.str();
    return {kOk, report.str()};
}

// ------------------------------------------------------------ train

struct TrainArgs {
    std::string csv;
    std::string model = "lr";
    double ratio = 0.7;
    std::uint64_t seed = 42;
    bool stratify = false;
    std::string out;
    std::string created_at;
    std::optional<double> learning_rate;
    std::optional<std::size_t> iterations;
    std::optional<double> l2;
    std::optional<std::size_t> max_depth;
    std::optional<std::size_t> min_samples;
    std::optional<double> lambda;
};

std::string run_train(const TrainArgs& a, std::ostream& out, std::ostream& err)
{
    const auto kind = parse_model_kind(a.model);
    Labeled data = load_dataset(a.csv);
    print_clean_report(data.report, out, err);

    const Dataset ds = build_dataset(data.cleaned);
    const SplitDataset split = split_dataset(ds, a.ratio, a.seed, a.stratify);
    const Rows x_train = to_rows(split.x_train);

    Model model;
    switch (*kind) {
    case ModelKind::lr: {
        LRHyper h;
        if (a.learning_rate) h.learning_rate = *a.learning_rate;
        if (a.iterations) h.iterations = *a.iterations;
        if (a.l2) h.l2 = *a.l2;
        model = lr_fit(x_train, split.y_train, h);
        break;
    }
    case ModelKind::dt: {
        DTHyper h;
        h.max_depth = a.max_depth;
        if (a.min_samples) h.min_samples = *a.min_samples;
        model = dt_fit(x_train, split.y_train, h);
        break;
    }
    case ModelKind::svm: {
        SVMHyper h;
        h.seed = a.seed;
        if (a.lambda) h.lambda = *a.lambda;
        if (a.iterations) h.iterations = *a.iterations;
        model = svm_fit(x_train, split.y_train, h);
        break;
    }
    }
    std::visit([&](auto& m) { m.schema_hash = ds.schema.schema_hash; }, model);

    std::vector<int> fitted;
    for (const auto& row : x_train) fitted.push_back(predict(model, row));
    const Metrics train_metrics = compute_metrics(confusion_matrix(split.y_train, fitted));

    ModelBundle bundle;
    bundle.schema = ds.schema;
    bundle.model = std::move(model);
    bundle.split = SplitInfo{split.ratio, split.seed, split.stratified, split.generator};
    bundle.created_at = resolve_created_at(a.created_at);
    bundle.training_fingerprint = dataset_fingerprint(ds);
    write_file(a.out, save_bundle(bundle));

    std::ostringstream report;
    report << "schema: " << ds.schema.size() << " features\n"
           << "train=" << split.x_train.size() << " test=" << split.x_test.size() << "\n"
           << "model=" << a.model << " train_accuracy=" << train_metrics.accuracy.value_or(0.0) << " -> " << a.out << "\n";
    out << report.str();
    return report.str();
}

// ------------------------------------------------------------ evaluate

struct EvaluateArgs {
    std::string csv;
    std::string bundle;
    std::string report;
};

std::string run_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err)
{
    const std::string bytes = read_file(a.bundle);
    const ModelBundle bundle = [&] {
        try {
            return load_bundle(bytes);
        } catch (const BundleError& e) {
            throw DataError(a.bundle + ": " + e.what());
        }
    }();
    Labeled data = load_dataset(a.csv);

    EncodeReport encode_report;
    const Dataset ds = build_dataset(data.cleaned, bundle.schema, encode_report);
    if (encode_report.unseen_keys) {
        err << "warning: " << encode_report.unseen_keys << " payload keys have no column in the model schema and were ignored\n";
    }

    std::vector<FeatureVector> x = ds.x;
    std::vector<int> y = ds.y;
    if (dataset_fingerprint(ds) == bundle.training_fingerprint) {
        if (!bundle.split) {
            throw DataError("'" + a.csv + "' is the bundle's training data and the bundle records no held-out split");
        }
        const SplitDataset split = split_dataset(ds, bundle.split->ratio, bundle.split->seed, bundle.split->stratified);
        err << "warning: '" << a.csv << "' matches the bundle's training fingerprint; scoring only the held-out split ("
            << split.x_test.size() << " of " << ds.x.size() << " rows, seed " << bundle.split->seed << ")\n";
        x = split.x_test;
        y = split.y_test;
    }

    std::vector<int> predicted;
    predicted.reserve(x.size());
    for (const auto& v : x) predicted.push_back(predict(bundle.model, v.as_reals()));
    const ConfusionMatrix cm = confusion_matrix(y, predicted);
    const std::string report = evaluation_report_json(to_string(bundle.kind()), cm, compute_metrics(cm)) + "\n";
    if (!a.report.empty()) write_file(a.report, report);
    out << report;
    return report;
}

// ------------------------------------------------------------ serve

struct ServeArgs {
    std::string lr, dt, svm;
    std::string host;
    int port = -1;
    std::string config;
};

std::atomic<bool> g_stop_requested{false};

extern "C" void on_stop_signal(int)
{
    g_stop_requested.store(true);
}

CommandOutcome run_serve(ServeArgs a, std::ostream& out, std::ostream& err)
{
    std::map<ModelKind, std::string> paths;
    std::string host = "127.0.0.1";
    int port = 8080;

    if (!a.config.empty()) {
        const auto cfg = nlohmann::json::parse(read_file(a.config), nullptr, false);
        if (cfg.is_discarded() || !cfg.is_object()) throw ParseError("'" + a.config + "' is not a JSON object");
        host = cfg.value("host", host);
        port = cfg.value("port", port);
        if (auto b = cfg.find("bundles"); b != cfg.end() && b->is_object()) {
            for (const auto& [name, path] : b->items()) {
                auto kind = parse_model_kind(name);
                if (!kind || !path.is_string()) throw ParseError("'" + a.config + "': bad bundles entry '" + name + "'");
                paths[*kind] = path.get<std::string>();
            }
        }
    }
    if (auto v = env("PRIVGUARD_HOST")) host = *v;
    if (auto v = env("PRIVGUARD_PORT")) port = std::stoi(*v);
    if (auto v = env("PRIVGUARD_LR_BUNDLE")) paths[ModelKind::lr] = *v;
    if (auto v = env("PRIVGUARD_DT_BUNDLE")) paths[ModelKind::dt] = *v;
    if (auto v = env("PRIVGUARD_SVM_BUNDLE")) paths[ModelKind::svm] = *v;
    if (!a.host.empty()) host = a.host;
    if (a.port >= 0) port = a.port;
    if (!a.lr.empty()) paths[ModelKind::lr] = a.lr;
    if (!a.dt.empty()) paths[ModelKind::dt] = a.dt;
    if (!a.svm.empty()) paths[ModelKind::svm] = a.svm;

    if (paths.empty()) {
        err << "serve: no model bundles given (--lr, --dt, --svm)\n";
        return {kUsage, "no bundles"};
    }

    auto service = std::make_shared<PredictService>();
    for (const auto& [kind, path] : paths) {
        ModelBundle b = load_bundle(read_file(path));
        if (b.kind() != kind) {
            throw DataError("'" + path + "' holds a " + std::string(to_string(b.kind())) + " model, not " + std::string(to_string(kind)));
        }
        service->load(std::move(b));
    }

    PredictServer server(service);
    const auto bound = server.bind(host, port);
    if (!bound) {
        err << "serve: cannot bind " << host << ":" << port << "\n";
        return {kRuntimeError, "bind failure"};
    }

    std::string models;
    for (auto k : service->loaded()) {
        if (!models.empty()) models += ',';
        models += to_string(k);
    }
    const std::string banner = "serving " + models + " on http://" + host + ":" + std::to_string(*bound) + "\n";
    out << banner << std::flush;

    g_stop_requested.store(false);
    auto previous_int = std::signal(SIGINT, on_stop_signal);
    auto previous_term = std::signal(SIGTERM, on_stop_signal);
    std::atomic<bool> done{false};
    std::thread watcher([&] {
        while (!done.load()) {
            if (g_stop_requested.load()) {
                server.stop();
                break;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
    });
    const bool clean = server.listen();
    done.store(true);
    watcher.join();
    std::signal(SIGINT, previous_int);
    std::signal(SIGTERM, previous_term);
    if (!clean && !g_stop_requested.load()) return {kRuntimeError, "server stopped unexpectedly"};
    return {kOk, banner};
}

// ------------------------------------------------------------ blocklist

struct BlocklistArgs {
    std::string csv;
    std::string out;
    std::string sink = "0.0.0.0";
};

std::string run_blocklist(const BlocklistArgs& a, std::ostream& out, std::ostream& err)
{
    Labeled data = load_dataset(a.csv);
    print_clean_report(data.report, err, err);
    const std::string hosts = emit_blocklist(data.cleaned, a.sink);
    const auto lines = std::count(hosts.begin(), hosts.end(), '\n');
    if (a.out.empty()) {
        out << hosts;
        return hosts;
    }
    write_file(a.out, hosts);
    const std::string report = "blocklist: " + std::to_string(lines) + " hosts -> " + a.out + "\n";
    out << report;
    return report;
}

}  // namespace

CommandOutcome run_command(const std::vector<std::string>& argv, std::istream& in, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Classify outbound HTTP requests as privacy-invasive or benign.", "privguard"};
    app.require_subcommand(1);

    IngestArgs ingest_args;
    auto* ingest = app.add_subcommand("ingest", "Parse captured traffic, screen it, and write a review CSV");
    ingest->add_option("format", ingest_args.format, "Capture format")->required()->check(CLI::IsMember({"har", "curl"}));
    ingest->add_option("paths", ingest_args.paths, "Capture files")->required();
    ingest->add_option("--out", ingest_args.out, "Review CSV to write")->required();
    ingest->add_option("--site", ingest_args.site, "Domain of the visited site")->required();
    ingest->add_option("--suspect-keys", ingest_args.suspect_keys, "Comma-separated suspicious payload keys");
    ingest->add_option("--related", ingest_args.related, "Comma-separated hosts related to the site");

    LabelArgs label_args;
    std::optional<int> label_default;
    auto* label = app.add_subcommand("label", "Prompt for labels on needs-review rows and write the dataset CSV");
    label->add_option("review", label_args.review, "Review CSV from ingest")->required();
    label->add_option("--out", label_args.out, "Dataset CSV to write")->required();
    label->add_option("--default", label_default, "Label unreviewed rows with this value instead of prompting")->check(CLI::IsMember({0, 1}));
    label->add_flag("--all", label_args.all, "Also confirm rows the screen already labeled");

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "Clean, encode, split, fit and save a model bundle");
    train->add_option("csv", train_args.csv, "Dataset CSV")->required();
    train->add_option("--model", train_args.model, "lr | dt | svm")->check(CLI::IsMember({"lr", "dt", "svm"}));
    train->add_option("--ratio", train_args.ratio, "Training fraction")->check(CLI::Range(0.0, 1.0));
    train->add_option("--seed", train_args.seed, "Seed for the split and the SVM sampler");
    train->add_flag("--stratify", train_args.stratify, "Split each class separately");
    train->add_option("--out", train_args.out, "Bundle path (*.pgmodel.json)")->required();
    train->add_option("--created-at", train_args.created_at, "Bundle timestamp: unix seconds or RFC 3339 (default SOURCE_DATE_EPOCH or 0)");
    train->add_option("--learning-rate", train_args.learning_rate, "LR step size");
    train->add_option("--iterations", train_args.iterations, "LR descent steps / SVM sampler steps");
    train->add_option("--l2", train_args.l2, "LR L2 penalty");
    train->add_option("--max-depth", train_args.max_depth, "DT depth cap");
    train->add_option("--min-samples", train_args.min_samples, "DT minimum samples to split");
    train->add_option("--lambda", train_args.lambda, "SVM regularization");

    EvaluateArgs eval_args;
    auto* evaluate = app.add_subcommand("evaluate", "Confusion matrix and metrics of a bundle on a dataset");
    evaluate->add_option("csv", eval_args.csv, "Dataset CSV")->required();
    evaluate->add_option("--bundle", eval_args.bundle, "Model bundle")->required();
    evaluate->add_option("--report", eval_args.report, "Also write the JSON report here");

    ServeArgs serve_args;
    auto* serve = app.add_subcommand("serve", "Serve prediction endpoints over HTTP");
    serve->add_option("--lr", serve_args.lr, "Logistic regression bundle");
    serve->add_option("--dt", serve_args.dt, "Decision tree bundle");
    serve->add_option("--svm", serve_args.svm, "SVM bundle");
    serve->add_option("--host", serve_args.host, "Bind address (default 127.0.0.1)");
    serve->add_option("--port", serve_args.port, "Port (default 8080)");
    serve->add_option("--config", serve_args.config, "JSON config {host, port, bundles:{lr,dt,svm}}");

    BlocklistArgs block_args;
    auto* blocklist = app.add_subcommand("blocklist", "Write a hosts-format blocklist of invasive hosts");
    blocklist->add_option("csv", block_args.csv, "Dataset CSV")->required();
    blocklist->add_option("--out", block_args.out, "Hosts file (stdout when omitted)");
    blocklist->add_option("--sink", block_args.sink, "Sinkhole IPv4 address");

    try {
        std::vector<std::string> args(argv.rbegin(), argv.rend());
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return {code == 0 ? kOk : kUsage, e.what()};
    }

    try {
        if (ingest->parsed()) return {kOk, run_ingest(ingest_args, out, err)};
        if (label->parsed()) {
            label_args.fallback = label_default;
            return run_label(label_args, in, out, err);
        }
        if (train->parsed()) return {kOk, run_train(train_args, out, err)};
        if (evaluate->parsed()) return {kOk, run_evaluate(eval_args, out, err)};
        if (serve->parsed()) return run_serve(serve_args, out, err);
        if (blocklist->parsed()) return {kOk, run_blocklist(block_args, out, err)};
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return {kRuntimeError, e.what()};
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return {kDataError, e.what()};
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return {kDataError, e.what()};
    } catch (const BundleError& e) {
        err << "error: " << e.what() << "\n";
        return {kDataError, e.what()};
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return {kRuntimeError, e.what()};
    }
    return {kUsage, "no subcommand"};
}

}  // namespace privguard::cli
