#ifndef PRIVGUARD_REQUEST_INGEST_HPP
#define PRIVGUARD_REQUEST_INGEST_HPP

// Captured traffic -> labeled dataset rows.
//
// Two capture formats are read: HAR 1.2 documents exported from a browser's
// network panel, and text files of saved curl commands (one per line, or
// one per blank-line-separated block with backslash continuations). Each
// request is profiled for JSON payload structure and screened against the
// visited site: a suspicious payload sent to an unrelated host is
// recommended as invasive, neither condition as benign, and the two mixed
// cases are left for a human.

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace privguard {

enum class RequestSource { har, curl_file };

struct RawRequest {
    std::string method;                        // uppercase verb
    std::string url;                           // absolute URL as captured
    std::string host;                          // lowercase host, no port
    std::optional<std::string> content_type;
    std::optional<std::string> body;
    RequestSource source = RequestSource::har;
};

/// Lowercase host of an absolute `scheme://[user@]host[:port][/...]` URL,
/// or nullopt when the text is not such a URL.
std::optional<std::string> extract_host(std::string_view url);

struct HarParseResult {
    std::vector<RawRequest> requests;
    std::size_t skipped = 0;  // entries with an unusable url or method
};

/// One RawRequest per `log.entries[i]`, in file order.
/// Throws ParseError naming the JSON path on malformed input.
HarParseResult parse_har(std::string_view har_text);

/// Supported flags: -X/--request, -H/--header, -d/--data/--data-raw/
/// --data-binary/--data-ascii, --url, and the URL positional. Other flags are
/// skipped (with their argument, for the ones known to take one).
/// Throws ParseError("line N: ...") for a command without a usable URL.
std::vector<RawRequest> parse_curl_file(std::string_view text);

struct PayloadProfile {
    bool is_json = false;
    std::set<std::string> top_level_keys;

    friend bool operator==(const PayloadProfile&, const PayloadProfile&) = default;
};

/// JSON object -> its keys; array whose elements are all objects -> union of
/// their keys; anything else (or no body) -> not JSON.
PayloadProfile profile_payload(const RawRequest& req);

enum class Verdict { invasive, benign, needs_review };

std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view text);

struct ScreenVerdict {
    bool suspicious_payload = false;
    bool unrelated_domain = false;
    Verdict recommended_label = Verdict::benign;
};

/// Keys the shipped screening configuration treats as suspicious.
const std::set<std::string>& default_suspect_keys();

/// True when `host` equals `domain` or is a subdomain of it (case-insensitive).
bool is_same_or_subdomain(std::string_view host, std::string_view domain);

/// Throws DataError when `site_domain` is empty.
ScreenVerdict screen_request(const RawRequest& req,
                             const PayloadProfile& profile,
                             std::string_view site_domain,
                             const std::set<std::string>& suspect_keys,
                             const std::set<std::string>& related_domains);

/// One spreadsheet row. `invasive` is an int so that out-of-domain values
/// read from disk can be reported by cleaning rather than lost at parse time.
struct LabeledRecord {
    int invasive = 0;
    std::string url;       // destination host
    std::string req_type;  // HTTP verb
    int is_json = 0;
    std::set<std::string> payload_keys;

    friend bool operator==(const LabeledRecord&, const LabeledRecord&) = default;
    friend auto operator<=>(const LabeledRecord&, const LabeledRecord&) = default;
};

/// Header `invasive,url,req_type,is_json,pl_<k>...` with the pl_ columns in
/// lexicographic order over the union of all records' keys.
/// Throws DataError("empty dataset") for no records, and for cells that
/// cannot be written as unquoted tokens (commas, newlines).
std::string export_dataset_csv(std::span<const LabeledRecord> records);

/// Inverse of export_dataset_csv. Also accepts CRLF line endings and a
/// trailing blank line. Throws ParseError with the line number.
std::vector<LabeledRecord> parse_dataset_csv(std::string_view csv);

/// A screened request awaiting (or carrying) a human label.
struct ReviewRow {
    Verdict verdict = Verdict::needs_review;
    std::optional<int> invasive;  // absent until labeled
    LabeledRecord record;         // record.invasive mirrors `invasive` when set
};

/// Review CSV: `verdict,` followed by the dataset columns; unlabeled rows
/// carry `?` in the invasive cell.
std::string export_review_csv(std::span<const ReviewRow> rows);
std::vector<ReviewRow> parse_review_csv(std::string_view csv);

/// Screen a request and turn it into a review row. Invasive and benign
/// verdicts pre-fill the label; needs-review leaves it empty.
ReviewRow make_review_row(const RawRequest& req, const PayloadProfile& profile, const ScreenVerdict& verdict);

/// Hosts-file lines `<sink> <host>\n` for every distinct invasive host,
/// sorted. Throws DataError when `sink` is not dotted-quad IPv4.
std::string emit_blocklist(std::span<const LabeledRecord> records, std::string_view sink = "0.0.0.0");

}  // namespace privguard

#endif  // PRIVGUARD_REQUEST_INGEST_HPP
