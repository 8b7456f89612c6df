#include "privguard/request_ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>

#include "json.hpp"

#include "privguard/error.hpp"

namespace privguard {

using json = nlohmann::json;

namespace {

std::string to_lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string to_upper(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool is_method_token(std::string_view m)
{
    return !m.empty() && std::all_of(m.begin(), m.end(), [](unsigned char c) {
        return std::isupper(c) || std::isdigit(c) || c == '-' || c == '_';
    });
}

bool is_csv_token(std::string_view s)
{
    return s.find_first_of(",\r\n\"") == std::string_view::npos;
}

// ---------------------------------------------------------------- HAR

const json& require(const json& node, const char* key, const std::string& path, json::value_t type)
{
    if (!node.is_object() || !node.contains(key)) {
        throw ParseError(path + "." + key + ": missing");
    }
    const json& child = node.at(key);
    if (child.type() != type) {
        throw ParseError(path + "." + key + ": unexpected type " + child.type_name());
    }
    return child;
}

std::optional<std::string> header_value(const json& request, std::string_view name)
{
    auto it = request.find("headers");
    if (it == request.end() || !it->is_array()) return std::nullopt;
    for (const auto& h : *it) {
        if (!h.is_object()) continue;
        auto n = h.find("name");
        auto v = h.find("value");
        if (n != h.end() && v != h.end() && n->is_string() && v->is_string()
            && to_lower(n->get<std::string>()) == name) {
            return v->get<std::string>();
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- curl

struct Token {
    std::string text;
    std::size_t line;
};

struct LogicalLine {
    std::vector<Token> tokens;
    std::size_t line;
};

char ansi_c_escape(char c)
{
    switch (c) {
    case 'n': return '\n';
    case 't': return '\t';
    case 'r': return '\r';
    case '0': return '\0';
    default: return c;
    }
}

// POSIX-shell-style word splitting: single quotes, double quotes with
// backslash escapes, $'...' quoting, and backslash-newline continuation.
// An unescaped newline outside quotes ends a logical line.
std::vector<LogicalLine> split_shell_lines(std::string_view text)
{
    std::vector<LogicalLine> lines;
    LogicalLine current{{}, 1};
    std::string word;
    bool in_word = false;
    std::size_t line = 1;
    std::size_t word_line = 1;

    auto end_word = [&] {
        if (in_word) {
            current.tokens.push_back({word, word_line});
            word.clear();
            in_word = false;
        }
    };
    auto start_word = [&] {
        if (!in_word) {
            in_word = true;
            word_line = line;
        }
    };

    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == '\n') {
            end_word();
            lines.push_back(std::move(current));
            ++line;
            current = LogicalLine{{}, line};
            ++i;
        } else if (c == '\\') {
            if (i + 1 < text.size() && text[i + 1] == '\n') {
                end_word();
                ++line;
                i += 2;
            } else if (i + 2 < text.size() && text[i + 1] == '\r' && text[i + 2] == '\n') {
                end_word();
                ++line;
                i += 3;
            } else {
                start_word();
                if (i + 1 < text.size()) word.push_back(text[i + 1]);
                i += 2;
            }
        } else if (c == '\'') {
            start_word();
            const std::size_t close = text.find('\'', i + 1);
            if (close == std::string_view::npos) {
                throw ParseError("line " + std::to_string(line) + ": unterminated single quote");
            }
            const std::string_view quoted = text.substr(i + 1, close - i - 1);
            line += static_cast<std::size_t>(std::count(quoted.begin(), quoted.end(), '\n'));
            word.append(quoted);
            i = close + 1;
        } else if (c == '$' && i + 1 < text.size() && text[i + 1] == '\'') {
            start_word();
            i += 2;
            while (i < text.size() && text[i] != '\'') {
                if (text[i] == '\\' && i + 1 < text.size()) {
                    word.push_back(ansi_c_escape(text[i + 1]));
                    i += 2;
                } else {
                    if (text[i] == '\n') ++line;
                    word.push_back(text[i++]);
                }
            }
            if (i >= text.size()) {
                throw ParseError("line " + std::to_string(line) + ": unterminated $' quote");
            }
            ++i;
        } else if (c == '"') {
            start_word();
            ++i;
            while (i < text.size() && text[i] != '"') {
                if (text[i] == '\\' && i + 1 < text.size() && std::string_view("\"\\$`\n").find(text[i + 1]) != std::string_view::npos) {
                    if (text[i + 1] == '\n') {
                        ++line;
                    } else {
                        word.push_back(text[i + 1]);
                    }
                    i += 2;
                } else {
                    if (text[i] == '\n') ++line;
                    word.push_back(text[i++]);
                }
            }
            if (i >= text.size()) {
                throw ParseError("line " + std::to_string(line) + ": unterminated double quote");
            }
            ++i;
        } else if (c == ' ' || c == '\t' || c == '\r') {
            end_word();
            ++i;
        } else {
            start_word();
            word.push_back(c);
            ++i;
        }
    }
    end_word();
    lines.push_back(std::move(current));
    return lines;
}

enum class FlagKind { method, header, data, json_data, url, get, head, form, takes_arg, boolean };

FlagKind classify_flag(std::string_view flag)
{
    static const std::map<std::string_view, FlagKind> flags = {
        {"-X", FlagKind::method}, {"--request", FlagKind::method},
        {"-H", FlagKind::header}, {"--header", FlagKind::header},
        {"-d", FlagKind::data}, {"--data", FlagKind::data}, {"--data-raw", FlagKind::data},
        {"--data-binary", FlagKind::data}, {"--data-ascii", FlagKind::data}, {"--data-urlencode", FlagKind::data},
        {"--json", FlagKind::json_data},
        {"--url", FlagKind::url},
        {"-G", FlagKind::get}, {"--get", FlagKind::get},
        {"-I", FlagKind::head}, {"--head", FlagKind::head},
        {"-F", FlagKind::form}, {"--form", FlagKind::form},
        {"-b", FlagKind::takes_arg}, {"--cookie", FlagKind::takes_arg},
        {"-c", FlagKind::takes_arg}, {"--cookie-jar", FlagKind::takes_arg},
        {"-A", FlagKind::takes_arg}, {"--user-agent", FlagKind::takes_arg},
        {"-e", FlagKind::takes_arg}, {"--referer", FlagKind::takes_arg},
        {"-u", FlagKind::takes_arg}, {"--user", FlagKind::takes_arg},
        {"-o", FlagKind::takes_arg}, {"--output", FlagKind::takes_arg},
        {"-x", FlagKind::takes_arg}, {"--proxy", FlagKind::takes_arg},
        {"-m", FlagKind::takes_arg}, {"--max-time", FlagKind::takes_arg},
        {"-w", FlagKind::takes_arg}, {"--write-out", FlagKind::takes_arg},
        {"-r", FlagKind::takes_arg}, {"--range", FlagKind::takes_arg},
        {"-E", FlagKind::takes_arg}, {"--cert", FlagKind::takes_arg},
        {"-K", FlagKind::takes_arg}, {"--config", FlagKind::takes_arg},
        {"-T", FlagKind::takes_arg}, {"--upload-file", FlagKind::takes_arg},
        {"--connect-timeout", FlagKind::takes_arg}, {"--resolve", FlagKind::takes_arg},
        {"--cacert", FlagKind::takes_arg}, {"--key", FlagKind::takes_arg},
        {"--max-redirs", FlagKind::takes_arg}, {"--retry", FlagKind::takes_arg},
        {"--interface", FlagKind::takes_arg}, {"--oauth2-bearer", FlagKind::takes_arg},
        {"--limit-rate", FlagKind::takes_arg}, {"--ciphers", FlagKind::takes_arg},
    };
    auto it = flags.find(flag);
    return it == flags.end() ? FlagKind::boolean : it->second;
}

RawRequest build_curl_request(const std::vector<Token>& args, std::size_t line)
{
    const std::string where = "line " + std::to_string(line) + ": ";
    std::optional<std::string> method;
    std::optional<std::string> url;
    std::optional<std::string> content_type;
    std::vector<std::string> data;
    bool json_flag = false;
    bool force_get = false;
    bool head = false;
    bool form = false;

    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& tok = args[i].text;
        if (tok.size() < 2 || tok[0] != '-') {
            if (!url) url = tok;
            continue;
        }

        std::string flag = tok;
        std::optional<std::string> inline_value;
        if (tok.rfind("--", 0) == 0) {
            if (auto eq = tok.find('='); eq != std::string::npos) {
                flag = tok.substr(0, eq);
                inline_value = tok.substr(eq + 1);
            }
        } else if (tok.size() > 2) {
            // -XPOST, -d'x', -H'...' forms
            const FlagKind k = classify_flag(tok.substr(0, 2));
            if (k != FlagKind::boolean && k != FlagKind::get && k != FlagKind::head) {
                flag = tok.substr(0, 2);
                inline_value = tok.substr(2);
            }
        }

        const FlagKind kind = classify_flag(flag);
        auto value = [&]() -> std::string {
            if (inline_value) return *inline_value;
            if (i + 1 >= args.size()) {
                throw ParseError(where + "flag " + flag + " requires an argument");
            }
            return args[++i].text;
        };

        switch (kind) {
        case FlagKind::method: method = to_upper(trim(value())); break;
        case FlagKind::header: {
            const std::string h = value();
            const auto colon = h.find(':');
            if (colon != std::string::npos && to_lower(trim(std::string_view(h).substr(0, colon))) == "content-type") {
                content_type = std::string(trim(std::string_view(h).substr(colon + 1)));
            }
            break;
        }
        case FlagKind::data: data.push_back(value()); break;
        case FlagKind::json_data:
            data.push_back(value());
            json_flag = true;
            break;
        case FlagKind::url:
            if (!url) url = value();
            else value();
            break;
        case FlagKind::get: force_get = true; break;
        case FlagKind::head: head = true; break;
        case FlagKind::form:
            value();
            form = true;
            break;
        case FlagKind::takes_arg: value(); break;
        case FlagKind::boolean: break;
        }
    }

    if (!url) {
        throw ParseError(where + "no URL in curl command");
    }
    auto host = extract_host(*url);
    if (!host) {
        throw ParseError(where + "not an absolute URL: '" + *url + "'");
    }

    RawRequest req;
    req.url = *url;
    req.host = *host;
    req.source = RequestSource::curl_file;
    if (json_flag && !content_type) content_type = "application/json";
    req.content_type = content_type;

    if (method) {
        req.method = *method;
    } else if (head) {
        req.method = "HEAD";
    } else if (force_get) {
        req.method = "GET";
    } else if (!data.empty() || form) {
        req.method = "POST";
    } else {
        req.method = "GET";
    }
    if (!is_method_token(req.method)) {
        throw ParseError(where + "invalid method '" + req.method + "'");
    }

    if (!data.empty() && !force_get) {
        std::string body;
        for (std::size_t k = 0; k < data.size(); ++k) {
            if (k) body.push_back('&');
            body += data[k];
        }
        req.body = std::move(body);
    }
    return req;
}

// ---------------------------------------------------------------- CSV

struct CsvLine {
    std::vector<std::string_view> cells;
    std::size_t number;
};

std::vector<CsvLine> split_csv(std::string_view csv)
{
    std::vector<CsvLine> out;
    std::size_t number = 0;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        std::size_t nl = csv.find('\n', pos);
        if (nl == std::string_view::npos) nl = csv.size();
        std::string_view line = csv.substr(pos, nl - pos);
        ++number;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) {
            CsvLine row{{}, number};
            std::size_t start = 0;
            while (true) {
                const std::size_t comma = line.find(',', start);
                if (comma == std::string_view::npos) {
                    row.cells.push_back(line.substr(start));
                    break;
                }
                row.cells.push_back(line.substr(start, comma - start));
                start = comma + 1;
            }
            out.push_back(std::move(row));
        }
        if (nl == csv.size()) break;
        pos = nl + 1;
    }
    return out;
}

int parse_int_cell(std::string_view cell, std::size_t line, std::string_view column)
{
    int value = 0;
    const auto* end = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (cell.empty() || ec != std::errc{} || ptr != end) {
        throw ParseError("line " + std::to_string(line) + ": column " + std::string(column) + ": expected an integer, got '" + std::string(cell) + "'");
    }
    return value;
}

int parse_bit_cell(std::string_view cell, std::size_t line, std::string_view column)
{
    if (cell == "0") return 0;
    if (cell == "1") return 1;
    throw ParseError("line " + std::to_string(line) + ": column " + std::string(column) + ": expected 0 or 1, got '" + std::string(cell) + "'");
}

constexpr std::string_view kDatasetColumns[] = {"invasive", "url", "req_type", "is_json"};

std::set<std::string> key_union(std::span<const LabeledRecord> records)
{
    std::set<std::string> keys;
    for (const auto& r : records) keys.insert(r.payload_keys.begin(), r.payload_keys.end());
    return keys;
}

void check_writable(const LabeledRecord& r)
{
    if (!is_csv_token(r.url) || !is_csv_token(r.req_type)) {
        throw DataError("record for '" + r.url + "' has a cell that is not an unquoted CSV token");
    }
    for (const auto& k : r.payload_keys) {
        if (!is_csv_token(k)) throw DataError("payload key '" + k + "' is not an unquoted CSV token");
    }
}

void append_record_cells(std::string& out, const LabeledRecord& r, const std::set<std::string>& keys)
{
    out += r.url;
    out += ',';
    out += r.req_type;
    out += ',';
    out += std::to_string(r.is_json);
    for (const auto& k : keys) {
        out += r.payload_keys.contains(k) ? ",1" : ",0";
    }
    out += '\n';
}

// Parses the dataset columns starting at `offset` within each row.
struct DatasetLayout {
    std::vector<std::string> keys;
    std::size_t offset;
};

DatasetLayout read_header(const CsvLine& header, std::size_t offset)
{
    if (header.cells.size() < offset + 4) {
        throw ParseError("line 1: header must start with invasive,url,req_type,is_json");
    }
    for (std::size_t i = 0; i < 4; ++i) {
        if (header.cells[offset + i] != kDatasetColumns[i]) {
            throw ParseError("line 1: expected column '" + std::string(kDatasetColumns[i]) + "', got '" + std::string(header.cells[offset + i]) + "'");
        }
    }
    DatasetLayout layout{{}, offset};
    std::set<std::string_view> seen;
    for (std::size_t i = offset + 4; i < header.cells.size(); ++i) {
        const std::string_view col = header.cells[i];
        if (col.size() <= 3 || col.substr(0, 3) != "pl_") {
            throw ParseError("line 1: payload column '" + std::string(col) + "' must start with pl_");
        }
        if (!seen.insert(col).second) {
            throw ParseError("line 1: duplicate column '" + std::string(col) + "'");
        }
        layout.keys.emplace_back(col.substr(3));
    }
    return layout;
}

LabeledRecord read_record(const CsvLine& row, const DatasetLayout& layout, std::optional<int> invasive)
{
    const std::size_t expected = layout.offset + 4 + layout.keys.size();
    if (row.cells.size() != expected) {
        throw ParseError("line " + std::to_string(row.number) + ": expected " + std::to_string(expected) + " cells, got " + std::to_string(row.cells.size()));
    }
    LabeledRecord r;
    r.invasive = invasive.value_or(0);
    r.url = std::string(row.cells[layout.offset + 1]);
    r.req_type = std::string(row.cells[layout.offset + 2]);
    r.is_json = parse_bit_cell(row.cells[layout.offset + 3], row.number, "is_json");
    for (std::size_t k = 0; k < layout.keys.size(); ++k) {
        const std::string column = "pl_" + layout.keys[k];
        if (parse_bit_cell(row.cells[layout.offset + 4 + k], row.number, column) == 1) {
            r.payload_keys.insert(layout.keys[k]);
        }
    }
    return r;
}

bool is_ipv4(std::string_view s)
{
    int parts = 0;
    std::size_t pos = 0;
    while (true) {
        const std::size_t dot = s.find('.', pos);
        const std::string_view part = s.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos);
        if (part.empty() || part.size() > 3 || !std::all_of(part.begin(), part.end(), [](unsigned char c) { return std::isdigit(c); })) {
            return false;
        }
        int v = 0;
        std::from_chars(part.data(), part.data() + part.size(), v);
        if (v > 255) return false;
        ++parts;
        if (dot == std::string_view::npos) break;
        pos = dot + 1;
    }
    return parts == 4;
}

bool is_hosts_name(std::string_view host)
{
    return !host.empty() && std::all_of(host.begin(), host.end(), [](unsigned char c) {
        return std::islower(c) || std::isdigit(c) || c == '.' || c == '-';
    });
}

}  // namespace

std::optional<std::string> extract_host(std::string_view url)
{
    const std::size_t sep = url.find("://");
    if (sep == std::string_view::npos || sep == 0) return std::nullopt;
    const std::string_view scheme = url.substr(0, sep);
    if (!std::isalpha(static_cast<unsigned char>(scheme[0]))
        || !std::all_of(scheme.begin(), scheme.end(), [](unsigned char c) { return std::isalnum(c) || c == '+' || c == '-' || c == '.'; })) {
        return std::nullopt;
    }
    std::string_view authority = url.substr(sep + 3);
    authority = authority.substr(0, authority.find_first_of("/?#"));
    if (const std::size_t at = authority.rfind('@'); at != std::string_view::npos) {
        authority.remove_prefix(at + 1);
    }

    std::string_view host;
    if (!authority.empty() && authority.front() == '[') {
        const std::size_t close = authority.find(']');
        if (close == std::string_view::npos) return std::nullopt;
        host = authority.substr(1, close - 1);
        if (host.empty() || !std::all_of(host.begin(), host.end(), [](unsigned char c) { return std::isxdigit(c) || c == ':' || c == '.'; })) {
            return std::nullopt;
        }
        return to_lower(host);
    }
    host = authority;
    if (const std::size_t colon = host.rfind(':'); colon != std::string_view::npos) {
        const std::string_view port = host.substr(colon + 1);
        if (!std::all_of(port.begin(), port.end(), [](unsigned char c) { return std::isdigit(c); })) {
            return std::nullopt;
        }
        host = host.substr(0, colon);
    }
    if (!host.empty() && host.back() == '.') host.remove_suffix(1);
    if (host.empty() || !std::all_of(host.begin(), host.end(), [](unsigned char c) {
            return std::isalnum(c) || c == '-' || c == '.' || c == '_';
        })) {
        return std::nullopt;
    }
    return to_lower(host);
}

HarParseResult parse_har(std::string_view har_text)
{
    json doc;
    try {
        doc = json::parse(har_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("$: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("$: expected a JSON object");
    const json& log = require(doc, "log", "$", json::value_t::object);
    const json& entries = require(log, "entries", "$.log", json::value_t::array);

    HarParseResult result;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string path = "$.log.entries[" + std::to_string(i) + "]";
        const json& request = require(entries[i], "request", path, json::value_t::object);
        const auto url_it = request.find("url");
        const auto method_it = request.find("method");
        if (url_it == request.end() || !url_it->is_string() || method_it == request.end() || !method_it->is_string()) {
            ++result.skipped;
            continue;
        }
        auto host = extract_host(url_it->get_ref<const std::string&>());
        std::string method = to_upper(trim(method_it->get_ref<const std::string&>()));
        if (!host || !is_method_token(method)) {
            ++result.skipped;
            continue;
        }

        RawRequest req;
        req.method = std::move(method);
        req.url = url_it->get<std::string>();
        req.host = std::move(*host);
        req.source = RequestSource::har;
        if (auto pd = request.find("postData"); pd != request.end() && pd->is_object()) {
            if (auto mime = pd->find("mimeType"); mime != pd->end() && mime->is_string() && !mime->get_ref<const std::string&>().empty()) {
                req.content_type = mime->get<std::string>();
            }
            if (auto text = pd->find("text"); text != pd->end() && text->is_string()) {
                req.body = text->get<std::string>();
            }
        }
        if (!req.content_type) req.content_type = header_value(request, "content-type");
        result.requests.push_back(std::move(req));
    }
    return result;
}

std::vector<RawRequest> parse_curl_file(std::string_view text)
{
    std::vector<RawRequest> out;
    std::optional<std::vector<Token>> current;
    std::size_t current_line = 0;

    auto flush = [&] {
        if (current) {
            out.push_back(build_curl_request(*current, current_line));
            current.reset();
        }
    };

    for (auto& ll : split_shell_lines(text)) {
        if (ll.tokens.empty()) {
            flush();
            continue;
        }
        const std::string& first = ll.tokens.front().text;
        if (first.rfind('#', 0) == 0) continue;
        if (first == "curl") {
            flush();
            current.emplace(ll.tokens.begin() + 1, ll.tokens.end());
            current_line = ll.line;
        } else if (current) {
            current->insert(current->end(), ll.tokens.begin(), ll.tokens.end());
        } else {
            throw ParseError("line " + std::to_string(ll.line) + ": expected a curl command");
        }
    }
    flush();
    return out;
}

PayloadProfile profile_payload(const RawRequest& req)
{
    PayloadProfile profile;
    if (!req.body) return profile;
    const json doc = json::parse(*req.body, nullptr, false);
    if (doc.is_discarded()) return profile;

    if (doc.is_object()) {
        profile.is_json = true;
        for (const auto& item : doc.items()) profile.top_level_keys.insert(item.key());
    } else if (doc.is_array() && std::all_of(doc.begin(), doc.end(), [](const json& e) { return e.is_object(); })) {
        profile.is_json = true;
        for (const auto& element : doc) {
            for (const auto& item : element.items()) profile.top_level_keys.insert(item.key());
        }
    }
    return profile;
}

std::string_view to_string(Verdict v)
{
    switch (v) {
    case Verdict::invasive: return "invasive";
    case Verdict::benign: return "benign";
    case Verdict::needs_review: return "needs-review";
    }
    return "needs-review";
}

std::optional<Verdict> parse_verdict(std::string_view text)
{
    if (text == "invasive") return Verdict::invasive;
    if (text == "benign") return Verdict::benign;
    if (text == "needs-review") return Verdict::needs_review;
    return std::nullopt;
}

const std::set<std::string>& default_suspect_keys()
{
    static const std::set<std::string> keys = {"appid", "domain", "imp", "isprebid"};
    return keys;
}

bool is_same_or_subdomain(std::string_view host, std::string_view domain)
{
    const std::string h = to_lower(host);
    const std::string d = to_lower(domain);
    if (d.empty()) return false;
    if (h == d) return true;
    return h.size() > d.size() && h.ends_with(d) && h[h.size() - d.size() - 1] == '.';
}

ScreenVerdict screen_request(const RawRequest& req,
                             const PayloadProfile& profile,
                             std::string_view site_domain,
                             const std::set<std::string>& suspect_keys,
                             const std::set<std::string>& related_domains)
{
    if (trim(site_domain).empty()) throw DataError("screen_request: site domain is empty");

    ScreenVerdict v;
    v.suspicious_payload = std::any_of(profile.top_level_keys.begin(), profile.top_level_keys.end(),
                                       [&](const std::string& k) { return suspect_keys.contains(k); });

    const std::string host = to_lower(req.host);
    const bool related = std::any_of(related_domains.begin(), related_domains.end(),
                                     [&](const std::string& d) { return to_lower(d) == host; });
    v.unrelated_domain = !is_same_or_subdomain(host, trim(site_domain)) && !related;

    if (v.suspicious_payload && v.unrelated_domain) {
        v.recommended_label = Verdict::invasive;
    } else if (!v.suspicious_payload && !v.unrelated_domain) {
        v.recommended_label = Verdict::benign;
    } else {
        v.recommended_label = Verdict::needs_review;
    }
    return v;
}

std::string export_dataset_csv(std::span<const LabeledRecord> records)
{
    if (records.empty()) throw DataError("empty dataset");
    const auto keys = key_union(records);

    std::string out = "invasive,url,req_type,is_json";
    for (const auto& k : keys) {
        out += ",pl_";
        out += k;
    }
    out += '\n';
    for (const auto& r : records) {
        check_writable(r);
        out += std::to_string(r.invasive);
        out += ',';
        append_record_cells(out, r, keys);
    }
    return out;
}

std::vector<LabeledRecord> parse_dataset_csv(std::string_view csv)
{
    const auto lines = split_csv(csv);
    if (lines.empty()) throw ParseError("line 1: missing header");
    if (!lines.front().cells.empty() && lines.front().cells.front() == "verdict") {
        throw ParseError("line 1: this is a review CSV; label it first");
    }
    const DatasetLayout layout = read_header(lines.front(), 0);

    std::vector<LabeledRecord> out;
    out.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const int invasive = lines[i].cells.empty() ? 0 : parse_int_cell(lines[i].cells[0], lines[i].number, "invasive");
        out.push_back(read_record(lines[i], layout, invasive));
    }
    return out;
}

std::string export_review_csv(std::span<const ReviewRow> rows)
{
    if (rows.empty()) throw DataError("empty dataset");
    std::set<std::string> keys;
    for (const auto& row : rows) keys.insert(row.record.payload_keys.begin(), row.record.payload_keys.end());

    std::string out = "verdict,invasive,url,req_type,is_json";
    for (const auto& k : keys) {
        out += ",pl_";
        out += k;
    }
    out += '\n';
    for (const auto& row : rows) {
        check_writable(row.record);
        out += to_string(row.verdict);
        out += ',';
        out += row.invasive ? std::to_string(*row.invasive) : "?";
        out += ',';
        append_record_cells(out, row.record, keys);
    }
    return out;
}

std::vector<ReviewRow> parse_review_csv(std::string_view csv)
{
    const auto lines = split_csv(csv);
    if (lines.empty()) throw ParseError("line 1: missing header");
    if (lines.front().cells.empty() || lines.front().cells.front() != "verdict") {
        throw ParseError("line 1: expected column 'verdict'");
    }
    const DatasetLayout layout = read_header(lines.front(), 1);

    std::vector<ReviewRow> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const CsvLine& line = lines[i];
        if (line.cells.size() < 2) {
            throw ParseError("line " + std::to_string(line.number) + ": too few cells");
        }
        ReviewRow row;
        const auto verdict = parse_verdict(line.cells[0]);
        if (!verdict) {
            throw ParseError("line " + std::to_string(line.number) + ": unknown verdict '" + std::string(line.cells[0]) + "'");
        }
        row.verdict = *verdict;
        if (line.cells[1] != "?") row.invasive = parse_int_cell(line.cells[1], line.number, "invasive");
        row.record = read_record(line, layout, row.invasive);
        out.push_back(std::move(row));
    }
    return out;
}

ReviewRow make_review_row(const RawRequest& req, const PayloadProfile& profile, const ScreenVerdict& verdict)
{
    ReviewRow row;
    row.verdict = verdict.recommended_label;
    row.record.url = req.host;
    row.record.req_type = req.method;
    row.record.is_json = profile.is_json ? 1 : 0;
    for (const auto& k : profile.top_level_keys) {
        // keys that cannot live in a CSV header are left out of the dataset
        if (!k.empty() && is_csv_token(k)) row.record.payload_keys.insert(k);
    }
    if (verdict.recommended_label == Verdict::invasive) row.invasive = 1;
    if (verdict.recommended_label == Verdict::benign) row.invasive = 0;
    row.record.invasive = row.invasive.value_or(0);
    return row;
}

std::string emit_blocklist(std::span<const LabeledRecord> records, std::string_view sink)
{
    if (!is_ipv4(sink)) throw DataError("blocklist: sink '" + std::string(sink) + "' is not an IPv4 address");
    std::set<std::string> hosts;
    for (const auto& r : records) {
        if (r.invasive != 1) continue;
        std::string host = to_lower(trim(r.url));
        if (!is_hosts_name(host)) throw DataError("blocklist: '" + r.url + "' is not a valid hosts-file name");
        hosts.insert(std::move(host));
    }
    std::string out;
    for (const auto& h : hosts) {
        out += sink;
        out += ' ';
        out += h;
        out += '\n';
    }
    return out;
}

}  // namespace privguard
