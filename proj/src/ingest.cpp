#include "squadforge/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "squadforge/errors.hpp"

namespace squadforge {

namespace fs = std::filesystem;
using nlohmann::json;

// --- clock / rate limiting ---------------------------------------------------------

std::chrono::steady_clock::time_point SystemClock::now() { return std::chrono::steady_clock::now(); }

void SystemClock::sleep_for(std::chrono::milliseconds duration) { std::this_thread::sleep_for(duration); }

RateLimiter::RateLimiter(int max_per_minute, Clock& clock) : max_per_minute_(max_per_minute), clock_(clock) {
    if (max_per_minute < 1) throw ConfigError("rate_limit must be >= 1 request per minute");
}

void RateLimiter::acquire() {
    constexpr auto kWindow = std::chrono::seconds(60);
    std::lock_guard lock(mutex_);
    for (;;) {
        const auto now = clock_.now();
        while (!issued_.empty() && now - issued_.front() >= kWindow) issued_.pop_front();
        if (static_cast<int>(issued_.size()) < max_per_minute_) {
            issued_.push_back(now);
            return;
        }
        const auto wait = issued_.front() + kWindow - now;
        clock_.sleep_for(std::max(std::chrono::milliseconds(1),
                                  std::chrono::ceil<std::chrono::milliseconds>(wait)));
    }
}

// --- http transport ------------------------------------------------------------------

namespace {

class HttplibTransport final : public HttpTransport {
public:
    HttpResponse get(const std::string& url, const std::map<std::string, std::string>& headers,
                     std::chrono::seconds timeout) override {
        const auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) throw FeedError("URL without scheme: " + url);
        const auto path_start = url.find('/', scheme_end + 3);
        const std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
        const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

        httplib::Client client(origin);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        httplib::Headers h;
        for (const auto& [k, v] : headers) h.emplace(k, v);
        auto res = client.Get(path, h);
        if (!res) {
            throw NetworkError("request to " + url + " failed: " + httplib::to_string(res.error()), true);
        }
        HttpResponse out;
        out.status = res->status;
        out.body = res->body;
        for (const auto& [k, v] : res->headers) {
            std::string name = k;
            std::transform(name.begin(), name.end(), name.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            out.headers[name] = v;
        }
        return out;
    }
};

}  // namespace

std::unique_ptr<HttpTransport> make_http_transport() { return std::make_unique<HttplibTransport>(); }

// --- cache ---------------------------------------------------------------------------

ResponseCache::ResponseCache(fs::path directory) : directory_(std::move(directory)) {
    std::error_code ec;
    fs::create_directories(directory_, ec);
    if (ec) throw IoError("cannot create cache directory " + directory_.string() + ": " + ec.message());
}

std::string ResponseCache::key(std::string_view location, std::string_view endpoint, int gameweek) {
    std::string k;
    k.append(location).append("\n").append(endpoint).append("\n").append(std::to_string(gameweek));
    return sha256_hex(k);
}

std::optional<CacheEntry> ResponseCache::load(const std::string& key) const {
    std::lock_guard lock(mutex_);
    const auto body_path = directory_ / (key + ".body");
    if (!fs::exists(body_path)) return std::nullopt;
    CacheEntry entry;
    entry.body = read_file(body_path);
    const auto meta_path = directory_ / (key + ".meta.json");
    if (fs::exists(meta_path)) {
        try {
            entry.validator = json::parse(read_file(meta_path)).value("validator", "");
        } catch (const json::exception&) {
            entry.validator.clear();
        }
    }
    return entry;
}

void ResponseCache::store(const std::string& key, const CacheEntry& entry) {
    std::lock_guard lock(mutex_);
    write_file_atomic(directory_ / (key + ".meta.json"), json{{"validator", entry.validator}}.dump() + "\n");
    write_file_atomic(directory_ / (key + ".body"), entry.body);
}

std::size_t ResponseCache::size() const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(directory_)) {
        if (e.path().extension() == ".body") ++n;
    }
    return n;
}

// --- feed client ---------------------------------------------------------------------

FeedClient::FeedClient(FeedSource source, std::shared_ptr<HttpTransport> transport,
                       std::shared_ptr<Clock> clock, RetryPolicy retry)
    : source_(std::move(source)), transport_(std::move(transport)), clock_(std::move(clock)), retry_(retry) {
    if (source_.kind != SourceKind::Http) return;
    if (source_.cache_dir.empty()) throw ConfigError("http feed " + source_.location + " needs a cache_dir");
    if (source_.timeout < 1) throw ConfigError("feed timeout must be >= 1 second");
    if (!transport_) transport_ = make_http_transport();
    if (!clock_) clock_ = std::make_shared<SystemClock>();
    cache_.emplace(source_.cache_dir);
    limiter_.emplace(source_.rate_limit, *clock_);
}

namespace {

std::string endpoint_path(std::string_view endpoint, int gameweek) {
    if (endpoint == kPlayersEndpoint) return "/event/" + std::to_string(gameweek) + "/players";
    if (endpoint == kOddsEndpoint) return "/fixtures/" + std::to_string(gameweek) + "/odds";
    throw ConfigError("unknown feed endpoint '" + std::string(endpoint) + "'");
}

std::string file_name_for(std::string_view endpoint, int gameweek) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_gw%02d.json", std::string(endpoint).c_str(), gameweek);
    return buf;
}

}  // namespace

std::string FeedClient::fetch_raw(std::string_view endpoint, int gameweek) {
    if (source_.kind == SourceKind::File) {
        const fs::path path = fs::path(source_.location) / file_name_for(endpoint, gameweek);
        if (!fs::exists(path)) throw FeedError("feed file not found: " + path.string());
        return read_file(path);
    }

    const std::string path = endpoint_path(endpoint, gameweek);
    const std::string key = ResponseCache::key(source_.location, path, gameweek);
    auto cached = cache_->load(key);
    if (cached && !source_.revalidate) return cached->body;

    std::string base = source_.location;
    while (!base.empty() && base.back() == '/') base.pop_back();
    const std::string url = base + path;
    std::map<std::string, std::string> headers{{"Accept", "application/json"}};
    if (!source_.token.empty()) headers["Authorization"] = "Bearer " + source_.token;
    if (cached && !cached->validator.empty()) headers["If-None-Match"] = cached->validator;

    auto backoff = retry_.initial_backoff;
    for (int attempt = 1;; ++attempt) {
        try {
            limiter_->acquire();
            ++network_requests_;
            const auto res = transport_->get(url, headers, std::chrono::seconds(source_.timeout));
            if (res.status == 304 && cached) return cached->body;
            if (res.status >= 500) throw NetworkError("HTTP " + std::to_string(res.status) + " from " + url, true);
            if (res.status != 200) throw FeedError("HTTP " + std::to_string(res.status) + " from " + url);
            CacheEntry entry{res.body, {}};
            if (auto it = res.headers.find("etag"); it != res.headers.end()) {
                entry.validator = it->second;
            } else if (auto lm = res.headers.find("last-modified"); lm != res.headers.end()) {
                entry.validator = lm->second;
            }
            cache_->store(key, entry);
            return entry.body;
        } catch (const NetworkError& e) {
            if (!e.retryable() || attempt >= retry_.attempts) throw;
            clock_->sleep_for(backoff);
            backoff *= 2;
        }
    }
}

// --- payload parsing ---------------------------------------------------------------

namespace {

json parse_json(std::string_view payload, const char* what) {
    try {
        return json::parse(payload);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string(what) + " is not valid JSON: " + e.what());
    }
}

void check_schema_version(const json& j, const char* what) {
    if (auto it = j.find("schema_version"); it != j.end()) {
        if (!it->is_number_integer() || it->get<int>() != kFeedSchemaVersion) {
            throw ParseError(std::string(what) + ": unsupported schema_version");
        }
    }
}

// Field accessors that name the offending field in their errors.
class FieldReader {
public:
    FieldReader(const json& object, std::string context) : j_(object), context_(std::move(context)) {
        if (!j_.is_object()) throw ParseError(context_ + ": expected an object");
    }

    const json& raw(const char* name) const {
        auto it = j_.find(name);
        if (it == j_.end()) throw ParseError(context_ + "." + name + ": missing");
        return *it;
    }
    bool has(const char* name) const { return j_.contains(name); }

    int integer(const char* name) const {
        const auto& v = raw(name);
        if (!v.is_number_integer()) throw ParseError(context_ + "." + name + ": expected an integer");
        return v.get<int>();
    }
    int integer_or(const char* name, int fallback) const { return has(name) ? integer(name) : fallback; }

    // FPL publishes ICT indices as strings; accept both.
    double number(const char* name) const {
        const auto& v = raw(name);
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) {
            const auto s = v.get<std::string>();
            try {
                std::size_t used = 0;
                const double d = std::stod(s, &used);
                if (used == s.size()) return d;
            } catch (const std::exception&) {
            }
        }
        throw ParseError(context_ + "." + name + ": expected a number");
    }
    double number_or(const char* name, double fallback) const { return has(name) ? number(name) : fallback; }

    std::string text(const char* name) const {
        const auto& v = raw(name);
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number_integer()) return std::to_string(v.get<long long>());
        throw ParseError(context_ + "." + name + ": expected a string");
    }

    bool boolean(const char* name) const {
        const auto& v = raw(name);
        if (!v.is_boolean()) throw ParseError(context_ + "." + name + ": expected a boolean");
        return v.get<bool>();
    }

    FieldReader object(const char* name) const { return FieldReader(raw(name), context_ + "." + name); }

private:
    const json& j_;
    std::string context_;
};

Availability availability_from_status(const std::string& status, const std::string& context) {
    if (status == "a") return Availability::Available;
    if (status == "i") return Availability::Injured;
    if (status == "d") return Availability::Doubtful;
    if (status == "s") return Availability::Suspended;
    if (status == "u" || status == "n") return Availability::Unavailable;
    try {
        return parse_availability(status);
    } catch (const ValidationError&) {
        throw ValidationError(context + ".status: unknown status '" + status + "'");
    }
}

const json& elements_of(const json& j) {
    auto it = j.find("elements");
    if (it == j.end() || !it->is_array()) throw FeedError("players payload has no 'elements' list");
    return *it;
}

}  // namespace

std::vector<PlayerGameweekRecord> parse_players_payload(std::string_view payload, int gameweek) {
    const json j = parse_json(payload, "players payload");
    check_schema_version(j, "players payload");
    if (auto it = j.find("gameweek"); it != j.end() && (!it->is_number_integer() || it->get<int>() != gameweek)) {
        throw ValidationError("players payload is for gameweek " + it->dump() + ", expected " +
                              std::to_string(gameweek));
    }
    std::vector<PlayerGameweekRecord> out;
    std::size_t index = 0;
    for (const auto& ej : elements_of(j)) {
        const std::string ctx = "elements[" + std::to_string(index++) + "]";
        FieldReader e(ej, ctx);
        PlayerGameweekRecord r;
        r.player_id = e.text("id");
        r.gameweek = gameweek;
        try {
            r.position = parse_position(e.text("position"));
        } catch (const ValidationError&) {
            throw ValidationError(ctx + ".position: unknown position code '" + e.text("position") + "'");
        }
        r.team_id = e.text("team");
        r.cost = e.number("now_cost") / 10.0;
        r.availability = availability_from_status(e.text("status"), ctx);

        const FieldReader s = e.object("stats");
        r.minutes = s.integer("minutes");
        r.goals = s.integer("goals_scored");
        r.assists = s.integer("assists");
        r.saves = s.integer_or("saves", 0);
        r.bonus = s.integer_or("bonus", 0);
        r.yellow_cards = s.integer_or("yellow_cards", 0);
        r.red_cards = s.integer_or("red_cards", 0);
        r.own_goals = s.integer_or("own_goals", 0);
        r.penalties_missed = s.integer_or("penalties_missed", 0);
        r.penalties_saved = s.integer_or("penalties_saved", 0);
        r.goals_conceded = s.integer_or("goals_conceded", 0);
        r.clean_sheet = s.integer_or("clean_sheets", 0) > 0;
        r.influence = s.number_or("influence", 0.0);
        r.creativity = s.number_or("creativity", 0.0);
        r.threat = s.number_or("threat", 0.0);
        r.total_points = s.integer("total_points");

        const FieldReader f = e.object("fixture");
        r.was_home = f.boolean("was_home");
        r.opponent_team_id = f.text("opponent_team");
        validate(r);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<RosterEntry> parse_players_roster(std::string_view payload) {
    const json j = parse_json(payload, "players payload");
    std::vector<RosterEntry> out;
    std::size_t index = 0;
    for (const auto& ej : elements_of(j)) {
        FieldReader e(ej, "elements[" + std::to_string(index++) + "]");
        RosterEntry entry;
        entry.player_id = e.text("id");
        entry.full_name = e.text("first_name") + " " + e.text("second_name");
        if (e.has("web_name")) {
            const auto web = e.text("web_name");
            if (web != e.text("second_name")) entry.aliases.push_back(web);
        }
        out.push_back(std::move(entry));
    }
    return out;
}

std::vector<FixtureOdds> parse_odds_payload(std::string_view payload, int gameweek) {
    const json j = parse_json(payload, "odds payload");
    check_schema_version(j, "odds payload");
    if (auto it = j.find("gameweek"); it != j.end() && (!it->is_number_integer() || it->get<int>() != gameweek)) {
        throw ValidationError("odds payload is for gameweek " + it->dump() + ", expected " + std::to_string(gameweek));
    }
    auto it = j.find("fixtures");
    if (it == j.end() || !it->is_array()) throw FeedError("odds payload has no 'fixtures' list");
    std::vector<FixtureOdds> out;
    std::size_t index = 0;
    for (const auto& fj : *it) {
        const std::string ctx = "fixtures[" + std::to_string(index++) + "]";
        try {
            out.push_back(fixture_odds_from_json(fj));
        } catch (const ValidationError& e) {
            throw ValidationError(ctx + ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError(ctx + ": " + e.what());
        }
    }
    return out;
}

std::string odds_payload(int gameweek, const std::vector<FixtureOdds>& fixtures) {
    json arr = json::array();
    for (const auto& f : fixtures) arr.push_back(to_json(f));
    return json{{"schema_version", kFeedSchemaVersion}, {"gameweek", gameweek}, {"fixtures", std::move(arr)}}.dump() +
           "\n";
}

std::string players_payload(int gameweek, const std::vector<PlayerGameweekRecord>& records,
                            const std::vector<RosterEntry>& roster) {
    std::map<PlayerId, const RosterEntry*> names;
    for (const auto& e : roster) names[e.player_id] = &e;
    json arr = json::array();
    for (const auto& r : records) {
        std::string first, second = r.player_id, web;
        if (auto it = names.find(r.player_id); it != names.end()) {
            const std::string& full = it->second->full_name;
            const auto space = full.rfind(' ');
            first = space == std::string::npos ? std::string() : full.substr(0, space);
            second = space == std::string::npos ? full : full.substr(space + 1);
            if (!it->second->aliases.empty()) web = it->second->aliases.front();
        }
        static constexpr const char* kStatus[] = {"a", "i", "d", "s", "u"};
        arr.push_back({{"id", r.player_id},
                       {"first_name", first},
                       {"second_name", second},
                       {"web_name", web.empty() ? second : web},
                       {"position", std::string(to_string(r.position))},
                       {"team", r.team_id},
                       {"now_cost", static_cast<int>(std::lround(r.cost * 10.0))},
                       {"status", kStatus[static_cast<int>(r.availability)]},
                       {"stats",
                        {{"minutes", r.minutes},
                         {"goals_scored", r.goals},
                         {"assists", r.assists},
                         {"saves", r.saves},
                         {"bonus", r.bonus},
                         {"yellow_cards", r.yellow_cards},
                         {"red_cards", r.red_cards},
                         {"own_goals", r.own_goals},
                         {"penalties_missed", r.penalties_missed},
                         {"penalties_saved", r.penalties_saved},
                         {"goals_conceded", r.goals_conceded},
                         {"clean_sheets", r.clean_sheet ? 1 : 0},
                         {"influence", r.influence},
                         {"creativity", r.creativity},
                         {"threat", r.threat},
                         {"total_points", r.total_points}}},
                       {"fixture", {{"was_home", r.was_home}, {"opponent_team", r.opponent_team_id}}}});
    }
    return json{{"schema_version", kFeedSchemaVersion}, {"gameweek", gameweek}, {"elements", std::move(arr)}}.dump() +
           "\n";
}

std::vector<PlayerGameweekRecord> fetch_players(FeedClient& client, int gameweek) {
    return parse_players_payload(client.fetch_raw(kPlayersEndpoint, gameweek), gameweek);
}

std::vector<FixtureOdds> fetch_fixture_odds(FeedClient& client, int gameweek) {
    return parse_odds_payload(client.fetch_raw(kOddsEndpoint, gameweek), gameweek);
}

// --- documents -----------------------------------------------------------------------

std::vector<SentimentDocument> parse_documents(std::string_view jsonl, std::string_view query_tag) {
    std::vector<SentimentDocument> out;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string ctx = "documents line " + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error&) {
            throw ParseError(ctx + ": not valid JSON");
        }
        FieldReader d(j, ctx);
        if (!query_tag.empty() && d.has("query") && d.text("query") != query_tag) continue;
        SentimentDocument doc;
        doc.doc_id = d.text("doc_id");
        doc.rank = d.integer("rank");
        if (doc.rank < 1) throw ValidationError(ctx + ".rank: must be >= 1");
        doc.title = d.has("title") ? d.text("title") : std::string();
        doc.body = d.text("body");
        if (d.has("published_at") && !d.raw("published_at").is_null()) doc.published_at = d.text("published_at");
        doc.source_url = d.has("source_url") ? d.text("source_url") : std::string();
        out.push_back(std::move(doc));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].rank == out[i - 1].rank) {
            throw ValidationError("duplicate document rank " + std::to_string(out[i].rank));
        }
    }
    return out;
}

std::vector<SentimentDocument> load_documents(const fs::path& path, std::string_view query_tag) {
    return parse_documents(read_file(path), query_tag);
}

}  // namespace squadforge
