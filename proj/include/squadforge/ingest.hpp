#pragma once

#include <chrono>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "squadforge/domain.hpp"
#include "squadforge/odds.hpp"
#include "squadforge/sentiment.hpp"

namespace squadforge {

inline constexpr int kFeedSchemaVersion = 1;

// --- time ----------------------------------------------------------------------

class Clock {
public:
    virtual ~Clock() = default;
    virtual std::chrono::steady_clock::time_point now() = 0;
    virtual void sleep_for(std::chrono::milliseconds duration) = 0;
};

class SystemClock final : public Clock {
public:
    std::chrono::steady_clock::time_point now() override;
    void sleep_for(std::chrono::milliseconds duration) override;
};

// Advances only when slept on. Used by tests to check rate limits and backoff.
class FakeClock final : public Clock {
public:
    std::chrono::steady_clock::time_point now() override { return now_; }
    void sleep_for(std::chrono::milliseconds duration) override {
        now_ += duration;
        slept_ += duration;
    }
    std::chrono::milliseconds total_slept() const { return slept_; }

private:
    std::chrono::steady_clock::time_point now_{};
    std::chrono::milliseconds slept_{0};
};

// Sliding 60-second window: at most max_per_minute acquisitions per window.
class RateLimiter {
public:
    RateLimiter(int max_per_minute, Clock& clock);

    // Blocks (via the clock) until a request may be issued, then records it.
    void acquire();

private:
    int max_per_minute_;
    Clock& clock_;
    std::deque<std::chrono::steady_clock::time_point> issued_;
    std::mutex mutex_;
};

// --- transport -------------------------------------------------------------------

struct HttpResponse {
    int status = 0;
    std::string body;
    std::map<std::string, std::string> headers;  // lowercase names
};

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    // Throws NetworkError on connection failures and timeouts.
    virtual HttpResponse get(const std::string& url, const std::map<std::string, std::string>& headers,
                             std::chrono::seconds timeout) = 0;
};

// cpp-httplib backed transport (plain http).
std::unique_ptr<HttpTransport> make_http_transport();

// --- cache -----------------------------------------------------------------------

struct CacheEntry {
    std::string body;
    std::string validator;  // ETag or Last-Modified, may be empty
};

// Raw responses keyed by (source location, endpoint path, gameweek). Files
// are named by the sha256 of the key; writes are atomic and serialized.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path directory);

    static std::string key(std::string_view location, std::string_view endpoint, int gameweek);

    std::optional<CacheEntry> load(const std::string& key) const;
    void store(const std::string& key, const CacheEntry& entry);
    std::size_t size() const;

private:
    std::filesystem::path directory_;
    mutable std::mutex mutex_;
};

// --- sources ---------------------------------------------------------------------

enum class SourceKind { Http, File };

struct FeedSource {
    SourceKind kind = SourceKind::File;
    std::string location;  // base URL or directory
    std::filesystem::path cache_dir;
    int rate_limit = 60;   // requests per minute
    int timeout = 30;      // seconds
    std::string token;     // sent as "Authorization: Bearer <token>" when set
    bool revalidate = false;  // conditional GET on cache hits instead of offline reuse
};

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};
};

// Fetches and caches raw feed payloads. HTTP endpoints:
//   GET <location>/event/<gw>/players   GET <location>/fixtures/<gw>/odds
// File mode reads <location>/players_gw<NN>.json and odds_gw<NN>.json.
class FeedClient {
public:
    FeedClient(FeedSource source, std::shared_ptr<HttpTransport> transport = nullptr,
               std::shared_ptr<Clock> clock = nullptr, RetryPolicy retry = {});

    std::string fetch_raw(std::string_view endpoint, int gameweek);

    std::size_t network_requests() const { return network_requests_; }
    const FeedSource& source() const { return source_; }

private:
    FeedSource source_;
    std::shared_ptr<HttpTransport> transport_;
    std::shared_ptr<Clock> clock_;
    RetryPolicy retry_;
    std::optional<ResponseCache> cache_;
    std::optional<RateLimiter> limiter_;
    std::size_t network_requests_ = 0;
};

inline constexpr const char* kPlayersEndpoint = "players";
inline constexpr const char* kOddsEndpoint = "odds";

std::vector<PlayerGameweekRecord> parse_players_payload(std::string_view payload, int gameweek);
std::vector<RosterEntry> parse_players_roster(std::string_view payload);
std::vector<FixtureOdds> parse_odds_payload(std::string_view payload, int gameweek);
std::string odds_payload(int gameweek, const std::vector<FixtureOdds>& fixtures);
// Inverse of parse_players_payload; names come from the roster when present.
std::string players_payload(int gameweek, const std::vector<PlayerGameweekRecord>& records,
                            const std::vector<RosterEntry>& roster = {});

std::vector<PlayerGameweekRecord> fetch_players(FeedClient& client, int gameweek);
std::vector<FixtureOdds> fetch_fixture_odds(FeedClient& client, int gameweek);

// JSONL, one document per line. Lines whose "query" differs from a non-empty
// query_tag are skipped. Result sorted by rank; duplicate ranks rejected.
std::vector<SentimentDocument> load_documents(const std::filesystem::path& path, std::string_view query_tag = {});
std::vector<SentimentDocument> parse_documents(std::string_view jsonl, std::string_view query_tag = {});

}  // namespace squadforge
