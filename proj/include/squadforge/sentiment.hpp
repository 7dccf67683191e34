#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "squadforge/domain.hpp"

namespace squadforge {

struct SentimentDocument {
    std::string doc_id;
    int rank = 1;
    std::string title;
    std::string body;
    std::optional<std::string> published_at;
    std::string source_url;

    bool operator==(const SentimentDocument&) const = default;
};

struct Lexicon {
    std::unordered_map<std::string, double> valence;  // token -> [-1, 1]
    std::unordered_set<std::string> negations;
};

// TSV "token<TAB>valence" plus a negation list with one token per line.
Lexicon load_lexicon(const std::filesystem::path& tsv, const std::filesystem::path& negations);
Lexicon parse_lexicon(std::string_view tsv, std::string_view negations);

// Lowercased word tokens; apostrophes inside words are kept ("don't").
std::vector<std::string> tokenize(std::string_view text);

// Mean valence of lexicon tokens; a negation marker flips the sign of the
// token immediately after it. No matches -> 0. Empty lexicon -> ConfigError.
double score_document(std::string_view body, const Lexicon& lexicon);

struct RosterEntry {
    PlayerId player_id;
    std::string full_name;
    std::vector<std::string> aliases;
};

std::vector<RosterEntry> load_roster(const std::filesystem::path& aliases_json);
std::vector<RosterEntry> parse_roster(std::string_view aliases_json);

// Phrase table over the roster. Full names, surnames and aliases are indexed
// as lowercase token sequences; a phrase claimed by two or more players is
// ambiguous and never matches on its own.
class NameIndex {
public:
    explicit NameIndex(std::span<const RosterEntry> roster);

    std::set<PlayerId> match(std::string_view text) const;
    std::set<PlayerId> match(const SentimentDocument& doc) const;

private:
    std::map<std::vector<std::string>, std::set<PlayerId>> phrases_;
    std::size_t longest_ = 0;
};

std::set<PlayerId> match_players(const SentimentDocument& doc, std::span<const RosterEntry> roster);

struct PlayerSentiment {
    PlayerId player_id;
    double mean_polarity = 0.0;
    int mention_count = 0;
    int documents_considered = 0;

    bool operator==(const PlayerSentiment&) const = default;
};

inline constexpr int kMaxDocuments = 100;

// Called once for every document inside the cap.
using DocumentProbe = std::function<void(const SentimentDocument&)>;

// Considers the first min(cap, docs.size()) documents by rank (equal ranks
// ordered by doc_id). Throws PreconditionError when docs are not sorted by
// rank and ConfigError when cap is outside 1..100.
PlayerSentiment aggregate(std::span<const SentimentDocument> docs, const PlayerId& player_id,
                          const NameIndex& names, const Lexicon& lexicon,
                          int cap = kMaxDocuments, const DocumentProbe& probe = {});

// Same result as aggregate() for every roster player, in one pass over docs.
std::map<PlayerId, PlayerSentiment> aggregate_all(std::span<const SentimentDocument> docs,
                                                  std::span<const RosterEntry> roster,
                                                  const NameIndex& names, const Lexicon& lexicon,
                                                  int cap = kMaxDocuments);

}  // namespace squadforge
