#include "squadforge/sentiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "squadforge/errors.hpp"

namespace squadforge {

using nlohmann::json;

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

std::vector<std::string> split_words(std::string_view text, bool keep_apostrophes) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        while (!current.empty() && current.back() == '\'') current.pop_back();
        if (!current.empty()) out.push_back(std::move(current));
        current.clear();
    };
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_word_byte(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (keep_apostrophes && c == '\'' && !current.empty()) {
            current.push_back('\'');
        } else {
            flush();
        }
    }
    flush();
    return out;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) { return split_words(text, true); }

Lexicon parse_lexicon(std::string_view tsv, std::string_view negations) {
    Lexicon lex;
    std::istringstream in{std::string(tsv)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto tab = t.find('\t');
        if (tab == std::string::npos) {
            throw ParseError("lexicon line " + std::to_string(line_no) + ": expected token<TAB>valence");
        }
        const std::string token = trim(t.substr(0, tab));
        double value = 0.0;
        try {
            std::size_t used = 0;
            const std::string num = trim(t.substr(tab + 1));
            value = std::stod(num, &used);
            if (used != num.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ParseError("lexicon line " + std::to_string(line_no) + ": bad valence");
        }
        if (!(value >= -1.0 && value <= 1.0)) {
            throw ValidationError("lexicon line " + std::to_string(line_no) + ": valence outside [-1, 1]");
        }
        auto words = tokenize(token);
        if (words.size() != 1) {
            throw ParseError("lexicon line " + std::to_string(line_no) + ": token must be a single word");
        }
        lex.valence[words.front()] = value;
    }
    std::istringstream neg{std::string(negations)};
    while (std::getline(neg, line)) {
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        for (auto& w : tokenize(t)) lex.negations.insert(std::move(w));
    }
    return lex;
}

Lexicon load_lexicon(const std::filesystem::path& tsv, const std::filesystem::path& negations) {
    return parse_lexicon(read_file(tsv), negations.empty() ? std::string() : read_file(negations));
}

double score_document(std::string_view body, const Lexicon& lexicon) {
    if (lexicon.valence.empty()) throw ConfigError("sentiment lexicon is empty");
    const auto tokens = tokenize(body);
    double sum = 0.0;
    int matched = 0;
    bool negate_next = false;
    for (const auto& token : tokens) {
        const bool negate = negate_next;
        negate_next = false;
        if (auto it = lexicon.valence.find(token); it != lexicon.valence.end()) {
            sum += negate ? -it->second : it->second;
            ++matched;
        } else if (lexicon.negations.count(token) != 0) {
            negate_next = true;
        }
    }
    if (matched == 0) return 0.0;
    return std::clamp(sum / matched, -1.0, 1.0);
}

// --- roster / names ----------------------------------------------------------

std::vector<RosterEntry> parse_roster(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("alias table is not valid JSON: ") + e.what());
    }
    const json& players = j.is_object() ? j.at("players") : j;
    if (!players.is_array()) throw ParseError("alias table must be an array of players");
    std::vector<RosterEntry> out;
    for (const auto& p : players) {
        RosterEntry e;
        try {
            e.player_id = p.at("player_id").get<std::string>();
            e.full_name = p.at("full_name").get<std::string>();
            if (auto it = p.find("aliases"); it != p.end()) {
                e.aliases = it->get<std::vector<std::string>>();
            }
        } catch (const json::exception& ex) {
            throw ParseError(std::string("malformed alias entry: ") + ex.what());
        }
        if (tokenize(e.full_name).empty()) {
            throw ValidationError("roster entry " + e.player_id + " has an empty name");
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<RosterEntry> load_roster(const std::filesystem::path& aliases_json) {
    return parse_roster(read_file(aliases_json));
}

NameIndex::NameIndex(std::span<const RosterEntry> roster) {
    auto add = [&](std::string_view phrase, const PlayerId& id) {
        auto words = split_words(phrase, false);
        if (words.empty()) return;
        longest_ = std::max(longest_, words.size());
        phrases_[std::move(words)].insert(id);
    };
    for (const auto& e : roster) {
        add(e.full_name, e.player_id);
        const auto words = split_words(e.full_name, false);
        if (words.size() > 1) add(words.back(), e.player_id);
        for (const auto& alias : e.aliases) add(alias, e.player_id);
    }
}

std::set<PlayerId> NameIndex::match(std::string_view text) const {
    std::set<PlayerId> out;
    const auto words = split_words(text, false);
    std::vector<std::string> window;
    for (std::size_t i = 0; i < words.size(); ++i) {
        window.clear();
        for (std::size_t len = 1; len <= longest_ && i + len <= words.size(); ++len) {
            window.push_back(words[i + len - 1]);
            auto it = phrases_.find(window);
            if (it != phrases_.end() && it->second.size() == 1) out.insert(*it->second.begin());
        }
    }
    return out;
}

std::set<PlayerId> NameIndex::match(const SentimentDocument& doc) const {
    auto out = match(doc.title);
    out.merge(match(doc.body));
    return out;
}

std::set<PlayerId> match_players(const SentimentDocument& doc, std::span<const RosterEntry> roster) {
    return NameIndex(roster).match(doc);
}

// --- aggregation -------------------------------------------------------------

namespace {

std::vector<const SentimentDocument*> considered_documents(std::span<const SentimentDocument> docs,
                                                           int cap) {
    if (cap < 1 || cap > kMaxDocuments) {
        throw ConfigError("document cap must be within 1.." + std::to_string(kMaxDocuments));
    }
    for (std::size_t i = 1; i < docs.size(); ++i) {
        if (docs[i].rank < docs[i - 1].rank) {
            throw PreconditionError("documents must be sorted by rank ascending");
        }
    }
    std::vector<const SentimentDocument*> ordered;
    ordered.reserve(docs.size());
    for (const auto& d : docs) ordered.push_back(&d);
    std::stable_sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
        return a->rank != b->rank ? a->rank < b->rank : a->doc_id < b->doc_id;
    });
    if (ordered.size() > static_cast<std::size_t>(cap)) ordered.resize(static_cast<std::size_t>(cap));
    return ordered;
}

}  // namespace

PlayerSentiment aggregate(std::span<const SentimentDocument> docs, const PlayerId& player_id,
                          const NameIndex& names, const Lexicon& lexicon, int cap,
                          const DocumentProbe& probe) {
    const auto considered = considered_documents(docs, cap);
    PlayerSentiment out;
    out.player_id = player_id;
    out.documents_considered = static_cast<int>(considered.size());
    double sum = 0.0;
    for (const auto* doc : considered) {
        if (probe) probe(*doc);
        if (names.match(*doc).count(player_id) == 0) continue;
        sum += score_document(doc->body, lexicon);
        ++out.mention_count;
    }
    if (out.mention_count > 0) out.mean_polarity = std::clamp(sum / out.mention_count, -1.0, 1.0);
    return out;
}

std::map<PlayerId, PlayerSentiment> aggregate_all(std::span<const SentimentDocument> docs,
                                                  std::span<const RosterEntry> roster,
                                                  const NameIndex& names, const Lexicon& lexicon,
                                                  int cap) {
    const auto considered = considered_documents(docs, cap);
    std::map<PlayerId, std::pair<double, int>> sums;
    for (const auto* doc : considered) {
        const auto matched = names.match(*doc);
        if (matched.empty()) continue;
        const double score = score_document(doc->body, lexicon);
        for (const auto& id : matched) {
            auto& [sum, count] = sums[id];
            sum += score;
            ++count;
        }
    }
    std::map<PlayerId, PlayerSentiment> out;
    for (const auto& e : roster) {
        PlayerSentiment s;
        s.player_id = e.player_id;
        s.documents_considered = static_cast<int>(considered.size());
        if (auto it = sums.find(e.player_id); it != sums.end()) {
            s.mention_count = it->second.second;
            s.mean_polarity = std::clamp(it->second.first / s.mention_count, -1.0, 1.0);
        }
        out.emplace(e.player_id, s);
    }
    return out;
}

}  // namespace squadforge
