#include "squadforge/config.hpp"

#include <cctype>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>

#include "squadforge/errors.hpp"

namespace squadforge {

namespace fs = std::filesystem;

// --- parsing ---------------------------------------------------------------------

namespace {

class LineParser {
public:
    LineParser(std::string_view text, int line) : s_(text), line_(line) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("config line " + std::to_string(line_) + ": " + what);
    }

    void skip_space() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }

    bool at_end() {
        skip_space();
        return pos_ >= s_.size() || s_[pos_] == '#';
    }

    char peek() {
        skip_space();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string key() {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
                                    s_[pos_] == '-' || s_[pos_] == '.')) {
            ++pos_;
        }
        if (start == pos_) fail("expected a key");
        return std::string(s_.substr(start, pos_ - start));
    }

    TomlScalar scalar() {
        const char c = peek();
        if (c == '"') return string();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#' && s_[pos_] != ' ' &&
               s_[pos_] != '\t') {
            ++pos_;
        }
        const std::string word(s_.substr(start, pos_ - start));
        if (word == "true") return true;
        if (word == "false") return false;
        if (word.empty()) fail("missing value");
        const bool is_float = word.find_first_of(".eE") != std::string::npos || word == "inf" || word == "nan";
        try {
            std::size_t used = 0;
            if (is_float) {
                const double v = std::stod(word, &used);
                if (used == word.size()) return v;
            } else {
                const long long v = std::stoll(word, &used);
                if (used == word.size()) return static_cast<std::int64_t>(v);
            }
        } catch (const std::exception&) {
        }
        fail("cannot parse value '" + word + "'");
    }

    TomlValue value() {
        if (peek() != '[') {
            TomlScalar v = scalar();
            return std::visit([](auto&& x) -> TomlValue { return x; }, v);
        }
        ++pos_;
        std::vector<TomlScalar> items;
        if (peek() == ']') {
            ++pos_;
            return items;
        }
        for (;;) {
            items.push_back(scalar());
            const char c = peek();
            ++pos_;
            if (c == ']') break;
            if (c != ',') fail("expected ',' or ']' in array");
            if (peek() == ']') {
                ++pos_;
                break;
            }
        }
        return items;
    }

private:
    std::string string() {
        ++pos_;  // opening quote
        std::string out;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            char c = s_[pos_++];
            if (c == '\\') {
                if (pos_ >= s_.size()) fail("unterminated escape");
                const char e = s_[pos_++];
                switch (e) {
                    case 'n': c = '\n'; break;
                    case 't': c = '\t'; break;
                    case '"': c = '"'; break;
                    case '\\': c = '\\'; break;
                    default: fail(std::string("unknown escape \\") + e);
                }
            }
            out += c;
        }
        if (pos_ >= s_.size()) fail("unterminated string");
        ++pos_;
        return out;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    int line_;
};

}  // namespace

TomlTable parse_toml(std::string_view text) {
    TomlTable table;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        LineParser p(raw, line_no);
        if (p.at_end()) continue;
        if (p.peek() == '[') {
            p.expect('[');
            section = p.key();
            p.expect(']');
            if (!p.at_end()) p.fail("unexpected text after section header");
            continue;
        }
        const std::string key = p.key();
        p.expect('=');
        TomlValue v = p.value();
        if (!p.at_end()) p.fail("unexpected text after value");
        const std::string full = section.empty() ? key : section + "." + key;
        if (!table.emplace(full, std::move(v)).second) p.fail("duplicate key '" + full + "'");
    }
    return table;
}

// --- typed config ----------------------------------------------------------------

std::vector<GbmParams> Config::grid() const {
    std::vector<GbmParams> out;
    for (int n : grid_n_trees) {
        for (int d : grid_max_depth) {
            for (double lr : grid_learning_rate) {
                GbmParams p = gbm;
                p.n_trees = n;
                p.max_depth = d;
                p.learning_rate = lr;
                out.push_back(p);
            }
        }
    }
    return out;
}

namespace {

struct Reader {
    const TomlTable& table;
    fs::path base_dir;

    [[noreturn]] static void wrong(const std::string& key, const char* expected) {
        throw ConfigError(key + ": expected " + expected);
    }

    std::string text(const std::string& key, const TomlValue& v) const {
        if (const auto* s = std::get_if<std::string>(&v)) return *s;
        wrong(key, "a string");
    }
    std::int64_t integer(const std::string& key, const TomlValue& v) const {
        if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
        wrong(key, "an integer");
    }
    int small_int(const std::string& key, const TomlValue& v) const {
        const auto i = integer(key, v);
        if (i < -1'000'000'000 || i > 1'000'000'000) wrong(key, "a smaller integer");
        return static_cast<int>(i);
    }
    double number(const std::string& key, const TomlValue& v) const {
        if (const auto* d = std::get_if<double>(&v)) return *d;
        if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
        wrong(key, "a number");
    }
    bool boolean(const std::string& key, const TomlValue& v) const {
        if (const auto* b = std::get_if<bool>(&v)) return *b;
        wrong(key, "true or false");
    }
    fs::path path(const std::string& key, const TomlValue& v) const {
        fs::path p = text(key, v);
        return (p.is_relative() ? base_dir / p : p).lexically_normal();
    }
    const std::vector<TomlScalar>& array(const std::string& key, const TomlValue& v) const {
        if (const auto* a = std::get_if<std::vector<TomlScalar>>(&v)) return *a;
        wrong(key, "an array");
    }
    std::vector<int> int_array(const std::string& key, const TomlValue& v) const {
        std::vector<int> out;
        for (const auto& s : array(key, v)) {
            const auto* i = std::get_if<std::int64_t>(&s);
            if (!i) wrong(key, "an array of integers");
            out.push_back(static_cast<int>(*i));
        }
        return out;
    }
    std::vector<double> number_array(const std::string& key, const TomlValue& v) const {
        std::vector<double> out;
        for (const auto& s : array(key, v)) {
            if (const auto* d = std::get_if<double>(&s)) {
                out.push_back(*d);
            } else if (const auto* i = std::get_if<std::int64_t>(&s)) {
                out.push_back(static_cast<double>(*i));
            } else {
                wrong(key, "an array of numbers");
            }
        }
        return out;
    }
    std::vector<std::string> string_array(const std::string& key, const TomlValue& v) const {
        std::vector<std::string> out;
        for (const auto& s : array(key, v)) {
            const auto* str = std::get_if<std::string>(&s);
            if (!str) wrong(key, "an array of strings");
            out.push_back(*str);
        }
        return out;
    }
};

using Handler = std::function<void(Config&, const Reader&, const std::string&, const TomlValue&)>;

void feed_handlers(std::map<std::string, Handler>& h, const std::string& prefix, FeedSource Config::*member,
                   std::map<std::string, std::string>& token_envs) {
    h[prefix + ".kind"] = [member](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        const auto kind = r.text(k, v);
        if (kind == "file") {
            (c.*member).kind = SourceKind::File;
        } else if (kind == "http") {
            (c.*member).kind = SourceKind::Http;
        } else {
            throw ConfigError(k + ": expected \"file\" or \"http\"");
        }
    };
    h[prefix + ".location"] = [member](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        const auto loc = r.text(k, v);
        (c.*member).location = loc.rfind("http://", 0) == 0 || loc.rfind("https://", 0) == 0
                                   ? loc
                                   : r.path(k, v).string();
    };
    h[prefix + ".cache_dir"] = [member](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        (c.*member).cache_dir = r.path(k, v);
    };
    h[prefix + ".rate_limit"] = [member](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        (c.*member).rate_limit = r.small_int(k, v);
    };
    h[prefix + ".timeout"] = [member](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        (c.*member).timeout = r.small_int(k, v);
    };
    h[prefix + ".revalidate"] = [member](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        (c.*member).revalidate = r.boolean(k, v);
    };
    h[prefix + ".token_env"] = [&token_envs, prefix](Config&, const Reader& r, const std::string& k,
                                                      const TomlValue& v) { token_envs[prefix] = r.text(k, v); };
}

void check_feed(const FeedSource& f, const std::string& name) {
    if (f.rate_limit < 1) throw ConfigError(name + ".rate_limit must be >= 1");
    if (f.timeout < 1) throw ConfigError(name + ".timeout must be >= 1");
    if (f.kind == SourceKind::Http && f.location.rfind("http://", 0) != 0) {
        throw ConfigError(name + ".location must be an http:// URL for kind \"http\"");
    }
}

}  // namespace

Config config_from_toml(const TomlTable& table, const fs::path& base_dir) {
    Config c;
    std::map<std::string, std::string> token_envs;
    std::map<std::string, Handler> h;
    h["data_dir"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) { c.data_dir = r.path(k, v); };
    h["seed"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        const auto s = r.integer(k, v);
        if (s < 0) throw ConfigError("seed must be >= 0");
        c.seed = static_cast<std::uint64_t>(s);
    };
    feed_handlers(h, "feeds.players", &Config::players_feed, token_envs);
    feed_handlers(h, "feeds.odds", &Config::odds_feed, token_envs);
    h["sentiment.lexicon"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) { c.lexicon = r.path(k, v); };
    h["sentiment.negations"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) { c.negations = r.path(k, v); };
    h["sentiment.aliases"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) { c.aliases = r.path(k, v); };
    h["sentiment.documents_dir"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        c.documents_dir = r.path(k, v);
    };
    h["sentiment.query"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) { c.query_tag = r.text(k, v); };
    h["sentiment.max_documents"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        c.max_documents = r.small_int(k, v);
    };
    h["gbm.n_trees"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) { c.gbm.n_trees = r.small_int(k, v); };
    h["gbm.learning_rate"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        c.gbm.learning_rate = r.number(k, v);
    };
    h["gbm.max_depth"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) { c.gbm.max_depth = r.small_int(k, v); };
    h["gbm.min_samples_leaf"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        c.gbm.min_samples_leaf = r.small_int(k, v);
    };
    h["gbm.positive_class_weight"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        if (const auto* s = std::get_if<std::string>(&v)) {
            if (*s != "auto") throw ConfigError(k + ": expected a number or \"auto\"");
            c.gbm.positive_class_weight.reset();
        } else {
            c.gbm.positive_class_weight = r.number(k, v);
        }
    };
    h["gbm.subsample"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) { c.gbm.subsample = r.number(k, v); };
    h["gbm.sweep"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) { c.sweep = r.boolean(k, v); };
    h["gbm.k_folds"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) { c.k_folds = r.small_int(k, v); };
    h["gbm.grid_n_trees"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        c.grid_n_trees = r.int_array(k, v);
    };
    h["gbm.grid_max_depth"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        c.grid_max_depth = r.int_array(k, v);
    };
    h["gbm.grid_learning_rate"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        c.grid_learning_rate = r.number_array(k, v);
    };
    h["selector.club_cap"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        c.selection.club_cap_enabled = r.boolean(k, v);
    };
    h["selector.club_cap_size"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        c.selection.club_cap = r.small_int(k, v);
    };
    h["selector.budget"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        c.selection.budget_enabled = r.boolean(k, v);
    };
    h["selector.budget_value"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        c.selection.budget = r.number(k, v);
    };
    h["backtest.from"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) { c.backtest_from = r.small_int(k, v); };
    h["backtest.to"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) { c.backtest_to = r.small_int(k, v); };
    h["backtest.configurations"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        c.backtest_configs.clear();
        for (const auto& s : r.string_array(k, v)) c.backtest_configs.push_back(parse_streams(s));
        if (c.backtest_configs.empty()) throw ConfigError(k + ": needs at least one configuration");
    };
    h["backtest.precision_threshold"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        c.precision_threshold = r.number(k, v);
    };
    h["backtest.scoring"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) { c.scoring = r.text(k, v); };
    h["backtest.reference_targets"] = [](Config& c, const Reader& r, const std::string& k, const TomlValue& v) {
        c.reference_targets = r.boolean(k, v);
    };

    const Reader reader{table, base_dir};
    for (const auto& [key, value] : table) {
        const auto it = h.find(key);
        if (it == h.end()) throw ConfigError("unknown config key '" + key + "'");
        it->second(c, reader, key, value);
    }
    for (const auto& [prefix, var] : token_envs) {
        const char* token = std::getenv(var.c_str());
        if (!token) throw ConfigError(prefix + ".token_env: environment variable " + var + " is not set");
        (prefix == "feeds.players" ? c.players_feed : c.odds_feed).token = token;
    }
    c.gbm.seed = c.seed;
    return c;
}

namespace {

// Re-raises validation failures of nested parameter structs as config errors.
template <typename F>
void as_config_error(const char* section, F&& check) {
    try {
        check();
    } catch (const ValidationError& e) {
        throw ConfigError(std::string(section) + ": " + e.what());
    }
}

void finalize(Config& c) {
    for (FeedSource* f : {&c.players_feed, &c.odds_feed}) {
        if (f->location.empty()) f->location = (c.data_dir / "feeds").string();
        if (f->cache_dir.empty()) f->cache_dir = c.data_dir / "cache";
    }
    check_feed(c.players_feed, "feeds.players");
    check_feed(c.odds_feed, "feeds.odds");
    if (c.documents_dir.empty()) c.documents_dir = c.data_dir / "documents";
    if (c.lexicon.empty()) c.lexicon = c.data_dir / "lexicon.tsv";
    if (c.negations.empty()) c.negations = c.data_dir / "negations.txt";
    if (c.max_documents < 1 || c.max_documents > kMaxDocuments) {
        throw ConfigError("sentiment.max_documents must be within 1.." + std::to_string(kMaxDocuments));
    }
    as_config_error("gbm", [&] { c.gbm.validate(); });
    if (c.k_folds < 2) throw ConfigError("gbm.k_folds must be >= 2");
    if (c.grid_n_trees.empty() || c.grid_max_depth.empty() || c.grid_learning_rate.empty()) {
        throw ConfigError("gbm grid lists must not be empty");
    }
    as_config_error("gbm grid", [&] {
        for (const auto& p : c.grid()) p.validate();
    });
    as_config_error("selector", [&] { c.selection.validate(); });
    if (c.backtest_from < 3) throw ConfigError("backtest.from must be >= 3");
    if (c.backtest_to < c.backtest_from || c.backtest_to > 38) {
        throw ConfigError("backtest.to must be within backtest.from..38");
    }
    if (!(c.precision_threshold > 0.0 && c.precision_threshold < 1.0)) {
        throw ConfigError("backtest.precision_threshold must be within (0, 1)");
    }
    scoring_table(c.scoring);
}

}  // namespace

Config load_config(const fs::path& path) {
    Config c;
    if (!path.empty()) {
        if (!fs::exists(path)) throw ConfigError("config file " + path.string() + " does not exist");
        c = config_from_toml(parse_toml(read_file(path)), path.parent_path());
    }
    if (const char* dir = std::getenv("SQUADFORGE_DATA_DIR"); dir && *dir) c.data_dir = dir;
    finalize(c);
    return c;
}

}  // namespace squadforge
