#include "squadforge/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>

#include <nlohmann/json.hpp>

#include "squadforge/backtest.hpp"
#include "squadforge/errors.hpp"
#include "squadforge/ingest.hpp"

namespace squadforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<const char*, 12> kPositive = {"sharp",    "brilliant", "confident", "excellent",
                                                   "strong",   "superb",    "fit",       "impressive",
                                                   "clinical", "energetic", "dominant",  "lively"};
constexpr std::array<const char*, 12> kNegative = {"tired",    "poor",     "struggling", "sluggish",
                                                   "weak",     "doubtful", "wasteful",   "injured",
                                                   "careless", "frustrated", "jaded",    "slow"};
constexpr std::array<const char*, 8> kFiller = {"the",  "coach", "said", "training", "this",
                                                "week", "looks", "ahead"};
constexpr std::array<const char*, 20> kFirst = {"Alex", "Ben",  "Carl", "Dan",  "Eli",  "Finn", "Gus",
                                                "Hugo", "Ivan", "Jon",  "Kai",  "Leo",  "Max",  "Ned",
                                                "Otto", "Pau",  "Rui",  "Sam",  "Tom",  "Vic"};
constexpr std::array<const char*, 15> kSyllableA = {"Mar", "Bel", "Cor", "Dal", "Fen", "Gal", "Hol", "Kes",
                                                    "Lun", "Mor", "Nor", "Pel", "Ras", "Sul", "Tor"};
constexpr std::array<const char*, 12> kSyllableB = {"ton", "vik", "dez", "ski", "ley", "ani",
                                                    "ero", "gen", "lin", "ford", "sen", "ard"};

// Per team: 2 GK, 3 DEF, 3 MID, 2 FWD.
constexpr std::array<Position, 10> kSquad = {Position::GK,  Position::GK,  Position::DEF, Position::DEF,
                                             Position::DEF, Position::MID, Position::MID, Position::MID,
                                             Position::FWD, Position::FWD};

struct Player {
    PlayerId id;
    TeamId team;
    int team_index = 0;
    Position position = Position::GK;
    double quality = 0.0;
    double cost = 0.0;
    bool starter = true;  // second goalkeepers only play when the first is out
};

std::string two_digit(int v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d", v);
    return buf;
}

int poisson(std::mt19937_64& rng, double lambda) { return std::poisson_distribution<int>(lambda)(rng); }

double normal(std::mt19937_64& rng, double sd) { return std::normal_distribution<double>(0.0, sd)(rng); }

double uniform(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Index drawn with probability proportional to weights.
std::size_t pick(std::mt19937_64& rng, const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform(rng) * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (u < weights[i]) return i;
        u -= weights[i];
    }
    return weights.size() - 1;
}

double poisson_pmf(int k, double lambda) { return std::exp(k * std::log(lambda) - lambda - std::lgamma(k + 1.0)); }

// Decimal prices with a bookmaker margin, rounded to two decimals.
double price(double probability, double margin) {
    const double p = std::clamp(probability * (1.0 + margin), 0.01, 0.98);
    return std::max(1.01, std::round(100.0 / p) / 100.0);
}

FixtureOdds price_fixture(const std::string& id, const TeamId& home, const TeamId& away, double lh, double la) {
    double p_home = 0.0, p_draw = 0.0, p_away = 0.0, p_under = 0.0;
    for (int i = 0; i <= 12; ++i) {
        for (int j = 0; j <= 12; ++j) {
            const double p = poisson_pmf(i, lh) * poisson_pmf(j, la);
            if (i > j) p_home += p;
            if (i == j) p_draw += p;
            if (i < j) p_away += p;
            if (i + j <= 2) p_under += p;
        }
    }
    FixtureOdds f;
    f.fixture_id = id;
    f.home_team_id = home;
    f.away_team_id = away;
    const double margin = 0.06;
    f.markets[kMatchOddsMarket] = {{"home", price(p_home, margin)},
                                   {"draw", price(p_draw, margin)},
                                   {"away", price(p_away, margin)}};
    f.markets[kOverUnderMarket] = {{"over", price(1.0 - p_under, margin)}, {"under", price(p_under, margin)}};
    return f;
}

// Circle-method round robin: round r pairs for an even number of teams.
std::vector<std::pair<int, int>> round_pairs(int teams, int round) {
    std::vector<int> order(static_cast<std::size_t>(teams));
    order[0] = 0;
    for (int i = 1; i < teams; ++i) order[static_cast<std::size_t>(i)] = 1 + (i - 1 + round) % (teams - 1);
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < teams / 2; ++i) {
        int a = order[static_cast<std::size_t>(i)];
        int b = order[static_cast<std::size_t>(teams - 1 - i)];
        if ((round + i) % 2 == 1) std::swap(a, b);
        out.emplace_back(a, b);
    }
    return out;
}

std::string describe(std::mt19937_64& rng, double form, const std::string& name) {
    // Share of positive words tracks the form shock.
    const double p_positive = 1.0 / (1.0 + std::exp(-1.8 * form));
    std::string text = name;
    const int words = 3 + static_cast<int>(rng() % 3);
    for (int w = 0; w < words; ++w) {
        text += std::string(" ") + kFiller[rng() % kFiller.size()];
        const bool positive = uniform(rng) < p_positive;
        if (uniform(rng) < 0.15) {
            // negated opposite word carries the same sign
            text += std::string(" not ") + (positive ? kNegative : kPositive)[rng() % 12];
        } else {
            text += std::string(" ") + (positive ? kPositive : kNegative)[rng() % 12];
        }
    }
    return text + ".";
}

}  // namespace

SyntheticSeason generate_season(const SyntheticOptions& o) {
    if (o.teams < 2 || o.teams % 2 != 0) throw ConfigError("synthetic league needs an even number of teams >= 2");
    if (o.gameweeks < 1 || o.gameweeks > 38) throw ConfigError("synthetic season length must be 1..38");
    std::mt19937_64 rng(o.seed);
    SyntheticSeason season;

    std::vector<double> team_quality;
    std::vector<TeamId> team_ids;
    for (int t = 0; t < o.teams; ++t) {
        team_ids.push_back("T" + std::to_string(t + 1));
        team_quality.push_back(normal(rng, 0.3));
    }

    std::vector<Player> players;
    std::vector<std::string> used_surnames;
    for (int t = 0; t < o.teams; ++t) {
        for (std::size_t k = 0; k < kSquad.size(); ++k) {
            Player p;
            p.id = "p" + std::string(players.size() < 99 ? "0" : "") + two_digit(static_cast<int>(players.size()) + 1);
            p.team = team_ids[static_cast<std::size_t>(t)];
            p.team_index = t;
            p.position = kSquad[k];
            p.quality = normal(rng, 0.5);
            p.starter = !(k == 1);
            static constexpr double kBaseCost[] = {4.5, 5.0, 6.5, 7.5};
            p.cost = std::clamp(std::round((kBaseCost[static_cast<int>(p.position)] + 1.5 * p.quality +
                                            team_quality[static_cast<std::size_t>(t)]) * 2.0) / 2.0,
                                4.0, 13.0);
            std::string surname;
            do {
                surname = std::string(kSyllableA[rng() % kSyllableA.size()]) + kSyllableB[rng() % kSyllableB.size()];
            } while (std::find(used_surnames.begin(), used_surnames.end(), surname) != used_surnames.end());
            used_surnames.push_back(surname);
            RosterEntry entry{p.id, std::string(kFirst[rng() % kFirst.size()]) + " " + surname, {}};
            if (rng() % 4 == 0) entry.aliases.push_back(surname.substr(0, 3) + "o");
            season.roster.push_back(entry);
            players.push_back(p);
        }
    }

    std::string lexicon = "# token\tvalence\n";
    for (const char* w : kPositive) lexicon += std::string(w) + "\t0.8\n";
    for (const char* w : kNegative) lexicon += std::string(w) + "\t-0.8\n";
    season.lexicon_tsv = lexicon;
    season.negations_txt = "not\nnever\nno\n";

    for (int g = 1; g <= o.gameweeks; ++g) {
        std::vector<double> shock;
        for (int t = 0; t < o.teams; ++t) shock.push_back(normal(rng, o.team_shock));
        std::vector<double> form;
        std::vector<bool> injured;
        for (std::size_t i = 0; i < players.size(); ++i) {
            form.push_back(normal(rng, o.form_shock));
            injured.push_back(uniform(rng) < 0.03);
        }

        std::vector<PlayerGameweekRecord> records;
        std::vector<FixtureOdds> fixtures;
        const auto pairs = round_pairs(o.teams, (g - 1) % (o.teams - 1));
        for (std::size_t m = 0; m < pairs.size(); ++m) {
            const auto [h, a] = pairs[m];
            const double rh = team_quality[static_cast<std::size_t>(h)] + shock[static_cast<std::size_t>(h)];
            const double ra = team_quality[static_cast<std::size_t>(a)] + shock[static_cast<std::size_t>(a)];
            const double lh = std::exp(0.35 + 0.6 * (rh - ra));
            const double la = std::exp(0.2 + 0.6 * (ra - rh));
            fixtures.push_back(price_fixture("gw" + two_digit(g) + "-m" + std::to_string(m + 1),
                                             team_ids[static_cast<std::size_t>(h)],
                                             team_ids[static_cast<std::size_t>(a)], lh, la));
            const int goals_h = poisson(rng, lh);
            const int goals_a = poisson(rng, la);

            for (int side = 0; side < 2; ++side) {
                const int team = side == 0 ? h : a;
                const int opponent = side == 0 ? a : h;
                const int scored = side == 0 ? goals_h : goals_a;
                const int conceded = side == 0 ? goals_a : goals_h;
                std::vector<std::size_t> squad;
                for (std::size_t i = 0; i < players.size(); ++i) {
                    if (players[i].team_index == team) squad.push_back(i);
                }
                bool first_keeper_out = false;
                for (std::size_t i : squad) {
                    if (players[i].position == Position::GK && players[i].starter) first_keeper_out = injured[i];
                }
                std::vector<int> minutes;
                for (std::size_t i : squad) {
                    const Player& p = players[i];
                    int mins = 90;
                    if (injured[i]) {
                        mins = 0;
                    } else if (p.position == Position::GK) {
                        mins = p.starter != first_keeper_out ? 90 : 0;
                    } else if (uniform(rng) < 0.08) {
                        mins = 20 + static_cast<int>(rng() % 40);
                    }
                    minutes.push_back(mins);
                }
                static constexpr double kGoalBase[] = {0.01, 0.5, 1.6, 2.6};
                static constexpr double kAssistBase[] = {0.05, 0.8, 2.2, 1.3};
                std::vector<double> goal_w, assist_w;
                for (std::size_t k = 0; k < squad.size(); ++k) {
                    const Player& p = players[squad[k]];
                    const double share = minutes[k] / 90.0;
                    const double lift = std::exp(p.quality + form[squad[k]]);
                    goal_w.push_back(share * kGoalBase[static_cast<int>(p.position)] * lift);
                    assist_w.push_back(share * kAssistBase[static_cast<int>(p.position)] * lift);
                }
                std::vector<int> goals(squad.size(), 0), assists(squad.size(), 0);
                for (int n = 0; n < scored; ++n) {
                    const std::size_t scorer = pick(rng, goal_w);
                    ++goals[scorer];
                    if (uniform(rng) < 0.75) {
                        std::vector<double> w = assist_w;
                        w[scorer] = 0.0;
                        ++assists[pick(rng, w)];
                    }
                }
                for (std::size_t k = 0; k < squad.size(); ++k) {
                    const Player& p = players[squad[k]];
                    PlayerGameweekRecord r;
                    r.player_id = p.id;
                    r.gameweek = g;
                    r.position = p.position;
                    r.team_id = p.team;
                    r.opponent_team_id = team_ids[static_cast<std::size_t>(opponent)];
                    r.was_home = side == 0;
                    r.cost = p.cost;
                    r.availability = injured[squad[k]] ? Availability::Injured : Availability::Available;
                    r.minutes = minutes[k];
                    if (r.minutes > 0) {
                        r.goals = goals[k];
                        r.assists = assists[k];
                        r.goals_conceded = conceded;
                        r.clean_sheet = conceded == 0 && r.minutes >= 60;
                        if (p.position == Position::GK) r.saves = poisson(rng, 1.5 + (side == 0 ? la : lh));
                        r.yellow_cards = uniform(rng) < 0.1 ? 1 : 0;
                        r.bonus = std::min(3, 2 * r.goals + r.assists);
                        if (r.clean_sheet && (p.position == Position::GK || p.position == Position::DEF)) {
                            r.bonus = std::min(3, r.bonus + 1);
                        }
                        r.influence = std::round(10.0 * (r.minutes / 90.0 * 8.0 + 6.0 * r.goals + 4.0 * r.assists +
                                                         2.0 * r.saves + uniform(rng) * 4.0)) / 10.0;
                        r.creativity = std::round(10.0 * (r.minutes / 90.0 * 5.0 + 8.0 * r.assists +
                                                          uniform(rng) * 6.0)) / 10.0;
                        r.threat = std::round(10.0 * (r.minutes / 90.0 * 4.0 + 10.0 * r.goals +
                                                      uniform(rng) * 8.0)) / 10.0;
                    }
                    r.total_points = score_player(r);
                    records.push_back(std::move(r));
                }
            }
        }
        season.snapshots.push_back(make_snapshot(g, std::move(records)));
        season.fixtures[g] = std::move(fixtures);

        // Pre-match blog posts, one subject player each, ranked in shuffled order.
        std::vector<SentimentDocument> docs;
        for (std::size_t i = 0; i < players.size(); ++i) {
            if (uniform(rng) >= o.document_rate) continue;
            const RosterEntry& entry = season.roster[i];
            const std::string surname = entry.full_name.substr(entry.full_name.rfind(' ') + 1);
            const std::string name = rng() % 2 == 0 ? entry.full_name : surname;
            SentimentDocument d;
            d.title = name + " news";
            d.body = describe(rng, form[i], name);
            docs.push_back(std::move(d));
        }
        for (int extra = 0; extra < 5; ++extra) {
            SentimentDocument d;
            d.title = "Round-up";
            d.body = std::string("A ") + kPositive[rng() % 12] + " weekend of football ahead.";
            docs.push_back(std::move(d));
        }
        std::shuffle(docs.begin(), docs.end(), rng);
        for (std::size_t k = 0; k < docs.size(); ++k) {
            docs[k].rank = static_cast<int>(k) + 1;
            docs[k].doc_id = "gw" + two_digit(g) + "-d" + std::to_string(k + 1);
            docs[k].source_url = "https://blog.example/" + docs[k].doc_id;
        }
        season.documents[g] = std::move(docs);
    }
    return season;
}

StreamData stream_data(const SyntheticSeason& season) {
    StreamData data;
    for (const auto& [g, f] : season.fixtures) data.set_fixtures(g, f);
    for (const auto& [g, d] : season.documents) data.set_documents(g, d);
    data.set_roster(season.roster);
    data.set_lexicon(parse_lexicon(season.lexicon_tsv, season.negations_txt));
    return data;
}

void load_into(const SyntheticSeason& season, SnapshotStore& store) {
    for (const auto& s : season.snapshots) store.put(s);
}

void write_season(const SyntheticSeason& season, const fs::path& dir) {
    std::error_code ec;
    for (const char* sub : {"feeds", "odds", "documents"}) {
        fs::create_directories(dir / sub, ec);
        if (ec) throw IoError("cannot create " + (dir / sub).string() + ": " + ec.message());
    }
    for (const auto& s : season.snapshots) {
        const std::string gw = two_digit(s.gameweek);
        write_file_atomic(dir / "feeds" / ("players_gw" + gw + ".json"),
                          players_payload(s.gameweek, s.records, season.roster));
    }
    for (const auto& [g, f] : season.fixtures) {
        const std::string payload = odds_payload(g, f);
        write_file_atomic(dir / "feeds" / ("odds_gw" + two_digit(g) + ".json"), payload);
        write_file_atomic(dir / "odds" / ("gw_" + two_digit(g) + ".json"), payload);
    }
    for (const auto& [g, docs] : season.documents) {
        std::string lines;
        for (const auto& d : docs) {
            lines += json{{"doc_id", d.doc_id},
                          {"rank", d.rank},
                          {"title", d.title},
                          {"body", d.body},
                          {"published_at", nullptr},
                          {"source_url", d.source_url}}
                         .dump() +
                     "\n";
        }
        write_file_atomic(dir / "documents" / ("gw_" + two_digit(g) + ".jsonl"), lines);
    }
    json roster = json::array();
    for (const auto& e : season.roster) {
        roster.push_back({{"player_id", e.player_id}, {"full_name", e.full_name}, {"aliases", e.aliases}});
    }
    write_file_atomic(dir / "aliases.json", json{{"players", roster}}.dump(1) + "\n");
    write_file_atomic(dir / "lexicon.tsv", season.lexicon_tsv);
    write_file_atomic(dir / "negations.txt", season.negations_txt);
}

}  // namespace squadforge
