// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "squadforge/backtest.hpp"
#include "squadforge/cli.hpp"
#include "squadforge/errors.hpp"
#include "squadforge/gbm.hpp"
#include "squadforge/odds.hpp"
#include "squadforge/selector.hpp"
#include "squadforge/sentiment.hpp"
#include "squadforge/synthetic.hpp"
#include "scoring_oracle.hpp"
#include "test_support.hpp"

using namespace squadforge;
namespace sft = squadforge::testing;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* spec, double v) {
    char buf[96];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// 1. Normalized market probabilities.
Verdict odds_math() {
    const auto start = Clock::now();
    std::mt19937_64 rng(1001);
    std::uniform_real_distribution<double> price(1.01, 100.0);
    double worst_sum = 0.0;
    long order_violations = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const int k = 2 + static_cast<int>(rng() % 4);
        std::vector<Outcome> market;
        for (int i = 0; i < k; ++i) market.push_back({"o" + std::to_string(i), price(rng)});
        const auto m = normalize_market(market);
        double sum = 0.0;
        for (const auto& [label, p] : m.probabilities) sum += p;
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                const bool shorter = market[i].decimal_odds < market[j].decimal_odds;
                if (shorter && !(m.probabilities[i].second > m.probabilities[j].second)) ++order_violations;
            }
        }
    }
    const double t = seconds_since(start);
    return {worst_sum <= 1e-9 && order_violations == 0 && t < 1.0,
            "max |sum-1| " + fmt("%.2e", worst_sum) + ", order violations " + std::to_string(order_violations) +
                ", " + fmt("%.3f s", t)};
}

// 2. auc_roc against the pairwise definition.
Verdict auc_oracle() {
    const auto start = Clock::now();
    std::mt19937_64 rng(2002);
    int mismatches = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + rng() % 999;
        const int levels = trial % 2 == 0 ? 5 : 1000000;  // half the instances are tie-heavy
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(rng() % static_cast<unsigned>(levels)) / levels;
            y[i] = static_cast<int>(rng() % 2);
        }
        y[0] = 0;
        y[1] = 1;
        long long twice_wins = 0;
        long long pairs = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (y[i] != 1) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (y[j] != 0) continue;
                ++pairs;
                twice_wins += s[i] > s[j] ? 2 : (s[i] == s[j] ? 1 : 0);
            }
        }
        const double oracle = static_cast<double>(twice_wins) / static_cast<double>(2 * pairs);
        if (auc_roc(s, y) != oracle) ++mismatches;
    }
    const double t = seconds_since(start);
    return {mismatches == 0 && t < 30.0,
            "500 instances, exact mismatches " + std::to_string(mismatches) + ", " + fmt("%.2f s", t)};
}

// 3. Held-out AUC on a planted 10:1 problem, and monotone training loss on the fixtures.
Verdict gbm_learning() {
    const auto start = Clock::now();
    std::mt19937_64 rng(3003);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t n = 2000;
    const std::size_t d = 10;
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    std::vector<double> latent(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : rows[i]) v = normal(rng);
        latent[i] = 1.6 * rows[i][0] - 1.3 * rows[i][1] + 1.0 * rows[i][2] * rows[i][2] + 0.6 * normal(rng);
    }
    // Top 1/11 of the latent score are positives: 10 negatives per positive.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return latent[a] > latent[b]; });
    std::vector<int> y(n, 0);
    for (std::size_t k = 0; k < n / 11; ++k) y[order[k]] = 1;

    FeatureMatrix train_x, test_x;
    std::vector<int> train_y, test_y;
    const std::vector<std::uint8_t> mask(d, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (i % 10 < 7) {
            train_x.append_row(rows[i], mask);
            train_y.push_back(y[i]);
        } else {
            test_x.append_row(rows[i], mask);
            test_y.push_back(y[i]);
        }
    }
    GbmParams base;
    base.seed = 3;
    const auto grid = default_grid(base);
    const auto best = sweep(train_x, train_y, {}, grid, 3, 3);
    const auto model = fit(train_x, train_y, {}, best.best);
    const double held_out = auc_roc(predict_proba(model, test_x), test_y);

    int loss_increases = 0;
    for (const char* name : {"linear.csv", "imbalanced_missing.csv", "xor.csv"}) {
        const auto data = sft::load_fixture(name);
        const auto m = fit(data.x, data.y, {}, GbmParams{});
        const auto loss = staged_log_loss(m, data.x, data.y, {});
        for (std::size_t t = 1; t < loss.size(); ++t) {
            if (loss[t] > loss[t - 1] + 1e-12) ++loss_increases;
        }
    }
    const double t = seconds_since(start);
    return {held_out >= 0.90 && loss_increases == 0 && t < 60.0,
            "held-out AUC " + fmt("%.4f", held_out) + " (n_trees " + std::to_string(best.best.n_trees) + ", depth " +
                std::to_string(best.best.max_depth) + ", lr " + fmt("%g", best.best.learning_rate) +
                "), staged loss increases " + std::to_string(loss_increases) + ", " + fmt("%.1f s", t)};
}

int cli(const std::vector<std::string>& args, std::string* out = nullptr) {
    std::ostringstream o, e;
    const int code = run(args, o, e);
    if (out) *out = o.str();
    if (code != 0) std::fprintf(stderr, "%s", e.str().c_str());
    return code;
}

std::string dir_bytes(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::string all;
    for (const auto& f : files) all += f.filename().string() + "\n" + read_file(f);
    return all;
}

// 4. train and backtest through the CLI, twice each, from the same cached feeds.
Verdict determinism() {
    sft::TempDir dir("accept_det");
    const std::string root = dir.path().string();
    const std::string config = (dir / "squadforge.toml").string();
    if (cli({"synth", "--seed", "8", "--gameweeks", "8", "--out", root}) != 0 ||
        cli({"ingest", "--config", config, "--from", "1", "--to", "8"}) != 0) {
        return {false, "could not prepare the season"};
    }
    bool ok = true;
    for (const char* run_dir : {"a", "b"}) {
        const std::string base = (dir / run_dir).string();
        ok = ok && cli({"train", "--config", config, "--gameweek", "8", "--seed", "5", "--out", base + "/models"}) == 0;
        ok = ok && cli({"backtest", "--config", config, "--from", "3", "--to", "8", "--seed", "5", "--out",
                        base + "/report"}) == 0;
    }
    if (!ok) return {false, "a command failed"};
    const bool models = dir_bytes(dir / "a" / "models") == dir_bytes(dir / "b" / "models");
    const bool reports = dir_bytes(dir / "a" / "report") == dir_bytes(dir / "b" / "report");
    return {models && reports, std::string("models ") + (models ? "identical" : "differ") + ", reports " +
                                   (reports ? "identical" : "differ")};
}

std::vector<Candidate> seeded_pool(std::mt19937_64& rng, int size) {
    static constexpr Position kCover[] = {Position::GK,  Position::DEF, Position::DEF, Position::DEF,
                                          Position::MID, Position::MID, Position::FWD};
    std::uniform_real_distribution<double> score(-2.0, 12.0);
    const bool tied = rng() % 4 == 0;
    const int clubs = 4 + static_cast<int>(rng() % 4);
    std::vector<Candidate> pool;
    for (int i = 0; i < size; ++i) {
        Candidate c;
        c.player_id = "pl" + std::to_string(100 + static_cast<int>(rng() % 900)) + "_" + std::to_string(i);
        c.position = i < 7 ? kCover[i] : static_cast<Position>(rng() % 4);
        c.team_id = "club" + std::to_string(rng() % static_cast<unsigned>(clubs));
        c.predicted_score = tied ? static_cast<double>(rng() % 3) : score(rng);
        c.cost = 4.0 + static_cast<double>(rng() % 17) * 0.5;
        pool.push_back(c);
    }
    return pool;
}

// 5. Exact search against exhaustive enumeration on feasible pools.
Verdict lineup_optimality() {
    const auto start = Clock::now();
    std::mt19937_64 rng(5005);
    int pools = 0;
    int agree = 0;
    int invalid = 0;
    int skipped = 0;
    while (pools < 200) {
        const int size = 12 + static_cast<int>(rng() % 9);
        const auto pool = seeded_pool(rng, size);
        std::optional<Lineup> exact;
        try {
            exact = brute_force_lineup(pool);
        } catch (const InfeasibleError&) {
            ++skipped;
            bool also_infeasible = false;
            try {
                select_lineup(pool);
            } catch (const InfeasibleError&) {
                also_infeasible = true;
            }
            if (!also_infeasible) ++invalid;
            continue;
        }
        ++pools;
        const auto fast = select_lineup(pool);
        if (std::abs(fast.objective() - exact->objective()) <= 1e-9) ++agree;
        if (!lineup_violations(fast).empty()) ++invalid;
    }
    const double t = seconds_since(start);
    return {agree == 200 && invalid == 0 && t < 60.0,
            std::to_string(agree) + "/200 objectives agree, invalid " + std::to_string(invalid) + " (" +
                std::to_string(skipped) + " infeasible draws redrawn), " + fmt("%.2f s", t)};
}

// 6. Points engine against a rule-by-rule oracle plus the three worked examples.
Verdict scoring_engine() {
    std::mt19937_64 rng(6006);
    int agree = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto r = sft::random_scoring_record(rng, i);
        if (score_player(r) == sft::oracle_points(r)) ++agree;
    }
    auto record = [](Position p, int minutes) {
        auto r = sft::sample_record("w", 1, p, "A");
        r.minutes = minutes;
        return r;
    };
    auto fwd = record(Position::FWD, 90);
    fwd.goals = 2;
    fwd.assists = 1;
    auto gk = record(Position::GK, 90);
    gk.clean_sheet = true;
    gk.saves = 3;
    auto def = record(Position::DEF, 30);
    def.goals_conceded = 2;
    def.yellow_cards = 1;
    const bool examples = score_player(fwd) == 13 && score_player(gk) == 7 && score_player(def) == -1;
    return {agree == 10000 && examples, std::to_string(agree) + "/10000 agree, worked examples " +
                                            (examples ? "13, 7, -1 hold" : "do not hold")};
}

// 7. Captain label boundary.
Verdict labeling() {
    int wrong = 0;
    for (int p = -10; p <= 30; ++p) wrong += label_captain(p) != (p >= 7 ? 1 : 0);
    return {wrong == 0, "41 integers checked, " + std::to_string(wrong) + " wrong"};
}

// 8. Multi-stream against stats-only on seeded synthetic seasons.
Verdict thesis() {
    const auto start = Clock::now();
    int wins = 0;
    double uplift_sum = 0.0;
    std::string per_seed;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SyntheticOptions opt;
        opt.seed = seed;
        opt.gameweeks = 12;
        const auto season = generate_season(opt);
        sft::TempDir dir("accept_thesis");
        SnapshotStore store(dir.path());
        load_into(season, store);
        const auto streams = stream_data(season);
        const std::vector<BacktestConfig> configs{make_config(StreamSet::stats_only()), make_config(StreamSet::all())};
        BacktestOptions options;
        options.params.seed = seed;
        const auto report = replay_season(store, streams, configs, options, 3, 12);
        const int baseline = report.series[0].total_points;
        const int multi = report.series[1].total_points;
        if (multi >= baseline) ++wins;
        uplift_sum += multi - baseline;
        per_seed += (seed > 1 ? " " : "") + std::to_string(multi - baseline);
    }
    const double mean = uplift_sum / 20.0;
    const double t = seconds_since(start);
    return {wins >= 16 && mean > 0.0 && t < 300.0,
            std::to_string(wins) + "/20 seeds multi >= baseline, mean uplift " + fmt("%+.2f", mean) +
                " points (per seed: " + per_seed + "), " + fmt("%.1f s", t)};
}

// 9. Reference figures appear, marked non-binding, when requested.
Verdict reference_targets() {
    SyntheticOptions opt;
    opt.seed = 9;
    opt.gameweeks = 4;
    const auto season = generate_season(opt);
    sft::TempDir dir("accept_ref");
    SnapshotStore store(dir.path());
    load_into(season, store);
    const std::vector<BacktestConfig> configs{make_config(StreamSet::stats_only())};
    BacktestOptions options;
    options.params.n_trees = 20;
    const auto report = replay_season(store, stream_data(season), configs, options, 3, 4);
    const auto summary = report_summary(report, true);
    bool all = true;
    for (const char* needle : {"average 52", "average 63", "total 1994", "total 2314", "non-binding"}) {
        all = all && summary.find(needle) != std::string::npos;
    }
    const bool absent_by_default = report_summary(report, false).find("2314") == std::string::npos;
    return {all && absent_by_default, std::string("reference lines ") + (all ? "printed" : "missing") +
                                          ", flagged non-binding; informational only"};
}

// 10. Only the top 100 ranked documents are read.
Verdict sentiment_cap() {
    const std::vector<RosterEntry> roster{{"p1", "Harry Kane", {}}};
    const NameIndex names(roster);
    const Lexicon lex = parse_lexicon("good\t0.5\n", "not\n");
    std::vector<SentimentDocument> docs;
    for (int i = 1; i <= 150; ++i) {
        SentimentDocument d;
        d.doc_id = "d" + std::to_string(i);
        d.rank = i;
        d.body = "Kane good";
        docs.push_back(d);
    }
    int probed = 0;
    int highest = 0;
    const auto s = aggregate(docs, "p1", names, lex, kMaxDocuments, [&](const SentimentDocument& d) {
        ++probed;
        highest = std::max(highest, d.rank);
    });
    return {probed == 100 && s.documents_considered == 100 && highest == 100,
            "150 documents, probe saw " + std::to_string(probed) + " (ranks 1.." + std::to_string(highest) + ")"};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"odds normalization", odds_math},        {"AUC pairwise equivalence", auc_oracle},
        {"GBM learning", gbm_learning},           {"train/backtest determinism", determinism},
        {"lineup optimality", lineup_optimality}, {"scoring engine", scoring_engine},
        {"captain labeling", labeling},           {"multi-stream vs stats-only", thesis},
        {"reference targets", reference_targets}, {"sentiment document cap", sentiment_cap},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
