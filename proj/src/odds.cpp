#include "squadforge/odds.hpp"

#include <cmath>

#include "squadforge/errors.hpp"

namespace squadforge {

using nlohmann::json;

void validate(const FixtureOdds& f) {
    if (f.home_team_id.empty() || f.away_team_id.empty()) {
        throw ValidationError("fixture " + f.fixture_id + " is missing a team id");
    }
    for (const auto& [name, outcomes] : f.markets) {
        if (outcomes.size() < 2) {
            throw ValidationError("fixture " + f.fixture_id + " market " + name +
                                  " has fewer than 2 outcomes");
        }
        for (const auto& o : outcomes) {
            if (!(o.decimal_odds > 1.0) || !std::isfinite(o.decimal_odds)) {
                throw ValidationError("fixture " + f.fixture_id + " market " + name + " outcome " +
                                      o.label + ": decimal odds must exceed 1.0");
            }
        }
    }
}

json to_json(const FixtureOdds& f) {
    json markets = json::object();
    for (const auto& [name, outcomes] : f.markets) {
        json arr = json::array();
        for (const auto& o : outcomes) arr.push_back({{"label", o.label}, {"odds", o.decimal_odds}});
        markets[name] = std::move(arr);
    }
    return {{"id", f.fixture_id}, {"home", f.home_team_id}, {"away", f.away_team_id},
            {"markets", std::move(markets)}};
}

FixtureOdds fixture_odds_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("fixture is not a JSON object");
    FixtureOdds f;
    try {
        const auto& id = j.at("id");
        f.fixture_id = id.is_string() ? id.get<std::string>() : id.dump();
        f.home_team_id = j.at("home").get<std::string>();
        f.away_team_id = j.at("away").get<std::string>();
        if (auto it = j.find("markets"); it != j.end()) {
            for (const auto& [name, arr] : it->items()) {
                std::vector<Outcome> outcomes;
                for (const auto& o : arr) {
                    outcomes.push_back({o.at("label").get<std::string>(), o.at("odds").get<double>()});
                }
                f.markets.emplace(name, std::move(outcomes));
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed fixture: ") + e.what());
    }
    validate(f);
    return f;
}

std::optional<double> MarketProbabilities::probability_of(std::string_view label) const {
    for (const auto& [l, p] : probabilities) {
        if (l == label) return p;
    }
    return std::nullopt;
}

double implied_probability(double decimal_odds) {
    if (!(decimal_odds > 1.0) || !std::isfinite(decimal_odds)) {
        throw DomainError("decimal odds must be finite and greater than 1.0");
    }
    return 1.0 / decimal_odds;
}

MarketProbabilities normalize_market(std::span<const Outcome> market, std::string name) {
    if (market.size() < 2) throw DomainError("a market needs at least 2 outcomes");
    MarketProbabilities out;
    out.market = std::move(name);
    double raw_sum = 0.0;
    out.probabilities.reserve(market.size());
    for (const auto& o : market) {
        const double p = implied_probability(o.decimal_odds);
        raw_sum += p;
        out.probabilities.emplace_back(o.label, p);
    }
    for (auto& [_, p] : out.probabilities) p /= raw_sum;
    out.overround = std::max(0.0, raw_sum - 1.0);
    return out;
}

std::vector<MarketProbabilities> normalize_fixture(const FixtureOdds& fixture) {
    std::vector<MarketProbabilities> out;
    for (const auto& [name, outcomes] : fixture.markets) {
        out.push_back(normalize_market(outcomes, name));
    }
    return out;
}

OddsFeatures fixture_features(std::span<const MarketProbabilities> markets, Side side) {
    const MarketProbabilities* match = nullptr;
    const MarketProbabilities* goals = nullptr;
    for (const auto& m : markets) {
        if (m.market == kMatchOddsMarket) match = &m;
        if (m.market == kOverUnderMarket) goals = &m;
    }
    if (match == nullptr) throw FeatureUnavailableError("fixture has no 1x2 market");

    auto need = [&](const char* label) {
        auto p = match->probability_of(label);
        if (!p) throw FeatureUnavailableError(std::string("1x2 market lacks outcome '") + label + "'");
        return *p;
    };
    const double home = need("home");
    const double draw = need("draw");
    const double away = need("away");

    OddsFeatures f;
    f.win_probability = side == Side::Home ? home : away;
    f.draw_probability = draw;
    f.loss_probability = side == Side::Home ? away : home;
    if (goals != nullptr) f.expected_low_scoring = goals->probability_of("under");
    return f;
}

}  // namespace squadforge
