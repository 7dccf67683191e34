#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "squadforge/domain.hpp"

namespace squadforge {

// Market and outcome labels understood by fixture_features.
inline constexpr const char* kMatchOddsMarket = "1x2";
inline constexpr const char* kOverUnderMarket = "over_under_2.5";

struct Outcome {
    std::string label;
    double decimal_odds = 0.0;

    bool operator==(const Outcome&) const = default;
};

struct FixtureOdds {
    std::string fixture_id;
    TeamId home_team_id;
    TeamId away_team_id;
    std::map<std::string, std::vector<Outcome>> markets;

    bool operator==(const FixtureOdds&) const = default;
};

// Each market needs >= 2 outcomes and every price must exceed 1.0.
void validate(const FixtureOdds& fixture);

nlohmann::json to_json(const FixtureOdds& fixture);
FixtureOdds fixture_odds_from_json(const nlohmann::json& j);

struct MarketProbabilities {
    std::string market;
    std::vector<std::pair<std::string, double>> probabilities;
    double overround = 0.0;  // sum of raw 1/o minus 1, before normalization

    std::optional<double> probability_of(std::string_view label) const;
};

// 1 / decimal_odds. Throws DomainError unless decimal_odds > 1.
double implied_probability(double decimal_odds);

// Proportional normalization of the raw implied probabilities.
MarketProbabilities normalize_market(std::span<const Outcome> market, std::string name = {});

std::vector<MarketProbabilities> normalize_fixture(const FixtureOdds& fixture);

enum class Side { Home, Away };

// Team-level features for one side of a fixture. Absent markets stay nullopt.
struct OddsFeatures {
    double win_probability = 0.0;
    double draw_probability = 0.0;
    double loss_probability = 0.0;
    std::optional<double> expected_low_scoring;  // P(under 2.5)
};

// Throws FeatureUnavailableError when the 1x2 market is missing.
OddsFeatures fixture_features(std::span<const MarketProbabilities> markets, Side side);

}  // namespace squadforge
