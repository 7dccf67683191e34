#pragma once

#include <cmath>
#include <unistd.h>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "squadforge/domain.hpp"
#include "squadforge/gbm.hpp"
#include "squadforge/selector.hpp"

namespace squadforge::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("squadforge_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

struct Dataset {
    FeatureMatrix x;
    std::vector<int> y;
    std::vector<std::string> names;
};

// CSV with a header; the last column is the 0/1 label, "NA" marks missing.
inline Dataset load_fixture(const std::string& name) {
    const auto text = read_file(std::filesystem::path(SQUADFORGE_FIXTURE_DIR) / "gbm" / name);
    std::istringstream in(text);
    std::string line;
    Dataset d;
    std::getline(in, line);
    {
        std::istringstream h(line);
        std::string cell;
        while (std::getline(h, cell, ',')) d.names.push_back(cell);
        d.names.pop_back();
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream r(line);
        std::string cell;
        std::vector<double> values;
        std::vector<std::uint8_t> mask;
        std::vector<std::string> cells;
        while (std::getline(r, cell, ',')) cells.push_back(cell);
        for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
            const bool missing = cells[i] == "NA";
            values.push_back(missing ? 0.0 : std::stod(cells[i]));
            mask.push_back(missing ? 1 : 0);
        }
        d.x.append_row(values, mask);
        d.y.push_back(std::stoi(cells.back()));
    }
    return d;
}

// Random pool: positions spread so most pools can field a legal XI.
inline std::vector<Candidate> random_pool(std::mt19937_64& rng, int size, int teams, int score_levels = 0) {
    std::vector<Candidate> pool;
    static constexpr Position kCycle[] = {Position::GK,  Position::DEF, Position::DEF, Position::MID,
                                          Position::MID, Position::FWD, Position::DEF, Position::MID,
                                          Position::FWD, Position::DEF, Position::MID, Position::GK};
    std::uniform_real_distribution<double> score(-2.0, 12.0);
    for (int i = 0; i < size; ++i) {
        Candidate c;
        c.player_id = "pl" + std::to_string(1000 + static_cast<int>(rng() % 9000)) + "_" + std::to_string(i);
        c.position = i < 12 ? kCycle[i] : static_cast<Position>(rng() % 4);
        c.team_id = "club" + std::to_string(rng() % static_cast<unsigned>(teams));
        c.predicted_score = score_levels > 0 ? static_cast<double>(rng() % static_cast<unsigned>(score_levels))
                                             : score(rng);
        c.cost = 4.0 + static_cast<double>(rng() % 17) * 0.5;
        pool.push_back(c);
    }
    return pool;
}

inline PlayerGameweekRecord sample_record(const std::string& id, int gw, Position pos, const std::string& team) {
    PlayerGameweekRecord r;
    r.player_id = id;
    r.gameweek = gw;
    r.position = pos;
    r.team_id = team;
    r.opponent_team_id = team == "A" ? "B" : "A";
    r.minutes = 90;
    r.cost = 5.5;
    r.influence = 10.0;
    r.total_points = 2;
    return r;
}

}  // namespace squadforge::testing
