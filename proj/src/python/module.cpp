// Python bindings. Structured values cross the boundary as JSON-compatible
// dicts and lists.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <sstream>

#include "squadforge/backtest.hpp"
#include "squadforge/cli.hpp"
#include "squadforge/errors.hpp"
#include "squadforge/gbm.hpp"
#include "squadforge/odds.hpp"
#include "squadforge/selector.hpp"
#include "squadforge/synthetic.hpp"

namespace py = pybind11;
using namespace squadforge;

namespace {

nlohmann::json to_native(const py::handle& obj) {
    const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
    return nlohmann::json::parse(text);
}

py::object to_python(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

FeatureMatrix matrix_from(const std::vector<std::vector<std::optional<double>>>& rows) {
    FeatureMatrix x;
    for (const auto& row : rows) {
        std::vector<double> values;
        std::vector<std::uint8_t> mask;
        for (const auto& v : row) {
            const bool missing = !v || std::isnan(*v);
            values.push_back(missing ? 0.0 : *v);
            mask.push_back(missing ? 1 : 0);
        }
        x.append_row(values, mask);
    }
    return x;
}

GbmParams params_from(const py::dict& kwargs) {
    nlohmann::json j = to_json(GbmParams{});
    for (auto [k, v] : kwargs) j[k.cast<std::string>()] = to_native(v);
    return gbm_params_from_json(j);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fantasy football captain prediction and lineup selection";

    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
    error_type.call_once_and_store_result([&]() { return py::exception<Error>(m, "SquadforgeError"); });
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error_type.get_stored(), (std::string(e.kind()) + ": " + e.what()).c_str());
        }
    });

    m.def(
        "normalize_market",
        [](const std::vector<std::pair<std::string, double>>& outcomes) {
            std::vector<Outcome> market;
            for (const auto& [label, odds] : outcomes) market.push_back({label, odds});
            const auto r = normalize_market(market);
            py::dict out;
            py::dict probs;
            for (const auto& [label, p] : r.probabilities) probs[py::str(label)] = p;
            out["probabilities"] = probs;
            out["overround"] = r.overround;
            return out;
        },
        py::arg("outcomes"), "Implied probabilities of (label, decimal_odds) pairs, normalized to sum to one.");

    m.def("auc_roc", [](const std::vector<double>& s, const std::vector<int>& y) { return auc_roc(s, y); },
          py::arg("scores"), py::arg("labels"));
    m.def(
        "precision_at",
        [](const std::vector<double>& s, const std::vector<int>& y, double threshold) {
            return precision_at(s, y, threshold);
        },
        py::arg("scores"), py::arg("labels"), py::arg("threshold") = 0.5);
    m.def("label_captain", &label_captain, py::arg("points"));

    m.def(
        "score_player",
        [](const py::dict& record) { return score_player(record_from_json(to_native(record))); },
        py::arg("record"), "Official 2018/19 points for a player-gameweek record dict.");

    m.def(
        "select_lineup",
        [](const py::list& candidates, bool club_cap, std::optional<double> budget) {
            std::vector<Candidate> pool;
            for (const auto& c : candidates) pool.push_back(candidate_from_json(to_native(c)));
            SelectionConstraints constraints;
            constraints.club_cap_enabled = club_cap;
            if (budget) {
                constraints.budget_enabled = true;
                constraints.budget = *budget;
            }
            return to_python(to_json(select_lineup(pool, constraints)));
        },
        py::arg("candidates"), py::arg("club_cap") = true, py::arg("budget") = py::none(),
        "Best starting XI and captain for a list of candidate dicts.");

    py::class_<BoostedModel>(m, "Model")
        .def("predict_proba",
             [](const BoostedModel& model, const std::vector<std::vector<std::optional<double>>>& rows) {
                 return predict_proba(model, matrix_from(rows));
             })
        .def("importance", [](const BoostedModel& model) { return importance(model); })
        .def("to_json", [](const BoostedModel& model) { return serialize(model); })
        .def_static("from_json", [](const std::string& text) { return deserialize_model(text); })
        .def_property_readonly("n_trees", [](const BoostedModel& model) { return model.trees.size(); });

    m.def(
        "fit",
        [](const std::vector<std::vector<std::optional<double>>>& rows, const std::vector<int>& y,
           const py::kwargs& params) {
            const FeatureMatrix x = matrix_from(rows);
            return fit(x, y, {}, params_from(params));
        },
        py::arg("rows"), py::arg("labels"),
        "Boosted trees for binary labels. None or NaN marks a missing value; keyword arguments set parameters.");

    m.def(
        "replay_synthetic",
        [](std::uint64_t seed, int gameweeks, int n_trees, const std::filesystem::path& workdir) {
            SyntheticOptions opt;
            opt.seed = seed;
            opt.gameweeks = gameweeks;
            const auto season = generate_season(opt);
            SnapshotStore store(workdir);
            load_into(season, store);
            const std::vector<BacktestConfig> configs{make_config(StreamSet::stats_only()),
                                                      make_config(StreamSet::all())};
            BacktestOptions options;
            options.params.n_trees = n_trees;
            options.params.seed = seed;
            BacktestReport report;
            {
                py::gil_scoped_release release;
                report = replay_season(store, stream_data(season), configs, options, 3, gameweeks);
            }
            py::dict out;
            for (const auto& s : report.series) {
                py::list points;
                for (const auto& g : s.gameweeks) points.append(g.points);
                py::dict entry;
                entry["total_points"] = s.total_points;
                entry["average_points"] = s.average_points;
                entry["points"] = points;
                out[py::str(s.config.name)] = entry;
            }
            return out;
        },
        py::arg("seed"), py::arg("gameweeks"), py::arg("n_trees"), py::arg("workdir"),
        "Walk-forward replay of a seeded synthetic season for the stats-only and all-stream configurations.");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = run(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs a CLI subcommand in-process; returns (exit_code, stdout, stderr).");
}
