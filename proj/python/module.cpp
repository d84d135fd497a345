#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <limits>

#include "skilllab/config.hpp"
#include "skilllab/env/maze.hpp"
#include "skilllab/pipeline/artifacts.hpp"
#include "skilllab/pipeline/pipeline.hpp"
#include "skilllab/pipeline/sibling_rivalry.hpp"
#include "skilllab/tabular.hpp"

namespace py = pybind11;
using namespace skilllab;

namespace {

// JSON crosses the boundary as text; the python side decodes it.
py::object to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_py(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

double as_float(const tabular::ExtendedReward& r) {
  return r.negative_infinity ? -std::numeric_limits<double>::infinity() : r.value;
}

tabular::TabularSkillModel tabular_model(const Eigen::MatrixXd& rho) {
  tabular::TabularSkillModel m;
  m.rho = rho;
  m.validate();
  return m;
}

RunConfig config_from(const py::object& o) {
  if (o.is_none()) return RunConfig{};
  return RunConfig::from_json(from_py(o));
}

}  // namespace

PYBIND11_MODULE(_skilllab, m) {
  m.doc() = "Skill discovery core bindings";

  py::register_exception<nlohmann::json::exception>(m, "JsonError", PyExc_ValueError);

  // Mazes.
  m.def("maze_names", [] {
    std::vector<std::string> names;
    for (const auto& [name, spec] : env::builtin_mazes()) names.push_back(name);
    return names;
  });
  m.def("maze", [](const std::string& name) { return to_py(env::maze_to_json(env::resolve_maze(name))); },
        py::arg("name_or_path"));
  m.def(
      "step",
      [](const py::object& maze, Eigen::Vector2d position, int step_index, Eigen::Vector2d action) {
        const env::MazeSpec spec = py::isinstance<py::str>(maze)
                                       ? env::resolve_maze(maze.cast<std::string>())
                                       : env::maze_from_json(from_py(maze));
        const auto r = env::step(spec, {position, step_index}, action);
        return py::make_tuple(Eigen::Vector2d(r.state.position), r.state.step_index, r.done);
      },
      py::arg("maze"), py::arg("position"), py::arg("step_index"), py::arg("action"));
  m.def(
      "is_free",
      [](const std::string& maze, Eigen::Vector2d p) { return env::is_free(env::resolve_maze(maze), p); },
      py::arg("maze"), py::arg("point"));
  m.def(
      "count_free_regions",
      [](const std::string& maze, double cell) {
        return env::count_free_regions(env::resolve_maze(maze), cell);
      },
      py::arg("maze"), py::arg("cell") = 0.25);

  // Tabular reward analysis. Minus infinity becomes float('-inf') here.
  m.def(
      "posterior",
      [](const Eigen::MatrixXd& rho, int state) {
        return Eigen::VectorXd(tabular::exact_posterior(tabular_model(rho), state));
      },
      py::arg("rho"), py::arg("state"));
  m.def(
      "reverse_reward",
      [](const Eigen::MatrixXd& rho, int state, int skill, bool background) {
        const auto model = tabular_model(rho);
        return as_float(background ? tabular::reverse_reward_background(model, state, skill)
                                   : tabular::reverse_reward_exact(model, state, skill));
      },
      py::arg("rho"), py::arg("state"), py::arg("skill"), py::arg("background") = false);
  m.def(
      "forward_reward",
      [](const Eigen::MatrixXd& rho, int state, int skill, double eps) {
        return as_float(tabular::forward_reward_exact(tabular_model(rho), state, skill, eps));
      },
      py::arg("rho"), py::arg("state"), py::arg("skill"), py::arg("eps") = 0.0);
  m.def(
      "gridworld_figure",
      [](int skills, const std::string& form) {
        if (form != "reverse" && form != "forward")
          throw std::invalid_argument("form must be reverse or forward");
        const auto spec = env::default_gridworld();
        const auto fig = tabular::gridworld_figure_export(tabular::sector_split_model(spec, skills), spec);
        return to_py(fig.to_json(form));
      },
      py::arg("skills") = 2, py::arg("form") = "reverse");

  // Pipeline helpers.
  m.def(
      "sibling_rivalry_select",
      [](Eigen::Vector2d a, Eigen::Vector2d b, Eigen::Vector2d goal, double eps) {
        const auto d = pipeline::sibling_rivalry_select(a, b, goal, eps);
        py::dict out;
        out["distance_a"] = d.distance_a;
        out["distance_b"] = d.distance_b;
        out["admit_a"] = d.admit_a;
        out["admit_b"] = d.admit_b;
        out["bonus"] = d.bonus;
        return out;
      },
      py::arg("terminal_a"), py::arg("terminal_b"), py::arg("goal"), py::arg("eps"));
  m.def("optimal_assignment", &pipeline::optimal_assignment, py::arg("cost"));
  m.def("content_hash", &pipeline::content_hash, py::arg("data"));

  // Configuration and runs.
  m.def(
      "default_config", [](bool paper_defaults) {
        RunConfig c;
        if (paper_defaults) c.apply_paper_defaults();
        return to_py(c.to_json());
      },
      py::arg("paper_defaults") = false);
  m.def(
      "validate_config",
      [](const py::object& config) {
        const RunConfig c = config_from(config);
        c.validate();
        return to_py(c.to_json());
      },
      py::arg("config"));
  m.def(
      "run",
      [](const py::object& config, const std::function<void(py::object)>& on_iteration) {
        const RunConfig c = config_from(config);
        pipeline::MetricsSink sink;
        if (on_iteration) {
          sink = [&](const pipeline::IterationMetrics& it) {
            py::gil_scoped_acquire gil;
            on_iteration(to_py(it.to_json()));
          };
        }
        nlohmann::json manifest;
        {
          py::gil_scoped_release release;
          manifest = pipeline::run_pipeline(c, sink);
        }
        return to_py(manifest);
      },
      py::arg("config"), py::arg("on_iteration") = nullptr);
  m.def(
      "evaluate",
      [](const std::filesystem::path& dir, std::optional<std::pair<int, int>> interpolate, int steps) {
        pipeline::EvalOptions options;
        options.interpolate = interpolate;
        options.steps = steps;
        nlohmann::json out;
        {
          py::gil_scoped_release release;
          out = pipeline::run_eval(dir, options);
        }
        return to_py(out);
      },
      py::arg("run_dir"), py::arg("interpolate") = std::nullopt, py::arg("steps") = 5);
}
