#include "skilllab/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

#include "skilllab/pipeline/artifacts.hpp"
#include "skilllab/pipeline/pipeline.hpp"
#include "skilllab/tabular.hpp"

namespace skilllab {

namespace {

struct CommonFlags {
  std::string config_file;
  std::string method;
  std::string maze;
  std::string explore;
  std::vector<double> region;
  int skills = -1;
  long long seed = -1;
  bool sibling_rivalry = false;
  double epsilon = -1;
  std::string out;
  bool paper_defaults = false;
  int iterations = -1;
  bool quiet = false;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config_file, "JSON run config to start from");
  app->add_option("--method", f.method, "edl, reverse or forward")
      ->check(CLI::IsMember({"edl", "reverse", "forward"}));
  app->add_option("--maze", f.maze, "builtin maze name or maze JSON file");
  app->add_option("--explore", f.explore, "oracle, smm or restricted")
      ->check(CLI::IsMember({"oracle", "smm", "restricted"}));
  app->add_option("--region", f.region, "x0 y0 x1 y1 for restricted exploration")
      ->expected(4);
  app->add_option("--skills", f.skills, "number of skills (default 10)");
  app->add_option("--seed", f.seed, "root seed");
  app->add_flag("--sibling-rivalry", f.sibling_rivalry, "pair rollouts during learn");
  app->add_option("--epsilon", f.epsilon, "sibling rivalry threshold");
  app->add_option("--out", f.out, "run directory");
  app->add_flag("--paper-defaults", f.paper_defaults, "first element of every grid set");
  app->add_option("--iterations", f.iterations, "PPO iterations");
  app->add_flag("--quiet", f.quiet, "no per-iteration output");
}

RunConfig resolve(const CommonFlags& f) {
  nlohmann::json j = nlohmann::json::object();
  if (!f.config_file.empty()) {
    j = pipeline::read_json(f.config_file);
  } else if (!f.out.empty() && std::filesystem::exists(std::filesystem::path(f.out) / "config.json")) {
    // Continue an existing run directory.
    j = pipeline::read_json(std::filesystem::path(f.out) / "config.json");
  }
  RunConfig c = RunConfig::from_json(j);
  if (f.paper_defaults) c.apply_paper_defaults();
  if (!f.method.empty()) c.method = parse_method(f.method);
  if (!f.maze.empty()) c.maze = f.maze;
  if (!f.explore.empty()) c.explore = parse_explore(f.explore);
  if (!f.region.empty()) c.region = std::array<double, 4>{f.region[0], f.region[1], f.region[2], f.region[3]};
  if (f.skills > 0) c.skills = f.skills;
  if (f.seed >= 0) c.seed = static_cast<std::uint64_t>(f.seed);
  if (f.sibling_rivalry) c.sibling_rivalry = true;
  if (f.epsilon > 0) c.epsilon = f.epsilon;
  if (!f.out.empty()) c.out = f.out;
  if (f.iterations >= 0) c.iterations = f.iterations;
  c.validate();
  env::resolve_maze(c.maze);
  return c;
}

pipeline::MetricsSink printer(bool quiet) {
  if (quiet) return {};
  return [](const pipeline::IterationMetrics& m) {
    std::cerr << "iter " << m.iteration << " steps " << m.steps << " reward "
              << m.reward_mean << " entropy " << m.entropy << " clip " << m.clip_fraction
              << '\n';
  };
}

int analyze_gridworld(int skills, const std::string& out) {
  const env::GridWorldSpec spec = env::default_gridworld();
  const auto model = tabular::sector_split_model(spec, skills);
  const auto fig = tabular::gridworld_figure_export(model, spec);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& per_skill : fig.reverse_reward) {
    for (const auto& r : per_skill) {
      if (!r.negative_infinity) best = std::max(best, r.value);
    }
  }
  if (out.empty()) {
    std::cout << fig.to_json("reverse").dump() << '\n';
  } else {
    pipeline::write_json(std::filesystem::path(out) / "gridworld-reverse.json",
                         fig.to_json("reverse"));
    pipeline::write_json(std::filesystem::path(out) / "gridworld-forward.json",
                         fig.to_json("forward"));
  }
  std::cerr << "skills " << skills << " max reward " << best << " (log N = "
            << std::log(static_cast<double>(skills)) << ")\n";
  return 0;
}

std::vector<RunConfig> grid(const RunConfig& base) {
  std::vector<RunConfig> out;
  const auto& ents = agents::PPOConfig::entropy_grid();
  const auto& lrs = agents::PPOConfig::lr_grid();
  const std::vector<double> eps =
      base.sibling_rivalry ? RunConfig::epsilon_grid() : std::vector<double>{base.epsilon};
  const std::vector<double> betas = base.method == Method::kEdl
                                        ? density::VqVaeConfig::commitment_grid()
                                        : std::vector<double>{base.vqvae.commitment};
  const bool smm = base.method == Method::kEdl && base.explore == ExploreMode::kSmm;
  const std::vector<double> alphas =
      smm ? explore::SmmConfig::alpha_grid() : std::vector<double>{base.smm.alpha};
  const std::vector<double> vbetas =
      smm ? explore::SmmConfig::vae_beta_grid() : std::vector<double>{base.smm.vae_beta};
  int idx = 0;
  for (double ent : ents)
    for (double lr : lrs)
      for (double e : eps)
        for (double b : betas)
          for (double a : alphas)
            for (double vb : vbetas) {
              RunConfig c = base;
              c.ppo.entropy_coef = ent;
              c.ppo.lr = lr;
              c.epsilon = e;
              c.vqvae.commitment = b;
              c.smm.alpha = a;
              c.smm.vae_beta = vb;
              char name[32];
              std::snprintf(name, sizeof name, "gs-%04d", idx++);
              c.out = (std::filesystem::path(base.out) / name).string();
              out.push_back(c);
            }
  return out;
}

int gridsearch(const RunConfig& base, bool list_only, int limit) {
  std::vector<RunConfig> configs = grid(base);
  if (limit > 0 && limit < static_cast<int>(configs.size())) configs.resize(limit);
  if (list_only) {
    for (const auto& c : configs) {
      std::cout << c.out << " entropy=" << c.ppo.entropy_coef << " lr=" << c.ppo.lr
                << " epsilon=" << c.epsilon << " commitment=" << c.vqvae.commitment
                << " alpha=" << c.smm.alpha << " vae_beta=" << c.smm.vae_beta << '\n';
    }
    return 0;
  }
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* t = std::getenv("SKILLLAB_THREADS")) {
    workers = std::max(1, std::atoi(t));
  }
  workers = std::min<unsigned>(workers, static_cast<unsigned>(configs.size()));
  std::atomic<std::size_t> next{0};
  std::atomic<int> failures{0};
  std::mutex io;
  nlohmann::json summary = nlohmann::json::array();
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < configs.size(); i = next++) {
        try {
          pipeline::run_pipeline(configs[i]);
          const auto cov = pipeline::read_json(std::filesystem::path(configs[i].out) /
                                               "eval/coverage.json");
          std::lock_guard<std::mutex> lock(io);
          summary.push_back({{"run", configs[i].out}, {"coverage", cov.at("coverage")}});
          std::cerr << configs[i].out << " coverage " << cov.at("coverage") << '\n';
        } catch (const std::exception& e) {
          ++failures;
          std::lock_guard<std::mutex> lock(io);
          std::cerr << configs[i].out << " failed: " << e.what() << '\n';
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  pipeline::write_json(std::filesystem::path(base.out) / "gridsearch.json", summary);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Information-theoretic skill discovery lab"};
  app.require_subcommand(1);

  int grid_skills = 2;
  std::string grid_out;
  auto* ag = app.add_subcommand("analyze-gridworld", "exact tabular reward landscapes");
  ag->add_option("--skills", grid_skills, "number of skills")->check(CLI::Range(1, 16));
  ag->add_option("--out", grid_out, "output directory (stdout when omitted)");

  CommonFlags f;
  auto* ex = app.add_subcommand("explore", "fill the state buffer");
  auto* di = app.add_subcommand("discover", "train the VQ-VAE on the buffer");
  auto* le = app.add_subcommand("learn", "train the skill policy");
  auto* ru = app.add_subcommand("run", "full pipeline or baseline plus evaluation");
  auto* gs = app.add_subcommand("gridsearch", "cartesian product over the tuning sets");
  for (auto* sc : {ex, di, le, ru, gs}) add_common(sc, f);
  bool list_only = false;
  int limit = 0;
  gs->add_flag("--list", list_only, "print the configurations without running");
  gs->add_option("--limit", limit, "run only the first N configurations");

  std::string eval_dir;
  std::vector<int> interp;
  int steps = 5;
  auto* ev = app.add_subcommand("eval", "rollouts, goals, coverage and landscapes");
  ev->add_option("--out", eval_dir, "run directory")->required();
  ev->add_option("--interpolate", interp, "two skill indices")->expected(2);
  ev->add_option("--steps", steps, "interpolation points")->check(CLI::Range(2, 1000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*ag) return analyze_gridworld(grid_skills, grid_out);
    if (*ev) {
      pipeline::EvalOptions opts;
      if (!interp.empty()) opts.interpolate = std::make_pair(interp[0], interp[1]);
      opts.steps = steps;
      std::cout << pipeline::run_eval(eval_dir, opts).dump(1) << '\n';
      return 0;
    }
    const RunConfig config = resolve(f);
    if (*ex) {
      pipeline::stage_explore(config);
    } else if (*di) {
      pipeline::stage_discover(config);
    } else if (*le) {
      pipeline::stage_learn(config, printer(f.quiet));
    } else if (*ru) {
      pipeline::run_pipeline(config, printer(f.quiet));
      std::cout << pipeline::read_json(std::filesystem::path(config.out) / "eval/coverage.json")
                       .dump(1)
                << '\n';
    } else if (*gs) {
      return gridsearch(config, list_only, limit);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

int cli_main(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("skilllab");
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace skilllab
