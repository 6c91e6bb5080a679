// Command-line front end: run scenario files, replicate the shipped figure
// suites, report routing margins and solve small DP instances.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bpsim/mdp.hpp"
#include "bpsim/plot.hpp"
#include "bpsim/report.hpp"
#include "bpsim/scenario.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace bpsim;

namespace {

constexpr int kConfigExit = 2;
constexpr int kInvariantExit = 3;

struct Options {
  std::string out;
  int jobs = 1;
  std::string file;
  std::string figure;
  std::optional<std::uint64_t> seed;
  std::optional<long> slots;
  std::optional<int> replications;
  std::string csv;
  std::string plot;
  bool no_plot = false;
};

fs::path output_dir(const Options& o) {
  std::string dir = o.out;
  if (dir.empty()) {
    const char* env = std::getenv("BPSIM_OUT_DIR");
    dir = env && *env ? env : ".";
  }
  fs::create_directories(dir);
  return dir;
}

fs::path scenario_dir() {
  const char* env = std::getenv("BPSIM_SCENARIO_DIR");
  return env && *env ? fs::path(env) : fs::path(BPSIM_SCENARIO_DIR);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void apply_overrides(Scenario& s, const Options& o) {
  if (o.seed) s.engine.seed = *o.seed;
  if (o.slots) {
    if (*o.slots < 1) throw ConfigError("--slots must be positive");
    s.engine.slots = *o.slots;
    if (s.engine.warmup >= s.engine.slots) s.engine.warmup = -1;
  }
  if (o.replications) {
    if (*o.replications < 1) throw ConfigError("--reps must be positive");
    if (s.sweep) s.sweep->replications = *o.replications;
  }
}

// Runs the scenario, writes CSV, meta and (optionally) the plot, prints the headline.
int execute(const Scenario& s, const Options& o, const std::string& command, bool plot_by_default) {
  const fs::path dir = output_dir(o);
  const std::string csv_name = !o.csv.empty() ? o.csv : (!s.csv.empty() ? s.csv : s.id + ".csv");
  std::string plot_name = !o.plot.empty() ? o.plot : s.plot;
  if (plot_name.empty() && plot_by_default) plot_name = s.id + ".svg";
  if (o.no_plot) plot_name.clear();

  const auto rows = run_scenario(s, o.jobs);
  const fs::path csv_path = dir / csv_name;
  write_file(csv_path, results_csv(rows));

  nlohmann::json meta;
  meta["version"] = BPSIM_VERSION;
  meta["command"] = command;
  meta["scenario"] = s.id;
  meta["seed"] = s.engine.seed;
  meta["slots"] = s.engine.slots;
  meta["rows"] = rows.size();
  meta["headline"] = nlohmann::json::parse(headline_json(s, rows));
  fs::path meta_path = csv_path;
  meta_path.replace_extension(".meta.json");
  write_file(meta_path, meta.dump(2) + "\n");

  if (!plot_name.empty()) write_file(dir / plot_name, render_svg(scenario_plot(s, rows)));
  std::cout << headline(s, rows);
  std::cout << "wrote " << csv_path.string() << " (" << rows.size() << " rows)";
  if (!plot_name.empty()) std::cout << " and " << (dir / plot_name).string();
  std::cout << "\n";
  return 0;
}

int cmd_run(const Options& o) {
  Scenario s = load_scenario(o.file);
  apply_overrides(s, o);
  return execute(s, o, "run", false);
}

int cmd_replicate(const Options& o) {
  Scenario s = load_scenario((scenario_dir() / (o.figure + ".json")).string());
  // The fig2 file carries one biased baseline; the figure also shows B = 2 and 10.
  if (o.figure == "fig2") {
    s.policies.push_back({Algorithm::bpbias, 1.0, 2.0});
    s.policies.push_back({Algorithm::bpbias, 1.0, 10.0});
  }
  apply_overrides(s, o);
  return execute(s, o, "replicate " + o.figure, true);
}

int cmd_margin(const Options& o) {
  Scenario s = load_scenario(o.file);
  std::cout << format_margin_report(margin_report(s));
  return 0;
}

int cmd_dp(const Options& o) {
  std::ifstream in(o.file, std::ios::binary);
  if (!in) throw ConfigError(o.file + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  const MdpSpec spec = mdp_from_json(ss.str());
  const auto vi = relative_value_iteration(spec);
  const auto opt = evaluate_policy(spec, optimal_policy(spec, vi.V));
  const auto bp = evaluate_policy(spec, bp_policy(spec));
  const auto asym = evaluate_policy(spec, asymptotic_policy(spec, vi.V));
  std::cout << "states: " << spec.num_states() << ", iterations: " << vi.iterations
            << (vi.converged ? "" : " (not converged)") << "\n";
  std::cout << std::setprecision(10);
  std::cout << "optimal average cost d: " << vi.d << "\n";
  std::cout << "optimal policy (evaluated): " << opt.average_cost << ", drop rate " << opt.drop_rate << "\n";
  std::cout << "asymptotic policy: " << asym.average_cost << "\n";
  std::cout << "backpressure: " << bp.average_cost << ", gap to optimal " << bp.average_cost - vi.d << "\n";
  const fs::path dir = output_dir(o);
  const std::string stem = fs::path(o.file).stem().string();
  write_file(dir / (stem + "_values.csv"), value_table_csv(spec, vi));
  write_file(dir / (stem + "_policy.csv"), policy_table_csv(spec, optimal_policy(spec, vi.V)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backpressure routing simulator"};
  app.set_version_flag("--version", std::string(BPSIM_VERSION));
  app.require_subcommand(1);
  Options o;
  app.add_option("--out", o.out, "Output directory (default: $BPSIM_OUT_DIR or .)");
  app.add_option("--jobs", o.jobs, "Parallel runs")->check(CLI::PositiveNumber);

  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Base seed");
    sub->add_option("--slots", o.slots, "Slots per run");
    sub->add_option("--reps", o.replications, "Replications per sweep value");
    sub->add_option("--csv", o.csv, "CSV file name inside the output directory");
    sub->add_option("--plot", o.plot, "SVG plot file name inside the output directory");
    sub->add_flag("--no-plot", o.no_plot, "Skip the plot");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--jobs", o.jobs, "Parallel runs")->check(CLI::PositiveNumber);
  };

  auto* run = app.add_subcommand("run", "Run a scenario file");
  run->add_option("file", o.file, "Scenario JSON")->required();
  add_run_flags(run);

  auto* rep = app.add_subcommand("replicate", "Run a shipped figure suite");
  rep->add_option("figure", o.figure, "fig2 | fig3 | fig4 | fig5 | fig6")
      ->required()
      ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5", "fig6"}));
  add_run_flags(rep);

  auto* margin = app.add_subcommand("margin", "Routing margin report for a scenario");
  margin->add_option("file", o.file, "Scenario JSON")->required();

  auto* dp = app.add_subcommand("dp", "Solve a small MDP instance and compare policies");
  dp->add_option("file", o.file, "MDP JSON")->required();
  dp->add_option("--out", o.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigExit;
  }

  try {
    if (*run) return cmd_run(o);
    if (*rep) return cmd_replicate(o);
    if (*margin) return cmd_margin(o);
    if (*dp) return cmd_dp(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kInvariantExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
