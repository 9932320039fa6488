// agentnet: run a scenario with the agent-based controller, the monolithic
// controller, or both and compare them.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "agentnet/error.hpp"
#include "agentnet/oracle.hpp"
#include "agentnet/system.hpp"

namespace fs = std::filesystem;
using namespace agentnet;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out{path, std::ios::binary};
  if (!out)
    throw error{errc::file_error, "cannot write " + path.string()};
  out << text;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::string text;
  for (auto& l : lines)
    text += l + '\n';
  write_file(path, text);
}

int run(const std::string& config_path, std::optional<std::string> mode,
        std::optional<std::uint64_t> seed, const std::string& out_dir) {
  auto cfg = load_config_file(config_path);
  if (mode)
    cfg.mode = *mode;
  if (seed)
    cfg.seed = seed;
  if (cfg.seed)
    cfg.run.scen.seed = *cfg.seed;
  fs::create_directories(out_dir);
  fs::path out{out_dir};

  if (cfg.mode == "monolithic") {
    std::vector<std::string> log;
    auto outcome = run_monolithic(cfg.run, &log);
    write_file(out / "outcome.json", outcome.to_datum().dump(2) + "\n");
    write_file(out / "stats.csv", netsim::stats_csv(outcome.stats));
    write_lines(out / "run.log", log);
    std::cout << "monolithic: " << outcome.sessions.size() << " sessions, "
              << outcome.metrics.flows_completed << "/"
              << outcome.metrics.flows << " flows completed\n";
    return 0;
  }

  auto agents = run_agents(cfg.run);
  write_file(out / "outcome.json", agents.outcome.to_datum().dump(2) + "\n");
  write_file(out / "stats.csv", netsim::stats_csv(agents.stats));
  std::cout << "agents: " << agents.outcome.sessions.size() << " sessions, "
            << agents.outcome.metrics.flows_completed << "/"
            << agents.outcome.metrics.flows << " flows completed\n";
  if (cfg.mode == "agents") {
    write_lines(out / "run.log", agents.log);
    return agents.settled ? 0 : 1;
  }

  std::vector<std::string> mono_log;
  auto mono = run_monolithic(cfg.run, &mono_log);
  auto log = agents.log;
  log.insert(log.end(), mono_log.begin(), mono_log.end());
  write_lines(out / "run.log", log);
  write_file(out / "outcome.monolithic.json", mono.to_datum().dump(2) + "\n");
  auto diff = compare(agents.outcome, mono);
  write_file(out / "diff.json", diff.to_datum().dump(2) + "\n");
  std::cout << diff.to_text();
  return diff.empty() && agents.settled ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agent-based SDN controller runner"};
  app.require_subcommand(1);
  auto* cmd = app.add_subcommand("run", "Run a scenario from a config file");
  std::string config;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  cmd->add_option("config", config, "run configuration (JSON)")->required();
  cmd->add_option("--mode", mode, "agents, monolithic or compare")
    ->check(CLI::IsMember({"agents", "monolithic", "compare"}));
  cmd->add_option("--seed", seed, "override the scenario seed");
  cmd->add_option("--out-dir", out_dir, "directory for output artifacts");
  CLI11_PARSE(app, argc, argv);
  try {
    return run(config, mode, seed, out_dir);
  } catch (const error& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  }
}
