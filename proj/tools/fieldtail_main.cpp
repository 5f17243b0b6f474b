// Command-line front end; talks to the library only through fieldtail.h.
#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include "fieldtail/fieldtail.h"

namespace {

int report_error(ft_status st) {
  std::fprintf(stderr, "error [%s]: %s\n", ft_status_name(st), ft_last_error());
  return ft_status_is_validation(st) || st == FT_EMPTY_DIRECTORY || st == FT_IO ? 2 : 3;
}

int cmd_run(const std::string& config, const std::optional<std::uint64_t>& seed) {
  ft_run_result* r = nullptr;
  const std::uint64_t s = seed.value_or(0);
  const ft_status st = ft_run(config.c_str(), seed ? &s : nullptr, &r);
  if (r == nullptr) return report_error(st);
  const int code = ft_run_result_exit_code(r);
  if (code == 0) {
    std::printf("csv: %s\nmanifest: %s\n", ft_run_result_csv(r), ft_run_result_manifest(r));
  } else {
    std::fprintf(stderr, "error [%s]: %s\n", ft_status_name(st), ft_run_result_error(r));
    if (*ft_run_result_csv(r)) std::fprintf(stderr, "partial output: %s\n", ft_run_result_csv(r));
    if (*ft_run_result_manifest(r)) std::fprintf(stderr, "manifest: %s\n", ft_run_result_manifest(r));
  }
  ft_run_result_free(r);
  return code;
}

int cmd_validate(const std::string& config) {
  const ft_status st = ft_config_validate(config.c_str());
  if (st != FT_OK) return report_error(st);
  std::printf("ok\n");
  return 0;
}

int cmd_summarize(const std::string& dir) {
  const char* path = nullptr;
  std::size_t skipped = 0;
  const ft_status st = ft_summarize(dir.c_str(), &path, &skipped);
  if (st != FT_OK) return report_error(st);
  std::printf("report: %s\n", path);
  if (skipped) std::printf("skipped %zu corrupt row(s)\n", skipped);
  return 0;
}

int run_one_oracle(const char* name) {
  int passed = 0;
  const char* detail = nullptr;
  const ft_status st = ft_oracle_run(name, &passed, &detail);
  if (st != FT_OK) return report_error(st);
  std::printf("%s %s: %s\n", passed ? "PASS" : "FAIL", name, detail);
  return passed ? 0 : 1;
}

int cmd_oracle(const std::string& name, bool list) {
  if (list) {
    for (std::size_t i = 0; i < ft_oracle_count(); ++i) std::printf("%s\n", ft_oracle_name(i));
    return 0;
  }
  if (name == "all") {
    int worst = 0;
    for (std::size_t i = 0; i < ft_oracle_count(); ++i) worst = std::max(worst, run_one_oracle(ft_oracle_name(i)));
    return worst;
  }
  return run_one_oracle(name.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extremes of smooth random fields: experiment runner"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "worker threads (default: FIELDTAIL_THREADS or all cores)");
  app.set_version_flag("--version", std::string(ft_version()));

  std::string config, dir, oracle_name;
  std::optional<std::uint64_t> seed;
  bool list = false;

  auto* run = app.add_subcommand("run", "run the experiment described by a config or manifest");
  run->add_option("config", config, "config file")->required();
  run->add_option("--seed", seed, "override the config seed");

  auto* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("config", config, "config file")->required();

  auto* summarize = app.add_subcommand("summarize", "write a markdown report for a results directory");
  summarize->add_option("dir", dir, "results directory")->required();

  auto* oracle = app.add_subcommand("oracle", "run a built-in known-answer check ('all' runs every one)");
  oracle->add_option("name", oracle_name, "oracle name");
  oracle->add_flag("--list", list, "list oracle names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (threads > 0) ft_set_threads(threads);

  if (*run) return cmd_run(config, seed);
  if (*validate) return cmd_validate(config);
  if (*summarize) return cmd_summarize(dir);
  if (*oracle) {
    if (!list && oracle_name.empty()) {
      std::fprintf(stderr, "oracle: give a name or --list\n");
      return 2;
    }
    return cmd_oracle(oracle_name, list);
  }
  return 2;
}
