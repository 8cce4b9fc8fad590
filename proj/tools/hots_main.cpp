// Command-line front end: parses a run configuration and executes one stage
// of the offline/online/reconstruct/reference/compare pipeline (or all of
// them in order).

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>

#include "hots/config.hpp"
#include "hots/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multiscale thermo-mechanical homogenization toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;

  const std::vector<std::string> stages = {"offline",   "online",  "reconstruct",
                                           "reference", "compare", "all"};
  for (const std::string& st : stages) {
    CLI::App* sub = app.add_subcommand(st, "run the '" + st + "' stage");
    sub->add_option("--config", config_path, "path to the run configuration")
        ->required();
    sub->add_option("--out", out_override, "override the output directory");
  }

  CLI11_PARSE(app, argc, argv);

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    hots::RunConfig cfg = hots::parse_config(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    hots::Pipeline pipe(std::move(cfg));
    pipe.run_stage(stage);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error [%s]: %s\n", stage.c_str(), e.what());
    return 1;
  }
  return 0;
}
