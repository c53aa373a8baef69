#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "cascade/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Steady Stokes solver for one spatial period of a 2D profile cascade"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int level = -1;
  int threads = 1;

  const std::vector<std::string> commands{"mesh",         "solve",    "convergence",
                                          "lift-check",   "tensor-check", "dq-check",
                                          "shift-check"};
  for (const auto& name : commands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--level", level, "refinement level for mesh/solve/dq-check");
    sub->add_option("--threads", threads,
                    "thread count; execution is serial, 1 keeps runs byte-reproducible");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    cascade::RunConfig cfg = cascade::load_config(config_path);
    if (!out_dir.empty()) cfg.directory = out_dir;
    (void)threads;  // all compute paths are deterministic and single-threaded
    return cascade::dispatch(app.get_subcommands().front()->get_name(), cfg, level);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
