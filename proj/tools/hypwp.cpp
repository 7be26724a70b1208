#include <iostream>

#include "CLI11.hpp"
#include "hypwp/cli.hpp"

int main(int argc, char** argv) {
  using hypwp::cli::Command;
  hypwp::cli::RunConfig cfg;
  CLI::App app{"hypwp: weight functions, loss estimates and checks for weakly hyperbolic problems"};
  app.require_subcommand(1);

  const std::pair<const char*, Command> cmds[] = {
      {"analyze", Command::Analyze}, {"weights", Command::Weights}, {"simulate", Command::Simulate},
      {"verify", Command::Verify},   {"fit", Command::Fit}};
  for (const auto& [name, cmd] : cmds) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--spec", cfg.spec_path, "problem spec (JSON)")->required();
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_option("--xi-min", cfg.xi_min, "smallest <xi> on the grid");
    sub->add_option("--xi-max", cfg.xi_max, "largest <xi> on the grid");
    sub->add_option("--xi-points", cfg.xi_points, "grid size (>= 8)");
    sub->add_option("--tol", cfg.tol, "integrator tolerance");
    sub->add_option("--workers", cfg.workers, "parallel workers");
    sub->add_option("--seed", cfg.seed, "seed for sampled checks");
    const Command c = cmd;
    sub->callback([&cfg, c] { cfg.command = c; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return hypwp::cli::kInput;
  }

  const auto o = hypwp::cli::run(cfg);
  if (!o.summary.empty()) (o.code == 0 ? std::cout : std::cerr) << o.summary << "\n";
  for (const auto& f : o.files) std::cout << f << "\n";
  return o.code;
}
