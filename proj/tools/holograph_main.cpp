#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>

#include "holograph/commands.hpp"
#include "holograph/errors.hpp"
#include "holograph/io_util.hpp"

namespace {

using namespace holograph;

struct CommonFlags {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool deterministic = false;
  std::uint32_t threads = 0;
};

struct Cli {
  CLI::App* prep = nullptr;
  CLI::App* train = nullptr;
  CLI::App* eval = nullptr;
  CLI::App* explore = nullptr;
  CLI::App* ablate = nullptr;
  CLI::App* gradcheck = nullptr;
  CLI::App* synth = nullptr;

  CommonFlags prep_flags, train_flags, eval_flags, explore_flags, ablate_flags, grad_flags;
  std::string eval_checkpoint;
  std::vector<std::string> explore_setups;
  std::string ablate_axis;
  std::string synth_out = "synth_data";
  std::uint64_t synth_seed = 1;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* opt = cmd->add_option("--config", flags.config_file, "run configuration (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--seed", flags.seed, "override the config seed");
  cmd->add_option("--out", flags.out_dir, "override the output directory");
  cmd->add_flag("--deterministic", flags.deterministic,
                "bit-stable gradient reduction regardless of thread count");
  cmd->add_option("--threads", flags.threads, "worker threads (0 = hardware)");
}

void register_commands(CLI::App& app, Cli& cli) {
  cli.prep = app.add_subcommand("prep", "preprocess a dataset into a sample store");
  add_common(cli.prep, cli.prep_flags, true);

  cli.train = app.add_subcommand("train", "train phase masks; writes checkpoint + metrics");
  add_common(cli.train, cli.train_flags, true);

  cli.eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  add_common(cli.eval, cli.eval_flags, true);
  cli.eval->add_option("--checkpoint", cli.eval_checkpoint,
                       "checkpoint file (default: <out_dir>/checkpoint.hgr)");

  cli.explore = app.add_subcommand("explore", "compare skip-channel setups");
  add_common(cli.explore, cli.explore_flags, true);
  cli.explore->add_option("--setups", cli.explore_setups, "subset of none,1..6")
      ->delimiter(',')
      ->required();

  cli.ablate = app.add_subcommand("ablate", "sweep one input-encoding axis");
  add_common(cli.ablate, cli.ablate_flags, true);
  cli.ablate->add_option("--axis", cli.ablate_axis, "k, d or score")->required();

  cli.gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient audit");
  add_common(cli.gradcheck, cli.grad_flags, false);

  cli.synth = app.add_subcommand("synth", "generate the synthetic two-clique dataset");
  cli.synth->add_option("--out", cli.synth_out, "dataset directory");
  cli.synth->add_option("--seed", cli.synth_seed, "generator seed");

  app.require_subcommand(1);
}

RunConfig load_config(const CommonFlags& flags) {
  RunConfig cfg;
  if (!flags.config_file.empty()) cfg = parse_run_config(flags.config_file);
  if (flags.seed) cfg.seed = *flags.seed;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  return cfg;
}

RunControls controls_for(const CommonFlags& flags, bool log_epochs) {
  RunControls controls;
  controls.deterministic = flags.deterministic;
  controls.threads = flags.threads;
  if (log_epochs)
    controls.progress = [](const EpochMetrics& m) {
      std::cerr << "epoch " << m.epoch << "  loss " << format_double(m.train_loss) << "  train "
                << format_double(m.train_acc) << "  test " << format_double(m.test_acc) << "\n";
    };
  return controls;
}

// Wall-clock note on stderr so machine-readable stdout stays deterministic.
class Stopwatch {
 public:
  ~Stopwatch() {
    const auto dt = std::chrono::steady_clock::now() - start_;
    std::cerr << "elapsed "
              << std::chrono::duration_cast<std::chrono::milliseconds>(dt).count() / 1000.0
              << " s\n";
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int dispatch(const Cli& cli) {
  if (cli.prep->parsed()) {
    Stopwatch timer;
    auto out = cmd_prep(load_config(cli.prep_flags));
    std::cout << "wrote " << out.store.string() << ": " << out.num_nodes << " nodes, "
              << out.num_classes << " classes, " << out.train_count << " train / "
              << out.test_count << " test\n";
    return 0;
  }
  if (cli.train->parsed()) {
    Stopwatch timer;
    auto out = cmd_train(load_config(cli.train_flags), controls_for(cli.train_flags, true));
    std::cout << "checkpoint " << out.checkpoint.string() << "\nmetrics "
              << out.metrics_csv.string() << "\nfinal test accuracy "
              << format_double(out.final_metrics.test_acc) << "\n";
    return 0;
  }
  if (cli.eval->parsed()) {
    Stopwatch timer;
    auto cfg = load_config(cli.eval_flags);
    std::filesystem::path ckpt =
        cli.eval_checkpoint.empty() ? checkpoint_path(cfg) : std::filesystem::path(cli.eval_checkpoint);
    auto out = cmd_eval(cfg, ckpt, controls_for(cli.eval_flags, false));
    std::cout << "test accuracy " << format_double(out.accuracy) << "\nconfusion "
              << out.confusion_csv.string() << "\n";
    return 0;
  }
  if (cli.explore->parsed()) {
    Stopwatch timer;
    auto out = cmd_explore(load_config(cli.explore_flags), cli.explore_setups,
                           controls_for(cli.explore_flags, true));
    std::cout << "wrote " << out.csv.string() << "\n";
    for (std::size_t i = 0; i < out.variants.size(); ++i)
      std::cout << out.variants[i] << " best " << format_double(out.best_acc[i]) << "\n";
    return 0;
  }
  if (cli.ablate->parsed()) {
    Stopwatch timer;
    auto out = cmd_ablate(load_config(cli.ablate_flags), cli.ablate_axis,
                          controls_for(cli.ablate_flags, true));
    std::cout << "wrote " << out.csv.string() << "\n";
    for (std::size_t i = 0; i < out.variants.size(); ++i)
      std::cout << out.variants[i] << " best " << format_double(out.best_acc[i]) << "\n";
    return 0;
  }
  if (cli.gradcheck->parsed()) {
    Stopwatch timer;
    auto report = cmd_gradcheck(load_config(cli.grad_flags));
    std::cout << "checked " << report.params_checked << " parameters, max rel err "
              << format_double(report.max_rel_err) << " (tolerance "
              << format_double(report.tolerance) << "): " << (report.passed ? "PASS" : "FAIL")
              << "\n";
    return report.passed ? 0 : 1;
  }
  if (cli.synth->parsed()) {
    cmd_synth(cli.synth_out, cli.synth_seed);
    std::cout << "wrote dataset " << cli.synth_out << "\n";
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"holograph: diffractive optical network trainer for graph node classification"};
  Cli cli;
  register_commands(app, cli);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    return dispatch(cli);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 3;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
