// Command-line front end: gen-data, train, eval, verify, summarize.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nsp/errors.hpp"
#include "nsp/harness.hpp"

namespace {

// Flags that override the config file; unset flags leave the file's value.
struct Overrides {
  std::optional<std::string> config;
  std::optional<std::string> problem;
  std::optional<std::uint32_t> sites;
  std::optional<std::size_t> n_samp;
  std::optional<std::size_t> n_per_class;
  std::optional<std::string> network;
  std::optional<nsp::Dim> chi_max;
  std::optional<bool> share_layers;
  std::optional<double> alpha;
  std::optional<std::uint32_t> n_sweeps;
  std::optional<std::uint32_t> frozen_sweeps;
  std::optional<std::uint32_t> active_sweeps;
  std::optional<std::string> order;
  std::optional<std::uint32_t> convergence_window;
  std::optional<bool> early_stop;
  std::optional<std::string> test;
  std::optional<std::uint32_t> n_trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<std::uint32_t> jobs;

  void add_to(CLI::App& app, bool training) {
    app.add_option("--config", config, "JSON run config; flags override its values");
    app.add_option("--problem", problem, "parity | div7 | height");
    app.add_option("-N,--sites", sites, "string length N");
    app.add_option("--n-samp", n_samp, "training samples (parity, div7)");
    app.add_option("--n-per-class", n_per_class, "training samples per class (height)");
    app.add_option("--seed", seed, "run seed");
    if (!training) return;
    app.add_option("--network", network, "mps | ttn | mera");
    app.add_option("--chi-max", chi_max, "maximum bond dimension");
    app.add_option("--share-layers", share_layers, "one shared tensor per layer and role");
    app.add_option("--alpha", alpha, "randomness of the tensor updates; 0 is greedy");
    app.add_option("--sweeps", n_sweeps, "sweep cap without a schedule");
    app.add_option("--ttn-sweeps", frozen_sweeps, "schedule: sweeps with disentanglers frozen");
    app.add_option("--mera-sweeps", active_sweeps, "schedule: sweeps with disentanglers active");
    app.add_option("--order", order, "bottom-up | top-down");
    app.add_option("--convergence-window", convergence_window, "unchanged sweeps that count as converged");
    app.add_option("--early-stop", early_stop, "stop a phase once converged");
    app.add_option("--test", test, "automatic | exhaustive | sampled");
    app.add_option("--trials", n_trials, "number of trials");
    app.add_option("-o,--output-dir", output_dir, "output directory (default $NSPNET_OUTPUT_DIR or .)");
    app.add_option("-j,--jobs", jobs, "parallel trial workers");
  }

  nsp::RunConfig resolve() const {
    nsp::RunConfig cfg;
    cfg.output_dir = nsp::RunConfig::default_output_dir();
    if (config) cfg = nsp::load_run_config(*config);
    nlohmann::json doc = nlohmann::json::object();
    if (problem) doc["problem"] = *problem;
    if (sites) doc["N"] = *sites;
    if (n_samp) doc["n_samp"] = *n_samp;
    if (n_per_class) doc["n_per_class"] = *n_per_class;
    if (network) doc["network"] = *network;
    if (chi_max) doc["chi_max"] = *chi_max;
    if (share_layers) doc["share_layers"] = *share_layers;
    if (alpha) doc["alpha"] = *alpha;
    if (n_sweeps) doc["n_sweeps"] = *n_sweeps;
    if (order) doc["order"] = *order;
    if (convergence_window) doc["convergence_window"] = *convergence_window;
    if (early_stop) doc["early_stop"] = *early_stop;
    if (test) doc["test"] = *test;
    if (n_trials) doc["n_trials"] = *n_trials;
    if (seed) doc["seed"] = *seed;
    if (output_dir) doc["output_dir"] = *output_dir;
    if (jobs) doc["jobs"] = *jobs;
    if (frozen_sweeps || active_sweeps) {
      const auto current = cfg.schedule.value_or(nsp::Schedule{});
      doc["schedule"] = {{"frozen", frozen_sweeps.value_or(current.frozen_sweeps)},
                         {"active", active_sweeps.value_or(current.active_sweeps)}};
    }
    cfg.merge_json(doc);
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Number-state preserving tensor network classifiers"};
  app.require_subcommand(1);

  Overrides gen_flags;
  nsp::GenDataOptions gen_opts;
  auto* gen = app.add_subcommand("gen-data", "write a benchmark dataset file");
  gen_flags.add_to(*gen, false);
  gen->add_option("--out", gen_opts.path, "dataset path")->required();
  gen->add_flag("--test-set", gen_opts.test_set, "draw from the test stream of the seed");

  Overrides train_flags;
  std::optional<std::string> train_data;
  auto* train = app.add_subcommand("train", "run training trials");
  train_flags.add_to(*train, true);
  train->add_option("--data", train_data, "training set shared by all trials");

  nsp::EvalOptions eval_opts;
  std::optional<std::string> eval_problem;
  std::optional<std::string> eval_data;
  auto* eval = app.add_subcommand("eval", "accuracy and confusion counts of a saved model");
  eval->add_option("--model", eval_opts.model, "model file")->required();
  eval->add_option("--data", eval_data, "dataset file");
  eval->add_flag("--exhaustive", eval_opts.exhaustive, "evaluate every input string");
  eval->add_option("--problem", eval_problem, "ground truth for --exhaustive when the model lacks it");

  nsp::VerifyOptions verify_opts;
  auto* verify = app.add_subcommand("verify", "worked examples and oracle equivalence checks");
  verify->add_option("--instances", verify_opts.instances, "random instances per check");
  verify->add_option("--seed", verify_opts.seed, "instance seed");
  verify->add_option("--max-sites", verify_opts.max_sites, "largest instance N");
  verify->add_option("--max-dim", verify_opts.max_dim, "largest edge dimension");
  verify->add_option("--max-samples", verify_opts.max_samples, "largest instance dataset");

  std::string summary_path = ".";
  auto* summarize = app.add_subcommand("summarize", "summarize metrics.csv and summary.csv");
  summarize->add_option("path", summary_path, "output directory or metrics file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? nsp::kExitOk : nsp::kExitConfig;
  }

  try {
    if (*gen) return nsp::cmd_gen_data(gen_flags.resolve(), gen_opts, std::cout);
    if (*train) return nsp::cmd_train(train_flags.resolve(), nsp::TrainOptions{train_data}, std::cout);
    if (*eval) {
      eval_opts.dataset = eval_data;
      if (eval_problem) eval_opts.problem = nsp::problem_from_string(*eval_problem);
      return nsp::cmd_eval(eval_opts, std::cout);
    }
    if (*verify) return nsp::cmd_verify(verify_opts, std::cout);
    if (*summarize) return nsp::cmd_summarize(summary_path, std::cout);
  } catch (const std::exception& e) {
    return nsp::exit_code_for(e, std::cerr);
  }
  return nsp::kExitConfig;
}
