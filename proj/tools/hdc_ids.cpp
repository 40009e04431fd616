// hdc-ids: hyperdimensional intrusion classifier for NSL-KDD records.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using hdc::cli::RunConfig;

void add_hyperparams(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--dim,-D", c.dim, "Hypervector dimension D")->capture_default_str();
  cmd->add_option("--bins,-K", c.bins, "Value bins K per continuous feature")->capture_default_str();
  cmd->add_option("--alpha", c.alpha, "Retraining learning rate")->capture_default_str();
  cmd->add_option("--iterations", c.iterations, "Retraining epochs (0 = centroids only)")->capture_default_str();
  cmd->add_option("--threshold,-T", c.threshold,
                  "Binarization threshold; bit is set when the bundled sum is > T [default: N/2, half the "
                  "feature count]");
  cmd->add_option("--seed", c.seed, "Master seed for the codebook and sample order")->capture_default_str();
  cmd->add_flag("--log-scale", c.log_scale, "Bin continuous features over log1p(x) instead of x");
}

void add_labels(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--label-map", c.label_map_path,
                  "raw_label,category file [default: built-in NSL-KDD grouping]");
  cmd->add_flag("--strict-labels", c.strict_labels, "Fail on labels missing from the label map");
}

void add_workers(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--workers,-j", c.workers,
                  "Worker threads for encoding/evaluation [default: $HDC_WORKERS, else all cores]");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperdimensional-computing intrusion classifier for NSL-KDD (normal, DoS, probe, R2L, U2R)"};
  app.set_config("--config", "", "Read options from a TOML/INI file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  RunConfig c;

  auto* train = app.add_subcommand("train", "Train a model and write it to --model");
  train->add_option("--train", c.train_path, "Training file (NSL-KDD format)")->required();
  train->add_option("--model,-m", c.model_path, "Output model file")->required();
  add_hyperparams(train, c);
  add_labels(train, c);
  add_workers(train, c);

  auto* evaluate = app.add_subcommand("evaluate", "Score a model on a labelled file");
  evaluate->add_option("--model,-m", c.model_path, "Model file")->required();
  evaluate->add_option("--test", c.test_path, "Test file (NSL-KDD format)")->required();
  evaluate->add_option("--format", c.format, "Report format: text, json or csv")
      ->check(CLI::IsMember({"text", "json", "csv"}))
      ->capture_default_str();
  evaluate->add_option("--report", c.report_path, "Also write the report to this file");
  add_workers(evaluate, c);

  auto* predict = app.add_subcommand("predict", "Classify records; CSV of index, class and similarities");
  predict->add_option("--model,-m", c.model_path, "Model file")->required();
  predict->add_option("--input", c.input_path, "Records to classify (labels, if present, are ignored)")->required();
  predict->add_option("--output,-o", c.output_path, "Write CSV here instead of standard output");
  add_workers(predict, c);

  auto* split = app.add_subcommand("split", "Seeded class-stratified train/test split of one file");
  split->add_option("--input", c.input_path, "File to split")->required();
  split->add_option("--train-out", c.train_out, "Output for the train share")->required();
  split->add_option("--test-out", c.test_out, "Output for the test share")->required();
  split->add_option("--fraction", c.fraction, "Train share, strictly between 0 and 1")->capture_default_str();
  split->add_option("--seed", c.seed, "Shuffle seed")->capture_default_str();
  add_labels(split, c);

  auto* sweep = app.add_subcommand("sweep", "Train and score every (dim, bins, alpha, seed) combination");
  sweep->add_option("--train", c.train_path, "Training file, or the file to split in random mode")->required();
  sweep->add_option("--test", c.test_path, "Test file for --split-mode files");
  sweep->add_option("--split-mode", c.split_mode, "random (stratified split of --train) or files")
      ->check(CLI::IsMember({"random", "files"}))
      ->capture_default_str();
  sweep->add_option("--fraction", c.fraction, "Train share in random mode")->capture_default_str();
  sweep->add_option("--split-seed", c.split_seed, "Seed of the random split")->capture_default_str();
  sweep->add_option("--dims", c.sweep_dims, "Dimensions to try [default: --dim]")->delimiter(',');
  sweep->add_option("--bins-list", c.sweep_bins, "Bin counts to try [default: --bins]")->delimiter(',');
  sweep->add_option("--alphas", c.sweep_alphas, "Learning rates to try [default: --alpha]")->delimiter(',');
  sweep->add_option("--seeds", c.sweep_seeds, "Seeds to try [default: --seed]")->delimiter(',');
  add_hyperparams(sweep, c);
  add_labels(sweep, c);
  add_workers(sweep, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return hdc::cli::kExitConfig;
  }

  if (train->parsed()) return hdc::cli::cmd_train(c, std::cout, std::cerr);
  if (evaluate->parsed()) return hdc::cli::cmd_evaluate(c, std::cout, std::cerr);
  if (predict->parsed()) return hdc::cli::cmd_predict(c, std::cout, std::cerr);
  if (split->parsed()) return hdc::cli::cmd_split(c, std::cout, std::cerr);
  if (sweep->parsed()) return hdc::cli::cmd_sweep(c, std::cout, std::cerr);
  return hdc::cli::kExitConfig;
}
