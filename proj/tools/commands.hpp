#pragma once

// Subcommand implementations behind the hdc-ids CLI. Each returns a process
// exit code and writes only to the streams it is given.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hdc/error.hpp"
#include "hdc/random.hpp"

namespace hdc::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitParse = 4,
  kExitCorruptModel = 5,
  kExitInvalidInput = 6,
  kExitUnknownLabel = 7,
};

int exit_code_for(ErrorKind kind);

struct RunConfig {
  std::string train_path;
  std::string test_path;
  std::string input_path;
  std::string model_path;
  std::string label_map_path;
  std::string report_path;
  std::string output_path;
  std::string train_out;
  std::string test_out;

  std::size_t dim = 10000;
  std::size_t bins = 10;
  double alpha = 1.0;
  std::size_t iterations = 50;
  std::optional<double> threshold;
  std::uint64_t seed = kDefaultSeed;
  std::size_t workers = 0;
  bool log_scale = false;
  bool strict_labels = false;

  std::string split_mode = "random";
  double fraction = 0.8;
  std::uint64_t split_seed = kDefaultSeed;
  std::string format = "text";

  std::vector<std::size_t> sweep_dims;
  std::vector<std::size_t> sweep_bins;
  std::vector<double> sweep_alphas;
  std::vector<std::uint64_t> sweep_seeds;

  // Effective settings as key/value pairs, for report provenance.
  std::map<std::string, std::string> echo() const;
};

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_predict(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_split(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace hdc::cli
