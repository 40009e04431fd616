#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "hdc/hdc.hpp"

namespace hdc::cli {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return kExitIo;
    case ErrorKind::Parse: return kExitParse;
    case ErrorKind::CorruptModel: return kExitCorruptModel;
    case ErrorKind::InvalidConfiguration:
    case ErrorKind::InvalidDimension: return kExitConfig;
    case ErrorKind::InvalidRecord:
    case ErrorKind::InvalidArgument: return kExitInvalidInput;
    case ErrorKind::UnknownLabel: return kExitUnknownLabel;
  }
  return kExitFailure;
}

namespace {

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << "\n";
}

LabelMap label_map_for(const RunConfig& config) {
  LabelMap map = config.label_map_path.empty() ? nsl_kdd_label_map() : load_label_map(config.label_map_path);
  map.policy = config.strict_labels ? UnknownLabelPolicy::Strict : UnknownLabelPolicy::Fallback;
  return map;
}

std::vector<RawRecord> load_records(const std::string& path, std::ostream& err, bool allow_unlabeled = false) {
  if (path.empty()) throw Error(ErrorKind::InvalidConfiguration, "missing input path");
  auto parsed = parse_file(path, allow_unlabeled);
  if (parsed.malformed > 0)
    err << "warning: " << path << ": skipped " << parsed.malformed << " malformed line(s)\n";
  return std::move(parsed.records);
}

TrainOptions train_options(const RunConfig& config) {
  TrainOptions options;
  options.hyperparams.dim = config.dim;
  options.hyperparams.bins = config.bins;
  options.hyperparams.learning_rate = config.alpha;
  options.hyperparams.iterations = config.iterations;
  options.hyperparams.seed = config.seed;
  if (config.threshold) options.hyperparams.threshold = *config.threshold;
  options.schema.log_scale = config.log_scale;
  options.workers = resolve_workers(config.workers);
  return options;
}

void validate_hyperparams(const RunConfig& config) {
  if (config.dim == 0) throw Error(ErrorKind::InvalidConfiguration, "--dim must be >= 1");
  if (config.bins == 0 || config.bins > config.dim)
    throw Error(ErrorKind::InvalidConfiguration, "--bins must satisfy 1 <= bins <= dim");
  if (!(config.alpha > 0.0)) throw Error(ErrorKind::InvalidConfiguration, "--alpha must be > 0");
}

std::map<std::string, std::string> model_echo(const ClassModel& model) {
  const auto& hp = model.hyperparams;
  return {{"dim", std::to_string(hp.dim)},
          {"bins", std::to_string(hp.bins)},
          {"threshold", num(hp.threshold)},
          {"alpha", num(hp.learning_rate)},
          {"iterations", std::to_string(hp.iterations)},
          {"seed", std::to_string(hp.seed)},
          {"features", std::to_string(model.schema.size())}};
}

}  // namespace

std::map<std::string, std::string> RunConfig::echo() const {
  std::map<std::string, std::string> e = {{"dim", std::to_string(dim)},
                                          {"bins", std::to_string(bins)},
                                          {"alpha", num(alpha)},
                                          {"iterations", std::to_string(iterations)},
                                          {"threshold", threshold ? num(*threshold) : "N/2"},
                                          {"seed", std::to_string(seed)},
                                          {"log_scale", log_scale ? "true" : "false"}};
  if (!train_path.empty()) e["train"] = train_path;
  if (!test_path.empty()) e["test"] = test_path;
  if (!model_path.empty()) e["model"] = model_path;
  if (!label_map_path.empty()) e["label_map"] = label_map_path;
  return e;
}

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate_hyperparams(config);
    if (config.model_path.empty()) throw Error(ErrorKind::InvalidConfiguration, "missing --model output path");
    const auto labels = label_map_for(config);
    const auto records = load_records(config.train_path, err);
    const auto options = train_options(config);

    auto outcome = train_model(records, labels, options);
    print_warnings(outcome.warnings, err);

    out << "records: " << records.size() << "  features: " << outcome.model.schema.size()
        << "  dim: " << config.dim << "  bins: " << config.bins
        << "  threshold: " << outcome.model.hyperparams.threshold << "\n";
    out << std::fixed << std::setprecision(6);
    out << "epoch 0 accuracy " << outcome.initial_accuracy << " (centroids)\n";
    for (const auto& e : outcome.retraining.trace)
      out << "epoch " << e.epoch << " accuracy " << e.accuracy << " updates " << e.updates << "\n";
    if (outcome.retraining.converged) out << "converged: epoch made no updates\n";

    save_model(outcome.model, config.model_path);
    out << std::setprecision(3) << "wall time: " << outcome.wall_time_seconds << " s\n";
    out << "model written to " << config.model_path << "\n";
    return static_cast<int>(kExitOk);
  });
}

int cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto format = parse_report_format(config.format);
    if (config.model_path.empty()) throw Error(ErrorKind::InvalidConfiguration, "missing --model path");
    const auto model = load_model(config.model_path);
    const auto records = load_records(config.test_path, err);
    std::vector<std::string> warnings;
    auto report = evaluate(model, records, resolve_workers(config.workers), &warnings);
    print_warnings(warnings, err);
    report.config = model_echo(model);
    report.config["model"] = config.model_path;
    report.config["test"] = config.test_path;
    const auto rendered = render_report(report, format);
    out << rendered;
    if (!config.report_path.empty()) write_file_atomic(config.report_path, rendered);
    return static_cast<int>(kExitOk);
  });
}

int cmd_predict(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (config.model_path.empty()) throw Error(ErrorKind::InvalidConfiguration, "missing --model path");
    const auto model = load_model(config.model_path);
    const auto records = load_records(config.input_path, err, /*allow_unlabeled=*/true);
    const auto prepared = prepare_all(records, model.schema);
    const auto workers = resolve_workers(config.workers);
    const auto encoded = model.encoder().encode_batch(prepared, workers);
    const auto predictions = predict_batch(encoded, model, workers);

    std::ostringstream csv;
    if (!predictions.empty()) {
      csv << "index,predicted";
      for (const auto& name : model.schema.class_names) csv << ",sim_" << name;
      csv << "\n";
    }
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      const auto& p = predictions[i];
      csv << i << ',' << model.schema.class_names[p.class_index];
      for (double s : p.similarities) csv << ',' << num(s);
      csv << "\n";
    }
    if (config.output_path.empty())
      out << csv.str();
    else
      write_file_atomic(config.output_path, csv.str());
    return static_cast<int>(kExitOk);
  });
}

int cmd_split(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (config.input_path.empty() || config.train_out.empty() || config.test_out.empty())
      throw Error(ErrorKind::InvalidConfiguration, "split needs --input, --train-out and --test-out");
    if (!(config.fraction > 0.0 && config.fraction < 1.0))
      throw Error(ErrorKind::InvalidConfiguration, "--fraction must lie strictly between 0 and 1");

    // Keep the raw text of every line so the outputs are byte-exact copies.
    std::ifstream in(config.input_path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + config.input_path + "' for reading");
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    if (in.bad()) throw Error(ErrorKind::Io, "failed while reading '" + config.input_path + "'");

    std::string joined;
    for (const auto& l : lines) joined += l + "\n";
    std::istringstream text(joined);
    const auto parsed = parse_stream(text, config.input_path);
    if (parsed.malformed > 0) err << "warning: dropped " << parsed.malformed << " malformed line(s)\n";

    const auto labels = label_map_for(config);
    std::vector<std::string> warnings;
    const auto classes = map_labels(parsed.records, labels, &warnings);
    const auto cut = stratified_split(classes, labels.num_classes(), config.fraction, config.seed);
    warnings.insert(warnings.end(), cut.warnings.begin(), cut.warnings.end());
    print_warnings(warnings, err);

    const auto write = [&](const std::string& path, const std::vector<std::size_t>& indices) {
      std::string body;
      for (auto i : indices) body += lines[parsed.records[i].line - 1] + "\n";
      write_file_atomic(path, body);
    };
    write(config.train_out, cut.train);
    write(config.test_out, cut.test);
    out << "train: " << cut.train.size() << " lines -> " << config.train_out << "\n";
    out << "test: " << cut.test.size() << " lines -> " << config.test_out << "\n";
    return static_cast<int>(kExitOk);
  });
}

int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto labels = label_map_for(config);
    auto records = load_records(config.train_path, err);
    Dataset data;
    if (config.split_mode == "files") {
      data = split(std::move(records), labels, {SplitMode::FilePair, config.fraction, config.split_seed},
                   load_records(config.test_path, err));
    } else if (config.split_mode == "random") {
      data = split(std::move(records), labels, {SplitMode::RandomSplit, config.fraction, config.split_seed});
    } else {
      throw Error(ErrorKind::InvalidConfiguration, "--split-mode must be 'random' or 'files'");
    }
    print_warnings(data.warnings, err);

    const auto or_default = [](auto list, auto value) {
      if (list.empty()) list.push_back(value);
      return list;
    };
    const auto dims = or_default(config.sweep_dims, config.dim);
    const auto bins = or_default(config.sweep_bins, config.bins);
    const auto alphas = or_default(config.sweep_alphas, config.alpha);
    const auto seeds = or_default(config.sweep_seeds, config.seed);

    out << "dim,bins,alpha,seed,iterations,train_accuracy,test_accuracy,macro_f1,seconds,status\n";
    for (auto d : dims)
      for (auto k : bins)
        for (auto a : alphas)
          for (auto s : seeds) {
            RunConfig run = config;
            run.dim = d;
            run.bins = k;
            run.alpha = a;
            run.seed = s;
            out << d << ',' << k << ',' << num(a) << ',' << s << ',' << config.iterations << ',';
            try {
              validate_hyperparams(run);
              auto outcome = train_model(data.train, labels, train_options(run));
              const double train_acc = outcome.retraining.trace.empty() ? outcome.initial_accuracy
                                                                        : outcome.retraining.trace.back().accuracy;
              const auto report = evaluate(outcome.model, data.test, resolve_workers(run.workers));
              out << num(train_acc) << ',' << num(report.accuracy) << ',' << num(report.macro_f1) << ','
                  << std::fixed << std::setprecision(3) << outcome.wall_time_seconds + report.wall_time_seconds
                  << std::defaultfloat << ",ok\n";
            } catch (const std::exception& e) {
              std::string message = e.what();
              for (char& c : message)
                if (c == ',' || c == '\n') c = ';';
              out << ",,,,error: " << message << "\n";
              err << "warning: combination dim=" << d << " bins=" << k << " alpha=" << a << " seed=" << s
                  << " failed: " << e.what() << "\n";
            }
            out.flush();
          }
    return static_cast<int>(kExitOk);
  });
}

}  // namespace hdc::cli
