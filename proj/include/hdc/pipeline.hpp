#pragma once

// End-to-end training: schema -> codebook -> encode -> centroids -> retrain.

#include <chrono>
#include <string>
#include <vector>

#include "hdc/codebook.hpp"
#include "hdc/dataset.hpp"
#include "hdc/encoding.hpp"
#include "hdc/evaluation.hpp"
#include "hdc/model.hpp"

namespace hdc {

struct TrainOptions {
  Hyperparams hyperparams;
  SchemaOptions schema;
  std::size_t workers = 1;
};

struct TrainOutcome {
  ClassModel model;
  // Training accuracy of the centroid-only model, before any retraining.
  double initial_accuracy = 0.0;
  RetrainResult retraining;
  std::vector<std::string> warnings;
  double wall_time_seconds = 0.0;
};

inline TrainOutcome train_model(const std::vector<RawRecord>& records, const LabelMap& labels,
                                const TrainOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const auto& hp = options.hyperparams;
  if (hp.dim == 0) throw Error(ErrorKind::InvalidConfiguration, "dimension must be >= 1");
  if (hp.bins == 0 || hp.bins > hp.dim) throw Error(ErrorKind::InvalidConfiguration, "bins must satisfy 1 <= bins <= dim");
  if (!(hp.learning_rate > 0.0)) throw Error(ErrorKind::InvalidConfiguration, "learning rate must be > 0");
  if (records.empty()) throw Error(ErrorKind::InvalidArgument, "training set is empty");

  TrainOutcome out;
  auto& model = out.model;
  model.label_map = labels;
  model.schema = infer_schema(records, labels.class_names, options.schema);
  model.hyperparams = hp;
  model.hyperparams.threshold = hp.resolved_threshold(model.schema.size());
  model.codebook = build_codebook(model.schema, hp.dim, hp.bins, hp.seed);

  const auto truth = map_labels(records, labels, &out.warnings);
  const auto prepared = prepare_all(records, model.schema);
  const auto encoded = model.encoder().encode_batch(prepared, options.workers);

  model.representatives = train_initial(encoded, truth, labels.num_classes(), &out.warnings);

  const auto initial = predict_batch(encoded, model, options.workers);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < initial.size(); ++i) correct += initial[i].class_index == truth[i] ? 1 : 0;
  out.initial_accuracy = static_cast<double>(correct) / static_cast<double>(records.size());

  if (hp.iterations > 0) out.retraining = retrain(model, encoded, truth, hp.learning_rate, hp.iterations);

  out.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace hdc
