#pragma once

// Confusion matrix, per-class metrics and report rendering.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iomanip>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdc/dataset.hpp"
#include "hdc/error.hpp"
#include "hdc/model.hpp"
#include "hdc/parallel.hpp"

namespace hdc {

class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;

  explicit ConfusionMatrix(std::vector<std::string> class_names)
      : names_(std::move(class_names)), counts_(names_.size() * names_.size(), 0) {}

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& class_names() const noexcept { return names_; }

  // Rows are true classes, columns predicted classes.
  std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_.at(truth * size() + predicted); }

  void add(std::size_t truth, std::size_t predicted, std::size_t n = 1) {
    if (truth >= size() || predicted >= size()) throw Error(ErrorKind::InvalidArgument, "class index out of range");
    counts_[truth * size() + predicted] += n;
  }

  void merge(const ConfusionMatrix& other) {
    if (other.names_ != names_) throw Error(ErrorKind::InvalidArgument, "cannot merge matrices over different classes");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  }

  std::size_t total() const {
    std::size_t n = 0;
    for (auto c : counts_) n += c;
    return n;
  }

  std::size_t trace() const {
    std::size_t n = 0;
    for (std::size_t c = 0; c < size(); ++c) n += at(c, c);
    return n;
  }

  std::size_t row_sum(std::size_t truth) const {
    std::size_t n = 0;
    for (std::size_t p = 0; p < size(); ++p) n += at(truth, p);
    return n;
  }

  std::size_t column_sum(std::size_t predicted) const {
    std::size_t n = 0;
    for (std::size_t t = 0; t < size(); ++t) n += at(t, predicted);
    return n;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<std::size_t> counts_;
};

struct ClassMetrics {
  std::string name;
  std::size_t support = 0;    // true members
  std::size_t predicted = 0;  // predicted members
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // False when the denominator was zero; the value is then reported as 0.
  bool precision_defined = false;
  bool recall_defined = false;
  // Neither present in the truth nor ever predicted.
  bool absent = false;
};

struct EvaluationReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  // Unweighted mean F1 over the classes that are not absent.
  double macro_f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  ConfusionMatrix matrix;
  std::size_t degenerate = 0;
  // Effective configuration, echoed for provenance.
  std::map<std::string, std::string> config;
  double wall_time_seconds = 0.0;
};

inline EvaluationReport make_report(const ConfusionMatrix& matrix) {
  const auto total = matrix.total();
  if (total == 0) throw Error(ErrorKind::InvalidArgument, "cannot evaluate an empty test set");
  EvaluationReport report;
  report.matrix = matrix;
  report.total = total;
  report.correct = matrix.trace();
  report.accuracy = static_cast<double>(report.correct) / static_cast<double>(total);

  double f1_sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < matrix.size(); ++c) {
    ClassMetrics m;
    m.name = matrix.class_names()[c];
    m.support = matrix.row_sum(c);
    m.predicted = matrix.column_sum(c);
    const auto hits = static_cast<double>(matrix.at(c, c));
    m.precision_defined = m.predicted > 0;
    m.recall_defined = m.support > 0;
    m.absent = m.support == 0 && m.predicted == 0;
    if (m.precision_defined) m.precision = hits / static_cast<double>(m.predicted);
    if (m.recall_defined) m.recall = hits / static_cast<double>(m.support);
    if (m.precision + m.recall > 0.0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    if (!m.absent) {
      f1_sum += m.f1;
      ++present;
    }
    report.per_class.push_back(std::move(m));
  }
  report.macro_f1 = present > 0 ? f1_sum / static_cast<double>(present) : 0.0;
  return report;
}

inline EvaluationReport make_report(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                                    const std::vector<std::string>& class_names) {
  if (truth.size() != predicted.size()) throw Error(ErrorKind::InvalidArgument, "truth/prediction length mismatch");
  ConfusionMatrix matrix(class_names);
  for (std::size_t i = 0; i < truth.size(); ++i) matrix.add(truth[i], predicted[i]);
  return make_report(matrix);
}

struct EvaluationRun {
  EvaluationReport report;
  std::vector<Prediction> predictions;
  std::vector<std::size_t> truth;
};

// Encodes, predicts and scores `records` against `model`.
inline EvaluationRun evaluate_detailed(const ClassModel& model, const std::vector<RawRecord>& records,
                                       std::size_t workers = 1, std::vector<std::string>* warnings = nullptr) {
  const auto start = std::chrono::steady_clock::now();
  if (records.empty()) throw Error(ErrorKind::InvalidArgument, "cannot evaluate an empty test set");
  EvaluationRun run;
  run.truth = map_labels(records, model.label_map, warnings);
  const auto prepared = prepare_all(records, model.schema);
  const auto encoder = model.encoder();
  const auto encoded = encoder.encode_batch(prepared, workers);
  run.predictions = predict_batch(encoded, model, workers);

  ConfusionMatrix matrix(model.schema.class_names);
  std::size_t degenerate = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    matrix.add(run.truth[i], run.predictions[i].class_index);
    if (run.predictions[i].degenerate) ++degenerate;
  }
  run.report = make_report(matrix);
  run.report.degenerate = degenerate;
  run.report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

inline EvaluationReport evaluate(const ClassModel& model, const std::vector<RawRecord>& records,
                                 std::size_t workers = 1, std::vector<std::string>* warnings = nullptr) {
  return evaluate_detailed(model, records, workers, warnings).report;
}

// ---------------------------------------------------------------------------
// Rendering

enum class ReportFormat { Json, Csv, Text };

inline ReportFormat parse_report_format(const std::string& name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  if (name == "text") return ReportFormat::Text;
  throw Error(ErrorKind::InvalidConfiguration, "unknown report format '" + name + "' (json, csv, text)");
}

inline nlohmann::ordered_json report_to_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["accuracy"] = report.accuracy;
  j["macro_f1"] = report.macro_f1;
  j["total"] = report.total;
  j["correct"] = report.correct;
  j["degenerate"] = report.degenerate;
  auto classes = nlohmann::ordered_json::array();
  for (const auto& m : report.per_class) {
    nlohmann::ordered_json c;
    c["name"] = m.name;
    c["support"] = m.support;
    c["predicted"] = m.predicted;
    c["precision"] = m.precision;
    c["recall"] = m.recall;
    c["f1"] = m.f1;
    c["precision_defined"] = m.precision_defined;
    c["recall_defined"] = m.recall_defined;
    c["absent"] = m.absent;
    classes.push_back(std::move(c));
  }
  j["classes"] = std::move(classes);
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < report.matrix.size(); ++t) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t p = 0; p < report.matrix.size(); ++p) row.push_back(report.matrix.at(t, p));
    rows.push_back(std::move(row));
  }
  j["confusion_matrix"] = {{"labels", report.matrix.class_names()}, {"counts", std::move(rows)}};
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.config) config[k] = v;
  j["config"] = std::move(config);
  j["wall_time_seconds"] = report.wall_time_seconds;
  return j;
}

namespace detail {

inline std::string fixed(double v, int digits) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

inline std::string full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline std::string render_report(const EvaluationReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json:
      return report_to_json(report).dump(2) + "\n";

    case ReportFormat::Csv: {
      std::ostringstream out;
      out << "class,support,predicted,precision,recall,f1,accuracy\n";
      double p_sum = 0.0;
      double r_sum = 0.0;
      std::size_t present = 0;
      for (const auto& m : report.per_class) {
        out << m.name << ',' << m.support << ',' << m.predicted << ',' << detail::full(m.precision) << ','
            << detail::full(m.recall) << ',' << detail::full(m.f1) << ",\n";
        if (!m.absent) {
          p_sum += m.precision;
          r_sum += m.recall;
          ++present;
        }
      }
      const double denom = present > 0 ? static_cast<double>(present) : 1.0;
      out << "macro," << report.total << ',' << report.total << ',' << detail::full(p_sum / denom) << ','
          << detail::full(r_sum / denom) << ',' << detail::full(report.macro_f1) << ','
          << detail::full(report.accuracy) << '\n';
      return out.str();
    }

    case ReportFormat::Text: {
      std::ostringstream out;
      out << "accuracy: " << detail::fixed(report.accuracy, 4) << " (" << report.correct << "/" << report.total
          << ")\n";
      out << "macro F1: " << detail::fixed(report.macro_f1, 4) << "\n";
      if (report.degenerate > 0) out << "degenerate predictions: " << report.degenerate << "\n";
      std::size_t width = 9;
      for (const auto& n : report.matrix.class_names()) width = std::max(width, n.size() + 2);
      out << "\nconfusion matrix (rows = true, columns = predicted)\n" << std::setw(static_cast<int>(width)) << "";
      for (const auto& n : report.matrix.class_names()) out << std::setw(static_cast<int>(width)) << n;
      out << "\n";
      for (std::size_t t = 0; t < report.matrix.size(); ++t) {
        out << std::setw(static_cast<int>(width)) << report.matrix.class_names()[t];
        for (std::size_t p = 0; p < report.matrix.size(); ++p)
          out << std::setw(static_cast<int>(width)) << report.matrix.at(t, p);
        out << "\n";
      }
      out << "\n" << std::setw(static_cast<int>(width)) << "class" << std::setw(10) << "support" << std::setw(11)
          << "precision" << std::setw(10) << "recall" << std::setw(10) << "f1" << "\n";
      for (const auto& m : report.per_class) {
        out << std::setw(static_cast<int>(width)) << m.name << std::setw(10) << m.support << std::setw(11)
            << (m.precision_defined ? detail::fixed(m.precision, 4) : "n/a") << std::setw(10)
            << (m.recall_defined ? detail::fixed(m.recall, 4) : "n/a") << std::setw(10) << detail::fixed(m.f1, 4)
            << "\n";
      }
      if (!report.config.empty()) {
        out << "\nconfig:";
        for (const auto& [k, v] : report.config) out << " " << k << "=" << v;
        out << "\n";
      }
      out << "wall time: " << detail::fixed(report.wall_time_seconds, 3) << " s\n";
      return out.str();
    }
  }
  return {};
}

}  // namespace hdc
