#pragma once

// NSL-KDD ingestion: line parsing, attack-label grouping, schema inference
// and seeded stratified splitting.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hdc/codebook.hpp"
#include "hdc/error.hpp"
#include "hdc/random.hpp"

namespace hdc {

inline constexpr std::size_t kNslKddFeatureCount = 41;

inline constexpr std::array<std::string_view, kNslKddFeatureCount> kNslKddColumns = {
    "duration", "protocol_type", "service", "flag", "src_bytes", "dst_bytes", "land",
    "wrong_fragment", "urgent", "hot", "num_failed_logins", "logged_in", "num_compromised",
    "root_shell", "su_attempted", "num_root", "num_file_creations", "num_shells",
    "num_access_files", "num_outbound_cmds", "is_host_login", "is_guest_login", "count",
    "srv_count", "serror_rate", "srv_serror_rate", "rerror_rate", "srv_rerror_rate",
    "same_srv_rate", "diff_srv_rate", "srv_diff_host_rate", "dst_host_count",
    "dst_host_srv_count", "dst_host_same_srv_rate", "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate", "dst_host_srv_diff_host_rate", "dst_host_serror_rate",
    "dst_host_srv_serror_rate", "dst_host_rerror_rate", "dst_host_srv_rerror_rate"};

// Zero-based columns holding symbolic values.
inline constexpr std::array<std::size_t, 3> kNslKddSymbolicColumns = {1, 2, 3};
// Zero-based 0/1 indicator columns: land, logged_in, root_shell,
// is_host_login, is_guest_login.
inline constexpr std::array<std::size_t, 5> kNslKddIndicatorColumns = {6, 11, 13, 20, 21};

inline const std::vector<std::string>& nsl_kdd_class_names() {
  static const std::vector<std::string> names = {"normal", "DoS", "probe", "R2L", "U2R"};
  return names;
}

struct RawRecord {
  std::vector<std::string> values;
  std::string label;
  std::optional<int> difficulty;
  // 1-based line number in the source file.
  std::size_t line = 0;

  friend bool operator==(const RawRecord&, const RawRecord&) = default;
};

struct ParseResult {
  std::vector<RawRecord> records;
  std::size_t malformed = 0;
  std::size_t lines = 0;
  // Line numbers of rejected lines, capped for reporting.
  std::vector<std::size_t> malformed_lines;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace detail

// Parses one data line. Returns nullopt for anything but 42 or 43 fields
// (or a non-integer difficulty column). With `allow_unlabeled`, bare
// 41-field feature lines are accepted too and get an empty label.
inline std::optional<RawRecord> parse_line(std::string_view line, std::size_t line_number = 0,
                                           bool allow_unlabeled = false) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto fields = detail::split_fields(line);
  if (allow_unlabeled && fields.size() == kNslKddFeatureCount) {
    RawRecord record;
    record.line = line_number;
    record.values.assign(fields.begin(), fields.end());
    return record;
  }
  if (fields.size() != kNslKddFeatureCount + 1 && fields.size() != kNslKddFeatureCount + 2)
    return std::nullopt;
  RawRecord record;
  record.line = line_number;
  record.values.reserve(kNslKddFeatureCount);
  for (std::size_t i = 0; i < kNslKddFeatureCount; ++i) record.values.emplace_back(fields[i]);
  record.label = std::string(fields[kNslKddFeatureCount]);
  if (record.label.empty()) return std::nullopt;
  if (fields.size() == kNslKddFeatureCount + 2) {
    const auto text = detail::trim(fields[kNslKddFeatureCount + 1]);
    int difficulty = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), difficulty);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
    record.difficulty = difficulty;
  }
  return record;
}

// Inverse of parse_line for records it produced.
inline std::string serialize_record(const RawRecord& record) {
  std::string out;
  for (const auto& v : record.values) {
    out += v;
    out += ',';
  }
  out += record.label;
  if (record.difficulty) {
    out += ',';
    out += std::to_string(*record.difficulty);
  }
  return out;
}

// Share of malformed lines above which a file is rejected outright.
inline constexpr double kMaxMalformedFraction = 0.01;

inline ParseResult parse_stream(std::istream& in, const std::string& source = "<stream>",
                                bool allow_unlabeled = false) {
  ParseResult result;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (detail::trim(view).empty()) continue;
    ++result.lines;
    if (auto record = parse_line(view, number, allow_unlabeled)) {
      result.records.push_back(std::move(*record));
    } else {
      ++result.malformed;
      if (result.malformed_lines.size() < 20) result.malformed_lines.push_back(number);
    }
  }
  if (in.bad()) throw Error(ErrorKind::Io, "failed while reading " + source);
  if (result.lines > 0 &&
      static_cast<double>(result.malformed) > kMaxMalformedFraction * static_cast<double>(result.lines)) {
    std::ostringstream msg;
    msg << source << ": " << result.malformed << " of " << result.lines
        << " lines are malformed (expected 42 or 43 comma-separated fields); first at line "
        << result.malformed_lines.front();
    throw Error(ErrorKind::Parse, msg.str());
  }
  return result;
}

inline ParseResult parse_file(const std::string& path, bool allow_unlabeled = false) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "' for reading");
  return parse_stream(in, path, allow_unlabeled);
}

// ---------------------------------------------------------------------------
// Labels

enum class UnknownLabelPolicy : std::uint8_t { Fallback = 0, Strict = 1 };

struct LabelMap {
  std::vector<std::string> class_names;
  std::map<std::string, std::size_t> raw_to_class;
  UnknownLabelPolicy policy = UnknownLabelPolicy::Fallback;
  std::size_t fallback = 0;

  std::size_t num_classes() const noexcept { return class_names.size(); }

  std::optional<std::size_t> class_index(std::string_view name) const {
    const auto wanted = detail::lower(detail::trim(name));
    for (std::size_t c = 0; c < class_names.size(); ++c)
      if (detail::lower(class_names[c]) == wanted) return c;
    return std::nullopt;
  }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

// Raw NSL-KDD labels sometimes carry the KDD'99 trailing period.
inline std::string normalize_label(std::string_view raw) {
  auto s = detail::trim(raw);
  if (!s.empty() && s.back() == '.') s.remove_suffix(1);
  return std::string(s);
}

inline LabelMap parse_label_map(std::istream& in, const std::string& source = "<label map>") {
  LabelMap map;
  map.class_names = nsl_kdd_class_names();
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    auto view = detail::trim(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = detail::trim(view.substr(0, hash));
    if (view.empty()) continue;
    const auto fields = detail::split_fields(view);
    if (fields.size() != 2)
      throw Error(ErrorKind::Parse, source + ":" + std::to_string(number) + ": expected 'raw_label,category'");
    const auto raw = normalize_label(fields[0]);
    const auto category = map.class_index(fields[1]);
    if (raw.empty() || !category)
      throw Error(ErrorKind::Parse, source + ":" + std::to_string(number) + ": unknown category '" +
                                        std::string(detail::trim(fields[1])) + "'");
    map.raw_to_class[raw] = *category;
  }
  if (map.raw_to_class.empty()) throw Error(ErrorKind::Parse, source + ": label map is empty");
  return map;
}

inline LabelMap load_label_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open label map '" + path + "'");
  return parse_label_map(in, path);
}

// Standard grouping of the NSL-KDD attack names into the four attack
// families (KDD'99 training names plus the extra names of KDDTest+).
inline const char* const kNslKddLabelMapText = R"(# raw_label,category
normal,normal
# denial of service
back,DoS
land,DoS
neptune,DoS
pod,DoS
smurf,DoS
teardrop,DoS
apache2,DoS
mailbomb,DoS
processtable,DoS
udpstorm,DoS
# probing
ipsweep,probe
nmap,probe
portsweep,probe
satan,probe
mscan,probe
saint,probe
# remote to local
ftp_write,R2L
guess_passwd,R2L
imap,R2L
multihop,R2L
phf,R2L
spy,R2L
warezclient,R2L
warezmaster,R2L
named,R2L
sendmail,R2L
snmpgetattack,R2L
snmpguess,R2L
worm,R2L
xlock,R2L
xsnoop,R2L
# user to root
buffer_overflow,U2R
loadmodule,U2R
perl,U2R
rootkit,U2R
httptunnel,U2R
ps,U2R
sqlattack,U2R
xterm,U2R
)";

inline LabelMap nsl_kdd_label_map() {
  std::istringstream in(kNslKddLabelMapText);
  return parse_label_map(in, "<builtin label map>");
}

inline std::size_t map_label(std::string_view raw, const LabelMap& map) {
  const auto key = normalize_label(raw);
  if (const auto it = map.raw_to_class.find(key); it != map.raw_to_class.end()) return it->second;
  if (map.policy == UnknownLabelPolicy::Strict)
    throw Error(ErrorKind::UnknownLabel, "label '" + key + "' is not in the label map");
  return map.fallback;
}

// Maps every record's label. Unknown labels (fallback policy) are reported
// once each in `warnings`.
inline std::vector<std::size_t> map_labels(const std::vector<RawRecord>& records, const LabelMap& map,
                                           std::vector<std::string>* warnings = nullptr) {
  std::vector<std::size_t> out;
  out.reserve(records.size());
  std::set<std::string> unknown;
  for (const auto& r : records) {
    const auto key = normalize_label(r.label);
    if (!map.raw_to_class.count(key)) {
      if (map.policy == UnknownLabelPolicy::Strict)
        throw Error(ErrorKind::UnknownLabel, "line " + std::to_string(r.line) + ": label '" + key +
                                                 "' is not in the label map");
      unknown.insert(key);
    }
    out.push_back(map_label(key, map));
  }
  if (warnings != nullptr)
    for (const auto& u : unknown)
      warnings->push_back("unknown label '" + u + "' mapped to '" + map.class_names[map.fallback] + "'");
  return out;
}

// ---------------------------------------------------------------------------
// Schema

struct SchemaOptions {
  bool log_scale = false;
};

inline FeatureSchema infer_schema(const std::vector<RawRecord>& records,
                                  const std::vector<std::string>& class_names = nsl_kdd_class_names(),
                                  SchemaOptions options = {}) {
  if (records.empty()) throw Error(ErrorKind::InvalidArgument, "cannot infer a schema from zero records");
  FeatureSchema schema;
  schema.class_names = class_names;
  schema.features.reserve(kNslKddFeatureCount);
  const auto is_in = [](const auto& list, std::size_t c) {
    return std::find(list.begin(), list.end(), c) != list.end();
  };
  for (std::size_t c = 0; c < kNslKddFeatureCount; ++c) {
    const std::string name(kNslKddColumns[c]);
    if (is_in(kNslKddSymbolicColumns, c)) {
      std::set<std::string> vocab;
      for (const auto& r : records) vocab.insert(r.values[c]);
      schema.features.push_back(FeatureSpec::categorical(name, {vocab.begin(), vocab.end()}));
    } else if (is_in(kNslKddIndicatorColumns, c)) {
      schema.features.push_back(FeatureSpec::categorical(name, {"0", "1"}));
    } else {
      double lo = 0.0;
      double hi = 0.0;
      bool first = true;
      for (const auto& r : records) {
        const double x = parse_number(r.values[c], "column " + std::to_string(c + 1) + " (" + name +
                                                       ") at line " + std::to_string(r.line));
        if (first || x < lo) lo = x;
        if (first || x > hi) hi = x;
        first = false;
      }
      schema.features.push_back(FeatureSpec::continuous(name, lo, hi, options.log_scale));
    }
  }
  return schema;
}

// Converts raw strings into typed feature values for `schema`.
inline PreparedRecord prepare(const RawRecord& record, const FeatureSchema& schema) {
  if (record.values.size() != schema.size())
    throw Error(ErrorKind::InvalidRecord, "line " + std::to_string(record.line) + ": record has " +
                                              std::to_string(record.values.size()) +
                                              " feature columns, model expects " +
                                              std::to_string(schema.size()));
  PreparedRecord out;
  out.reserve(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto& spec = schema.features[c];
    if (spec.kind == FeatureKind::Continuous) {
      out.emplace_back(parse_number(record.values[c], "column " + std::to_string(c + 1) + " (" +
                                                          spec.name + ") at line " + std::to_string(record.line)));
    } else {
      out.emplace_back(record.values[c]);
    }
  }
  return out;
}

inline std::vector<PreparedRecord> prepare_all(const std::vector<RawRecord>& records, const FeatureSchema& schema) {
  std::vector<PreparedRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(prepare(r, schema));
  return out;
}

// ---------------------------------------------------------------------------
// Splitting

enum class SplitMode : std::uint8_t { FilePair, RandomSplit };

struct SplitSpec {
  SplitMode mode = SplitMode::RandomSplit;
  double train_fraction = 0.8;
  std::uint64_t seed = kDefaultSeed;
};

struct SplitResult {
  // Indices into the input, ascending (original order is preserved).
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<std::string> warnings;
};

// Seeded class-stratified split. Every class with at least two members lands
// on both sides; smaller classes go wholly to train with a warning.
inline SplitResult stratified_split(const std::vector<std::size_t>& labels, std::size_t num_classes,
                                    double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error(ErrorKind::InvalidConfiguration, "train fraction must lie strictly between 0 and 1");
  if (labels.size() < 2) throw Error(ErrorKind::InvalidArgument, "a random split needs at least 2 records");

  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) throw Error(ErrorKind::InvalidArgument, "label index out of range");
    by_class[labels[i]].push_back(i);
  }

  SplitResult result;
  const RandomSource master(seed);
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    if (members.size() < 2) {
      result.warnings.push_back("class " + std::to_string(c) + " has " + std::to_string(members.size()) +
                                " record(s); placed entirely in train");
      result.train.insert(result.train.end(), members.begin(), members.end());
      continue;
    }
    auto rng = master.fork("split", std::to_string(c));
    shuffle(members.begin(), members.end(), rng);
    const auto n = members.size();
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    result.train.insert(result.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
    result.test.insert(result.test.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
  }
  std::sort(result.train.begin(), result.train.end());
  std::sort(result.test.begin(), result.test.end());
  return result;
}

// FilePair keeps the two loaded files as they are; RandomSplit cuts `records`.
struct Dataset {
  std::vector<RawRecord> train;
  std::vector<RawRecord> test;
  std::vector<std::string> warnings;
};

template <class T>
std::vector<T> select(const std::vector<T>& items, const std::vector<std::size_t>& indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(items[i]);
  return out;
}

inline Dataset split(std::vector<RawRecord> records, const LabelMap& labels, const SplitSpec& spec,
                     std::vector<RawRecord> second_file = {}) {
  Dataset data;
  if (spec.mode == SplitMode::FilePair) {
    data.train = std::move(records);
    data.test = std::move(second_file);
    return data;
  }
  const auto classes = map_labels(records, labels, &data.warnings);
  auto cut = stratified_split(classes, labels.num_classes(), spec.train_fraction, spec.seed);
  data.train = select(records, cut.train);
  data.test = select(records, cut.test);
  data.warnings.insert(data.warnings.end(), cut.warnings.begin(), cut.warnings.end());
  return data;
}

// Seeded class-stratified subsample of exactly min(n, size) indices.
// Quotas follow class proportions (largest remainder), but every class gets
// at least min(class size, min_per_class) members.
inline std::vector<std::size_t> stratified_sample(const std::vector<std::size_t>& labels, std::size_t num_classes,
                                                  std::size_t n, std::uint64_t seed,
                                                  std::size_t min_per_class = 20) {
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) by_class.at(labels[i]).push_back(i);
  if (n >= labels.size()) {
    std::vector<std::size_t> all(labels.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }

  const double total = static_cast<double>(labels.size());
  std::vector<std::size_t> quota(num_classes, 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const double exact = static_cast<double>(n) * static_cast<double>(by_class[c].size()) / total;
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    remainders.emplace_back(exact - std::floor(exact), c);
    assigned += quota[c];
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n && k < remainders.size(); ++k, ++assigned) ++quota[remainders[k].second];

  for (std::size_t c = 0; c < num_classes; ++c) {
    const auto floor_quota = std::min(by_class[c].size(), min_per_class);
    if (quota[c] < floor_quota) {
      assigned += floor_quota - quota[c];
      quota[c] = floor_quota;
    }
  }
  // Give back any excess from the largest quotas.
  while (assigned > n) {
    std::size_t largest = 0;
    for (std::size_t c = 1; c < num_classes; ++c)
      if (quota[c] > quota[largest]) largest = c;
    --quota[largest];
    --assigned;
  }

  const RandomSource master(seed);
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto members = by_class[c];
    auto rng = master.fork("sample", std::to_string(c));
    shuffle(members.begin(), members.end(), rng);
    out.insert(out.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(quota[c]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace hdc
