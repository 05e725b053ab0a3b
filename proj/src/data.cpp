#include "anymlc/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "anymlc/rng.hpp"

namespace anymlc {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& token, const std::string& path,
                    std::size_t line) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(path, line, "not a number: '" + token + "'");
  }
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::filesystem::path features_sidecar(const std::filesystem::path& path) {
  std::filesystem::path sidecar = path;
  sidecar.replace_extension();
  sidecar += ".features.csv";
  return sidecar;
}

void check_unique(const std::vector<std::string>& names, const char* what) {
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) {
      throw InvalidInputError(std::string(what) + " must be non-empty");
    }
    if (!seen.insert(n).second) {
      throw InvalidInputError(std::string("duplicate ") + what + ": " + n);
    }
  }
}

LabelDataset load_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw ParseError(path.string(), 1, "empty file");
  const auto header = split_csv_line(lines[0]);
  if (header.empty() || header[0] != "id") {
    throw ParseError(path.string(), 1, "header must start with 'id'");
  }
  std::size_t label_start = 1;
  bool has_group = false;
  if (header.size() > 1 && header[1] == "group") {
    has_group = true;
    label_start = 2;
  }
  if (header.size() <= label_start) {
    throw ParseError(path.string(), 1, "no class columns in header");
  }

  LabelDataset ds;
  ds.class_names.assign(header.begin() + label_start, header.end());
  check_unique(ds.class_names, "class name");

  const std::size_t m = ds.class_names.size();
  std::vector<std::uint8_t> label_rows;
  std::unordered_set<std::string> seen_ids;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const auto fields = split_csv_line(lines[li]);
    if (fields.size() != header.size()) {
      throw ParseError(path.string(), li + 1,
                       "expected " + std::to_string(header.size()) +
                           " fields, got " + std::to_string(fields.size()));
    }
    if (!seen_ids.insert(fields[0]).second) {
      throw ParseError(path.string(), li + 1, "duplicate id: " + fields[0]);
    }
    ds.instance_ids.push_back(fields[0]);
    if (has_group) ds.group_keys.push_back(fields[1]);
    for (std::size_t j = 0; j < m; ++j) {
      const std::string& v = fields[label_start + j];
      if (v == "0") label_rows.push_back(0);
      else if (v == "1") label_rows.push_back(1);
      else
        throw ParseError(path.string(), li + 1,
                         "label for class '" + ds.class_names[j] +
                             "' must be 0 or 1, got '" + v + "'");
    }
  }
  if (ds.instance_ids.empty()) {
    throw ParseError(path.string(), 1, "no data rows");
  }
  ds.labels = BinaryMatrix(ds.instance_ids.size(), m);
  ds.labels.values = std::move(label_rows);

  const auto sidecar = features_sidecar(path);
  if (std::filesystem::exists(sidecar)) {
    const auto flines = read_lines(sidecar);
    if (flines.empty()) throw ParseError(sidecar.string(), 1, "empty file");
    const auto fheader = split_csv_line(flines[0]);
    if (fheader.empty() || fheader[0] != "id") {
      throw ParseError(sidecar.string(), 1, "header must start with 'id'");
    }
    const std::size_t d = fheader.size() - 1;
    if (d == 0) throw ParseError(sidecar.string(), 1, "no feature columns");
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < ds.instance_ids.size(); ++i) {
      index[ds.instance_ids[i]] = i;
    }
    ds.features = Matrix(ds.size(), d);
    std::vector<bool> filled(ds.size(), false);
    for (std::size_t li = 1; li < flines.size(); ++li) {
      if (flines[li].empty()) continue;
      const auto fields = split_csv_line(flines[li]);
      if (fields.size() != d + 1) {
        throw ParseError(sidecar.string(), li + 1, "field count mismatch");
      }
      const auto it = index.find(fields[0]);
      if (it == index.end()) {
        throw ParseError(sidecar.string(), li + 1,
                         "unknown id: " + fields[0]);
      }
      if (filled[it->second]) {
        throw ParseError(sidecar.string(), li + 1,
                         "duplicate id: " + fields[0]);
      }
      filled[it->second] = true;
      for (std::size_t k = 0; k < d; ++k) {
        ds.features.at(it->second, k) =
            parse_double(fields[k + 1], sidecar.string(), li + 1);
      }
    }
    for (std::size_t i = 0; i < filled.size(); ++i) {
      if (!filled[i]) {
        throw ParseError(sidecar.string(), flines.size(),
                         "missing features for id: " + ds.instance_ids[i]);
      }
    }
  }
  return ds;
}

LabelDataset load_jsonl(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  LabelDataset ds;
  std::vector<std::vector<std::string>> present_per_row;
  std::vector<std::vector<double>> features_per_row;
  std::vector<std::size_t> line_of_row;
  std::unordered_set<std::string> seen_ids;
  std::set<std::string> class_set;
  bool any_group = false, all_group = true;
  bool any_features = false, all_features = true;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[li]);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), li + 1, e.what());
    }
    if (!j.is_object() || !j.contains("id")) {
      throw ParseError(path.string(), li + 1, "expected object with 'id'");
    }
    const std::string id = j.at("id").get<std::string>();
    if (!seen_ids.insert(id).second) {
      throw ParseError(path.string(), li + 1, "duplicate id: " + id);
    }
    ds.instance_ids.push_back(id);
    line_of_row.push_back(li + 1);
    if (j.contains("group") && !j.at("group").is_null()) {
      any_group = true;
      ds.group_keys.push_back(j.at("group").get<std::string>());
    } else {
      all_group = false;
    }
    std::vector<std::string> present;
    if (j.contains("labels")) {
      for (const auto& name : j.at("labels")) {
        present.push_back(name.get<std::string>());
        class_set.insert(present.back());
      }
    }
    present_per_row.push_back(std::move(present));
    if (j.contains("features") && !j.at("features").is_null()) {
      any_features = true;
      features_per_row.push_back(j.at("features").get<std::vector<double>>());
    } else {
      all_features = false;
      features_per_row.emplace_back();
    }
  }
  if (ds.instance_ids.empty()) {
    throw ParseError(path.string(), 1, "no data rows");
  }
  if (any_group && !all_group) {
    throw ParseError(path.string(), 1,
                     "group key present on some rows but not all");
  }
  if (any_features && !all_features) {
    throw ParseError(path.string(), 1,
                     "features present on some rows but not all");
  }
  ds.class_names.assign(class_set.begin(), class_set.end());
  if (ds.class_names.empty()) {
    throw ParseError(path.string(), 1, "dataset defines no classes");
  }
  std::unordered_map<std::string, std::size_t> class_index;
  for (std::size_t j = 0; j < ds.class_names.size(); ++j) {
    class_index[ds.class_names[j]] = j;
  }
  ds.labels = BinaryMatrix(ds.instance_ids.size(), ds.class_names.size());
  for (std::size_t i = 0; i < present_per_row.size(); ++i) {
    for (const auto& name : present_per_row[i]) {
      ds.labels.at(i, class_index.at(name)) = 1;
    }
  }
  if (any_features) {
    const std::size_t d = features_per_row[0].size();
    if (d == 0) {
      throw ParseError(path.string(), line_of_row[0], "empty feature vector");
    }
    ds.features = Matrix(ds.size(), d);
    for (std::size_t i = 0; i < features_per_row.size(); ++i) {
      if (features_per_row[i].size() != d) {
        throw ParseError(path.string(), line_of_row[i],
                         "feature length mismatch");
      }
      for (std::size_t k = 0; k < d; ++k) {
        ds.features.at(i, k) = features_per_row[i][k];
      }
    }
  }
  return ds;
}

}  // namespace

void LabelDataset::validate() const {
  if (size() == 0) throw InvalidInputError("dataset is empty");
  if (instance_ids.size() != size()) {
    throw InvalidInputError("id count does not match label rows");
  }
  if (!group_keys.empty() && group_keys.size() != size()) {
    throw InvalidInputError("group key count does not match label rows");
  }
  if (class_names.size() != num_classes()) {
    throw InvalidInputError("class name count does not match label columns");
  }
  check_unique(instance_ids, "id");
  check_unique(class_names, "class name");
  for (std::uint8_t v : labels.values) {
    if (v > 1) throw InvalidInputError("label entries must be 0 or 1");
  }
  if (has_features() && features.rows != size()) {
    throw InvalidInputError("feature rows do not match instances");
  }
}

DataFormat data_format_from_string(const std::string& name) {
  if (name == "csv") return DataFormat::csv;
  if (name == "jsonl") return DataFormat::jsonl;
  throw InvalidConfigError("unknown data format: " + name);
}

DataFormat data_format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return DataFormat::csv;
  if (ext == ".jsonl") return DataFormat::jsonl;
  throw InvalidConfigError("cannot infer data format from extension: " +
                           path.string());
}

LabelDataset load_dataset(const std::filesystem::path& path,
                          DataFormat format) {
  if (!std::filesystem::exists(path)) {
    throw IoError("no such file: " + path.string());
  }
  LabelDataset ds =
      format == DataFormat::csv ? load_csv(path) : load_jsonl(path);
  ds.validate();
  return ds;
}

void save_dataset(const LabelDataset& dataset,
                  const std::filesystem::path& path, DataFormat format) {
  dataset.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  if (format == DataFormat::csv) {
    out << "id";
    if (dataset.has_groups()) out << ",group";
    for (const auto& name : dataset.class_names) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      out << dataset.instance_ids[i];
      if (dataset.has_groups()) out << ',' << dataset.group_keys[i];
      for (std::size_t j = 0; j < dataset.num_classes(); ++j) {
        out << ',' << (dataset.labels.at(i, j) != 0 ? '1' : '0');
      }
      out << '\n';
    }
    if (dataset.has_features()) {
      const auto sidecar = features_sidecar(path);
      std::ofstream fout(sidecar);
      if (!fout) throw IoError("cannot write " + sidecar.string());
      fout << "id";
      for (std::size_t k = 0; k < dataset.features.cols; ++k) {
        fout << ",f" << k;
      }
      fout << '\n';
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        fout << dataset.instance_ids[i];
        for (std::size_t k = 0; k < dataset.features.cols; ++k) {
          fout << ',' << format_double(dataset.features.at(i, k));
        }
        fout << '\n';
      }
    }
  } else {
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      nlohmann::json j;
      j["id"] = dataset.instance_ids[i];
      if (dataset.has_groups()) j["group"] = dataset.group_keys[i];
      nlohmann::json labels = nlohmann::json::array();
      for (std::size_t jj = 0; jj < dataset.num_classes(); ++jj) {
        if (dataset.labels.at(i, jj) != 0) {
          labels.push_back(dataset.class_names[jj]);
        }
      }
      j["labels"] = std::move(labels);
      if (dataset.has_features()) {
        std::vector<double> row(dataset.features.row(i).begin(),
                                dataset.features.row(i).end());
        j["features"] = row;
      }
      out << j.dump() << '\n';
    }
  }
}

DatasetStats dataset_stats(const LabelDataset& dataset) {
  dataset.validate();
  DatasetStats stats;
  stats.total = dataset.size();
  stats.per_class.assign(dataset.num_classes(), 0);
  stats.cardinality_hist.assign(dataset.num_classes() + 1, 0);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    std::size_t cardinality = 0;
    for (std::size_t j = 0; j < dataset.num_classes(); ++j) {
      if (dataset.labels.at(i, j) != 0) {
        ++stats.per_class[j];
        ++cardinality;
      }
    }
    ++stats.cardinality_hist[cardinality];
    if (cardinality == 0) ++stats.negative;
  }
  stats.negative_fraction =
      static_cast<double>(stats.negative) / static_cast<double>(stats.total);
  return stats;
}

nlohmann::json DatasetStats::to_json(
    const std::vector<std::string>& class_names) const {
  nlohmann::json j;
  j["format_version"] = 1;
  j["total"] = total;
  j["negative"] = negative;
  j["negative_fraction"] = negative_fraction;
  nlohmann::json per = nlohmann::json::object();
  for (std::size_t k = 0; k < per_class.size(); ++k) {
    const std::string name =
        k < class_names.size() ? class_names[k] : "class_" + std::to_string(k);
    per[name] = per_class[k];
  }
  j["per_class"] = std::move(per);
  j["cardinality_hist"] = cardinality_hist;
  return j;
}

CoocMatrix co_occurrence(const LabelDataset& dataset,
                         const std::map<std::string, std::string>* grouping) {
  dataset.validate();
  CoocMatrix cooc;
  std::vector<std::size_t> class_to_slot(dataset.num_classes());
  if (grouping != nullptr) {
    // Category order follows first appearance in class-name order.
    std::unordered_map<std::string, std::size_t> slot;
    for (std::size_t j = 0; j < dataset.num_classes(); ++j) {
      const auto it = grouping->find(dataset.class_names[j]);
      if (it == grouping->end()) {
        throw InvalidConfigError("grouping is missing class: " +
                                 dataset.class_names[j]);
      }
      const auto ins = slot.emplace(it->second, cooc.names.size());
      if (ins.second) cooc.names.push_back(it->second);
      class_to_slot[j] = ins.first->second;
    }
  } else {
    cooc.names = dataset.class_names;
    for (std::size_t j = 0; j < dataset.num_classes(); ++j) class_to_slot[j] = j;
  }
  const std::size_t k = cooc.names.size();
  cooc.counts.assign(k * k, 0);
  std::vector<std::uint8_t> present(k);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    std::fill(present.begin(), present.end(), 0);
    for (std::size_t j = 0; j < dataset.num_classes(); ++j) {
      if (dataset.labels.at(i, j) != 0) present[class_to_slot[j]] = 1;
    }
    for (std::size_t a = 0; a < k; ++a) {
      if (!present[a]) continue;
      for (std::size_t b = a + 1; b < k; ++b) {
        if (present[b]) {
          ++cooc.counts[a * k + b];
          ++cooc.counts[b * k + a];
        }
      }
    }
  }
  return cooc;
}

nlohmann::json FilterReport::to_json() const {
  nlohmann::json j;
  j["format_version"] = 1;
  j["removed_classes"] = removed_classes;
  j["remaining_classes"] = remaining_classes;
  j["negative"] = negative;
  j["negative_fraction"] = negative_fraction;
  return j;
}

LabelDataset filter_classes(const LabelDataset& dataset,
                            const std::vector<std::string>& remove,
                            FilterReport* report) {
  dataset.validate();
  std::unordered_set<std::string> removal(remove.begin(), remove.end());
  for (const auto& name : removal) {
    if (std::find(dataset.class_names.begin(), dataset.class_names.end(),
                  name) == dataset.class_names.end()) {
      throw InvalidInputError("unknown class name: " + name);
    }
  }
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < dataset.num_classes(); ++j) {
    if (removal.count(dataset.class_names[j]) == 0) keep.push_back(j);
  }
  if (keep.empty()) {
    throw InvalidInputError("filter would remove every class");
  }
  LabelDataset out;
  out.instance_ids = dataset.instance_ids;
  out.group_keys = dataset.group_keys;
  out.features = dataset.features;
  out.class_names.reserve(keep.size());
  for (std::size_t j : keep) out.class_names.push_back(dataset.class_names[j]);
  out.labels = BinaryMatrix(dataset.size(), keep.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t jj = 0; jj < keep.size(); ++jj) {
      out.labels.at(i, jj) = dataset.labels.at(i, keep[jj]);
    }
  }
  if (report != nullptr) {
    const auto stats = dataset_stats(out);
    report->removed_classes = removal.size();
    report->remaining_classes = keep.size();
    report->negative = stats.negative;
    report->negative_fraction = stats.negative_fraction;
  }
  return out;
}

void SplitSpec::validate() const {
  if (!(train > 0.0 && val > 0.0 && test > 0.0)) {
    throw InvalidConfigError("split fractions must all be positive");
  }
  if (std::abs(train + val + test - 1.0) > 1e-9) {
    throw InvalidConfigError("split fractions must sum to 1");
  }
}

namespace {

LabelDataset take_rows(const LabelDataset& dataset,
                       const std::vector<std::size_t>& rows) {
  LabelDataset out;
  out.class_names = dataset.class_names;
  out.instance_ids.reserve(rows.size());
  out.labels = BinaryMatrix(rows.size(), dataset.num_classes());
  if (dataset.has_features()) {
    out.features = Matrix(rows.size(), dataset.features.cols);
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t i = rows[k];
    out.instance_ids.push_back(dataset.instance_ids[i]);
    if (dataset.has_groups()) out.group_keys.push_back(dataset.group_keys[i]);
    for (std::size_t j = 0; j < dataset.num_classes(); ++j) {
      out.labels.at(k, j) = dataset.labels.at(i, j);
    }
    if (dataset.has_features()) {
      for (std::size_t d = 0; d < dataset.features.cols; ++d) {
        out.features.at(k, d) = dataset.features.at(i, d);
      }
    }
  }
  return out;
}

// Largest-remainder apportionment of n into three integer counts.
std::array<std::size_t, 3> apportion(std::size_t n, double f0, double f1,
                                     double f2) {
  const double fracs[3] = {f0, f1, f2};
  std::array<std::size_t, 3> counts{};
  double remainders[3];
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact = fracs[k] * static_cast<double>(n);
    counts[k] = static_cast<std::size_t>(exact);
    remainders[k] = exact - static_cast<double>(counts[k]);
    assigned += counts[k];
  }
  while (assigned < n) {
    int best = 0;
    for (int k = 1; k < 3; ++k) {
      if (remainders[k] > remainders[best]) best = k;
    }
    ++counts[best];
    remainders[best] = -1.0;
    ++assigned;
  }
  return counts;
}

}  // namespace

SplitResult split_dataset(const LabelDataset& dataset, const SplitSpec& spec) {
  dataset.validate();
  spec.validate();
  const std::size_t n = dataset.size();
  std::vector<std::vector<std::size_t>> member(3);

  if (spec.group_aware) {
    if (!dataset.has_groups()) {
      throw InvalidConfigError("group-aware split requires group keys");
    }
    // Whole groups go greedily, largest first, to the most under-filled
    // split; group order is seed-shuffled before the stable size sort so
    // equal-sized groups land in a seed-dependent order.
    std::vector<std::string> group_order;
    std::unordered_map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) {
      auto [it, inserted] = groups.try_emplace(dataset.group_keys[i]);
      if (inserted) group_order.push_back(dataset.group_keys[i]);
      it->second.push_back(i);
    }
    Rng rng(sub_seed(spec.seed, "split-groups"));
    rng.shuffle(group_order);
    std::stable_sort(group_order.begin(), group_order.end(),
                     [&](const std::string& a, const std::string& b) {
                       return groups.at(a).size() > groups.at(b).size();
                     });
    const double targets[3] = {spec.train * static_cast<double>(n),
                               spec.val * static_cast<double>(n),
                               spec.test * static_cast<double>(n)};
    double filled[3] = {0.0, 0.0, 0.0};
    for (const auto& key : group_order) {
      int best = 0;
      for (int k = 1; k < 3; ++k) {
        if (targets[k] - filled[k] > targets[best] - filled[best]) best = k;
      }
      auto& rows = groups.at(key);
      member[best].insert(member[best].end(), rows.begin(), rows.end());
      filled[best] += static_cast<double>(rows.size());
    }
    for (auto& rows : member) std::sort(rows.begin(), rows.end());
  } else {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(sub_seed(spec.seed, "split"));
    rng.shuffle(order);
    const auto counts = apportion(n, spec.train, spec.val, spec.test);
    std::size_t cursor = 0;
    for (int k = 0; k < 3; ++k) {
      member[k].assign(order.begin() + cursor,
                       order.begin() + cursor + counts[k]);
      std::sort(member[k].begin(), member[k].end());
      cursor += counts[k];
    }
  }
  // Group granularity can starve a partition; an empty part is returned
  // as-is rather than rejected.
  return SplitResult{take_rows(dataset, member[0]), take_rows(dataset, member[1]),
                     take_rows(dataset, member[2])};
}

void SyntheticConfig::validate() const {
  if (n_classes < 1) throw InvalidConfigError("n_classes must be >= 1");
  if (n_instances < 1) throw InvalidConfigError("n_instances must be >= 1");
  if (n_features < 1) throw InvalidConfigError("n_features must be >= 1");
  if (!(negative_fraction >= 0.0 && negative_fraction <= 1.0)) {
    throw InvalidConfigError("negative_fraction must be in [0,1]");
  }
  if (!(label_cardinality_mean > 0.0)) {
    throw InvalidConfigError("label_cardinality_mean must be > 0");
  }
  if (!(class_skew >= 0.0)) throw InvalidConfigError("class_skew must be >= 0");
  if (!(noise_sigma >= 0.0)) {
    throw InvalidConfigError("noise_sigma must be >= 0");
  }
}

nlohmann::json SyntheticConfig::to_json() const {
  nlohmann::json j;
  j["n_instances"] = n_instances;
  j["n_classes"] = n_classes;
  j["n_features"] = n_features;
  j["negative_fraction"] = negative_fraction;
  j["label_cardinality_mean"] = label_cardinality_mean;
  j["class_skew"] = class_skew;
  j["noise_sigma"] = noise_sigma;
  j["seed"] = seed;
  return j;
}

LabelDataset synthesize(const SyntheticConfig& config) {
  config.validate();
  const std::size_t n = config.n_instances;
  const std::size_t m = config.n_classes;
  const std::size_t d = config.n_features;

  // Class prototypes share a positive direction; the background prototype
  // sits opposite it. Prototype spread is orthogonalized against that
  // direction, pinning the positive/negative margin along it at 2*kOffset
  // for every seed; noise_sigma sets the difficulty.
  constexpr double kOffset = 2.0;
  constexpr double kSpread = 0.5;
  Rng proto_rng(sub_seed(config.seed, "prototypes"));
  std::vector<double> direction(d);
  double norm = 0.0;
  for (double& v : direction) {
    v = proto_rng.normal();
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (double& v : direction) v /= norm;

  std::vector<double> residual(d);
  const auto draw_prototype = [&](double offset, auto&& assign) {
    double along = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      residual[k] = proto_rng.normal();
      along += residual[k] * direction[k];
    }
    for (std::size_t k = 0; k < d; ++k) {
      assign(k, offset * direction[k] +
                    kSpread * (residual[k] - along * direction[k]));
    }
  };

  Matrix prototypes(m, d);
  for (std::size_t c = 0; c < m; ++c) {
    draw_prototype(kOffset,
                   [&](std::size_t k, double v) { prototypes.at(c, k) = v; });
  }
  std::vector<double> background(d);
  draw_prototype(-kOffset,
                 [&](std::size_t k, double v) { background[k] = v; });

  // Power-law class marginals.
  std::vector<double> marginal(m);
  double marginal_sum = 0.0;
  for (std::size_t c = 0; c < m; ++c) {
    marginal[c] = std::pow(static_cast<double>(c + 1), -config.class_skew);
    marginal_sum += marginal[c];
  }
  for (double& v : marginal) v /= marginal_sum;

  const std::size_t n_neg = static_cast<std::size_t>(
      std::llround(config.negative_fraction * static_cast<double>(n)));

  LabelDataset ds;
  ds.class_names.reserve(m);
  for (std::size_t c = 0; c < m; ++c) {
    ds.class_names.push_back("class_" + std::to_string(c));
  }
  ds.labels = BinaryMatrix(n, m);
  ds.features = Matrix(n, d);

  Rng rng(sub_seed(config.seed, "instances"));
  std::vector<std::size_t> chosen;
  std::vector<double> weights(m);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_neg) {
      for (std::size_t k = 0; k < d; ++k) {
        ds.features.at(i, k) = background[k] + config.noise_sigma * rng.normal();
      }
      continue;
    }
    int cardinality;
    do {
      cardinality = rng.poisson(config.label_cardinality_mean);
    } while (cardinality < 1 || cardinality > static_cast<int>(m));
    // Weighted sampling without replacement over class marginals.
    chosen.clear();
    weights = marginal;
    for (int pick = 0; pick < cardinality; ++pick) {
      double total = 0.0;
      for (double w : weights) total += w;
      const double ticket = rng.uniform() * total;
      std::size_t c = 0;
      double acc = 0.0;
      bool found = false;
      for (std::size_t cand = 0; cand < m; ++cand) {
        if (weights[cand] <= 0.0) continue;
        acc += weights[cand];
        c = cand;
        if (ticket < acc) {
          found = true;
          break;
        }
      }
      (void)found;  // ticket >= acc only through fp round-off; c is then the
                    // last class with remaining weight
      chosen.push_back(c);
      weights[c] = 0.0;
    }
    for (std::size_t c : chosen) ds.labels.at(i, c) = 1;
    for (std::size_t k = 0; k < d; ++k) {
      double mean = 0.0;
      for (std::size_t c : chosen) mean += prototypes.at(c, k);
      mean /= static_cast<double>(chosen.size());
      ds.features.at(i, k) = mean + config.noise_sigma * rng.normal();
    }
  }

  // Shuffle rows so negatives are interleaved, then assign ids in final order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng order_rng(sub_seed(config.seed, "order"));
  order_rng.shuffle(order);
  LabelDataset shuffled;
  shuffled.class_names = ds.class_names;
  shuffled.labels = BinaryMatrix(n, m);
  shuffled.features = Matrix(n, d);
  shuffled.instance_ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = order[i];
    char buf[24];
    std::snprintf(buf, sizeof(buf), "syn-%06zu", i);
    shuffled.instance_ids.emplace_back(buf);
    for (std::size_t j = 0; j < m; ++j) {
      shuffled.labels.at(i, j) = ds.labels.at(src, j);
    }
    for (std::size_t k = 0; k < d; ++k) {
      shuffled.features.at(i, k) = ds.features.at(src, k);
    }
  }
  shuffled.validate();
  return shuffled;
}

}  // namespace anymlc
