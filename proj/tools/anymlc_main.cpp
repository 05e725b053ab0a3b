// anymlc: dataset tooling, training, evaluation, ablation, and likelihood
// surface export for multi-label classification with negative-heavy label
// sets. Every command writes a manifest with digests of its inputs and
// outputs; re-running the recorded argv reproduces the outputs byte for byte.
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "anymlc/class_balance.hpp"
#include "anymlc/data.hpp"
#include "anymlc/errors.hpp"
#include "anymlc/losses.hpp"
#include "anymlc/manifest.hpp"
#include "anymlc/metrics.hpp"
#include "anymlc/rng.hpp"
#include "anymlc/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw anymlc::IoError("cannot write " + path.string());
  out << content;
}

// Values from --config fill in flags the user did not pass; command-line
// flags always win, built-in defaults lose to both.
struct ConfigMerge {
  json file;

  static ConfigMerge load(const std::string& path) {
    ConfigMerge merge;
    if (path.empty()) return merge;
    std::ifstream in(path);
    if (!in) throw anymlc::IoError("cannot read config file: " + path);
    try {
      in >> merge.file;
    } catch (const json::exception& e) {
      throw anymlc::ParseError(path, 0, e.what());
    }
    if (!merge.file.is_object()) {
      throw anymlc::InvalidConfigError("config file must hold a JSON object");
    }
    return merge;
  }

  template <typename T>
  void apply(const CLI::Option* opt, T& var, const std::string& key) const {
    if (!file.is_object() || opt->count() > 0 || !file.contains(key)) return;
    try {
      var = file.at(key).get<T>();
    } catch (const json::exception& e) {
      throw anymlc::InvalidConfigError("config key '" + key + "': " + e.what());
    }
  }
};

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, sep)) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

std::vector<std::size_t> parse_hidden(const std::string& text) {
  std::vector<std::size_t> dims;
  for (const auto& part : split_list(text, ',')) {
    dims.push_back(static_cast<std::size_t>(std::stoull(part)));
  }
  return dims;
}

std::vector<anymlc::LrDecayStep> parse_lr_decay(const std::string& text) {
  std::vector<anymlc::LrDecayStep> steps;
  for (const auto& part : split_list(text, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) {
      throw anymlc::InvalidConfigError(
          "lr-decay entries must look like EPOCH:FACTOR, got '" + part + "'");
    }
    anymlc::LrDecayStep step;
    step.epoch = static_cast<std::size_t>(std::stoull(part.substr(0, colon)));
    step.factor = std::stod(part.substr(colon + 1));
    steps.push_back(step);
  }
  return steps;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  for (const auto& part : split_list(text, ',')) {
    grid.push_back(std::stod(part));
  }
  return grid;
}

anymlc::LabelDataset load_by_extension(const std::string& path) {
  return anymlc::load_dataset(path, anymlc::data_format_from_path(path));
}

void add_input_digest(anymlc::RunManifest& manifest, const fs::path& path) {
  manifest.input_digests[path.string()] = anymlc::file_digest(path);
  // a CSV dataset may carry a feature sidecar
  fs::path sidecar = path;
  sidecar.replace_extension();
  sidecar += ".features.csv";
  if (sidecar != path && fs::exists(sidecar)) {
    manifest.input_digests[sidecar.string()] = anymlc::file_digest(sidecar);
  }
}

// Writes the pre-run manifest, runs the body, then finalizes with output
// digests. The body returns the list of files it wrote.
int run_with_manifest(const std::string& command,
                      const std::vector<std::string>& argv, json config,
                      std::uint64_t seed,
                      const std::vector<fs::path>& inputs,
                      const fs::path& manifest_path,
                      const std::function<std::vector<fs::path>()>& body) {
  anymlc::RunManifest manifest;
  manifest.command = command;
  manifest.argv = argv;
  manifest.config = std::move(config);
  manifest.seed = seed;
  manifest.started_at = anymlc::iso8601_now();
  for (const auto& input : inputs) add_input_digest(manifest, input);
  if (manifest_path.has_parent_path()) {
    fs::create_directories(manifest_path.parent_path());
  }
  manifest.write(manifest_path);

  const auto outputs = body();

  manifest.completed = true;
  manifest.completed_at = anymlc::iso8601_now();
  json output_digests = json::object();
  for (const auto& output : outputs) {
    manifest.outputs.push_back(output.string());
    output_digests[output.string()] = anymlc::file_digest(output);
  }
  manifest.config["output_digests"] = std::move(output_digests);
  manifest.write(manifest_path);
  return 0;
}

anymlc::ClassImportanceWeights load_ciw(
    const fs::path& path, const std::vector<std::string>& class_names) {
  std::ifstream in(path);
  if (!in) throw anymlc::IoError("cannot read ciw file: " + path.string());
  std::map<std::string, double> by_name;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "class,weight") {
        throw anymlc::ParseError(path.string(), 1,
                                 "expected header 'class,weight'");
      }
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw anymlc::ParseError(path.string(), line_no, "expected two fields");
    }
    const std::string name = line.substr(0, comma);
    if (!by_name.emplace(name, std::stod(line.substr(comma + 1))).second) {
      throw anymlc::ParseError(path.string(), line_no,
                               "duplicate class: " + name);
    }
  }
  anymlc::ClassImportanceWeights ciw;
  ciw.weights.reserve(class_names.size());
  for (const auto& name : class_names) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw anymlc::InvalidInputError("ciw file is missing class: " + name);
    }
    ciw.weights.push_back(it->second);
    by_name.erase(it);
  }
  if (!by_name.empty()) {
    throw anymlc::InvalidInputError("ciw file names unknown class: " +
                                    by_name.begin()->first);
  }
  return ciw;
}

std::map<std::string, std::string> load_grouping(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw anymlc::IoError("cannot read grouping file: " + path.string());
  std::map<std::string, std::string> grouping;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == "class,category") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw anymlc::ParseError(path.string(), line_no, "expected two fields");
    }
    grouping[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return grouping;
}

void print_report(const anymlc::MetricsReport& report, std::ostream& os) {
  os << "macro F1  " << format_double(report.macro_f1) << '\n'
     << "macro F2  " << format_double(report.macro_f2) << '\n'
     << "mAP       " << format_double(report.mean_ap) << '\n'
     << "F1-Neg    " << format_double(report.f1_neg) << '\n';
  if (report.f2_ciw.has_value()) {
    os << "F2-CIW    " << format_double(*report.f2_ciw) << '\n';
  }
  for (const auto& warning : report.warnings) {
    std::cerr << "warning: " << warning << '\n';
  }
}

// ---------------------------------------------------------------- gen-data

struct GenDataArgs {
  std::size_t instances = 5000, classes = 8, features = 16;
  double negative_fraction = 0.5, cardinality_mean = 1.5, class_skew = 1.0,
         noise_sigma = 1.0;
  std::uint64_t seed = 7;
  std::string format;
  std::string out;
  std::string config_path;
};

int run_gen_data(const GenDataArgs& args,
                 const std::vector<std::string>& argv) {
  anymlc::SyntheticConfig config;
  config.n_instances = args.instances;
  config.n_classes = args.classes;
  config.n_features = args.features;
  config.negative_fraction = args.negative_fraction;
  config.label_cardinality_mean = args.cardinality_mean;
  config.class_skew = args.class_skew;
  config.noise_sigma = args.noise_sigma;
  config.seed = args.seed;
  config.validate();

  const fs::path out(args.out);
  const anymlc::DataFormat format =
      args.format.empty() ? anymlc::data_format_from_path(out)
                          : anymlc::data_format_from_string(args.format);
  json config_json = config.to_json();
  config_json["format"] = format == anymlc::DataFormat::csv ? "csv" : "jsonl";
  config_json["out"] = out.string();

  return run_with_manifest(
      "gen-data", argv, std::move(config_json), args.seed, {},
      fs::path(out.string() + ".manifest.json"), [&] {
        const auto dataset = anymlc::synthesize(config);
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        anymlc::save_dataset(dataset, out, format);
        std::vector<fs::path> outputs{out};
        if (format == anymlc::DataFormat::csv && dataset.has_features()) {
          fs::path sidecar = out;
          sidecar.replace_extension();
          sidecar += ".features.csv";
          outputs.push_back(sidecar);
        }
        const auto stats = anymlc::dataset_stats(dataset);
        std::cout << "wrote " << dataset.size() << " instances, "
                  << dataset.num_classes() << " classes, negative fraction "
                  << format_double(stats.negative_fraction) << '\n';
        return outputs;
      });
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string train_path, val_path;
  std::string hidden;
  std::string activation = "relu";
  std::string loss = "any_bce";
  double alpha = 1.0, lambda = 0.02, gamma = 2.0;
  double cb_beta = 0.9999;
  bool no_class_balance = false;
  std::size_t epochs = 20, batch_size = 64;
  double lr = 0.05, momentum = 0.9, weight_decay = 1e-4;
  std::string lr_decay = "10:0.1,15:0.1";
  std::string val_metric = "map";
  double tau = 0.5;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir;
  std::string config_path;
};

anymlc::TrainConfig make_train_config(const TrainArgs& args) {
  anymlc::TrainConfig config;
  config.epochs = args.epochs;
  config.batch_size = args.batch_size;
  config.learning_rate = args.lr;
  config.momentum = args.momentum;
  config.weight_decay = args.weight_decay;
  config.lr_decay = parse_lr_decay(args.lr_decay);
  config.loss.family = anymlc::loss_family_from_string(args.loss);
  config.loss.alpha = args.alpha;
  config.loss.lambda = args.lambda;
  config.loss.gamma = args.gamma;
  config.class_balance = !args.no_class_balance;
  config.cb_beta = args.cb_beta;
  config.validation_metric =
      anymlc::validation_metric_from_string(args.val_metric);
  config.threshold = args.tau;
  config.seed = args.seed;
  config.validate();
  return config;
}

int run_train(const TrainArgs& args, const std::vector<std::string>& argv) {
  const auto train_data = load_by_extension(args.train_path);
  const auto val_data = load_by_extension(args.val_path);
  if (!train_data.has_features()) {
    throw anymlc::InvalidInputError("training dataset has no features: " +
                                    args.train_path);
  }
  if (!val_data.has_features()) {
    throw anymlc::InvalidInputError("validation dataset has no features: " +
                                    args.val_path);
  }

  anymlc::MLPConfig mlp;
  mlp.input_dim = train_data.features.cols;
  mlp.hidden_dims = parse_hidden(args.hidden);
  mlp.output_dim = train_data.num_classes();
  mlp.activation = anymlc::activation_from_string(args.activation);
  mlp.init_seed = anymlc::sub_seed(args.seed, "init");
  const anymlc::TrainConfig config = make_train_config(args);

  json config_json = config.to_json();
  config_json["hidden_dims"] = mlp.hidden_dims;
  config_json["activation"] = to_string(mlp.activation);
  config_json["train_data"] = args.train_path;
  config_json["val_data"] = args.val_path;
  config_json["threads"] = args.threads;
  config_json["out"] = args.out_dir;

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);
  const fs::path log_csv = out_dir / "log.csv";
  const fs::path log_json = out_dir / "log.json";
  const fs::path checkpoint = out_dir / "checkpoint.json";

  return run_with_manifest(
      "train", argv, std::move(config_json), args.seed,
      {args.train_path, args.val_path}, out_dir / "manifest.json", [&] {
        anymlc::Model model = anymlc::init_model(mlp);
        std::ofstream csv(log_csv);
        if (!csv) throw anymlc::IoError("cannot write " + log_csv.string());
        csv << "epoch,train_loss,learning_rate,val_macro_f1,val_macro_f2,"
               "val_mean_ap,val_f1_neg\n";
        csv.flush();
        const auto log = anymlc::train(
            model, train_data, val_data, config, args.threads, &std::cout,
            [&](const anymlc::EpochRecord& e) {
              csv << e.epoch << ',' << format_double(e.train_loss) << ','
                  << format_double(e.learning_rate) << ','
                  << format_double(e.validation.macro_f1) << ','
                  << format_double(e.validation.macro_f2) << ','
                  << format_double(e.validation.mean_ap) << ','
                  << format_double(e.validation.f1_neg) << '\n';
              csv.flush();
            });
        csv.close();

        write_text(checkpoint, log.best_model.to_json().dump(2) + "\n");
        json log_out = log.to_json();
        // sibling filename, so a run directory can be moved or compared
        log_out["checkpoint"] = checkpoint.filename().string();
        write_text(log_json, log_out.dump(2) + "\n");
        std::cout << "best epoch " << log.best_epoch << " ("
                  << to_string(config.validation_metric) << ' '
                  << format_double(log.best_metric) << ")\n";
        return std::vector<fs::path>{checkpoint, log_json, log_csv};
      });
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  std::string model_path, data_path;
  double tau = 0.5;
  std::string ciw_path;
  int threads = 1;
  std::string out_dir;
  std::string config_path;
};

int run_eval(const EvalArgs& args, const std::vector<std::string>& argv) {
  std::ifstream model_in(args.model_path);
  if (!model_in) {
    throw anymlc::IoError("cannot read checkpoint: " + args.model_path);
  }
  json model_json;
  try {
    model_in >> model_json;
  } catch (const json::exception& e) {
    throw anymlc::ParseError(args.model_path, 0, e.what());
  }
  const anymlc::Model model = anymlc::Model::from_json(model_json);
  const auto data = load_by_extension(args.data_path);

  std::optional<anymlc::ClassImportanceWeights> ciw;
  if (!args.ciw_path.empty()) {
    ciw = load_ciw(args.ciw_path, data.class_names);
  }

  json config_json;
  config_json["model"] = args.model_path;
  config_json["data"] = args.data_path;
  config_json["tau"] = args.tau;
  config_json["ciw_file"] = args.ciw_path;
  config_json["threads"] = args.threads;
  config_json["out"] = args.out_dir;

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);
  std::vector<fs::path> inputs{args.model_path, args.data_path};
  if (!args.ciw_path.empty()) inputs.push_back(args.ciw_path);

  return run_with_manifest(
      "eval", argv, std::move(config_json), 0, inputs,
      out_dir / "manifest.json", [&] {
        const auto report =
            anymlc::evaluate(model, data, args.tau,
                             ciw.has_value() ? &*ciw : nullptr, args.threads);
        print_report(report, std::cout);
        const fs::path report_json = out_dir / "report.json";
        const fs::path report_csv = out_dir / "report.csv";
        write_text(report_json, report.to_json().dump(2) + "\n");
        write_text(report_csv,
                   anymlc::MetricsReport::csv_header(data.num_classes(), true) +
                       "\n" + report.csv_row(true) + "\n");
        return std::vector<fs::path>{report_json, report_csv};
      });
}

// ------------------------------------------------------------------ ablate

struct AblateArgs {
  std::string train_path, val_path, test_path;
  std::string hidden;
  std::string activation = "relu";
  std::string loss = "any_bce";
  double alpha = 1.0, gamma = 2.0;
  double cb_beta = 0.9999;
  bool no_class_balance = false;
  std::size_t epochs = 20, batch_size = 64;
  double lr = 0.05, momentum = 0.9, weight_decay = 1e-4;
  std::string lr_decay = "10:0.1,15:0.1";
  std::string val_metric = "map";
  double tau = 0.5;
  std::string grid = "0,0.01,0.02,0.05,0.1,0.2,0.5,1";
  std::size_t seeds = 5;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir;
  std::string config_path;
};

int run_ablate(const AblateArgs& args, const std::vector<std::string>& argv) {
  const auto train_data = load_by_extension(args.train_path);
  const auto val_data = load_by_extension(args.val_path);
  const auto test_data = load_by_extension(args.test_path);

  anymlc::MLPConfig mlp;
  mlp.input_dim = train_data.features.cols;
  mlp.hidden_dims = parse_hidden(args.hidden);
  mlp.output_dim = train_data.num_classes();
  mlp.activation = anymlc::activation_from_string(args.activation);

  TrainArgs base;
  base.loss = args.loss;
  base.alpha = args.alpha;
  base.gamma = args.gamma;
  base.cb_beta = args.cb_beta;
  base.no_class_balance = args.no_class_balance;
  base.epochs = args.epochs;
  base.batch_size = args.batch_size;
  base.lr = args.lr;
  base.momentum = args.momentum;
  base.weight_decay = args.weight_decay;
  base.lr_decay = args.lr_decay;
  base.val_metric = args.val_metric;
  base.tau = args.tau;
  base.seed = args.seed;
  const anymlc::TrainConfig base_config = make_train_config(base);
  const std::vector<double> grid = parse_grid(args.grid);

  json config_json = base_config.to_json();
  config_json["hidden_dims"] = mlp.hidden_dims;
  config_json["activation"] = to_string(mlp.activation);
  config_json["grid"] = grid;
  config_json["seeds"] = args.seeds;
  config_json["train_data"] = args.train_path;
  config_json["val_data"] = args.val_path;
  config_json["test_data"] = args.test_path;
  config_json["threads"] = args.threads;
  config_json["out"] = args.out_dir;

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);

  return run_with_manifest(
      "ablate", argv, std::move(config_json), args.seed,
      {args.train_path, args.val_path, args.test_path},
      out_dir / "manifest.json", [&] {
        const auto table = anymlc::ablate_lambda(
            train_data, val_data, test_data, mlp, base_config, grid,
            args.seeds, args.threads, &std::cout);
        const fs::path rows_csv = out_dir / "ablation.csv";
        const fs::path medians_csv = out_dir / "ablation_medians.csv";
        write_text(rows_csv, table.rows_csv());
        write_text(medians_csv, table.medians_csv());
        return std::vector<fs::path>{rows_csv, medians_csv};
      });
}

// -------------------------------------------------------------------- cooc

struct CoocArgs {
  std::string data_path;
  std::string grouping_path;
  std::string out;
  std::string config_path;
};

int run_cooc(const CoocArgs& args, const std::vector<std::string>& argv) {
  const auto data = load_by_extension(args.data_path);
  std::optional<std::map<std::string, std::string>> grouping;
  if (!args.grouping_path.empty()) {
    grouping = load_grouping(args.grouping_path);
  }

  json config_json;
  config_json["data"] = args.data_path;
  config_json["grouping"] = args.grouping_path;
  config_json["out"] = args.out;

  std::vector<fs::path> inputs{args.data_path};
  if (!args.grouping_path.empty()) inputs.push_back(args.grouping_path);
  const fs::path out(args.out);

  return run_with_manifest(
      "cooc", argv, std::move(config_json), 0, inputs,
      fs::path(out.string() + ".manifest.json"), [&] {
        const auto cooc =
            anymlc::co_occurrence(data, grouping ? &*grouping : nullptr);
        std::ostringstream os;
        os << "name";
        for (const auto& name : cooc.names) os << ',' << name;
        os << '\n';
        for (std::size_t a = 0; a < cooc.names.size(); ++a) {
          os << cooc.names[a];
          for (std::size_t b = 0; b < cooc.names.size(); ++b) {
            os << ',' << cooc.at(a, b);
          }
          os << '\n';
        }
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        write_text(out, os.str());
        return std::vector<fs::path>{out};
      });
}

// ------------------------------------------------------------------ filter

struct FilterArgs {
  std::string data_path;
  std::string remove;
  std::string remove_file;
  std::string out;
  std::string config_path;
};

int run_filter(const FilterArgs& args, const std::vector<std::string>& argv) {
  const auto data = load_by_extension(args.data_path);
  std::vector<std::string> removal = split_list(args.remove, ',');
  if (!args.remove_file.empty()) {
    std::ifstream in(args.remove_file);
    if (!in) {
      throw anymlc::IoError("cannot read remove file: " + args.remove_file);
    }
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) removal.push_back(line);
    }
  }

  json config_json;
  config_json["data"] = args.data_path;
  config_json["remove"] = removal;
  config_json["out"] = args.out;

  std::vector<fs::path> inputs{args.data_path};
  if (!args.remove_file.empty()) inputs.push_back(args.remove_file);
  const fs::path out(args.out);

  return run_with_manifest(
      "filter", argv, std::move(config_json), 0, inputs,
      fs::path(out.string() + ".manifest.json"), [&] {
        anymlc::FilterReport report;
        const auto filtered = anymlc::filter_classes(data, removal, &report);
        const auto format = anymlc::data_format_from_path(out);
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        anymlc::save_dataset(filtered, out, format);
        const fs::path report_path(out.string() + ".report.json");
        write_text(report_path, report.to_json().dump(2) + "\n");
        std::cout << "remaining classes " << report.remaining_classes
                  << ", negative fraction "
                  << format_double(report.negative_fraction) << '\n';
        std::vector<fs::path> outputs{out, report_path};
        if (format == anymlc::DataFormat::csv && filtered.has_features()) {
          fs::path sidecar = out;
          sidecar.replace_extension();
          sidecar += ".features.csv";
          outputs.push_back(sidecar);
        }
        return outputs;
      });
}

// ------------------------------------------------------------------- split

struct SplitArgs {
  std::string data_path;
  std::vector<double> fractions{0.7, 0.15, 0.15};
  std::string group_key;
  std::uint64_t seed = 0;
  std::string out;  // stem; partition files get .train/.val/.test suffixes
  std::string config_path;
};

int run_split(const SplitArgs& args, const std::vector<std::string>& argv) {
  const auto data = load_by_extension(args.data_path);
  if (args.fractions.size() != 3) {
    throw anymlc::InvalidConfigError("--fractions takes three values");
  }
  anymlc::SplitSpec spec;
  spec.train = args.fractions[0];
  spec.val = args.fractions[1];
  spec.test = args.fractions[2];
  spec.seed = args.seed;
  spec.group_aware = !args.group_key.empty();

  const auto format = anymlc::data_format_from_path(args.data_path);
  const std::string ext = format == anymlc::DataFormat::csv ? ".csv" : ".jsonl";

  json config_json;
  config_json["data"] = args.data_path;
  config_json["fractions"] = args.fractions;
  config_json["group_key"] = args.group_key;
  config_json["seed"] = args.seed;
  config_json["out"] = args.out;

  return run_with_manifest(
      "split", argv, std::move(config_json), args.seed, {args.data_path},
      fs::path(args.out + ".manifest.json"), [&] {
        const auto split = anymlc::split_dataset(data, spec);
        std::vector<fs::path> outputs;
        const std::pair<const char*, const anymlc::LabelDataset*> parts[] = {
            {".train", &split.train}, {".val", &split.val}, {".test", &split.test}};
        const fs::path stem(args.out);
        if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
        for (const auto& [suffix, part] : parts) {
          const fs::path path(args.out + suffix + ext);
          anymlc::save_dataset(*part, path, format);
          outputs.push_back(path);
          if (format == anymlc::DataFormat::csv && part->has_features()) {
            fs::path sidecar = path;
            sidecar.replace_extension();
            sidecar += ".features.csv";
            outputs.push_back(sidecar);
          }
          std::cout << path.string() << ": " << part->size() << " instances\n";
        }
        return outputs;
      });
}

// ----------------------------------------------------------------- surface

struct SurfaceArgs {
  std::string surface_case;
  std::string targets = "1,1";
  double lambda = 0.05;
  int resolution = 101;
  std::string out;
  std::string config_path;
};

int run_surface(const SurfaceArgs& args, const std::vector<std::string>& argv) {
  const auto parts = split_list(args.targets, ',');
  if (parts.size() != 2) {
    throw anymlc::InvalidInputError("--targets must be two comma-separated "
                                    "binary values, e.g. 1,0");
  }
  const int y1 = std::stoi(parts[0]);
  const int y2 = std::stoi(parts[1]);
  const auto surface_case = anymlc::surface_case_from_string(args.surface_case);

  json config_json;
  config_json["case"] = args.surface_case;
  config_json["targets"] = {y1, y2};
  config_json["lambda"] = args.lambda;
  config_json["resolution"] = args.resolution;
  config_json["out"] = args.out;

  const fs::path out(args.out);
  return run_with_manifest(
      "surface", argv, std::move(config_json), 0, {},
      fs::path(out.string() + ".manifest.json"), [&] {
        const auto grid = anymlc::likelihood_surface_grid(
            surface_case, y1, y2, args.lambda, args.resolution);
        std::ostringstream os;
        os << "p1,p2,value\n";
        for (const auto& point : grid.points) {
          os << format_double(point.p1) << ',' << format_double(point.p2)
             << ',' << format_double(point.value) << '\n';
        }
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        write_text(out, os.str());
        return std::vector<fs::path>{out};
      });
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> raw_argv(argv, argv + argc);
  CLI::App app{"Multi-label classification toolkit: any-class presence "
               "likelihood losses, metrics, dataset tooling, and a desk-scale "
               "trainer"};
  app.require_subcommand(1);

  GenDataArgs gen_args;
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  auto* gen_instances = gen->add_option("--instances", gen_args.instances);
  auto* gen_classes = gen->add_option("--classes", gen_args.classes);
  auto* gen_features = gen->add_option("--features", gen_args.features);
  auto* gen_nf =
      gen->add_option("--negative-fraction", gen_args.negative_fraction);
  auto* gen_card =
      gen->add_option("--cardinality-mean", gen_args.cardinality_mean);
  auto* gen_skew = gen->add_option("--class-skew", gen_args.class_skew);
  auto* gen_noise = gen->add_option("--noise-sigma", gen_args.noise_sigma);
  auto* gen_seed = gen->add_option("--seed", gen_args.seed);
  auto* gen_format =
      gen->add_option("--format", gen_args.format)->check(CLI::IsMember({"csv", "jsonl"}));
  gen->add_option("--out", gen_args.out, "Dataset file (.csv or .jsonl)")
      ->required();
  gen->add_option("--config", gen_args.config_path, "JSON config file");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train an MLP");
  train_cmd->add_option("--train-data", train_args.train_path)->required();
  train_cmd->add_option("--val-data", train_args.val_path)->required();
  auto* tr_hidden = train_cmd->add_option("--hidden", train_args.hidden,
                                          "Comma-separated hidden dims");
  auto* tr_act = train_cmd->add_option("--activation", train_args.activation)
                     ->check(CLI::IsMember({"relu", "tanh"}));
  auto* tr_loss = train_cmd->add_option("--loss", train_args.loss)
                      ->check(CLI::IsMember({"bce", "focal", "any_bce",
                                             "any_focal"}));
  auto* tr_alpha = train_cmd->add_option("--alpha", train_args.alpha);
  auto* tr_lambda = train_cmd->add_option("--lambda", train_args.lambda);
  auto* tr_gamma = train_cmd->add_option("--gamma", train_args.gamma);
  auto* tr_beta = train_cmd->add_option("--cb-beta", train_args.cb_beta);
  auto* tr_nocb =
      train_cmd->add_flag("--no-class-balance", train_args.no_class_balance);
  auto* tr_epochs = train_cmd->add_option("--epochs", train_args.epochs);
  auto* tr_batch = train_cmd->add_option("--batch-size", train_args.batch_size);
  auto* tr_lr = train_cmd->add_option("--lr", train_args.lr);
  auto* tr_mom = train_cmd->add_option("--momentum", train_args.momentum);
  auto* tr_wd = train_cmd->add_option("--weight-decay", train_args.weight_decay);
  auto* tr_decay = train_cmd->add_option("--lr-decay", train_args.lr_decay,
                                         "EPOCH:FACTOR, comma separated");
  auto* tr_metric = train_cmd->add_option("--val-metric", train_args.val_metric)
                        ->check(CLI::IsMember({"map", "macro_f2"}));
  auto* tr_tau = train_cmd->add_option("--tau", train_args.tau);
  auto* tr_seed = train_cmd->add_option("--seed", train_args.seed);
  auto* tr_threads = train_cmd->add_option("--threads", train_args.threads);
  train_cmd->add_option("--out", train_args.out_dir, "Output directory")
      ->required();
  train_cmd->add_option("--config", train_args.config_path);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--model", eval_args.model_path)->required();
  eval_cmd->add_option("--data", eval_args.data_path)->required();
  auto* ev_tau = eval_cmd->add_option("--tau", eval_args.tau);
  auto* ev_ciw = eval_cmd->add_option("--ciw-file", eval_args.ciw_path);
  auto* ev_threads = eval_cmd->add_option("--threads", eval_args.threads);
  eval_cmd->add_option("--out", eval_args.out_dir, "Output directory")
      ->required();
  eval_cmd->add_option("--config", eval_args.config_path);

  AblateArgs ablate_args;
  auto* ablate_cmd =
      app.add_subcommand("ablate", "Lambda ablation with baseline column");
  ablate_cmd->add_option("--train-data", ablate_args.train_path)->required();
  ablate_cmd->add_option("--val-data", ablate_args.val_path)->required();
  ablate_cmd->add_option("--test-data", ablate_args.test_path)->required();
  auto* ab_hidden = ablate_cmd->add_option("--hidden", ablate_args.hidden);
  auto* ab_act = ablate_cmd->add_option("--activation", ablate_args.activation)
                     ->check(CLI::IsMember({"relu", "tanh"}));
  auto* ab_loss = ablate_cmd->add_option("--loss", ablate_args.loss)
                      ->check(CLI::IsMember({"bce", "focal", "any_bce",
                                             "any_focal"}));
  auto* ab_alpha = ablate_cmd->add_option("--alpha", ablate_args.alpha);
  auto* ab_gamma = ablate_cmd->add_option("--gamma", ablate_args.gamma);
  auto* ab_beta = ablate_cmd->add_option("--cb-beta", ablate_args.cb_beta);
  auto* ab_nocb = ablate_cmd->add_flag("--no-class-balance",
                                       ablate_args.no_class_balance);
  auto* ab_epochs = ablate_cmd->add_option("--epochs", ablate_args.epochs);
  auto* ab_batch = ablate_cmd->add_option("--batch-size", ablate_args.batch_size);
  auto* ab_lr = ablate_cmd->add_option("--lr", ablate_args.lr);
  auto* ab_mom = ablate_cmd->add_option("--momentum", ablate_args.momentum);
  auto* ab_wd = ablate_cmd->add_option("--weight-decay", ablate_args.weight_decay);
  auto* ab_decay = ablate_cmd->add_option("--lr-decay", ablate_args.lr_decay);
  auto* ab_metric = ablate_cmd->add_option("--val-metric", ablate_args.val_metric)
                        ->check(CLI::IsMember({"map", "macro_f2"}));
  auto* ab_tau = ablate_cmd->add_option("--tau", ablate_args.tau);
  auto* ab_grid = ablate_cmd->add_option("--grid", ablate_args.grid,
                                         "Comma-separated lambda values");
  auto* ab_seeds = ablate_cmd->add_option("--seeds", ablate_args.seeds);
  auto* ab_seed = ablate_cmd->add_option("--seed", ablate_args.seed);
  auto* ab_threads = ablate_cmd->add_option("--threads", ablate_args.threads);
  ablate_cmd->add_option("--out", ablate_args.out_dir)->required();
  ablate_cmd->add_option("--config", ablate_args.config_path);

  CoocArgs cooc_args;
  auto* cooc_cmd = app.add_subcommand("cooc", "Label co-occurrence matrix");
  cooc_cmd->add_option("--data", cooc_args.data_path)->required();
  cooc_cmd->add_option("--grouping", cooc_args.grouping_path,
                       "CSV class,category map");
  cooc_cmd->add_option("--out", cooc_args.out)->required();
  cooc_cmd->add_option("--config", cooc_args.config_path);

  FilterArgs filter_args;
  auto* filter_cmd = app.add_subcommand("filter", "Remove classes");
  filter_cmd->add_option("--data", filter_args.data_path)->required();
  filter_cmd->add_option("--remove", filter_args.remove,
                         "Comma-separated class names");
  filter_cmd->add_option("--remove-file", filter_args.remove_file,
                         "File with one class name per line");
  filter_cmd->add_option("--out", filter_args.out)->required();
  filter_cmd->add_option("--config", filter_args.config_path);

  SplitArgs split_args;
  auto* split_cmd = app.add_subcommand("split", "Train/val/test split");
  split_cmd->add_option("--data", split_args.data_path)->required();
  auto* sp_fracs = split_cmd->add_option("--fractions", split_args.fractions)
                       ->expected(3);
  auto* sp_group = split_cmd->add_option(
      "--group-key", split_args.group_key,
      "Use the dataset's group column; the value names what the group "
      "represents and is recorded in the manifest");
  auto* sp_seed = split_cmd->add_option("--seed", split_args.seed);
  split_cmd->add_option("--out", split_args.out, "Output stem")->required();
  split_cmd->add_option("--config", split_args.config_path);

  SurfaceArgs surface_args;
  auto* surface_cmd =
      app.add_subcommand("surface", "Likelihood surface grid export");
  surface_cmd->add_option("--case", surface_args.surface_case)
      ->required()
      ->check(CLI::IsMember({"bce", "any", "redesigned"}));
  auto* su_targets = surface_cmd->add_option("--targets", surface_args.targets);
  auto* su_lambda = surface_cmd->add_option("--lambda", surface_args.lambda);
  auto* su_res = surface_cmd->add_option("--resolution", surface_args.resolution);
  surface_cmd->add_option("--out", surface_args.out)->required();
  surface_cmd->add_option("--config", surface_args.config_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed()) {
      const auto merge = ConfigMerge::load(gen_args.config_path);
      merge.apply(gen_instances, gen_args.instances, "instances");
      merge.apply(gen_classes, gen_args.classes, "classes");
      merge.apply(gen_features, gen_args.features, "features");
      merge.apply(gen_nf, gen_args.negative_fraction, "negative-fraction");
      merge.apply(gen_card, gen_args.cardinality_mean, "cardinality-mean");
      merge.apply(gen_skew, gen_args.class_skew, "class-skew");
      merge.apply(gen_noise, gen_args.noise_sigma, "noise-sigma");
      merge.apply(gen_seed, gen_args.seed, "seed");
      merge.apply(gen_format, gen_args.format, "format");
      return run_gen_data(gen_args, raw_argv);
    }
    if (train_cmd->parsed()) {
      const auto merge = ConfigMerge::load(train_args.config_path);
      merge.apply(tr_hidden, train_args.hidden, "hidden");
      merge.apply(tr_act, train_args.activation, "activation");
      merge.apply(tr_loss, train_args.loss, "loss");
      merge.apply(tr_alpha, train_args.alpha, "alpha");
      merge.apply(tr_lambda, train_args.lambda, "lambda");
      merge.apply(tr_gamma, train_args.gamma, "gamma");
      merge.apply(tr_beta, train_args.cb_beta, "cb-beta");
      merge.apply(tr_nocb, train_args.no_class_balance, "no-class-balance");
      merge.apply(tr_epochs, train_args.epochs, "epochs");
      merge.apply(tr_batch, train_args.batch_size, "batch-size");
      merge.apply(tr_lr, train_args.lr, "lr");
      merge.apply(tr_mom, train_args.momentum, "momentum");
      merge.apply(tr_wd, train_args.weight_decay, "weight-decay");
      merge.apply(tr_decay, train_args.lr_decay, "lr-decay");
      merge.apply(tr_metric, train_args.val_metric, "val-metric");
      merge.apply(tr_tau, train_args.tau, "tau");
      merge.apply(tr_seed, train_args.seed, "seed");
      merge.apply(tr_threads, train_args.threads, "threads");
      return run_train(train_args, raw_argv);
    }
    if (eval_cmd->parsed()) {
      const auto merge = ConfigMerge::load(eval_args.config_path);
      merge.apply(ev_tau, eval_args.tau, "tau");
      merge.apply(ev_ciw, eval_args.ciw_path, "ciw-file");
      merge.apply(ev_threads, eval_args.threads, "threads");
      return run_eval(eval_args, raw_argv);
    }
    if (ablate_cmd->parsed()) {
      const auto merge = ConfigMerge::load(ablate_args.config_path);
      merge.apply(ab_hidden, ablate_args.hidden, "hidden");
      merge.apply(ab_act, ablate_args.activation, "activation");
      merge.apply(ab_loss, ablate_args.loss, "loss");
      merge.apply(ab_alpha, ablate_args.alpha, "alpha");
      merge.apply(ab_gamma, ablate_args.gamma, "gamma");
      merge.apply(ab_beta, ablate_args.cb_beta, "cb-beta");
      merge.apply(ab_nocb, ablate_args.no_class_balance, "no-class-balance");
      merge.apply(ab_epochs, ablate_args.epochs, "epochs");
      merge.apply(ab_batch, ablate_args.batch_size, "batch-size");
      merge.apply(ab_lr, ablate_args.lr, "lr");
      merge.apply(ab_mom, ablate_args.momentum, "momentum");
      merge.apply(ab_wd, ablate_args.weight_decay, "weight-decay");
      merge.apply(ab_decay, ablate_args.lr_decay, "lr-decay");
      merge.apply(ab_metric, ablate_args.val_metric, "val-metric");
      merge.apply(ab_tau, ablate_args.tau, "tau");
      merge.apply(ab_grid, ablate_args.grid, "grid");
      merge.apply(ab_seeds, ablate_args.seeds, "seeds");
      merge.apply(ab_seed, ablate_args.seed, "seed");
      merge.apply(ab_threads, ablate_args.threads, "threads");
      return run_ablate(ablate_args, raw_argv);
    }
    if (cooc_cmd->parsed()) return run_cooc(cooc_args, raw_argv);
    if (filter_cmd->parsed()) return run_filter(filter_args, raw_argv);
    if (split_cmd->parsed()) {
      const auto merge = ConfigMerge::load(split_args.config_path);
      merge.apply(sp_fracs, split_args.fractions, "fractions");
      merge.apply(sp_group, split_args.group_key, "group-key");
      merge.apply(sp_seed, split_args.seed, "seed");
      return run_split(split_args, raw_argv);
    }
    if (surface_cmd->parsed()) {
      const auto merge = ConfigMerge::load(surface_args.config_path);
      merge.apply(su_targets, surface_args.targets, "targets");
      merge.apply(su_lambda, surface_args.lambda, "lambda");
      merge.apply(su_res, surface_args.resolution, "resolution");
      return run_surface(surface_args, raw_argv);
    }
  } catch (const anymlc::Error& e) {
    std::cerr << "error[" << e.code() << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
