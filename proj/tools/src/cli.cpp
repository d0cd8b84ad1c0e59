#include "purgelab/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "purgelab/diversity.hpp"
#include "purgelab/error.hpp"
#include "purgelab/evalstats.hpp"
#include "purgelab/filters.hpp"
#include "purgelab/io.hpp"
#include "purgelab/measures.hpp"
#include "purgelab/random.hpp"
#include "purgelab/synthetic.hpp"

namespace purgelab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::uint64_t parse_seed(const std::string& text, const std::string& what) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument(what + " must be an unsigned 64-bit integer, got '" + text + "'");
  }
  return value;
}

std::vector<double> parse_reals(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw std::invalid_argument("not a number: '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

// --seed beats PURGELAB_SEED beats 0.
std::uint64_t effective_seed(const std::string& flag) {
  if (!flag.empty()) return parse_seed(flag, "--seed");
  if (const char* env = std::getenv("PURGELAB_SEED"); env && *env) return parse_seed(env, "PURGELAB_SEED");
  return 0;
}

void check_threshold(double t) {
  if (!(t > 0.0 && t <= 1.0)) {
    throw std::invalid_argument("threshold must lie in (0, 1], got " + format_real(t));
  }
}

Dataset load_input(const fs::path& path, const std::string& label) {
  if (label.empty() || path.extension() == ".arff") return load_dataset(path);
  return load_csv(path, LabelColumn{label});
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(DataErrorKind::unreadable_file, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError(DataErrorKind::unreadable_file, "cannot write '" + path.string() + "'");
}

std::string extension_of(const fs::path& path) {
  const auto ext = path.extension().string();
  return ext.empty() ? ".csv" : ext;
}

std::vector<LearnerSpec> learner_list(const std::string& text, std::uint64_t seed) {
  auto specs = parse_learner_list(text, seed);
  if (specs.empty()) throw std::invalid_argument("learner list is empty");
  for (const auto& s : specs) validate(s);
  return specs;
}

struct Common {
  std::string seed;
  std::size_t jobs = 1;
  std::string out = "purgelab-out";
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--seed", common.seed, "Master seed (default: $PURGELAB_SEED or 0)");
  cmd->add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", common.out, "Output directory")->capture_default_str();
}

// ---- filter -------------------------------------------------------------

struct FilterArgs {
  std::string data;
  std::string label;
  std::string mode = "ensemble";
  std::string learners = "all";
  std::string learner = "knn";
  double threshold = 0.5;
  std::string flag_mode;
  double validation = 0.2;
  Common common;
};

int cmd_filter(const FilterArgs& a, std::ostream& out) {
  check_threshold(a.threshold);
  if (a.mode != "ensemble" && a.mode != "biased" && a.mode != "adaptive") {
    throw std::invalid_argument("--mode must be ensemble, biased or adaptive");
  }
  const std::uint64_t seed = effective_seed(a.common.seed);
  const std::string flag_text = !a.flag_mode.empty() ? a.flag_mode : (a.mode == "adaptive" ? "cv:3" : "all");
  const FlagMode flags = FlagMode::parse(flag_text, seed);
  const auto members = learner_list(a.learners, seed);
  const LearnerSpec target = LearnerSpec::parse(a.learner, seed);
  validate(target);
  out << "seed: " << seed << '\n';

  const fs::path input(a.data);
  const Dataset data = load_input(input, a.label);

  FilterOutcome outcome;
  std::optional<MisclassificationMatrix> matrix;
  if (a.mode == "ensemble") {
    matrix = flag_misclassified(members, data, flags, a.common.jobs);
    outcome = ensemble_filter(*matrix, a.threshold);
  } else if (a.mode == "biased") {
    matrix = flag_misclassified(std::span(&target, 1), data, flags, a.common.jobs);
    outcome = ensemble_filter(*matrix, 1.0);
  } else {
    AdaptiveOptions options;
    options.threshold = a.threshold;
    options.mode = flags;
    options.validation_fraction = a.validation;
    options.seed = seed;
    options.jobs = a.common.jobs;
    const auto trace = adaptive_filter(members, target, data, options);
    out << "adaptive filter set:";
    for (const auto& id : trace.chosen_ids) out << ' ' << id;
    if (trace.chosen_ids.empty()) out << " (empty)";
    out << "\nvalidation accuracies:";
    for (const double acc : trace.accuracies) out << ' ' << format_real(acc);
    out << '\n';
    outcome = adaptive_outcome(trace, members, data, options);
    if (!trace.chosen.empty()) {
      std::vector<LearnerSpec> chosen;
      for (const auto c : trace.chosen) chosen.push_back(members[c]);
      matrix = flag_misclassified(chosen, data, flags, a.common.jobs);
    }
  }

  const FilteredData filtered = apply_filter(data, outcome);
  const fs::path dir(a.common.out);
  fs::create_directories(dir);
  const fs::path kept_path = dir / ("filtered" + extension_of(input));
  if (filtered.fell_back || outcome.removed.empty()) {
    fs::copy_file(input, kept_path, fs::copy_options::overwrite_existing);
  } else {
    save_dataset(filtered.data, kept_path);
  }

  std::ostringstream report;
  report << "index";
  if (matrix) {
    for (const auto& id : matrix->learner_ids()) report << ',' << id;
  }
  report << '\n';
  if (!filtered.fell_back) {
    for (const auto i : outcome.removed) {
      report << i;
      if (matrix) {
        for (std::size_t l = 0; l < matrix->learner_count(); ++l) report << ',' << (matrix->flagged(l, i) ? 1 : 0);
      }
      report << '\n';
    }
  }
  write_text(dir / "removed.csv", report.str());

  if (filtered.fell_back) {
    out << "warning: filtering would remove a whole class or nearly everything; kept all instances\n";
  }
  const std::size_t removed = filtered.fell_back ? 0 : outcome.removed.size();
  out << "removed " << removed << " of " << data.size() << " instances\n";
  out << "wrote " << kept_path.string() << " and " << (dir / "removed.csv").string() << '\n';
  return 0;
}

// ---- noise / blobs --------------------------------------------------------

struct NoiseArgs {
  std::string data;
  std::string label;
  double rate = 0.1;
  Common common;
};

int cmd_noise(const NoiseArgs& a, std::ostream& out) {
  if (!(a.rate >= 0.0 && a.rate <= 1.0)) throw std::invalid_argument("--rate must lie in [0, 1]");
  const std::uint64_t seed = effective_seed(a.common.seed);
  out << "seed: " << seed << '\n';
  const fs::path input(a.data);
  const Dataset data = load_input(input, a.label);
  const auto noisy = inject_label_noise(data, a.rate, seed);
  const fs::path dir(a.common.out);
  fs::create_directories(dir);
  save_dataset(noisy.data, dir / ("noisy" + extension_of(input)));
  std::ostringstream report;
  report << "index,original,noisy\n";
  for (const auto i : noisy.corrupted) {
    report << i << ',' << data.class_names()[data.instance(i).label] << ','
           << data.class_names()[noisy.data.instance(i).label] << '\n';
  }
  write_text(dir / "corrupted.csv", report.str());
  out << "corrupted " << noisy.corrupted.size() << " of " << data.size() << " labels\n";
  return 0;
}

struct BlobArgs {
  BlobOptions options;
  double noise = 0.0;
  std::string file;
  std::string seed;
};

int cmd_blobs(BlobArgs a, std::ostream& out) {
  const std::uint64_t seed = effective_seed(a.seed);
  out << "seed: " << seed << '\n';
  a.options.seed = seed;
  Dataset data = make_blobs(a.options);
  if (a.noise > 0.0) data = inject_label_noise(data, a.noise, mix_seed({seed, 1})).data;
  save_dataset(data, a.file);
  out << "wrote " << data.size() << " instances to " << a.file << '\n';
  return 0;
}

// ---- measures -------------------------------------------------------------

struct MeasuresArgs {
  std::string data;
  std::string label;
  std::string learners = "all";
  std::size_t folds = 10;
  std::size_t repeats = 1;
  std::size_t k = 5;
  double cutoff = 0.9;
  Common common;
};

int cmd_measures(const MeasuresArgs& a, std::ostream& out) {
  if (!(a.cutoff >= 0.0 && a.cutoff <= 1.0)) throw std::invalid_argument("--cutoff must lie in [0, 1]");
  const std::uint64_t seed = effective_seed(a.common.seed);
  const auto specs = learner_list(a.learners, seed);
  out << "seed: " << seed << '\n';
  const Dataset data = load_input(a.data, a.label);

  const auto ih = instance_hardness(data, specs, CvProtocol{a.repeats, a.folds, seed}, a.common.jobs);
  const auto noisy = noisy_instances(ih, a.cutoff);
  const auto hardness = hardness_measures(data, a.k, seed);
  const auto complexity = complexity_measures(data);

  std::ostringstream rows;
  rows << "index,label,ih,kdn,ds,dcp,td,cl,cld,mv,cb\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    rows << i << ',' << data.class_names()[data.instance(i).label];
    for (const double v : {ih[i], hardness.kdn[i], hardness.ds[i], hardness.dcp[i], hardness.td[i],
                           hardness.cl[i], hardness.cld[i], hardness.mv[i], hardness.cb[i]}) {
      rows << ',' << format_real(v);
    }
    rows << '\n';
  }
  std::ostringstream summary;
  summary << "dataset,f2,f3,f4,n1,n2,n3,t1,t2,noisy_percent\n" << data.name();
  for (const double v : {complexity.f2, complexity.f3, complexity.f4, complexity.n1, complexity.n2,
                         complexity.n3, complexity.t1, complexity.t2, noisy.percent}) {
    summary << ',' << format_real(v);
  }
  summary << '\n';

  const fs::path dir(a.common.out);
  write_text(dir / "instances.csv", rows.str());
  write_text(dir / "dataset.csv", summary.str());
  out << noisy.indices.size() << " of " << data.size() << " instances have hardness above "
      << format_real(a.cutoff) << " (" << format_real(noisy.percent) << "%)\n";
  out << "wrote " << (dir / "instances.csv").string() << " and " << (dir / "dataset.csv").string() << '\n';
  return 0;
}

// ---- cod ------------------------------------------------------------------

struct CodArgs {
  std::string data;
  std::string label;
  std::string learners = "all";
  std::size_t folds = 10;
  std::size_t repeats = 1;
  double cut_height = 0.18;
  Common common;
};

int cmd_cod(const CodArgs& a, std::ostream& out) {
  const auto paths = split_list(a.data);
  if (paths.empty()) throw std::invalid_argument("--data lists no datasets");
  if (!(a.cut_height >= 0.0)) throw std::invalid_argument("--cut must be non-negative");
  const std::uint64_t seed = effective_seed(a.common.seed);
  const auto specs = learner_list(a.learners, seed);
  out << "seed: " << seed << '\n';
  std::vector<Dataset> datasets;
  for (const auto& p : paths) datasets.push_back(load_input(p, a.label));

  const auto matrix = cod_matrix(specs, datasets, CvProtocol{a.repeats, a.folds, seed}, a.common.jobs);
  const auto tree = agglomerate(matrix);
  const auto clusters = cut(tree, a.cut_height);
  const auto reps = representatives(clusters, matrix);

  std::ostringstream grid;
  grid << "learner";
  for (const auto& id : matrix.ids()) grid << ',' << id;
  grid << '\n';
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    grid << matrix.ids()[i];
    for (std::size_t j = 0; j < matrix.size(); ++j) grid << ',' << format_real(matrix.at(i, j));
    grid << '\n';
  }
  const fs::path dir(a.common.out);
  write_text(dir / "cod.csv", grid.str());
  write_text(dir / "dendrogram.txt", dendrogram_text(tree));
  write_text(dir / "merges.csv", dendrogram_csv(tree));

  out << dendrogram_text(tree);
  out << clusters.size() << " clusters at cut " << format_real(a.cut_height) << ":\n";
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    out << "  {";
    for (std::size_t m = 0; m < clusters[c].size(); ++m) out << (m ? ", " : "") << matrix.ids()[clusters[c][m]];
    out << "} representative " << matrix.ids()[reps[c]] << '\n';
  }
  return 0;
}

// ---- run ------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::string data;
  std::string label;
  std::string learners;
  std::string ensemble;
  std::string conditions;
  std::string thresholds;
  std::string flag_mode;
  std::string adaptive_flag_mode;
  std::size_t folds = 0;
  std::size_t repeats = 0;
  std::vector<std::string> compare;
  std::string seed;
  std::size_t jobs = 0;
  std::string out;
};

std::string join_json_list(const json& value, const std::string& key) {
  if (value.is_string()) return value.get<std::string>();
  if (!value.is_array()) throw std::invalid_argument("config '" + key + "' must be a string or list");
  std::string joined;
  for (const auto& item : value) {
    if (!item.is_string() && !item.is_number()) {
      throw std::invalid_argument("config '" + key + "' entries must be strings or numbers");
    }
    if (!joined.empty()) joined += ',';
    joined += item.is_string() ? item.get<std::string>() : format_real(item.get<double>());
  }
  return joined;
}

Dataset dataset_from_json(const json& entry, const fs::path& base, std::uint64_t seed, std::size_t index) {
  if (entry.is_string()) return load_dataset(base / entry.get<std::string>());
  if (!entry.is_object()) throw std::invalid_argument("config dataset entries must be paths or objects");
  std::optional<Dataset> data;
  for (const auto& [key, value] : entry.items()) {
    if (key != "path" && key != "label" && key != "blobs" && key != "noise" && key != "name") {
      throw std::invalid_argument("unknown dataset key '" + key + "'");
    }
  }
  if (entry.contains("path")) {
    const fs::path path = base / entry.at("path").get<std::string>();
    const std::string label = entry.contains("label") ? entry.at("label").get<std::string>() : "";
    data = load_input(path, label);
  } else if (entry.contains("blobs")) {
    BlobOptions options;
    options.seed = mix_seed({seed, index});
    for (const auto& [key, value] : entry.at("blobs").items()) {
      if (key == "classes") options.class_count = value.get<std::size_t>();
      else if (key == "per_class") options.per_class = value.get<std::size_t>();
      else if (key == "dimension") options.dimension = value.get<std::size_t>();
      else if (key == "spread") options.spread = value.get<double>();
      else if (key == "seed") options.seed = value.get<std::uint64_t>();
      else throw std::invalid_argument("unknown blobs key '" + key + "'");
    }
    data = make_blobs(options);
  } else {
    throw std::invalid_argument("config dataset needs 'path' or 'blobs'");
  }
  if (entry.contains("noise")) {
    const double rate = entry.at("noise").get<double>();
    if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("dataset noise must lie in [0, 1]");
    data = inject_label_noise(*data, rate, mix_seed({seed, index, 1})).data;
    if (!entry.contains("name")) data = data->renamed(data->name() + "-noise" + format_real(rate));
  }
  if (entry.contains("name")) data = data->renamed(entry.at("name").get<std::string>());
  return *data;
}

int cmd_run(const RunArgs& a, std::ostream& out) {
  json config = json::object();
  fs::path base = ".";
  if (!a.config.empty()) {
    std::ifstream in(a.config, std::ios::binary);
    if (!in) throw DataError(DataErrorKind::unreadable_file, "cannot open '" + a.config + "'");
    try {
      config = json::parse(in);
    } catch (const json::exception& e) {
      throw std::invalid_argument("config '" + a.config + "': " + e.what());
    }
    if (!config.is_object()) throw std::invalid_argument("config must be a JSON object");
    base = fs::path(a.config).parent_path();
    static const std::set<std::string> known{
        "datasets", "learners", "ensemble", "conditions", "thresholds", "flag_mode",
        "adaptive_flag_mode", "adaptive_threshold", "validation_fraction", "repeats", "folds",
        "seed", "jobs", "out", "compare"};
    for (const auto& [key, value] : config.items()) {
      if (!known.count(key)) throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }

  try {
    std::uint64_t seed = 0;
    if (!a.seed.empty()) {
      seed = parse_seed(a.seed, "--seed");
    } else if (config.contains("seed")) {
      seed = config.at("seed").get<std::uint64_t>();
    } else {
      seed = effective_seed("");
    }

    ExperimentPlan plan;
    plan.seed = seed;
    if (!a.data.empty()) {
      for (const auto& p : split_list(a.data)) plan.datasets.push_back(load_input(p, a.label));
    } else if (config.contains("datasets")) {
      const auto& entries = config.at("datasets");
      if (!entries.is_array()) throw std::invalid_argument("config 'datasets' must be a list");
      for (std::size_t i = 0; i < entries.size(); ++i) {
        plan.datasets.push_back(dataset_from_json(entries[i], base, seed, i));
      }
    }
    std::set<std::string> names;
    for (const auto& d : plan.datasets) {
      if (!names.insert(d.name()).second) throw std::invalid_argument("duplicate dataset name '" + d.name() + "'");
    }

    auto text_of = [&](const std::string& flag, const char* key, const std::string& fallback) {
      if (!flag.empty()) return flag;
      if (config.contains(key)) return join_json_list(config.at(key), key);
      return fallback;
    };
    plan.learners = parse_learner_list(text_of(a.learners, "learners", "knn"), seed);
    plan.ensemble = parse_learner_list(text_of(a.ensemble, "ensemble", "all"), seed);
    plan.conditions.clear();
    for (const auto& c : split_list(text_of(a.conditions, "conditions", "none,ensemble"))) {
      plan.conditions.push_back(parse_condition(c));
    }
    const std::string thresholds = text_of(a.thresholds, "thresholds", "");
    if (!thresholds.empty()) plan.thresholds = parse_reals(thresholds);
    plan.flag_mode = FlagMode::parse(text_of(a.flag_mode, "flag_mode", "all"), seed);
    plan.adaptive_flag_mode = FlagMode::parse(text_of(a.adaptive_flag_mode, "adaptive_flag_mode", "cv:3"), seed);
    if (config.contains("adaptive_threshold")) plan.adaptive_threshold = config.at("adaptive_threshold").get<double>();
    if (config.contains("validation_fraction")) {
      plan.validation_fraction = config.at("validation_fraction").get<double>();
    }
    plan.repeats = a.repeats ? a.repeats : config.value("repeats", std::size_t{5});
    plan.folds = a.folds ? a.folds : config.value("folds", std::size_t{10});
    plan.jobs = a.jobs ? a.jobs : config.value("jobs", std::size_t{1});
    const std::string out_dir = !a.out.empty() ? a.out : config.value("out", std::string("purgelab-out"));

    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<std::string> compare = a.compare;
    if (compare.empty() && config.contains("compare")) {
      for (const auto& item : config.at("compare")) compare.push_back(item.get<std::string>());
    }
    for (const auto& c : compare) {
      const auto colon = c.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("--compare expects baseline:comparison");
      pairs.emplace_back(c.substr(0, colon), c.substr(colon + 1));
    }
    plan.validate();
    out << "seed: " << seed << '\n';

    const auto result = run_experiment(plan);

    if (pairs.empty()) {
      const bool has_none = std::count(plan.conditions.begin(), plan.conditions.end(), Condition::none) > 0;
      const bool has_voting = std::count(plan.conditions.begin(), plan.conditions.end(), Condition::voting) > 0;
      for (const Condition c : plan.conditions) {
        if (c == Condition::biased || c == Condition::adaptive) {
          if (has_none) pairs.emplace_back("none", std::string(to_string(c)));
        } else if (c == Condition::ensemble && has_none) {
          for (const double t : plan.thresholds) pairs.emplace_back("none", "ensemble@" + format_real(t));
          if (plan.thresholds.size() > 1) pairs.emplace_back("none", "ensemble@max");
        } else if (c == Condition::filtered_voting && has_voting) {
          for (const double t : plan.thresholds) pairs.emplace_back("voting", "fvoting@" + format_real(t));
          if (plan.thresholds.size() > 1) pairs.emplace_back("voting", "fvoting@max");
        }
      }
    }
    std::vector<SummaryTable> tables;
    for (const auto& [b, c] : pairs) tables.push_back(summarize(result, b, c));

    const fs::path dir(out_dir);
    write_text(dir / "results.csv", results_csv(result));
    write_text(dir / "summary.json", summary_json(result, tables));

    for (const auto& t : tables) out << '\n' << format_table(t);
    std::size_t failed = 0;
    for (const auto& cell : result.cells) failed += cell.failed() ? 1 : 0;
    if (failed) out << '\n' << failed << " cells failed; see summary.json\n";
    out << "\nwrote " << result.cells.size() << " cells to " << (dir / "results.csv").string() << '\n';
    return 0;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Label-noise filtering lab"};
  app.name("purgelab");
  app.require_subcommand(1);

  FilterArgs filter;
  auto* f = app.add_subcommand("filter", "Filter a dataset and report what was removed");
  f->add_option("--data", filter.data, "Dataset file (.csv or .arff)")->required();
  f->add_option("--label", filter.label, "CSV label column (default: last)");
  f->add_option("--mode", filter.mode, "ensemble | biased | adaptive")->capture_default_str();
  f->add_option("--learners", filter.learners, "Filter learners, comma-separated or 'all'")->capture_default_str();
  f->add_option("--learner", filter.learner, "Target learner for biased and adaptive modes")->capture_default_str();
  f->add_option("--threshold", filter.threshold, "Fraction of learners that must misclassify")->capture_default_str();
  f->add_option("--flag-mode", filter.flag_mode, "all | cv:<folds> (default: all; cv:3 for adaptive)");
  f->add_option("--validation", filter.validation, "Adaptive validation fraction")->capture_default_str();
  add_common(f, filter.common);

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run a cross-validated experiment grid");
  r->add_option("--config", run.config, "JSON config file");
  r->add_option("--data", run.data, "Dataset files, comma-separated");
  r->add_option("--label", run.label, "CSV label column (default: last)");
  r->add_option("--learners,--learner", run.learners, "Target learners (default: knn)");
  r->add_option("--ensemble", run.ensemble, "Filter and voting members (default: all)");
  r->add_option("--conditions", run.conditions,
                "none,biased,ensemble,adaptive,voting,filtered-voting (default: none,ensemble)");
  r->add_option("--thresholds,--threshold", run.thresholds, "Ensemble thresholds (default: 0.5,0.7,0.9)");
  r->add_option("--flag-mode", run.flag_mode, "all | cv:<folds> (default: all)");
  r->add_option("--adaptive-flag-mode", run.adaptive_flag_mode, "all | cv:<folds> (default: cv:3)");
  r->add_option("--folds", run.folds, "Folds per repeat (default: 10)");
  r->add_option("--repeats", run.repeats, "Repeats (default: 5)");
  r->add_option("--compare", run.compare, "baseline:comparison pair, repeatable");
  r->add_option("--seed", run.seed, "Master seed (default: config, $PURGELAB_SEED or 0)");
  r->add_option("--jobs", run.jobs, "Worker threads (default: 1)");
  r->add_option("--out", run.out, "Output directory (default: purgelab-out)");

  MeasuresArgs measures;
  auto* m = app.add_subcommand("measures", "Instance hardness and data complexity");
  m->add_option("--data", measures.data, "Dataset file")->required();
  m->add_option("--label", measures.label, "CSV label column (default: last)");
  m->add_option("--learners", measures.learners, "Learners for instance hardness")->capture_default_str();
  m->add_option("--folds", measures.folds, "Folds for instance hardness")->capture_default_str();
  m->add_option("--repeats", measures.repeats, "Repeats for instance hardness")->capture_default_str();
  m->add_option("--k", measures.k, "Neighbours for kDN")->capture_default_str();
  m->add_option("--cutoff", measures.cutoff, "Hardness above which an instance counts as noisy")
      ->capture_default_str();
  add_common(m, measures.common);

  CodArgs cod;
  auto* c = app.add_subcommand("cod", "Cluster learners by classifier output difference");
  c->add_option("--data", cod.data, "Dataset files, comma-separated")->required();
  c->add_option("--label", cod.label, "CSV label column (default: last)");
  c->add_option("--learners", cod.learners, "Learners to compare")->capture_default_str();
  c->add_option("--folds", cod.folds, "Folds for out-of-fold predictions")->capture_default_str();
  c->add_option("--repeats", cod.repeats, "CV repeats")->capture_default_str();
  c->add_option("--cut", cod.cut_height, "Dendrogram cut height")->capture_default_str();
  add_common(c, cod.common);

  NoiseArgs noise;
  auto* n = app.add_subcommand("noise", "Inject uniform label noise");
  n->add_option("--data", noise.data, "Dataset file")->required();
  n->add_option("--label", noise.label, "CSV label column (default: last)");
  n->add_option("--rate", noise.rate, "Fraction of labels to corrupt")->capture_default_str();
  add_common(n, noise.common);

  BlobArgs blobs;
  auto* b = app.add_subcommand("blobs", "Write a synthetic Gaussian-blob dataset");
  b->add_option("--classes", blobs.options.class_count)->capture_default_str();
  b->add_option("--per-class", blobs.options.per_class)->capture_default_str();
  b->add_option("--dimension", blobs.options.dimension)->capture_default_str();
  b->add_option("--spread", blobs.options.spread)->capture_default_str();
  b->add_option("--noise", blobs.noise, "Label-noise rate")->capture_default_str();
  b->add_option("--seed", blobs.seed, "Seed (default: $PURGELAB_SEED or 0)");
  b->add_option("--out", blobs.file, "Output file (.csv or .arff)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (f->parsed()) return cmd_filter(filter, out);
    if (r->parsed()) return cmd_run(run, out);
    if (m->parsed()) return cmd_measures(measures, out);
    if (c->parsed()) return cmd_cod(cod, out);
    if (n->parsed()) return cmd_noise(noise, out);
    if (b->parsed()) return cmd_blobs(blobs, out);
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}

}  // namespace purgelab
