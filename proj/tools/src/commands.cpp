#include "faultloc/cli/commands.hpp"

#include <algorithm>
#include <ostream>
#include <set>

#include "faultloc/augment.hpp"
#include "faultloc/cli/manifest.hpp"
#include "faultloc/cli/service.hpp"
#include "faultloc/corpus.hpp"
#include "faultloc/csv.hpp"
#include "faultloc/datasplit.hpp"
#include "faultloc/error.hpp"
#include "faultloc/evalrank.hpp"
#include "faultloc/features.hpp"
#include "faultloc/io.hpp"
#include "faultloc/models.hpp"
#include "faultloc/textprep.hpp"

namespace faultloc::cli {
namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

fs::path out_dir(const RunConfig& config) { return config.get_or("out", "out"); }

// Explicit setting, else the default artifact under `out`; must exist.
fs::path artifact(const RunConfig& config, const std::string& key, const fs::path& default_name,
                  std::string_view producer) {
  const fs::path path = config.has(key) ? fs::path(*config.get(key)) : out_dir(config) / default_name;
  if (!fs::exists(path)) {
    throw Error(ErrorKind::kMissingArtifact, "missing artifact " + path.generic_string() + "; run '" +
                                                 std::string(producer) + "' first or pass " + flag_for(key));
  }
  return path;
}

fs::path existing_input(const RunConfig& config, const std::string& key) {
  const fs::path path = config.require(key);
  if (!fs::exists(path)) throw Error(ErrorKind::kIo, "input file not found: " + path.generic_string());
  return path;
}

void write_output(RunManifest& manifest, const fs::path& path, std::string_view content) {
  io::write_file(path, content);
  manifest.add_output(path);
}

std::optional<std::size_t> optional_size(const RunConfig& config, const std::string& key,
                                         std::optional<std::size_t> fallback) {
  const auto value = config.get(key);
  if (!value) return fallback;
  if (*value == "none" || *value == "null" || value->empty()) return std::nullopt;
  return config.get_size(key, 0);
}

PreprocessConfig preprocess_config(const RunConfig& config, RunManifest& manifest) {
  PreprocessConfig pc = PreprocessConfig::defaults();
  if (config.has("templates")) {
    const auto path = existing_input(config, "templates");
    pc.templates = TemplateStripper(load_template_patterns(path));
    manifest.add_input(path);
  }
  if (config.has("stopwords")) {
    const auto path = existing_input(config, "stopwords");
    pc.stopwords = load_stopwords(path);
    manifest.add_input(path);
  }
  if (config.has("lemma_exceptions")) {
    const auto path = existing_input(config, "lemma_exceptions");
    pc.lemmatizer = Lemmatizer(load_lemma_exceptions(path));
    manifest.add_input(path);
  }
  pc.decamel_enabled = config.get_bool("decamel", true);
  return pc;
}

// Preprocessing settings bundled with a model: the preprocess stage output if
// present, else the embedded defaults.
PreprocessConfig bundled_preprocess(const RunConfig& config, RunManifest& manifest) {
  const fs::path path = config.has("preprocess_config") ? fs::path(*config.get("preprocess_config"))
                                                        : out_dir(config) / "preprocess_config.json";
  if (!fs::exists(path)) {
    if (config.has("preprocess_config")) {
      throw Error(ErrorKind::kMissingArtifact, "missing artifact " + path.generic_string());
    }
    return PreprocessConfig::defaults();
  }
  manifest.add_input(path);
  try {
    return preprocess_config_from_json(nlohmann::json::parse(io::read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kParse, path.generic_string() + ": invalid JSON at byte " + std::to_string(e.byte));
  }
}

Thesaurus thesaurus_from(const RunConfig& config, RunManifest& manifest) {
  if (!config.has("thesaurus")) return Thesaurus::defaults();
  const auto path = existing_input(config, "thesaurus");
  manifest.add_input(path);
  return load_thesaurus(path);
}

TfidfConfig tfidf_config(const RunConfig& config) {
  TfidfConfig tc;
  tc.max_features = optional_size(config, "max_features", std::nullopt);
  const auto range = config.get_sizes("ngram_range", {1, 1});
  if (range.size() != 2) throw Error(ErrorKind::kConfig, "ngram_range must be 'lo,hi'");
  tc.ngram_lo = range[0];
  tc.ngram_hi = range[1];
  tc.min_df = config.get_size("min_df", 1);
  tc.validate();
  return tc;
}

HyperParams hyper_params(const RunConfig& config, ModelKind kind) {
  HyperParams hyper;
  auto& l = hyper.linear;
  l.c = config.get_double("c", l.c);
  l.tolerance = config.get_double("tolerance", l.tolerance);
  l.max_iterations = config.get_size("max_iterations", l.max_iterations);
  auto& f = hyper.forest;
  f.n_trees = config.get_size("n_trees", f.n_trees);
  f.max_depth = optional_size(config, "max_depth", std::nullopt);
  f.min_samples_split = config.get_size("min_samples_split", f.min_samples_split);
  f.min_samples_leaf = config.get_size("min_samples_leaf", f.min_samples_leaf);
  f.seed = config.get_u64("seed", f.seed);
  if (config.has("class_weight")) {
    const auto weight = parse_class_weight(*config.get("class_weight"));
    (kind == ModelKind::kRandomForest ? f.class_weight : l.class_weight) = weight;
  }
  return hyper_from_json(kind, to_json(kind, hyper));
}

FeatureKind feature_kind(const RunConfig& config) { return parse_feature_kind(config.get_or("features", "tfidf")); }

// Dense vectors for every listed report; nullptr for TF-IDF runs.
std::unique_ptr<DenseMatrix> dense_vectors(const RunConfig& config, RunManifest& manifest,
                                           const std::vector<const std::vector<ProcessedReport>*>& sets) {
  if (feature_kind(config) != FeatureKind::kDense) return nullptr;
  const auto path = existing_input(config, "vectors");
  manifest.add_input(path);
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto* set : sets) {
    for (const auto& report : *set) {
      if (seen.insert(report.report_id).second) ids.push_back(report.report_id);
    }
  }
  return std::make_unique<DenseMatrix>(load_dense_vectors(path, ids));
}

FeatureSpec feature_spec(const RunConfig& config, const DenseMatrix* dense) {
  FeatureSpec spec;
  spec.kind = feature_kind(config);
  spec.tfidf = tfidf_config(config);
  spec.dense = dense;
  return spec;
}

std::vector<ProcessedReport> load_reports_at(const fs::path& path, RunManifest& manifest) {
  manifest.add_input(path);
  return load_processed(path);
}

fs::path training_input(const RunConfig& config) {
  if (config.has("variant") && !config.has("train")) {
    const fs::path path = out_dir(config) / "variants" / (*config.get("variant") + ".jsonl");
    if (!fs::exists(path)) {
      throw Error(ErrorKind::kMissingArtifact, "missing artifact " + path.generic_string() + "; run 'augment' first");
    }
    return path;
  }
  return artifact(config, "train", "train.jsonl", "split");
}

nlohmann::ordered_json load_grid(const RunConfig& config, const std::string& key, ModelKind kind,
                                 RunManifest& manifest) {
  if (!config.has(key)) return default_grid(kind);
  const auto path = existing_input(config, key);
  manifest.add_input(path);
  try {
    return nlohmann::ordered_json::parse(io::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kParse, path.generic_string() + ": invalid JSON at byte " + std::to_string(e.byte));
  }
}

std::string bundle_path_default(const RunConfig& config) {
  return "model_" + std::string(to_string(parse_model_kind(config.get_or("model", "lr")))) + ".json";
}

ojson model_details(const OvrModel& model) {
  std::size_t unconverged = 0;
  for (const auto& l : model.linear) unconverged += (!l.constant && !l.converged) ? 1 : 0;
  std::vector<std::string> degenerate;
  for (std::size_t j : model.degenerate_labels) degenerate.push_back(model.label_space.label(j));
  return {{"kind", to_string(model.kind)},
          {"feature_kind", to_string(model.feature_kind)},
          {"dim", model.dim},
          {"labels", model.label_space.size()},
          {"hyper", to_json(model.kind, model.hyper)},
          {"degenerate_labels", degenerate},
          {"unconverged_submodels", unconverged}};
}

std::string display_variant(const std::string& variant) {
  if (variant == "original") return "Original";
  std::string out;
  for (std::size_t i = 0; i < variant.size(); ++i) {
    const char c = variant[i];
    if (c == '_') {
      out += ' ';
    } else if (i < 2) {
      out += static_cast<char>(c - 'a' + 'A');
    } else {
      out += (i == 3) ? static_cast<char>(c - 'a' + 'A') : c;
    }
  }
  return out;
}

std::string column_name(ModelKind kind, FeatureKind features, const std::string& variant) {
  std::string model(to_string(kind));
  std::transform(model.begin(), model.end(), model.begin(), [](char c) { return static_cast<char>(c - 'a' + 'A'); });
  return model + " + " + (features == FeatureKind::kTfidf ? "TF-IDF" : "Embeddings") + " (" +
         display_variant(variant) + ")";
}

}  // namespace

ojson cmd_ingest(const RunConfig& config) {
  RunManifest manifest("ingest", config);
  const auto reports_path = existing_input(config, "reports");
  manifest.add_input(reports_path);
  const auto reports = load_reports(reports_path, report_format_from_path(reports_path));
  PathMapping mapping;
  if (config.has("mapping")) {
    const auto mapping_path = existing_input(config, "mapping");
    manifest.add_input(mapping_path);
    mapping = load_path_mapping(mapping_path);
  }
  const auto derived = derive_labels(reports, mapping);
  const auto diffuse = filter_diffuse(derived.examples, config.get_size("max_labels", kMaxLabelsPerReport));
  const auto rare = filter_rare_labels(diffuse.examples, config.get_size("min_occurrences", kDefaultMinLabelOccurrence));

  const fs::path dir = out_dir(config);
  write_output(manifest, dir / "labeled.jsonl", labeled_examples_jsonl(rare.examples));
  ojson report{{"reports_read", reports.size()},
               {"mapped_paths", derived.mapped_paths},
               {"fallback_paths", derived.fallback_paths},
               {"removed_diffuse", diffuse.removed_examples},
               {"removed_rare_examples", rare.removed_examples},
               {"removed_labels", rare.removed_labels},
               {"kept_reports", rare.examples.size()}};
  write_output(manifest, dir / "ingest_report.json", report.dump(2) + "\n");
  manifest.details() = report;
  manifest.write(dir);
  return report;
}

ojson cmd_stats(const RunConfig& config) {
  RunManifest manifest("stats", config);
  const auto input = artifact(config, "labeled", "labeled.jsonl", "ingest");
  manifest.add_input(input);
  const auto stats = corpus_stats(parse_labeled_examples_jsonl(io::read_file(input)));

  const fs::path dir = out_dir(config);
  write_output(manifest, dir / "label_frequency.csv", label_frequency_csv(stats));
  std::string histogram = "labels_per_report,reports\n";
  for (const auto& [labels, reports] : stats.labels_per_report_histogram) {
    histogram += std::to_string(labels) + "," + std::to_string(reports) + "\n";
  }
  write_output(manifest, dir / "labels_per_report.csv", histogram);
  const auto summary = stats_summary_json(stats);
  write_output(manifest, dir / "stats.json", summary.dump(2) + "\n");
  manifest.details() = summary;
  manifest.write(dir);
  return summary;
}

ojson cmd_preprocess(const RunConfig& config) {
  RunManifest manifest("preprocess", config);
  const auto input = artifact(config, "labeled", "labeled.jsonl", "ingest");
  manifest.add_input(input);
  const PreprocessConfig pc = preprocess_config(config, manifest);
  const auto corpus = preprocess_corpus(parse_labeled_examples_jsonl(io::read_file(input)), pc);

  const fs::path dir = out_dir(config);
  write_output(manifest, dir / "processed.jsonl", processed_jsonl(corpus.reports));
  std::string log = "report_id,reason\n";
  for (const auto& removal : corpus.removals) log += csv::join({removal.report_id, removal.reason}) + "\n";
  write_output(manifest, dir / "cleaning_log.csv", log);
  write_output(manifest, dir / "preprocess_config.json", to_json(pc).dump(2) + "\n");
  ojson summary{{"kept", corpus.reports.size()}, {"removed", corpus.removals.size()}};
  manifest.details() = summary;
  manifest.write(dir);
  return summary;
}

ojson cmd_split(const RunConfig& config) {
  RunManifest manifest("split", config);
  const auto input = artifact(config, "processed", "processed.jsonl", "preprocess");
  const auto corpus = load_reports_at(input, manifest);
  SplitSpec spec;
  const auto ratios = config.get_doubles("ratios", {spec.ratios[0], spec.ratios[1], spec.ratios[2]});
  if (ratios.size() != 3) throw Error(ErrorKind::kConfig, "ratios must list train,validation,test");
  std::copy(ratios.begin(), ratios.end(), spec.ratios.begin());
  spec.seed = config.get_u64("seed", spec.seed);
  const auto split = iterative_stratified_split(corpus, spec);

  const fs::path dir = out_dir(config);
  write_output(manifest, dir / "split.json", split_manifest(split, spec).dump(2) + "\n");
  write_output(manifest, dir / "train.jsonl", processed_jsonl(split.train.reports));
  write_output(manifest, dir / "validation.jsonl", processed_jsonl(split.validation));
  write_output(manifest, dir / "test.jsonl", processed_jsonl(split.test));
  ojson summary{{"seed", spec.seed},
                {"ratios", spec.ratios},
                {"train", split.train.reports.size()},
                {"validation", split.validation.size()},
                {"test", split.test.size()},
                {"labels", split.label_space.size()},
                {"unknown_labels", split.unknown_labels}};
  manifest.details() = summary;
  manifest.write(dir);
  return summary;
}

ojson cmd_augment(const RunConfig& config) {
  RunManifest manifest("augment", config);
  const auto input = artifact(config, "train", "train.jsonl", "split");
  const TrainingSet train{load_reports_at(input, manifest)};
  const Thesaurus thesaurus = thesaurus_from(config, manifest);
  AugmentPlan plan;
  plan.factor = config.get_size("factor", plan.factor);
  plan.target_threshold = config.get_size("threshold", plan.target_threshold);
  plan.edit_rate = config.get_double("edit_rate", plan.edit_rate);
  plan.seed = config.get_u64("seed", plan.seed);
  plan.validate();

  const fs::path dir = out_dir(config);
  ojson variants = ojson::array();
  auto emit = [&](const std::string& name, const std::vector<ProcessedReport>& reports, ojson extra) {
    write_output(manifest, dir / "variants" / (name + ".jsonl"), processed_jsonl(reports, name));
    extra["name"] = name;
    extra["size"] = reports.size();
    variants.push_back(std::move(extra));
  };

  if (config.has("technique") || config.has("scope")) {
    plan.technique = parse_technique(config.require("technique"));
    plan.scope = parse_scope(config.require("scope"));
    const auto augmented = augment_training_set(train, plan, training_label_counts(train), thesaurus);
    if (!(fit_label_space(augmented.reports) == fit_label_space(train.reports))) {
      throw Error(ErrorKind::kPrecondition, "augmentation changed the training label space");
    }
    emit(variant_name(plan.technique, plan.scope), augmented.reports,
         {{"source_examples", augmented.source_examples}, {"flagged_copies", augmented.flagged_copies}});
  } else {
    for (const auto& variant : make_training_variants(train, plan, thesaurus)) {
      emit(variant.name, variant.train.reports, ojson::object());
    }
  }
  ojson summary{{"factor", plan.factor},
                {"threshold", plan.target_threshold},
                {"edit_rate", plan.edit_rate},
                {"seed", plan.seed},
                {"original_size", train.reports.size()},
                {"variants", variants}};
  manifest.details() = summary;
  manifest.write(dir);
  return summary;
}

ojson cmd_train(const RunConfig& config) {
  RunManifest manifest("train", config);
  const ModelKind kind = parse_model_kind(config.get_or("model", "lr"));
  const TrainingSet train{load_reports_at(training_input(config), manifest)};
  const auto dense = dense_vectors(config, manifest, {&train.reports});
  const FeatureSpec spec = feature_spec(config, dense.get());
  const HyperParams hyper = hyper_params(config, kind);

  const LabelSpace space = fit_label_space(train.reports);
  ModelBundle bundle;
  bundle.transformer = fit_transformer(spec, train.reports);
  const FeatureMatrix x = bundle.transformer->transform(train.reports);
  bundle.model = train_ovr(kind, x, binarize_all(train.reports, space).rows, space, hyper);
  bundle.preprocess = bundled_preprocess(config, manifest);

  const fs::path dir = out_dir(config);
  const fs::path path = config.has("bundle") ? fs::path(*config.get("bundle")) : dir / bundle_path_default(config);
  save_model(bundle, path);
  manifest.add_output(path);
  ojson summary = model_details(bundle.model);
  summary["bundle"] = path.generic_string();
  manifest.details() = summary;
  manifest.write(dir);
  return summary;
}

ojson cmd_tune(const RunConfig& config) {
  RunManifest manifest("tune", config);
  const ModelKind kind = parse_model_kind(config.get_or("model", "lr"));
  const TrainingSet train{load_reports_at(training_input(config), manifest)};
  const auto dense = dense_vectors(config, manifest, {&train.reports});
  GridOptions options;
  options.kind = kind;
  options.base = hyper_params(config, kind);
  options.features = feature_spec(config, dense.get());
  options.folds = config.get_size("folds", 3);
  options.seed = config.get_u64("seed", 42);
  const auto grid = load_grid(config, "grid", kind, manifest);
  const GridResult result = grid_search(grid, train, options);

  ModelBundle bundle{result.model, result.transformer, bundled_preprocess(config, manifest)};
  const fs::path dir = out_dir(config);
  const fs::path path = config.has("bundle") ? fs::path(*config.get("bundle")) : dir / bundle_path_default(config);
  save_model(bundle, path);
  manifest.add_output(path);
  write_output(manifest, dir / ("grid_" + std::string(to_string(kind)) + ".json"), to_json(result).dump(2) + "\n");
  ojson summary{{"best_config", result.best_config},
                {"best_mean_map", result.entries[result.best_index].mean_map},
                {"configs", result.entries.size()},
                {"failed", std::count_if(result.entries.begin(), result.entries.end(),
                                         [](const GridEntry& e) { return e.failure.has_value(); })},
                {"bundle", path.generic_string()}};
  manifest.details() = summary;
  manifest.write(dir);
  return summary;
}

ojson cmd_evaluate(const RunConfig& config) {
  RunManifest manifest("evaluate", config);
  const auto bundle_file = artifact(config, "bundle", bundle_path_default(config), "train");
  manifest.add_input(bundle_file);
  const ModelBundle bundle = load_model(bundle_file);
  if (!bundle.transformer) {
    throw Error(ErrorKind::kMissingArtifact, "bundle " + bundle_file.generic_string() + " has no feature transformer");
  }
  const auto test = load_reports_at(artifact(config, "test", "test.jsonl", "split"), manifest);
  const auto ks = config.get_sizes("ks", default_ks());

  MetricsReport metrics;
  if (bundle.transformer->kind() == FeatureKind::kDense) {
    RunConfig dense_config = config;
    dense_config.set("features", "dense");
    const auto dense = dense_vectors(dense_config, manifest, {&test});
    const FittedTransformer transformer(bundle.transformer->standardizer(), dense.get());
    metrics = evaluate(bundle.model, transformer, test, ks);
  } else {
    metrics = evaluate(bundle.model, *bundle.transformer, test, ks);
  }

  const fs::path dir = out_dir(config);
  const std::string name = config.get_or("name", std::string(to_string(bundle.model.kind)));
  write_output(manifest, dir / ("metrics_" + name + ".json"), to_json(metrics).dump(2) + "\n");
  write_output(manifest, dir / ("metrics_" + name + ".csv"), metrics_table_csv({{name, metrics}}, ks));
  const ojson summary = to_json(metrics);
  manifest.details() = summary;
  manifest.write(dir);
  return summary;
}

ojson cmd_benchmark(const RunConfig& config) {
  RunManifest manifest("benchmark", config);
  std::vector<ModelKind> kinds;
  for (const auto& name : config.get_list("models", {"lr", "svm", "rf"})) kinds.push_back(parse_model_kind(name));
  const auto variants =
      config.get_list("variants", {"original", "sr_full", "rs_full", "sr_targeted", "rs_targeted"});
  if (kinds.empty()) throw Error(ErrorKind::kConfig, "benchmark needs at least one model kind");
  if (variants.empty()) throw Error(ErrorKind::kConfig, "benchmark needs at least one training variant");
  const auto ks = config.get_sizes("ks", default_ks());

  const auto test = load_reports_at(artifact(config, "test", "test.jsonl", "split"), manifest);
  std::vector<std::vector<ProcessedReport>> trains;
  for (const auto& variant : variants) {
    const fs::path path = out_dir(config) / "variants" / (variant + ".jsonl");
    if (!fs::exists(path)) {
      throw Error(ErrorKind::kMissingArtifact,
                  "missing artifact " + path.generic_string() + "; run 'augment' first to build the training variants");
    }
    trains.push_back(load_reports_at(path, manifest));
  }
  std::vector<const std::vector<ProcessedReport>*> all_sets{&test};
  for (const auto& t : trains) all_sets.push_back(&t);
  const auto dense = dense_vectors(config, manifest, all_sets);
  const FeatureKind features = feature_kind(config);

  std::vector<std::pair<std::string, std::optional<MetricsReport>>> columns;
  ojson cells = ojson::array();
  struct Best {
    std::size_t column;
    double map;
  };
  std::vector<std::optional<Best>> best(kinds.size());
  for (std::size_t m = 0; m < kinds.size(); ++m) {
    const ModelKind kind = kinds[m];
    const auto grid = load_grid(config, "grid_" + std::string(to_string(kind)), kind, manifest);
    for (std::size_t v = 0; v < variants.size(); ++v) {
      const std::string name = column_name(kind, features, variants[v]);
      ojson cell{{"model", to_string(kind)}, {"variant", variants[v]}, {"column", name}};
      try {
        GridOptions options;
        options.kind = kind;
        options.base = hyper_params(config, kind);
        options.features = feature_spec(config, dense.get());
        options.folds = config.get_size("folds", 3);
        options.seed = config.get_u64("seed", 42);
        const GridResult result = grid_search(grid, TrainingSet{trains[v]}, options);
        const MetricsReport metrics = evaluate(result.model, result.transformer, test, ks);
        cell["best_config"] = result.best_config;
        cell["cv_map"] = result.entries[result.best_index].mean_map;
        cell["metrics"] = to_json(metrics);
        cell["failure"] = nullptr;
        if (!best[m] || metrics.map_score > best[m]->map) best[m] = Best{columns.size(), metrics.map_score};
        columns.emplace_back(name, metrics);
      } catch (const Error& e) {
        cell["failure"] = std::string(to_string(e.kind())) + ": " + e.what();
        columns.emplace_back(name, std::nullopt);
      }
      cells.push_back(std::move(cell));
    }
  }

  std::vector<std::pair<std::string, std::optional<MetricsReport>>> best_columns;
  ojson best_json = ojson::array();
  for (std::size_t m = 0; m < kinds.size(); ++m) {
    if (!best[m]) continue;
    best_columns.push_back(columns[best[m]->column]);
    best_json.push_back({{"model", to_string(kinds[m])}, {"column", columns[best[m]->column].first}});
  }

  const fs::path dir = out_dir(config) / "benchmark";
  write_output(manifest, dir / "metrics.csv", metrics_table_csv(columns, ks));
  write_output(manifest, dir / "best.csv", metrics_table_csv(best_columns, ks));
  ojson summary{{"cells", cells}, {"best_per_family", best_json}};
  write_output(manifest, dir / "results.json", summary.dump(2) + "\n");
  manifest.details() = {{"cells", cells.size()},
                        {"failed", std::count_if(columns.begin(), columns.end(),
                                                 [](const auto& c) { return !c.second.has_value(); })},
                        {"best_per_family", best_json}};
  manifest.write(out_dir(config));
  return summary;
}

ojson cmd_predict(const RunConfig& config) {
  const auto bundle_file = artifact(config, "bundle", bundle_path_default(config), "train");
  const ModelBundle bundle = load_model(bundle_file);
  const std::string title = config.get_or("title", "");
  const std::string description = config.get_or("description", "");
  if (title.empty() && description.empty()) {
    throw Error(ErrorKind::kInvalidInput, "report text is empty; pass --title and/or --description");
  }
  return predict_ranking(bundle, title, description, config.get_size("top_k", 5));
}

void cmd_serve(const RunConfig& config, std::ostream& log) {
  const auto bundle_file = artifact(config, "bundle", bundle_path_default(config), "train");
  PredictionService service(load_model(bundle_file));
  const std::string host = config.get_or("host", "127.0.0.1");
  const int port = service.bind(host, static_cast<int>(config.get_size("port", 8080)));
  log << ojson{{"listening", host + ":" + std::to_string(port)}}.dump() << std::endl;
  service.listen();
}

}  // namespace faultloc::cli
