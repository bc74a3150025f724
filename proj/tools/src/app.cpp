#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "faultloc/cli/commands.hpp"
#include "faultloc/error.hpp"

namespace faultloc::cli {
namespace {

struct Subcommand {
  std::string name;
  std::string help;
  std::vector<std::string> keys;
};

const std::vector<std::string> kFeatureKeys{"features", "vectors", "max_features", "ngram_range", "min_df"};
const std::vector<std::string> kModelKeys{"c",       "class_weight",      "tolerance",        "max_iterations",
                                          "n_trees", "max_depth",         "min_samples_split", "min_samples_leaf"};

std::vector<std::string> concat(std::vector<std::string> keys, const std::vector<std::string>& more) {
  keys.insert(keys.end(), more.begin(), more.end());
  return keys;
}

std::vector<Subcommand> subcommands() {
  const auto train_keys = concat(concat({"train", "variant", "model", "bundle", "preprocess_config"}, kFeatureKeys),
                                 kModelKeys);
  return {
      {"ingest", "Join reports with path labels and apply the corpus filters",
       {"reports", "mapping", "max_labels", "min_occurrences"}},
      {"stats", "Label frequency and labels-per-report statistics", {"labeled"}},
      {"preprocess", "Clean report text into token lists",
       {"labeled", "templates", "stopwords", "lemma_exceptions", "decamel"}},
      {"split", "Iterative stratified train/validation/test split", {"processed", "ratios"}},
      {"augment", "Synonym replacement / random swap training variants",
       {"train", "technique", "scope", "factor", "threshold", "edit_rate", "thesaurus"}},
      {"train", "Fit a featuriser and one-vs-rest model", train_keys},
      {"tune", "Grid search with stratified CV, refit the best config", concat(train_keys, {"grid", "folds"})},
      {"evaluate", "Ranking metrics of a model bundle on the test split",
       {"bundle", "model", "test", "ks", "vectors", "name"}},
      {"benchmark", "Tune and evaluate every model kind on every training variant",
       concat(concat({"models", "variants", "test", "ks", "grid_lr", "grid_svm", "grid_rf", "folds"}, kFeatureKeys),
              kModelKeys)},
      {"predict", "Rank labels for one report", {"bundle", "model", "title", "description", "top_k"}},
      {"serve", "Local HTTP prediction service", {"bundle", "model", "host", "port"}},
  };
}

void print_error(std::ostream& err, std::string_view kind, const std::string& message, const std::string& command) {
  nlohmann::ordered_json body{{"error", {{"kind", kind}, {"message", message}, {"command", command}}}};
  err << body.dump() << std::endl;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Text-only fault localization: bug reports to ranked subfolder labels", "faultloc"};
  app.require_subcommand(1);
  const auto specs = subcommands();
  std::map<std::string, std::map<std::string, std::string>> flag_values;
  std::map<std::string, std::map<std::string, CLI::Option*>> flag_options;
  std::map<std::string, std::string> config_paths;
  for (const auto& spec : specs) {
    auto* sub = app.add_subcommand(spec.name, spec.help);
    auto& values = flag_values[spec.name];
    auto& options = flag_options[spec.name];
    sub->add_option("--config", config_paths[spec.name], "key = value settings file");
    for (const std::string key : {"seed", "out"}) options[key] = sub->add_option(flag_for(key), values[key]);
    for (const auto& key : spec.keys) {
      const std::string names = key == "ks" ? "--ks,--k" : flag_for(key);
      options[key] = sub->add_option(names, values[key]);
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage_error", e.what(), "");
    return 64;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    RunConfig config;
    if (!config_paths[command].empty()) config = RunConfig::load(config_paths[command]);
    for (const auto& [key, option] : flag_options[command]) {
      if (option->count() > 0) config.override_value(key, flag_values[command][key]);
    }
    if (command == "serve") {
      cmd_serve(config, err);
      return 0;
    }
    nlohmann::ordered_json summary;
    if (command == "ingest") summary = cmd_ingest(config);
    else if (command == "stats") summary = cmd_stats(config);
    else if (command == "preprocess") summary = cmd_preprocess(config);
    else if (command == "split") summary = cmd_split(config);
    else if (command == "augment") summary = cmd_augment(config);
    else if (command == "train") summary = cmd_train(config);
    else if (command == "tune") summary = cmd_tune(config);
    else if (command == "evaluate") summary = cmd_evaluate(config);
    else if (command == "benchmark") summary = cmd_benchmark(config);
    else if (command == "predict") summary = cmd_predict(config);
    out << summary.dump(2) << std::endl;
    return 0;
  } catch (const Error& e) {
    print_error(err, to_string(e.kind()), e.what(), command);
    return 1;
  } catch (const std::exception& e) {
    print_error(err, "internal_error", e.what(), command);
    return 1;
  }
}

}  // namespace faultloc::cli
