#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "faultloc/cli/config.hpp"

namespace faultloc::cli {

// Each command reads its inputs from files, writes its outputs and a
// manifest_<command>.json under the `out` directory, and returns a summary.
nlohmann::ordered_json cmd_ingest(const RunConfig& config);
nlohmann::ordered_json cmd_stats(const RunConfig& config);
nlohmann::ordered_json cmd_preprocess(const RunConfig& config);
nlohmann::ordered_json cmd_split(const RunConfig& config);
nlohmann::ordered_json cmd_augment(const RunConfig& config);
nlohmann::ordered_json cmd_train(const RunConfig& config);
nlohmann::ordered_json cmd_tune(const RunConfig& config);
nlohmann::ordered_json cmd_evaluate(const RunConfig& config);
nlohmann::ordered_json cmd_benchmark(const RunConfig& config);
/// Prints nothing and writes nothing; the ranking is the return value.
nlohmann::ordered_json cmd_predict(const RunConfig& config);
/// Blocks until the server stops.
void cmd_serve(const RunConfig& config, std::ostream& log);

/// Parses argv, runs one subcommand, prints its summary to `out`. Failures
/// print {"error": {...}} to `err` and return nonzero.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace faultloc::cli
