#include <gtest/gtest.h>

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "faultloc/cli/commands.hpp"
#include "faultloc/cli/config.hpp"
#include "faultloc/cli/manifest.hpp"
#include "faultloc/cli/service.hpp"
#include "faultloc/datasplit.hpp"
#include "faultloc/io.hpp"
#include "helpers.hpp"
#include "synth.hpp"

namespace faultloc::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

TEST(Config, Grammar) {
  const auto config = RunConfig::parse(
      "# comment\n"
      "\n"
      "seed = 7\n"
      "  out=  results/run1  \n"
      "ratios = 0.7, 0.2, 0.1\n",
      "test.cfg");
  EXPECT_EQ(config.get_u64("seed", 0), 7u);
  EXPECT_EQ(*config.get("out"), "results/run1");
  EXPECT_EQ(config.get_doubles("ratios", {}), (std::vector<double>{0.7, 0.2, 0.1}));
  EXPECT_EQ(config.get_or("missing", "x"), "x");
}

TEST(Config, RejectsBadLines) {
  EXPECT_FAULT(RunConfig::parse("seed = 1\nseed = 2\n"), ErrorKind::kConfig);
  const auto msg = faultloc::testing::error_message([] { RunConfig::parse("seed = 1\nseed = 2\n"); });
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  EXPECT_FAULT(RunConfig::parse("Seed = 1\n"), ErrorKind::kConfig);
  EXPECT_FAULT(RunConfig::parse("no equals sign\n"), ErrorKind::kConfig);
  EXPECT_FAULT(RunConfig::parse("seed = abc\n").get_u64("seed", 0), ErrorKind::kConfig);
}

TEST(Config, OverridesRecorded) {
  auto config = RunConfig::parse("seed = 1\n");
  config.override_value("seed", "42");
  config.override_value("out", "o");
  EXPECT_EQ(config.get_u64("seed", 0), 42u);
  const auto j = config.to_json();
  ASSERT_EQ(j["overrides"].size(), 2u);
  EXPECT_EQ(j["overrides"][0]["previous"], "1");
  EXPECT_TRUE(j["overrides"][1]["previous"].is_null());
}

TEST(Config, RequireNamesFlag) {
  const auto msg = faultloc::testing::error_message([] { RunConfig{}.require("lemma_exceptions"); });
  EXPECT_NE(msg.find("--lemma-exceptions"), std::string::npos) << msg;
  EXPECT_EQ(flag_for("grid_rf"), "--grid-rf");
}

TEST(Manifest, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Manifest, StableAcrossRuns) {
  const auto dir = fs::temp_directory_path() / "faultloc_manifest_test";
  fs::create_directories(dir);
  io::write_file(dir / "in.txt", "abc");
  auto config = RunConfig::parse("seed = 3\n");
  auto write = [&] {
    RunManifest m("split", config);
    m.add_input(dir / "in.txt");
    m.details()["n"] = 1;
    return io::read_file(m.write(dir));
  };
  const auto a = write();
  EXPECT_EQ(a, write());
  const auto j = json::parse(a);
  EXPECT_EQ(j["inputs"][0]["sha256"], sha256_hex("abc"));
  EXPECT_EQ(j["tool_version"], std::string(kToolVersion));
  fs::remove_all(dir);
}

ModelBundle planted_bundle() {
  synth::PlantedSpec spec;
  spec.reports = 200;
  spec.labels = 8;
  const auto reports = synth::planted_corpus(spec).reports;
  ModelBundle bundle;
  const auto transformer = fit_transformer(FeatureSpec{}, reports);
  const auto space = fit_label_space(reports);
  LinearHyper hyper;
  hyper.c = 100.0;
  bundle.model = train_logistic_ovr(transformer.transform(reports), binarize_all(reports, space).rows, space, hyper);
  bundle.transformer = transformer;
  bundle.preprocess = PreprocessConfig::defaults();
  return bundle;
}

const ModelBundle& bundle() {
  static const ModelBundle b = planted_bundle();
  return b;
}

TEST(Predict, TopKAndFullRanking) {
  const auto five = predict_ranking(bundle(), "sig003 crash", "tok1 tok2", 5);
  ASSERT_EQ(five["ranking"].size(), 5u);
  EXPECT_EQ(five["ranking"][0]["label"], synth::label_name(3));
  for (std::size_t i = 1; i < 5; ++i) {
    EXPECT_GE(five["ranking"][i - 1]["score"].get<double>(), five["ranking"][i]["score"].get<double>());
  }
  EXPECT_EQ(predict_ranking(bundle(), "sig003", "", 100)["ranking"].size(), 8u);
  EXPECT_EQ(predict_ranking(bundle(), "sig003", "x", 5).dump(), predict_ranking(bundle(), "sig003", "x", 5).dump());
}

TEST(Predict, EmptyAfterPreprocessing) {
  const auto msg = faultloc::testing::error_message([] { predict_ranking(bundle(), "the", "a an", 5); });
  EXPECT_FALSE(msg.empty());
  EXPECT_FAULT(predict_ranking(bundle(), "the", "a an", 5), ErrorKind::kInvalidInput);
}

TEST(Service, RequestValidation) {
  EXPECT_EQ(handle_predict(bundle(), R"({"title":"sig001","description":"tok3"})").status, 200);
  const auto missing = handle_predict(bundle(), R"({"title":"sig001"})");
  EXPECT_EQ(missing.status, 400);
  EXPECT_NE(missing.body.find("description"), std::string::npos);
  EXPECT_EQ(handle_predict(bundle(), "{\"title\": ").status, 400);
  EXPECT_EQ(handle_predict(bundle(), "[1,2]").status, 400);
  EXPECT_EQ(handle_predict(bundle(), R"({"title":"a","description":"sig001","top_k":0})").status, 400);
  EXPECT_EQ(handle_predict(bundle(), std::string(kMaxRequestBytes + 1, ' ')).status, 413);
  const auto health = json::parse(handle_health(bundle()).body);
  EXPECT_EQ(health["status"], "ok");
  EXPECT_TRUE(health.contains("model_version"));
}

TEST(Service, ConcurrentClientsSeeIdenticalBodies) {
  PredictionService service(bundle());
  const int port = service.bind("127.0.0.1", 0);
  std::thread server([&] { service.listen(); });
  const std::string body = R"({"title":"sig002 failure","description":"tok5 sig006","top_k":3})";
  std::string replies[2];
  int statuses[2] = {0, 0};
  std::thread clients[2];
  for (int c = 0; c < 2; ++c) {
    clients[c] = std::thread([&, c] {
      httplib::Client client("127.0.0.1", port);
      for (int i = 0; i < 10; ++i) {
        auto res = client.Post("/predict", body, "application/json");
        if (!res) return;
        statuses[c] = res->status;
        if (i == 0) replies[c] = res->body;
        EXPECT_EQ(res->body, replies[c]);
      }
    });
  }
  for (auto& t : clients) t.join();
  httplib::Client client("127.0.0.1", port);
  auto big = client.Post("/predict", std::string(kMaxRequestBytes + 10, 'x'), "application/json");
  service.stop();
  server.join();
  EXPECT_EQ(statuses[0], 200);
  EXPECT_EQ(statuses[1], 200);
  EXPECT_EQ(replies[0], replies[1]);
  ASSERT_TRUE(big);
  EXPECT_EQ(big->status, 413);
}

class Pipeline : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("faultloc_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    synth::PlantedSpec spec;
    spec.reports = 240;
    spec.labels = 6;
    spec.min_occurrence = 12;
    io::write_file(dir_ / "reports.csv", synth::reports_csv(synth::planted_corpus(spec).reports));
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    if (!args.empty()) {
      args.push_back("--out");
      args.push_back((dir_ / "out").string());
    }
    out_.str("");
    err_.str("");
    return run_cli(args, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(Pipeline, StagesChainThroughFiles) {
  ASSERT_EQ(run({"ingest", "--reports", (dir_ / "reports.csv").string()}), 0) << err_.str();
  ASSERT_EQ(run({"stats"}), 0) << err_.str();
  ASSERT_EQ(run({"preprocess"}), 0) << err_.str();
  ASSERT_EQ(run({"split", "--ratios", "0.7,0.2,0.1", "--seed", "42"}), 0) << err_.str();
  const auto manifest = json::parse(io::read_file(dir_ / "out" / "manifest_split.json"));
  EXPECT_EQ(manifest["config"]["values"]["ratios"], "0.7,0.2,0.1");
  EXPECT_EQ(manifest["config"]["values"]["seed"], "42");

  ASSERT_EQ(run({"augment", "--technique", "random_swap", "--scope", "full", "--factor", "1"}), 0) << err_.str();
  const auto train = load_processed(dir_ / "out" / "train.jsonl");
  EXPECT_EQ(load_processed(dir_ / "out" / "variants" / "rs_full.jsonl").size(), 2 * train.size());

  ASSERT_EQ(run({"train", "--model", "lr"}), 0) << err_.str();
  ASSERT_EQ(run({"evaluate", "--model", "lr", "--k", "1,3,5,10"}), 0) << err_.str();
  const auto csv = io::read_file(dir_ / "out" / "metrics_lr.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "Metric,lr");
  EXPECT_NE(csv.find("Top-10 Acc."), std::string::npos);

  ASSERT_EQ(run({"predict", "--title", "sig002 crash", "--description", "tok1", "--top-k", "3"}), 0) << err_.str();
  const auto first = out_.str();
  ASSERT_EQ(run({"predict", "--title", "sig002 crash", "--description", "tok1", "--top-k", "3"}), 0);
  EXPECT_EQ(out_.str(), first);
  EXPECT_EQ(json::parse(first)["ranking"].size(), 3u);
}

TEST_F(Pipeline, MissingStageNamesArtifact) {
  EXPECT_EQ(run({"evaluate"}), 1);
  const auto error = json::parse(err_.str());
  EXPECT_EQ(error["error"]["kind"], "missing_artifact");
  EXPECT_EQ(error["error"]["command"], "evaluate");
  EXPECT_NE(error["error"]["message"].get<std::string>().find("run 'train' first"), std::string::npos);
}

TEST_F(Pipeline, UsageErrors) {
  EXPECT_EQ(run({"frobnicate"}), 64);
  EXPECT_EQ(run({"split", "--ratios", "0.5,0.5,0.5"}), 1);
}

TEST_F(Pipeline, EmptyVariantListRejected) {
  EXPECT_EQ(run({"benchmark", "--variants", ""}), 1);
}

}  // namespace
}  // namespace faultloc::cli
