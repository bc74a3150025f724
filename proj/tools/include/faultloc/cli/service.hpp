#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "faultloc/models.hpp"

namespace faultloc::cli {

inline constexpr std::size_t kMaxRequestBytes = 1 << 20;

/// preprocess -> featurise -> score -> rank, truncated to top_k.
/// Returns {"ranking": [{"label", "score"}, ...]}.
nlohmann::ordered_json predict_ranking(const ModelBundle& bundle, std::string_view title,
                                       std::string_view description, std::size_t top_k);

struct HttpReply {
  int status = 200;
  std::string body;
};

/// POST /predict body handling: 400 with an error body on malformed input.
HttpReply handle_predict(const ModelBundle& bundle, std::string_view body);
HttpReply handle_health(const ModelBundle& bundle);

/// Local HTTP front end over an immutable bundle.
class PredictionService {
 public:
  explicit PredictionService(ModelBundle bundle);
  ~PredictionService();
  PredictionService(const PredictionService&) = delete;
  PredictionService& operator=(const PredictionService&) = delete;

  /// Binds `host:port`; port 0 picks a free one. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace faultloc::cli
