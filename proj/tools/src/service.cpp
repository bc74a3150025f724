#include "faultloc/cli/service.hpp"

#include <httplib.h>

#include <algorithm>

#include "faultloc/error.hpp"
#include "faultloc/textprep.hpp"

namespace faultloc::cli {
namespace {

HttpReply error_reply(int status, std::string_view kind, const std::string& message) {
  nlohmann::ordered_json body{{"error", {{"kind", kind}, {"message", message}}}};
  return {status, body.dump()};
}

}  // namespace

nlohmann::ordered_json predict_ranking(const ModelBundle& bundle, std::string_view title,
                                       std::string_view description, std::size_t top_k) {
  if (top_k == 0) throw Error(ErrorKind::kInvalidInput, "top_k must be >= 1");
  if (!bundle.transformer || bundle.transformer->kind() != FeatureKind::kTfidf) {
    throw Error(ErrorKind::kPrecondition, "prediction from text needs a bundle with a TF-IDF transformer");
  }
  const PreprocessConfig config = bundle.preprocess ? *bundle.preprocess : PreprocessConfig::defaults();
  std::string text(title);
  text += ' ';
  text += description;
  const auto tokens = preprocess_text(text, config);
  if (tokens.empty()) {
    throw Error(ErrorKind::kInvalidInput,
                "no usable tokens after preprocessing; provide a more descriptive title or description");
  }
  const auto scores = score_labels(bundle.model, bundle.transformer->transform_tokens(tokens));
  const auto ranked = rank_labels(scores, bundle.model.label_space);
  nlohmann::ordered_json ranking = nlohmann::ordered_json::array();
  const std::size_t count = std::min(top_k, ranked.order.size());
  for (std::size_t r = 0; r < count; ++r) {
    ranking.push_back({{"label", bundle.model.label_space.label(ranked.order[r])}, {"score", ranked.scores[r]}});
  }
  return {{"ranking", ranking}};
}

HttpReply handle_predict(const ModelBundle& bundle, std::string_view body) {
  if (body.size() > kMaxRequestBytes) return error_reply(413, "payload_too_large", "request body exceeds 1 MiB");
  nlohmann::json request;
  try {
    request = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    return error_reply(400, "parse_error", "malformed JSON at byte " + std::to_string(e.byte));
  }
  if (!request.is_object()) return error_reply(400, "schema_error", "request must be a JSON object");
  for (const char* field : {"title", "description"}) {
    if (!request.contains(field)) return error_reply(400, "schema_error", std::string("missing field '") + field + "'");
    if (!request.at(field).is_string()) {
      return error_reply(400, "schema_error", std::string("field '") + field + "' must be a string");
    }
  }
  std::size_t top_k = 5;
  if (request.contains("top_k")) {
    const auto& value = request.at("top_k");
    if (!value.is_number_integer() || value.get<long long>() < 1) {
      return error_reply(400, "schema_error", "field 'top_k' must be a positive integer");
    }
    top_k = value.get<std::size_t>();
  }
  try {
    const auto ranking = predict_ranking(bundle, request.at("title").get<std::string>(),
                                         request.at("description").get<std::string>(), top_k);
    return {200, ranking.dump()};
  } catch (const Error& e) {
    const int status = e.kind() == ErrorKind::kInvalidInput ? 400 : 500;
    return error_reply(status, to_string(e.kind()), e.what());
  }
}

HttpReply handle_health(const ModelBundle& bundle) {
  nlohmann::ordered_json body{{"status", "ok"},
                              {"model_version", ModelBundle::kVersion},
                              {"model_kind", to_string(bundle.model.kind)},
                              {"labels", bundle.model.label_space.size()}};
  return {200, body.dump()};
}

struct PredictionService::Impl {
  ModelBundle bundle;
  httplib::Server server;
};

PredictionService::PredictionService(ModelBundle bundle) : impl_(std::make_unique<Impl>()) {
  impl_->bundle = std::move(bundle);
  auto& server = impl_->server;
  server.set_payload_max_length(kMaxRequestBytes);
  const ModelBundle* model = &impl_->bundle;
  server.Post("/predict", [model](const httplib::Request& request, httplib::Response& response) {
    const HttpReply reply = handle_predict(*model, request.body);
    response.status = reply.status;
    response.set_content(reply.body, "application/json");
  });
  server.Get("/health", [model](const httplib::Request&, httplib::Response& response) {
    const HttpReply reply = handle_health(*model);
    response.status = reply.status;
    response.set_content(reply.body, "application/json");
  });
  server.set_error_handler([](const httplib::Request&, httplib::Response& response) {
    if (!response.body.empty()) return;
    const std::string kind = response.status == 413 ? "payload_too_large" : "http_error";
    const HttpReply reply = error_reply(response.status, kind, "HTTP " + std::to_string(response.status));
    response.set_content(reply.body, "application/json");
  });
}

PredictionService::~PredictionService() { stop(); }

int PredictionService::bind(const std::string& host, int port) {
  auto& server = impl_->server;
  const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorKind::kIo, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void PredictionService::listen() { impl_->server.listen_after_bind(); }

void PredictionService::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace faultloc::cli
