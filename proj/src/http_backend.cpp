#include <httplib.h>

#include <json.hpp>

#include "synthner/backend.hpp"

namespace synthner::backend {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Transport: return "transport";
    case ErrorKind::Authentication: return "authentication";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::MalformedResponse: return "malformed-response";
  }
  return "unknown";
}

std::string completion_request_body(std::string_view prompt,
                                    const sampling::SamplingParams& params,
                                    std::string_view model) {
  nlohmann::ordered_json j;
  if (!model.empty()) j["model"] = model;
  j["prompt"] = prompt;
  j["max_tokens"] = params.max_tokens;
  j["temperature"] = params.temperature;
  j["top_p"] = params.top_p;
  j["n"] = 1;
  return j.dump();
}

std::string completion_text_from_response(std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    throw BackendError(ErrorKind::MalformedResponse, "completion response is not JSON");
  }
  if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array() ||
      j["choices"].empty() || !j["choices"][0].is_object() ||
      !j["choices"][0].contains("text") || !j["choices"][0]["text"].is_string()) {
    throw BackendError(ErrorKind::MalformedResponse,
                       "completion response lacks choices[0].text");
  }
  return j["choices"][0]["text"].get<std::string>();
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const auto scheme_end = config_.url.find("://");
  if (scheme_end == std::string::npos) {
    throw BackendError(ErrorKind::Configuration, "backend URL needs a scheme: " + config_.url);
  }
  const auto path_start = config_.url.find('/', scheme_end + 3);
  origin_ = config_.url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : config_.url.substr(path_start);
  if (config_.api_key.empty()) {
    throw BackendError(ErrorKind::Authentication,
                       std::string("no API key; set ") + kApiKeyEnvVar);
  }
}

std::string HttpBackend::complete(const CompletionRequest& request) {
  httplib::Client client(origin_);
  if (!client.is_valid()) {
    throw BackendError(ErrorKind::Configuration, "unsupported backend URL: " + config_.url);
  }
  const auto timeout = static_cast<time_t>(config_.timeout.count());
  client.set_connection_timeout(timeout, 0);
  client.set_read_timeout(timeout, 0);
  client.set_write_timeout(timeout, 0);
  client.set_bearer_token_auth(config_.api_key);

  const auto res =
      client.Post(path_, completion_request_body(request.prompt, request.params, config_.model),
                  "application/json");
  if (!res) {
    throw BackendError(ErrorKind::Transport, "request failed: " + httplib::to_string(res.error()));
  }
  const int status = res->status;
  if (status == 401 || status == 403) {
    throw BackendError(ErrorKind::Authentication, "backend rejected credentials (HTTP " +
                                                      std::to_string(status) + ")");
  }
  if (status == 408 || status == 429 || status >= 500) {
    throw BackendError(ErrorKind::Transport, "backend returned HTTP " + std::to_string(status));
  }
  if (status != 200) {
    throw BackendError(ErrorKind::Configuration,
                       "backend returned HTTP " + std::to_string(status) + ": " + res->body);
  }
  return completion_text_from_response(res->body);
}

}  // namespace synthner::backend
