#include <cstdlib>

#include "httplib.h"
#include "json.hpp"
#include "vrap/llm_client.hpp"

namespace vrap::inference {

RemoteClient::RemoteClient(RemoteClientConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw Error(ErrorKind::ConfigInvalid, "client.endpoint: empty");
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (config_.endpoint.rfind("https://", 0) == 0) {
    throw Error(ErrorKind::ConfigInvalid, "client.endpoint: https is not available in this build");
  }
#endif
}

std::string RemoteClient::request_body(std::string_view prompt, const GenerationParams& params) const {
  nlohmann::json body = {
      {"model", config_.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
      {"temperature", params.temperature},
      {"max_tokens", params.max_tokens},
  };
  return body.dump();
}

std::string RemoteClient::parse_response(std::string_view body) {
  try {
    const auto json = nlohmann::json::parse(body);
    return json.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ClientError(std::string("unexpected response: ") + e.what(), false);
  }
}

std::string RemoteClient::complete(std::string_view prompt, const GenerationParams& params) {
  std::lock_guard lock(mutex_);

  httplib::Client client(config_.endpoint);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());

  httplib::Headers headers;
  if (!config_.token_env.empty()) {
    if (const char* token = std::getenv(config_.token_env.c_str()); token && *token) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }

  auto result = client.Post(config_.path, headers, request_body(prompt, params), "application/json");
  if (!result) {
    throw ClientError("request to " + config_.endpoint + " failed: " + httplib::to_string(result.error()), true);
  }
  const int status = result->status;
  if (status != 200) {
    const bool retryable = status == 429 || status >= 500;
    throw ClientError("HTTP " + std::to_string(status) + " from " + config_.endpoint, retryable);
  }
  return parse_response(result->body);
}

}  // namespace vrap::inference
