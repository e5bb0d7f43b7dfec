#pragma once

#include <chrono>
#include <cstddef>
#include <mutex>
#include <string>
#include <string_view>

#include "vrap/error.hpp"

namespace vrap::inference {

struct GenerationParams {
  double temperature = 0.0;
  std::size_t max_tokens = 256;
};

/// Transport or remote failure. `retryable` marks failures worth another
/// attempt (connection errors, 5xx, 429).
class ClientError : public Error {
 public:
  ClientError(const std::string& message, bool retryable)
      : Error(ErrorKind::ClientError, message), retryable_(retryable) {}

  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

/// The generating model behind the pipeline. The prompt is sent as a single
/// user message.
class LLMClient {
 public:
  virtual ~LLMClient() = default;

  virtual std::string complete(std::string_view prompt, const GenerationParams& params) = 0;
  virtual std::string identity() const = 0;
};

/// Deterministic offline client. Answers with a fixed template naming the
/// first object tag and the first relation tag found after " Tags: ".
/// Stateless, so safe for concurrent callers.
class StubClient final : public LLMClient {
 public:
  std::string complete(std::string_view prompt, const GenerationParams& params) override;
  std::string identity() const override { return "stub/1"; }
};

/// The StubClient template:
///   "The image shows <object>; <subject> <predicate> <object>."
///   "The image shows <object>."     (no relation)
///   "No tags available."            (no " Tags: " section)
std::string stub_answer(std::string_view prompt);

struct RemoteClientConfig {
  /// scheme://host[:port]; https requires a build with OpenSSL.
  std::string endpoint = "http://127.0.0.1:8080";
  std::string path = "/v1/chat/completions";
  std::string model = "default";
  /// Environment variable holding the bearer token; unset means no auth.
  std::string token_env = "VRAP_API_KEY";
  std::chrono::milliseconds timeout{30000};
};

/// Minimal chat-completion HTTP client:
///   POST {path} {"model", "messages": [{"role": "user", "content": prompt}],
///                "temperature", "max_tokens"}
/// and reads choices[0].message.content. Requests on one client are
/// serialized.
class RemoteClient final : public LLMClient {
 public:
  explicit RemoteClient(RemoteClientConfig config);

  std::string complete(std::string_view prompt, const GenerationParams& params) override;
  std::string identity() const override { return "remote/" + config_.model; }

  /// Request body for `prompt`; exposed for tests.
  std::string request_body(std::string_view prompt, const GenerationParams& params) const;

  /// Extracts the completion text; throws ClientError (not retryable).
  static std::string parse_response(std::string_view body);

 private:
  RemoteClientConfig config_;
  std::mutex mutex_;
};

}  // namespace vrap::inference
