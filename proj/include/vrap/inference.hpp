#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>

#include "vrap/llm_client.hpp"
#include "vrap/prompt.hpp"
#include "vrap/tag_cache.hpp"

namespace vrap::inference {

struct RetryPolicy {
  std::size_t max_retries = 2;
  std::chrono::milliseconds initial_backoff{200};
  double multiplier = 2.0;
};

struct InferOptions {
  GenerationParams generation;
  RetryPolicy retry;
};

struct Response {
  std::string text;
  std::chrono::nanoseconds latency{0};
  std::string client_id;
  std::size_t prompt_bytes = 0;
};

/// Calls client.complete, retrying retryable ClientErrors up to
/// policy.max_retries times with exponential backoff. The last error is
/// rethrown.
std::string complete_with_retry(LLMClient& client, std::string_view prompt, const GenerationParams& params,
                                const RetryPolicy& policy);

/// Cached path: prompt from the pre-enriched tags of `image_id`, one client
/// call, no knowledge-store access. Throws UnknownImageId before touching
/// the client.
Response infer(const prompting::Query& query, std::string_view image_id, const TagCache& cache, LLMClient& client,
               std::size_t budget, const InferOptions& options = {});

/// Online path: parses `document`, enriches its tags against `source` at
/// call time, then prompts exactly like infer(). Throws UnknownImageId when
/// the document describes a different image.
Response infer_online(const prompting::Query& query, std::string_view image_id, std::string_view document,
                      const retrieval::KnowledgeSource& source, LLMClient& client, std::size_t budget,
                      const retrieval::EnrichOptions& enrich_options, const InferOptions& options = {});

}  // namespace vrap::inference
