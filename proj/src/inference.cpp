#include "vrap/inference.hpp"

#include <thread>

#include "vrap/error.hpp"

namespace vrap::inference {

namespace {

using Clock = std::chrono::steady_clock;

Response respond(const prompting::Query& query, const retrieval::EnrichedTagSet& tags, LLMClient& client,
                 std::size_t budget, const InferOptions& options, Clock::time_point start) {
  const auto prompt = prompting::build_prompt(query, tags, budget);
  Response response;
  response.text = complete_with_retry(client, prompt.text, options.generation, options.retry);
  response.client_id = client.identity();
  response.prompt_bytes = prompt.text.size();
  response.latency = Clock::now() - start;
  return response;
}

}  // namespace

std::string complete_with_retry(LLMClient& client, std::string_view prompt, const GenerationParams& params,
                                const RetryPolicy& policy) {
  auto backoff = std::chrono::duration<double, std::milli>(policy.initial_backoff);
  for (std::size_t attempt = 0;; ++attempt) {
    try {
      return client.complete(prompt, params);
    } catch (const ClientError& e) {
      if (!e.retryable() || attempt >= policy.max_retries) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff *= policy.multiplier;
  }
}

Response infer(const prompting::Query& query, std::string_view image_id, const TagCache& cache, LLMClient& client,
               std::size_t budget, const InferOptions& options) {
  const auto start = Clock::now();
  const auto it = cache.entries.find(image_id);
  if (it == cache.entries.end()) {
    throw Error(ErrorKind::UnknownImageId, "image '" + std::string(image_id) + "' is not in the tag cache");
  }
  return respond(query, it->second, client, budget, options, start);
}

Response infer_online(const prompting::Query& query, std::string_view image_id, std::string_view document,
                      const retrieval::KnowledgeSource& source, LLMClient& client, std::size_t budget,
                      const retrieval::EnrichOptions& enrich_options, const InferOptions& options) {
  const auto start = Clock::now();
  const auto doc = scene::parse_scene_document(document);
  if (doc.image.image_id != image_id) {
    throw Error(ErrorKind::UnknownImageId, "document describes image '" + doc.image.image_id + "', not '" +
                                               std::string(image_id) + "'");
  }
  const auto tags = enrich_document(doc.graph, source, enrich_options);
  return respond(query, tags, client, budget, options, start);
}

}  // namespace vrap::inference
