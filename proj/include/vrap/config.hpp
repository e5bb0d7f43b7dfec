#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "vrap/enrich.hpp"
#include "vrap/llm_client.hpp"
#include "vrap/losses.hpp"

namespace vrap {

inline constexpr int kConfigVersion = 1;

struct EmbedderConfig {
  std::string id = "hash3";
  std::uint64_t seed = 0;
  std::size_t dimension = 64;
};

struct ClientConfig {
  std::string kind = "stub";  // stub | remote
  inference::RemoteClientConfig remote;
};

struct PathsConfig {
  std::string store;
  std::string cache;
  std::string corpus;
};

/// YAML schema (every key optional, defaults shown):
///
///   config_version: 1
///   embedder:  { id: hash3, seed: 0, dimension: 64 }
///   retrieval: { k: 3, score_floor: 0.15 }
///   prompt:    { budget: 2048 }
///   loss:      { lambda_gen: 1.0, lambda_contrast: 0.1, lambda_tag: 0.5,
///                average_over_steps: false, multi_negative: false }
///   client:    { kind: stub, endpoint: "http://127.0.0.1:8080",
///                path: /v1/chat/completions, model: default,
///                timeout_ms: 30000, token_env: VRAP_API_KEY }
///   paths:     { store: "", cache: "", corpus: "" }
///
/// The auth token itself is only ever read from the `token_env` variable.
struct PipelineConfig {
  int config_version = kConfigVersion;
  EmbedderConfig embedder;
  retrieval::EnrichOptions retrieval;
  std::size_t budget = 2048;
  losses::LossWeights loss;
  losses::LossOptions loss_options;
  ClientConfig client;
  PathsConfig paths;
};

/// Throws ConfigInvalid naming the offending field path, e.g.
/// "embedder.dimension: must be >= 8".
void validate(const PipelineConfig& config);

PipelineConfig parse_config(std::string_view yaml_text);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace vrap
