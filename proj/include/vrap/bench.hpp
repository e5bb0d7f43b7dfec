#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vrap/enrich.hpp"
#include "vrap/knowledge_store.hpp"
#include "vrap/llm_client.hpp"

namespace vrap::eval {

/// Published reference point for the cached-vs-online speedup (1250 ms vs
/// 890 ms). Reported next to the measured ratio, never asserted.
inline constexpr double kReferenceSpeedup = 1250.0 / 890.0;

struct BenchConfig {
  std::size_t n_queries = 100;
  std::uint64_t seed = 0;
  std::size_t warmup = 10;
  std::size_t budget = 4096;
  retrieval::EnrichOptions enrich;
};

struct ArmStats {
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
};

struct BenchQuery {
  std::size_t document = 0;
  std::string image_id;
  std::string query;

  bool operator==(const BenchQuery&) const = default;
};

struct BenchSample {
  BenchQuery query;
  double cached_ms = 0.0;
  double online_ms = 0.0;
};

struct BenchReport {
  std::size_t n_queries = 0;
  std::size_t store_size = 0;
  std::uint64_t seed = 0;
  ArmStats cached;
  ArmStats online;
  double speedup_ratio = 0.0;  // mean online / mean cached
  std::vector<BenchSample> samples;
  /// Queries in the order each arm executed them; equal by construction.
  std::vector<BenchQuery> cached_log;
  std::vector<BenchQuery> online_log;
  /// Every online response text equalled its cached counterpart.
  bool responses_match = true;
};

/// Deterministic query sequence: document index and question text drawn
/// from a seeded mt19937_64.
std::vector<BenchQuery> sample_queries(std::span<const std::string> documents, std::size_t n, std::uint64_t seed);

/// Paired cached-vs-online latency measurement. The tag cache is built
/// before timing starts; `warmup` iterations per arm are run and discarded;
/// then every sampled query runs through both arms back to back, the arm
/// order alternating between queries.
BenchReport run_latency_bench(std::span<const std::string> documents, const retrieval::KnowledgeSource& store,
                              inference::StubClient& client, const BenchConfig& config);

ArmStats summarize(std::vector<double> latencies_ms);

std::string bench_report_json(const BenchReport& report);
/// "index,image_id,query,cached_ms,online_ms"
std::string bench_samples_csv(const BenchReport& report);

/// Synthetic knowledge corpus: entries keyed by object nouns and
/// noun-adjective phrases drawn from a fixed word list, padded with
/// numbered variants up to `size` entries.
std::vector<retrieval::CorpusRecord> synthetic_knowledge(std::size_t size, std::uint64_t seed);

/// Synthetic SAF documents "img-0000".. with 2-6 objects, 0-2 attributes
/// each and up to 4 relations.
std::vector<std::string> synthetic_scene_corpus(std::size_t n_images, std::uint64_t seed);

}  // namespace vrap::eval
