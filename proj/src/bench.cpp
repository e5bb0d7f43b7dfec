#include "vrap/bench.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "json.hpp"
#include "vrap/error.hpp"
#include "vrap/inference.hpp"
#include "vrap/scene.hpp"

namespace vrap::eval {

namespace {

constexpr std::array kNouns = {"person", "dog",    "cat",   "ball",   "table",  "chair", "plate", "glass",
                               "fork",   "bag",    "car",   "tree",   "bench",  "bike",  "hat",   "cup",
                               "laptop", "phone",  "book",  "lamp",   "window", "door",  "bird",  "horse",
                               "boat",   "clock",  "vase",  "bottle", "sofa",   "bed",   "kite",  "umbrella"};
constexpr std::array kAdjectives = {"red",   "black", "white",  "small", "large", "wooden", "leather",
                                    "metal", "green", "yellow", "old",   "new",   "round",  "striped"};
constexpr std::array kPredicates = {"holding", "on", "next to", "under", "behind", "near", "sitting on", "wearing"};
constexpr std::array kQuestions = {"What is in the image?", "What is the person holding?",
                                   "Describe the objects on the table.", "What color is the object?",
                                   "Where is the animal?"};

double to_ms(std::chrono::nanoseconds d) { return std::chrono::duration<double, std::milli>(d).count(); }

}  // namespace

std::vector<BenchQuery> sample_queries(std::span<const std::string> documents, std::size_t n, std::uint64_t seed) {
  if (documents.empty()) throw Error(ErrorKind::InvalidArgument, "benchmark needs at least one document");
  std::vector<std::string> ids;
  ids.reserve(documents.size());
  for (const auto& doc : documents) ids.push_back(scene::parse_scene_document(doc).image.image_id);

  std::mt19937_64 rng(seed);
  std::vector<BenchQuery> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t d = rng() % documents.size();
    const std::size_t q = rng() % kQuestions.size();
    out.push_back({d, ids[d], kQuestions[q]});
  }
  return out;
}

ArmStats summarize(std::vector<double> latencies_ms) {
  ArmStats stats;
  if (latencies_ms.empty()) return stats;
  std::sort(latencies_ms.begin(), latencies_ms.end());
  const std::size_t n = latencies_ms.size();
  stats.mean_ms = std::accumulate(latencies_ms.begin(), latencies_ms.end(), 0.0) / static_cast<double>(n);
  stats.median_ms = n % 2 ? latencies_ms[n / 2] : 0.5 * (latencies_ms[n / 2 - 1] + latencies_ms[n / 2]);
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  stats.p95_ms = latencies_ms[std::max<std::size_t>(rank, 1) - 1];
  return stats;
}

BenchReport run_latency_bench(std::span<const std::string> documents, const retrieval::KnowledgeSource& store,
                              inference::StubClient& client, const BenchConfig& config) {
  if (config.n_queries == 0) throw Error(ErrorKind::InvalidArgument, "benchmark needs at least one query");

  inference::CacheBuildOptions cache_options;
  cache_options.enrich = config.enrich;
  const auto cache = inference::build_cache(documents, store, cache_options);
  const auto queries = sample_queries(documents, config.n_queries, config.seed);

  BenchReport report;
  report.n_queries = config.n_queries;
  report.store_size = store.size();
  report.seed = config.seed;

  auto run_cached = [&](const BenchQuery& q) {
    return inference::infer(prompting::Query{q.query, std::nullopt}, q.image_id, cache, client, config.budget);
  };
  auto run_online = [&](const BenchQuery& q) {
    return inference::infer_online(prompting::Query{q.query, std::nullopt}, q.image_id, documents[q.document], store,
                                   client, config.budget, config.enrich);
  };

  for (std::size_t i = 0; i < config.warmup; ++i) {
    const auto& q = queries[i % queries.size()];
    run_online(q);
    run_cached(q);
  }

  std::vector<double> cached_ms, online_ms;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& q = queries[i];
    inference::Response cached, online;
    if (i % 2 == 0) {
      online = run_online(q);
      report.online_log.push_back(q);
      cached = run_cached(q);
      report.cached_log.push_back(q);
    } else {
      cached = run_cached(q);
      report.cached_log.push_back(q);
      online = run_online(q);
      report.online_log.push_back(q);
    }
    report.responses_match = report.responses_match && cached.text == online.text;
    report.samples.push_back({q, to_ms(cached.latency), to_ms(online.latency)});
    cached_ms.push_back(report.samples.back().cached_ms);
    online_ms.push_back(report.samples.back().online_ms);
  }
  report.cached = summarize(cached_ms);
  report.online = summarize(online_ms);
  report.speedup_ratio = report.cached.mean_ms > 0.0 ? report.online.mean_ms / report.cached.mean_ms : 0.0;
  return report;
}

std::string bench_report_json(const BenchReport& report) {
  auto arm = [](const ArmStats& s) {
    return nlohmann::json{{"mean_ms", s.mean_ms}, {"median_ms", s.median_ms}, {"p95_ms", s.p95_ms}};
  };
  nlohmann::json j = {{"n_queries", report.n_queries},
                      {"store_size", report.store_size},
                      {"seed", report.seed},
                      {"cached", arm(report.cached)},
                      {"online", arm(report.online)},
                      {"speedup_ratio", report.speedup_ratio},
                      {"reference_speedup", kReferenceSpeedup},
                      {"responses_match", report.responses_match},
                      {"paired_logs_equal", report.cached_log == report.online_log}};
  return j.dump(2) + "\n";
}

std::string bench_samples_csv(const BenchReport& report) {
  std::string out = "index,image_id,query,cached_ms,online_ms\n";
  char nums[96];
  for (std::size_t i = 0; i < report.samples.size(); ++i) {
    const auto& s = report.samples[i];
    std::snprintf(nums, sizeof nums, ",%.6f,%.6f\n", s.cached_ms, s.online_ms);
    out += std::to_string(i) + "," + s.query.image_id + ",\"" + s.query.query + "\"" + nums;
  }
  return out;
}

std::vector<retrieval::CorpusRecord> synthetic_knowledge(std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<retrieval::CorpusRecord> out;
  out.reserve(size);
  for (const char* noun : kNouns) {
    if (out.size() >= size) break;
    out.push_back({noun, std::string("A ") + noun + " is a common object in everyday scenes."});
  }
  while (out.size() < size) {
    const char* noun = kNouns[rng() % kNouns.size()];
    const char* adj = kAdjectives[rng() % kAdjectives.size()];
    const std::size_t variant = out.size();
    std::string key = std::string(noun) + " " + adj;
    if (rng() % 2) key += " v" + std::to_string(variant);
    out.push_back({std::move(key), "Fact " + std::to_string(variant) + ": a " + adj + " " + noun + "."});
  }
  return out;
}

std::vector<std::string> synthetic_scene_corpus(std::size_t n_images, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> docs;
  docs.reserve(n_images);
  for (std::size_t i = 0; i < n_images; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "img-%04zu", i);
    scene::SceneDocument doc;
    doc.image.image_id = id;
    doc.graph.image_id = id;
    const std::size_t n_objects = 2 + rng() % 5;
    for (std::size_t o = 0; o < n_objects; ++o) {
      scene::ObjectNode node{kNouns[rng() % kNouns.size()], {}};
      const std::size_t n_attrs = rng() % 3;
      for (std::size_t a = 0; a < n_attrs; ++a) {
        std::string attr = kAdjectives[rng() % kAdjectives.size()];
        if (std::find(node.attributes.begin(), node.attributes.end(), attr) == node.attributes.end()) {
          node.attributes.push_back(std::move(attr));
        }
      }
      doc.graph.objects.push_back(std::move(node));
    }
    const std::size_t n_relations = rng() % 5;
    for (std::size_t r = 0; r < n_relations; ++r) {
      const std::size_t s = rng() % n_objects;
      const std::size_t o = (s + 1 + rng() % (n_objects - 1)) % n_objects;
      scene::RelationEdge edge{s, kPredicates[rng() % kPredicates.size()], o};
      if (std::find(doc.graph.relations.begin(), doc.graph.relations.end(), edge) == doc.graph.relations.end()) {
        doc.graph.relations.push_back(std::move(edge));
      }
    }
    docs.push_back(scene::write_scene_document(doc));
  }
  return docs;
}

}  // namespace vrap::eval
