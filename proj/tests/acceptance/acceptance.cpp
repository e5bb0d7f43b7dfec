// One PASS/FAIL line per acceptance criterion. Exit status is non-zero when
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "json.hpp"
#include "support/counting_source.hpp"
#include "support/oracles.hpp"
#include "vrap/bench.hpp"
#include "vrap/inference.hpp"
#include "vrap/metrics.hpp"
#include "vrap/prompt.hpp"
#include "vrap/training.hpp"

using namespace vrap;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

Outcome fail(std::string detail) { return {false, std::move(detail)}; }

int failures = 0;

void criterion(const char* id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = fail(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (limit_s > 0 && secs > limit_s) {
    o.pass = false;
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("over time limit");
  }
  if (!o.pass) ++failures;
  std::printf("%s %s %s (%.2fs%s)%s%s\n", o.pass ? "PASS" : "FAIL", id, name, secs,
              limit_s > 0 ? (" / " + std::to_string(static_cast<int>(limit_s)) + "s").c_str() : "",
              o.detail.empty() ? "" : ": ", o.detail.c_str());
  std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool close_rel(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)}); }

Outcome tag_sets() {
  std::mt19937_64 rng(20240);
  for (int i = 0; i < 1000; ++i) {
    const auto g = oracle::random_graph(rng, 10, 4, 12);
    const auto t = scene::build_tag_set(g);
    if (t != oracle::tag_union(g)) return fail("graph " + std::to_string(i) + " differs from the union oracle");
    if (!scene::validate_completeness(t, g).complete()) return fail("graph " + std::to_string(i) + " incomplete");
    if (scene::deserialize_tags(scene::serialize_tags(t)) != t) {
      return fail("graph " + std::to_string(i) + " does not round-trip");
    }
  }
  return {true, "1000 graphs"};
}

Outcome retrieval_ranking() {
  std::mt19937_64 rng(77);
  const auto embedder = std::make_shared<retrieval::HashEmbedder>(64, 0);
  std::size_t checked = 0;
  for (int s = 0; s < 200; ++s) {
    const std::size_t n = 1 + rng() % 1000;
    retrieval::KnowledgeStore store(oracle::random_corpus(rng, n), embedder);
    for (int q = 0; q < 3; ++q) {
      const std::string query = oracle::random_corpus(rng, 1)[0].key;
      const auto expected = oracle::exhaustive_rank(embedder->embed(query).values, store.entries());
      const std::size_t k_max = std::min<std::size_t>(n, 20);
      const auto full = store.retrieve(query, k_max);
      if (full.size() != k_max) return fail("wrong hit count");
      for (std::size_t i = 0; i < k_max; ++i) {
        if (full[i].ordinal != expected[i].ordinal || full[i].score != expected[i].score) {
          return fail("store " + std::to_string(s) + " rank " + std::to_string(i) + " differs from argsort");
        }
      }
      for (std::size_t k = 1; k <= k_max; k += 1 + rng() % 4) {
        const auto prefix = store.retrieve(query, k);
        for (std::size_t i = 0; i < k; ++i) {
          if (prefix[i].ordinal != full[i].ordinal) return fail("top-k is not a prefix of top-k'");
        }
      }
      ++checked;
    }
  }
  return {true, std::to_string(checked) + " queries over 200 stores"};
}

Outcome loss_identities() {
  for (std::size_t v : {4u, 16u, 50u}) {
    const losses::ToyModel zero(v, 6);
    const std::vector<losses::TokenId> ctx = {1, 2}, target = {0, 3, 2, 1, 1};
    const double expect = target.size() * std::log(double(v));
    if (std::abs(losses::gen_loss(zero, ctx, target) - expect) > 1e-9) return fail("gen_loss at zero params");
    if (std::abs(losses::tag_loss(zero, ctx, target) - expect) > 1e-9) return fail("tag_loss at zero params");
  }
  for (double s : {-100.0, 0.0, 100.0}) {
    if (std::abs(losses::contrastive_loss(s, s) - std::log(2.0)) > 1e-12) return fail("contrastive(s, s) != ln 2");
  }
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const double g = u(rng), c = u(rng), t = u(rng);
    const losses::LossWeights w{u(rng), u(rng), u(rng)};
    const double base = losses::total_loss(g, c, t, w).total;
    const double a = u(rng);
    const double scaled_gen = losses::total_loss(g, c, t, {w.gen + a, w.contrast, w.tag}).total;
    const double scaled_con = losses::total_loss(g, c, t, {w.gen, w.contrast + a, w.tag}).total;
    const double scaled_tag = losses::total_loss(g, c, t, {w.gen, w.contrast, w.tag + a}).total;
    if (!close_rel(scaled_gen - base, a * g, 1e-12) || !close_rel(scaled_con - base, a * c, 1e-12) ||
        !close_rel(scaled_tag - base, a * t, 1e-12) || !close_rel(base, w.gen * g + w.contrast * c + w.tag * t, 1e-12)) {
      return fail("total_loss not linear in the weights");
    }
  }
  return {};
}

Outcome gradient_check() {
  double worst = 0.0;
  std::size_t max_params = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    losses::TrainConfig config;
    config.seed = seed;
    config.vocab_size = seed < 5 ? 16 : 32;
    config.embed_dim = seed < 5 ? 8 : 16;
    for (const auto& term : losses::check_toy_gradients(config, 4, 1e-5, 1e-4)) {
      worst = std::max(worst, term.report.max_rel_error);
      max_params = std::max(max_params, term.report.n_parameters);
      if (!term.report.passed) {
        return fail("seed " + std::to_string(seed) + " term " + term.term + " max_rel_error " +
                    std::to_string(term.report.max_rel_error));
      }
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "10 seeds x 4 terms, <= %zu params, max_rel_error %.2e", max_params, worst);
  return {true, buf};
}

Outcome training_reduces_loss() {
  losses::TrainConfig config;
  const auto batch = losses::synthetic_batch(4, config.vocab_size, config.seed);
  const auto result = losses::train_toy(batch, config);
  const double initial = result.trajectory.front().total, final_loss = result.trajectory.back().total;
  char buf[96];
  std::snprintf(buf, sizeof buf, "total %.4f -> %.4f (%.1f%% reduction, %zu steps)", initial, final_loss,
                100.0 * (1.0 - final_loss / initial), config.steps);
  return {final_loss <= 0.5 * initial, buf};
}

Outcome cached_equals_online() {
  const auto docs = eval::synthetic_scene_corpus(40, 11);
  retrieval::KnowledgeStore store(eval::synthetic_knowledge(2000, 11), std::make_shared<retrieval::HashEmbedder>());
  const retrieval::EnrichOptions enrich;
  inference::CacheBuildOptions build;
  build.enrich = enrich;
  const auto cache = inference::build_cache(docs, store, build);

  testing_support::CountingSource counting(store);
  inference::StubClient client;
  const auto queries = eval::sample_queries(docs, 100, 11);
  const std::size_t budget = 1024;
  for (const auto& q : queries) {
    const prompting::Query query{q.query, std::nullopt};
    counting.reset();
    const auto cached = inference::infer(query, q.image_id, cache, client, budget);
    if (counting.calls() != 0) return fail("cached path touched the store");
    const auto online = inference::infer_online(query, q.image_id, docs[q.document], counting, client, budget, enrich);
    if (counting.calls() == 0) return fail("online path never queried the store");
    if (cached.text != online.text || cached.prompt_bytes != online.prompt_bytes) {
      return fail("responses differ for " + q.image_id);
    }
    const auto doc = scene::parse_scene_document(docs[q.document]);
    const auto live = inference::enrich_document(doc.graph, store, enrich);
    if (prompting::build_prompt(query, cache.entries.at(q.image_id), budget) !=
        prompting::build_prompt(query, live, budget)) {
      return fail("prompts differ for " + q.image_id);
    }
  }
  return {true, "100 queries, 0 store calls on the cached path"};
}

Outcome latency() {
  const auto docs = eval::synthetic_scene_corpus(50, 0);
  retrieval::KnowledgeStore store(eval::synthetic_knowledge(10000, 0), std::make_shared<retrieval::HashEmbedder>());
  inference::StubClient client;
  eval::BenchConfig config;
  const auto report = eval::run_latency_bench(docs, store, client, config);
  char buf[192];
  std::snprintf(buf, sizeof buf, "speedup %.2fx (reference %.2fx, not asserted); cached mean %.3f ms, online mean %.3f ms",
                report.speedup_ratio, eval::kReferenceSpeedup, report.cached.mean_ms, report.online.mean_ms);
  if (report.cached_log != report.online_log) return fail("arms saw different query logs");
  if (!report.responses_match) return fail("arms returned different responses");
  return {report.speedup_ratio > 1.0, buf};
}

Outcome golden_prompts() {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(VRAP_TEST_DATA_DIR "/prompts")) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.size() < 10) return fail("fewer than 10 fixtures");
  auto hits = [](const nlohmann::json& list) {
    std::vector<retrieval::Enrichment> out;
    for (const auto& h : list) {
      out.push_back({h.at("key"), h.at("snippet"), h.at("ordinal").get<std::size_t>(), h.at("score").get<double>()});
    }
    return out;
  };
  std::size_t with_tags = 0;
  for (const auto& path : files) {
    const auto j = nlohmann::json::parse(slurp(path));
    retrieval::EnrichedTagSet tags;
    tags.base = scene::deserialize_tags(j.at("tags").get<std::string>());
    for (const auto& o : tags.base.object_tags) tags.object_enrichments[o];
    for (const auto& a : tags.base.attribute_tags) tags.attribute_enrichments[a];
    if (j.contains("objects")) {
      for (const auto& [label, list] : j.at("objects").items()) tags.object_enrichments[label] = hits(list);
    }
    if (j.contains("attributes")) {
      for (const auto& a : j.at("attributes")) tags.attribute_enrichments[{a.at("object"), a.at("attribute")}] = hits(a.at("hits"));
    }
    const auto prompt = prompting::build_prompt({j.at("query"), std::nullopt}, tags, j.at("budget"));
    const auto expected = slurp(fs::path(path).replace_extension(".expected"));
    if (prompt.text != expected) return fail(path.stem().string() + " differs");
    if (prompt.tag_count_included > 0) {
      if (prompt.text.find(prompting::kTagSeparator) == std::string::npos) return fail("missing Tags separator");
      ++with_tags;
    }
  }
  return {true, std::to_string(files.size()) + " fixtures byte-identical (" + std::to_string(with_tags) + " with tags)"};
}

Outcome metrics() {
  for (const char* s : {"the cat sat on the mat", "a b c d", "one two three four five six"}) {
    if (eval::bleu4(s, std::vector<std::string>{s}) != 1.0) return fail("bleu4 identity");
  }
  const double golden = eval::bleu4("the cat sat on the mat", std::vector<std::string>{"the cat is on the mat"});
  if (std::abs(golden - 0.42044820762685725) > 1e-9) return fail("bleu4 golden case");
  std::mt19937_64 rng(99);
  for (int i = 0; i < 100; ++i) {
    std::vector<std::string> ranked;
    const std::size_t n = rng() % 15;
    for (std::size_t j = 0; j < n; ++j) ranked.push_back("d" + std::to_string(rng() % 20));
    std::set<std::string> relevant;
    const std::size_t m = 1 + rng() % 6;
    for (std::size_t j = 0; j < m; ++j) relevant.insert("d" + std::to_string(rng() % 20));
    double previous = 0.0;
    for (std::size_t k = 1; k <= 16; ++k) {
      const double r = eval::recall_at_k(ranked, relevant, k);
      if (r != oracle::recall_enumerated(ranked, relevant, k)) return fail("recall_at_k differs from enumeration");
      if (r < previous) return fail("recall_at_k not monotone in k");
      previous = r;
    }
  }
  return {true, "bleu4 identity and golden, 100 recall cases"};
}

}  // namespace

int main() {
  criterion("AC1", "tag set equals union oracle and round-trips", 10, tag_sets);
  criterion("AC2", "retrieval equals exhaustive argsort with prefix property", 30, retrieval_ranking);
  criterion("AC3", "loss identities at 1e-9 / 1e-12", 0, loss_identities);
  criterion("AC4", "finite-difference gradient check", 60, gradient_check);
  criterion("AC5", "toy training halves total loss within 200 steps", 60, training_reduces_loss);
  criterion("AC6", "cached and online inference agree", 0, cached_equals_online);
  criterion("AC7", "cached path faster than online on 1e4-entry store", 120, latency);
  criterion("AC8", "golden prompt fixtures", 0, golden_prompts);
  criterion("AC9", "bleu4 and recall_at_k", 0, metrics);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
