#include "cli_app.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vrap/bench.hpp"
#include "vrap/config.hpp"
#include "vrap/embedding.hpp"
#include "vrap/error.hpp"
#include "vrap/inference.hpp"
#include "vrap/knowledge_store.hpp"
#include "vrap/metrics.hpp"
#include "vrap/prompt.hpp"
#include "vrap/scene.hpp"
#include "vrap/tag_cache.hpp"
#include "vrap/tags.hpp"
#include "vrap/training.hpp"

namespace vrap::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
  // shared by every subcommand
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string output;

  std::string scene;
  std::vector<std::string> scenes;
  std::string knowledge;
  std::string cache;
  std::string client;
  std::optional<std::size_t> budget;
  std::string query;
  std::string image;
  bool force = false;
  std::size_t jobs = 1;

  std::string corpus;
  std::size_t steps = 200;
  double learning_rate = 0.5;
  std::size_t vocab = 16;
  std::size_t dim = 8;
  std::size_t examples = 4;

  std::string records;
  std::size_t k = 5;

  std::size_t store_size = 10000;
  std::size_t queries = 100;
  std::size_t images = 50;
  std::size_t warmup = 10;
  std::string samples;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "YAML pipeline config (see README for the schema)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Seed; overrides embedder.seed, or seeds the run's RNG where one is used");
  cmd->add_option("--output", o.output, "Write the primary output here instead of stdout");
}

void add_knowledge(CLI::App* cmd, Options& o) {
  cmd->add_option("--knowledge", o.knowledge,
                  "Knowledge corpus (key<TAB>snippet lines) or store snapshot; defaults to paths.store, then "
                  "paths.corpus");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

class Runner {
 public:
  Runner(const Options& o, std::ostream& out, std::ostream& err) : o_(o), out_(out), err_(err) {
    if (!o.config.empty()) config_ = load_config(o.config);
    if (o.seed) config_.embedder.seed = *o.seed;
    if (o.budget) config_.budget = *o.budget;
    if (!o.client.empty()) config_.client.kind = o.client;
    validate(config_);
  }

  int parse() {
    const auto doc = scene::parse_scene_document(read_file(o_.scene));
    emit(scene::serialize_tags(scene::canonicalize(scene::build_tag_set(doc.graph))) + "\n");
    return kExitOk;
  }

  int enrich() {
    const auto doc = scene::parse_scene_document(read_file(o_.scene));
    const auto store = open_store();
    emit(inference::serialize_entry(doc.image.image_id,
                                    inference::enrich_document(doc.graph, *store, config_.retrieval)) +
         "\n");
    return kExitOk;
  }

  int prompt() {
    const auto doc = scene::parse_scene_document(read_file(o_.scene));
    const auto store = open_store();
    const auto tags = inference::enrich_document(doc.graph, *store, config_.retrieval);
    const auto p = prompting::build_prompt(prompting::Query{o_.query, std::nullopt}, tags, config_.budget);
    if (p.truncated) {
      err_ << "note: prompt truncated to " << p.tag_count_included << " tag items\n";
    }
    emit(p.text + "\n");
    return kExitOk;
  }

  int store_build() {
    if (o_.output.empty()) throw Error(ErrorKind::InvalidArgument, "store build needs --output");
    check_overwrite();
    const auto path = knowledge_path(false);
    retrieval::KnowledgeStore store(retrieval::load_knowledge_corpus(path), embedder());
    store.save(o_.output);
    err_ << "stored " << store.size() << " entries, fingerprint " << store.fingerprint() << "\n";
    return kExitOk;
  }

  int cache_build() {
    check_overwrite();
    std::vector<std::string> documents;
    for (const auto& path : o_.scenes) documents.push_back(read_file(path));
    const auto store = open_store();
    inference::CacheBuildOptions options;
    options.enrich = config_.retrieval;
    options.jobs = o_.jobs;
    options.created_at = build_timestamp();
    const auto cache = inference::build_cache(documents, *store, options);
    emit(inference::serialize_cache(cache));
    err_ << "cached " << cache.entries.size() << " images against store " << cache.store_fingerprint << "\n";
    return kExitOk;
  }

  int cache_inspect() {
    std::unique_ptr<retrieval::KnowledgeStore> store;
    if (has_knowledge()) store = open_store();
    const auto loaded = inference::load_cache(o_.cache, store.get());
    if (loaded.staleness_warning) err_ << "warning: " << *loaded.staleness_warning << "\n";
    const auto& c = loaded.cache;
    std::ostringstream text;
    text << "fingerprint " << c.store_fingerprint << "\n"
         << "created_at " << c.created_at << "\n"
         << "k " << c.k << "\n"
         << "score_floor " << c.score_floor << "\n"
         << "images " << c.entries.size() << "\n";
    for (const auto& [id, enriched] : c.entries) {
      std::size_t hits = 0;
      for (const auto& [tag, list] : enriched.object_enrichments) hits += list.size();
      for (const auto& [tag, list] : enriched.attribute_enrichments) hits += list.size();
      text << id << "\tobjects=" << enriched.base.n_objects() << "\tattributes=" << enriched.base.attribute_tags.size()
           << "\trelations=" << enriched.base.n_relations() << "\thits=" << hits << "\n";
    }
    emit(text.str());
    return kExitOk;
  }

  int infer() {
    auto client = make_client();
    const prompting::Query query{o_.query, std::nullopt};
    inference::Response response;
    const std::string cache_path = !o_.cache.empty() ? o_.cache : config_.paths.cache;
    if (!o_.scene.empty()) {
      const auto store = open_store();
      const auto document = read_file(o_.scene);
      std::string image = o_.image;
      if (image.empty()) image = scene::parse_scene_document(document).image.image_id;
      response = inference::infer_online(query, image, document, *store, *client, config_.budget, config_.retrieval);
    } else if (!cache_path.empty()) {
      if (o_.image.empty()) throw Error(ErrorKind::InvalidArgument, "infer with a cache needs --image");
      std::unique_ptr<retrieval::KnowledgeStore> store;
      if (has_knowledge()) store = open_store();
      const auto loaded = inference::load_cache(cache_path, store.get());
      if (loaded.staleness_warning) {
        err_ << "warning: " << *loaded.staleness_warning << "\n";
        if (!o_.force) throw Error(ErrorKind::InvalidArgument, "cache is stale; rebuild it or pass --force");
      }
      response = inference::infer(query, o_.image, loaded.cache, *client, config_.budget);
    } else {
      throw Error(ErrorKind::InvalidArgument, "infer needs --cache (or paths.cache) or --scene");
    }
    emit(response.text + "\n");
    return kExitOk;
  }

  int train_toy() {
    losses::TrainConfig tc = train_config();
    tc.steps = o_.steps;
    tc.learning_rate = o_.learning_rate;
    const auto corpus = o_.corpus.empty() ? losses::synthetic_batch(o_.examples, tc.vocab_size, tc.seed)
                                          : losses::parse_training_corpus(read_file(o_.corpus));
    const auto result = losses::train_toy(corpus, tc);
    const double first = result.trajectory.front().total;
    const double last = result.trajectory.back().total;
    char line[160];
    std::snprintf(line, sizeof line, "initial %.6g final %.6g (%.1f%% reduction)\n", first, last,
                  first > 0.0 ? 100.0 * (1.0 - last / first) : 0.0);
    err_ << line;
    emit(losses::trajectory_csv(result.trajectory));
    return kExitOk;
  }

  int gradcheck() {
    const auto checks = losses::check_toy_gradients(train_config(), o_.examples);
    std::string text;
    char line[256];
    bool passed = true;
    for (const auto& [term, r] : checks) {
      std::snprintf(line, sizeof line, "%-8s params=%zu max_rel_error=%.3e worst_index=%zu analytic=%.6e numeric=%.6e %s\n",
                    term.c_str(), r.n_parameters, r.max_rel_error, r.worst_index, r.analytic_at_worst,
                    r.numeric_at_worst, r.passed ? "PASS" : "FAIL");
      text += line;
      passed = passed && r.passed;
    }
    std::snprintf(line, sizeof line, "gradcheck %s (eps %.0e, tol %.0e)\n", passed ? "PASS" : "FAIL",
                  checks.front().report.eps, checks.front().report.tolerance);
    text += line;
    emit(text);
    return passed ? kExitOk : kExitInternalError;
  }

  int eval() {
    const auto records = eval::parse_eval_records(read_file(o_.records));
    double bleu_sum = 0.0;
    double recall_sum = 0.0;
    std::size_t recall_n = 0;
    for (const auto& r : records) {
      bleu_sum += eval::bleu4(r.prediction, r.references);
      if (!r.relevant.empty()) {
        recall_sum += eval::recall_at_k(r.ranked, {r.relevant.begin(), r.relevant.end()}, o_.k);
        ++recall_n;
      }
    }
    nlohmann::json report = {{"records", records.size()},
                             {"exact_match", eval::exact_match_accuracy(records)},
                             {"bleu4", bleu_sum / static_cast<double>(records.size())},
                             {"k", o_.k},
                             {"recall_at_k", recall_n ? nlohmann::json(recall_sum / static_cast<double>(recall_n))
                                                      : nlohmann::json(nullptr)},
                             {"recall_records", recall_n}};
    emit(report.dump(2) + "\n");
    return kExitOk;
  }

  int bench() {
    const std::uint64_t seed = o_.seed.value_or(0);
    const auto documents = eval::synthetic_scene_corpus(o_.images, seed);
    retrieval::KnowledgeStore store(eval::synthetic_knowledge(o_.store_size, seed), embedder());
    inference::StubClient client;
    eval::BenchConfig bc;
    bc.n_queries = o_.queries;
    bc.seed = seed;
    bc.warmup = o_.warmup;
    bc.budget = config_.budget;
    bc.enrich = config_.retrieval;
    const auto report = eval::run_latency_bench(documents, store, client, bc);
    if (!o_.samples.empty()) {
      std::ofstream csv(o_.samples, std::ios::binary | std::ios::trunc);
      if (!csv) throw Error(ErrorKind::Io, "cannot write '" + o_.samples + "'");
      csv << eval::bench_samples_csv(report);
    }
    char line[160];
    std::snprintf(line, sizeof line, "speedup %.3fx (reference %.2fx)\n", report.speedup_ratio,
                  eval::kReferenceSpeedup);
    err_ << line;
    emit(eval::bench_report_json(report));
    return kExitOk;
  }

 private:
  std::shared_ptr<const retrieval::Embedder> embedder() const {
    return std::make_shared<retrieval::HashEmbedder>(config_.embedder.dimension, config_.embedder.seed);
  }

  bool has_knowledge() const {
    return !o_.knowledge.empty() || !config_.paths.store.empty() || !config_.paths.corpus.empty();
  }

  std::string knowledge_path(bool allow_store) const {
    if (!o_.knowledge.empty()) return o_.knowledge;
    if (allow_store && !config_.paths.store.empty()) return config_.paths.store;
    if (!config_.paths.corpus.empty()) return config_.paths.corpus;
    throw Error(ErrorKind::InvalidArgument, "no knowledge source: pass --knowledge or set paths in the config");
  }

  std::unique_ptr<retrieval::KnowledgeStore> open_store() const {
    const auto path = knowledge_path(true);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    char magic[8] = {};
    in.read(magic, sizeof magic);
    if (in.gcount() == 8 && std::string_view(magic, 8) == "VRAPKS01") {
      return std::make_unique<retrieval::KnowledgeStore>(retrieval::KnowledgeStore::load(path, embedder()));
    }
    return std::make_unique<retrieval::KnowledgeStore>(retrieval::load_knowledge_corpus(path), embedder());
  }

  std::unique_ptr<inference::LLMClient> make_client() const {
    if (config_.client.kind == "remote") return std::make_unique<inference::RemoteClient>(config_.client.remote);
    return std::make_unique<inference::StubClient>();
  }

  losses::TrainConfig train_config() const {
    losses::TrainConfig tc;
    tc.vocab_size = o_.vocab;
    tc.embed_dim = o_.dim;
    tc.weights = config_.loss;
    tc.options = config_.loss_options;
    tc.seed = o_.seed.value_or(0);
    return tc;
  }

  // SOURCE_DATE_EPOCH pins the cache timestamp for reproducible builds.
  static std::int64_t build_timestamp() {
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
      char* end = nullptr;
      const long long value = std::strtoll(epoch, &end, 10);
      if (*end == '\0') return value;
    }
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
  }

  void check_overwrite() const {
    if (!o_.output.empty() && !o_.force && fs::exists(o_.output)) {
      throw Error(ErrorKind::InvalidArgument, "'" + o_.output + "' exists; pass --force to overwrite");
    }
  }

  void emit(const std::string& data) const {
    if (o_.output.empty()) {
      out_ << data;
      return;
    }
    std::ofstream file(o_.output, std::ios::binary | std::ios::trunc);
    if (!file) throw Error(ErrorKind::Io, "cannot write '" + o_.output + "'");
    file << data;
    if (!file) throw Error(ErrorKind::Io, "short write to '" + o_.output + "'");
  }

  const Options& o_;
  std::ostream& out_;
  std::ostream& err_;
  PipelineConfig config_;
};

using Handler = int (Runner::*)();

struct App {
  CLI::App app{"Vision-aware retrieval-augmented prompting pipeline", "vrap"};
  Options options;
  std::vector<std::pair<CLI::App*, Handler>> leaves;
};

std::unique_ptr<App> make_app() {
  auto a = std::make_unique<App>();
  auto& app = a->app;
  auto& o = a->options;
  app.require_subcommand(1);
  app.fallthrough(false);

  auto leaf = [&](CLI::App* cmd, Handler handler) {
    add_common(cmd, o);
    a->leaves.emplace_back(cmd, handler);
    return cmd;
  };

  auto* parse = leaf(app.add_subcommand("parse", "Print the canonical tag line of a SAF scene document"), &Runner::parse);
  parse->add_option("scene", o.scene, "SAF document")->required()->check(CLI::ExistingFile);

  auto* enrich = leaf(app.add_subcommand("enrich", "Print a scene's tags with retrieved knowledge as JSON"),
                      &Runner::enrich);
  enrich->add_option("scene", o.scene, "SAF document")->required()->check(CLI::ExistingFile);
  add_knowledge(enrich, o);

  auto* prompt = leaf(app.add_subcommand("prompt", "Build the tag-augmented prompt for a query"), &Runner::prompt);
  prompt->add_option("scene", o.scene, "SAF document")->required()->check(CLI::ExistingFile);
  prompt->add_option("--query", o.query, "Question text")->required();
  prompt->add_option("--budget", o.budget, "Prompt byte budget (default prompt.budget)");
  add_knowledge(prompt, o);

  auto* store = app.add_subcommand("store", "Knowledge store snapshots");
  store->require_subcommand(1);
  auto* store_build = leaf(store->add_subcommand("build", "Embed a corpus and write a binary store snapshot"),
                           &Runner::store_build);
  add_knowledge(store_build, o);
  store_build->add_flag("--force", o.force, "Overwrite an existing --output file");

  auto* cache = app.add_subcommand("cache", "Precomputed tag caches");
  cache->require_subcommand(1);
  auto* cache_build = leaf(cache->add_subcommand("build", "Parse and enrich scene documents into a tag cache"),
                           &Runner::cache_build);
  cache_build->add_option("scenes", o.scenes, "SAF documents")->required()->check(CLI::ExistingFile);
  add_knowledge(cache_build, o);
  cache_build->add_option("--jobs", o.jobs, "Worker threads (output does not depend on it)")
      ->check(CLI::Range(1, 256));
  cache_build->add_flag("--force", o.force, "Overwrite an existing --output file");
  auto* cache_inspect = leaf(cache->add_subcommand("inspect", "Summarize a tag cache and check it for staleness"),
                             &Runner::cache_inspect);
  cache_inspect->add_option("cache", o.cache, "Tag cache file")->required()->check(CLI::ExistingFile);
  add_knowledge(cache_inspect, o);

  auto* infer = leaf(app.add_subcommand("infer", "Answer a query about one image"), &Runner::infer);
  infer->add_option("--query", o.query, "Question text")->required();
  infer->add_option("--image", o.image, "Image id (required with --cache)");
  infer->add_option("--cache", o.cache, "Tag cache for the cached path (default paths.cache)");
  infer->add_option("--scene", o.scene, "SAF document; selects the online path")->check(CLI::ExistingFile);
  infer->add_option("--client", o.client, "Generating client (default client.kind)")
      ->check(CLI::IsMember({"stub", "remote"}));
  infer->add_option("--budget", o.budget, "Prompt byte budget (default prompt.budget)");
  infer->add_flag("--force", o.force, "Use a cache built against a different knowledge store");
  add_knowledge(infer, o);

  auto* train = leaf(app.add_subcommand("train-toy", "Train the toy model and print the loss trajectory as CSV"),
                     &Runner::train_toy);
  train->add_option("--corpus", o.corpus, "Training examples as JSON lines (default: synthetic batch)")
      ->check(CLI::ExistingFile);
  train->add_option("--steps", o.steps, "Gradient steps")->capture_default_str();
  train->add_option("--learning-rate", o.learning_rate, "Step size")->capture_default_str();
  train->add_option("--vocab", o.vocab, "Vocabulary size")->capture_default_str();
  train->add_option("--dim", o.dim, "Embedding width")->capture_default_str();
  train->add_option("--examples", o.examples, "Synthetic batch size")->capture_default_str();

  auto* grad = leaf(app.add_subcommand("gradcheck", "Compare analytic and finite-difference loss gradients"),
                    &Runner::gradcheck);
  grad->add_option("--vocab", o.vocab, "Vocabulary size")->capture_default_str();
  grad->add_option("--dim", o.dim, "Embedding width")->capture_default_str();
  grad->add_option("--examples", o.examples, "Synthetic batch size")->capture_default_str();

  auto* ev = leaf(app.add_subcommand("eval", "Score predictions: exact match, BLEU-4, Recall@K"), &Runner::eval);
  ev->add_option("records", o.records, "Evaluation records as JSON lines")->required()->check(CLI::ExistingFile);
  ev->add_option("--k", o.k, "Cutoff for Recall@K")->capture_default_str()->check(CLI::PositiveNumber);

  auto* bench = leaf(app.add_subcommand("bench", "Cached vs online inference latency on synthetic data"),
                     &Runner::bench);
  bench->add_option("--store-size", o.store_size, "Knowledge entries")->capture_default_str();
  bench->add_option("--queries", o.queries, "Paired queries")->capture_default_str();
  bench->add_option("--images", o.images, "Synthetic scene documents")->capture_default_str();
  bench->add_option("--warmup", o.warmup, "Discarded warmup iterations per arm")->capture_default_str();
  bench->add_option("--samples", o.samples, "Write per-query latencies as CSV here");

  return a;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto a = make_app();
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    a->app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << a->app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << a->app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << a->app.help();
    return kExitInputError;
  }

  try {
    for (const auto& [cmd, handler] : a->leaves) {
      if (cmd->parsed()) {
        Runner runner(a->options, out, err);
        return (runner.*handler)();
      }
    }
    err << a->app.help();
    return kExitInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_input_error(e.kind()) ? kExitInputError : kExitInternalError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
}

std::vector<CommandFlags> command_flags() {
  auto a = make_app();
  std::vector<CommandFlags> out;
  for (const auto& [cmd, handler] : a->leaves) {
    CommandFlags entry;
    entry.command = cmd->get_name();
    if (auto* parent = cmd->get_parent(); parent && parent != &a->app) entry.command = parent->get_name() + " " + entry.command;
    for (const auto* opt : cmd->get_options()) {
      for (const auto& name : opt->get_lnames()) {
        if (name != "help") entry.flags.push_back("--" + name);
      }
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace vrap::cli
