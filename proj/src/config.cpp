#include "vrap/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "vrap/embedding.hpp"
#include "vrap/error.hpp"

namespace vrap {

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::ConfigInvalid, path + ": " + what);
}

template <typename T>
void read(const YAML::Node& section, const std::string& section_name, const char* key, T& out) {
  const auto node = section[key];
  if (!node) return;
  try {
    out = node.as<T>();
  } catch (const YAML::Exception&) {
    invalid(section_name + "." + key, "wrong type");
  }
}

void reject_unknown(const YAML::Node& section, const std::string& name, std::set<std::string> known) {
  if (!section) return;
  if (!section.IsMap()) invalid(name, "expected a mapping");
  for (const auto& kv : section) {
    const auto key = kv.first.as<std::string>();
    if (!known.contains(key)) invalid(name.empty() ? key : name + "." + key, "unknown key");
  }
}

}  // namespace

void validate(const PipelineConfig& config) {
  if (config.config_version != kConfigVersion) {
    invalid("config_version", "unsupported version " + std::to_string(config.config_version));
  }
  if (config.embedder.id != retrieval::HashEmbedder::kId) {
    invalid("embedder.id", "unknown embedder '" + config.embedder.id + "'");
  }
  if (config.embedder.dimension < 8) invalid("embedder.dimension", "must be >= 8");
  if (config.retrieval.k < 1) invalid("retrieval.k", "must be >= 1");
  if (!std::isfinite(config.retrieval.score_floor)) invalid("retrieval.score_floor", "must be finite");
  if (config.budget < 64) invalid("prompt.budget", "must be >= 64");
  const auto& w = config.loss;
  for (auto [name, value] : {std::pair{"loss.lambda_gen", w.gen}, std::pair{"loss.lambda_contrast", w.contrast},
                             std::pair{"loss.lambda_tag", w.tag}}) {
    if (!std::isfinite(value) || value < 0.0) invalid(name, "must be finite and >= 0");
  }
  if (w.gen + w.contrast + w.tag <= 0.0) invalid("loss", "at least one lambda must be positive");
  if (config.client.kind != "stub" && config.client.kind != "remote") {
    invalid("client.kind", "must be 'stub' or 'remote'");
  }
  if (config.client.remote.timeout.count() <= 0) invalid("client.timeout_ms", "must be positive");
}

PipelineConfig parse_config(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("config is not valid YAML: ") + e.what());
  }
  PipelineConfig c;
  if (root.IsNull()) {
    validate(c);
    return c;
  }
  reject_unknown(root, "", {"config_version", "embedder", "retrieval", "prompt", "loss", "client", "paths"});
  read(root, "", "config_version", c.config_version);
  if (!root["config_version"]) invalid("config_version", "missing");

  const auto embedder = root["embedder"];
  reject_unknown(embedder, "embedder", {"id", "seed", "dimension"});
  read(embedder, "embedder", "id", c.embedder.id);
  read(embedder, "embedder", "seed", c.embedder.seed);
  read(embedder, "embedder", "dimension", c.embedder.dimension);

  const auto retrieval = root["retrieval"];
  reject_unknown(retrieval, "retrieval", {"k", "score_floor"});
  read(retrieval, "retrieval", "k", c.retrieval.k);
  read(retrieval, "retrieval", "score_floor", c.retrieval.score_floor);

  const auto prompt = root["prompt"];
  reject_unknown(prompt, "prompt", {"budget"});
  read(prompt, "prompt", "budget", c.budget);

  const auto loss = root["loss"];
  reject_unknown(loss, "loss",
                 {"lambda_gen", "lambda_contrast", "lambda_tag", "average_over_steps", "multi_negative"});
  read(loss, "loss", "lambda_gen", c.loss.gen);
  read(loss, "loss", "lambda_contrast", c.loss.contrast);
  read(loss, "loss", "lambda_tag", c.loss.tag);
  read(loss, "loss", "average_over_steps", c.loss_options.average_over_steps);
  read(loss, "loss", "multi_negative", c.loss_options.multi_negative);

  const auto client = root["client"];
  reject_unknown(client, "client", {"kind", "endpoint", "path", "model", "timeout_ms", "token_env"});
  read(client, "client", "kind", c.client.kind);
  read(client, "client", "endpoint", c.client.remote.endpoint);
  read(client, "client", "path", c.client.remote.path);
  read(client, "client", "model", c.client.remote.model);
  read(client, "client", "token_env", c.client.remote.token_env);
  long long timeout_ms = c.client.remote.timeout.count();
  read(client, "client", "timeout_ms", timeout_ms);
  c.client.remote.timeout = std::chrono::milliseconds(timeout_ms);

  const auto paths = root["paths"];
  reject_unknown(paths, "paths", {"store", "cache", "corpus"});
  read(paths, "paths", "store", c.paths.store);
  read(paths, "paths", "cache", c.paths.cache);
  read(paths, "paths", "corpus", c.paths.corpus);

  validate(c);
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace vrap
