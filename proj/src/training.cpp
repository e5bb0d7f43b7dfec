#include "vrap/training.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "json.hpp"

#include "vrap/error.hpp"

namespace vrap::losses {

TrainResult train_toy(std::span<const TrainingExample> corpus, const TrainConfig& config) {
  if (corpus.empty()) throw Error(ErrorKind::InvalidArgument, "training corpus is empty");
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
    throw Error(ErrorKind::InvalidArgument, "learning rate must be finite and >= 0");
  }
  validate(config.weights);
  for (const auto& example : corpus) validate(example, config.vocab_size);

  TrainResult result{ToyModel::random(config.vocab_size, config.embed_dim, config.seed, config.init_scale), {}};
  result.trajectory.reserve(config.steps + 1);
  std::vector<double> grad;

  auto check = [](const LossReport& report, std::size_t step) {
    if (!std::isfinite(report.total) || report.total > kDivergenceThreshold) {
      throw Error(ErrorKind::DivergenceDetected,
                  "total loss " + std::to_string(report.total) + " at step " + std::to_string(step));
    }
  };

  for (std::size_t step = 0;; ++step) {
    const LossReport report = evaluate(result.model, corpus, config.weights, config.options, &grad);
    check(report, step);
    result.trajectory.push_back(report);
    if (step == config.steps) break;
    auto params = result.model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= config.learning_rate * grad[i];
  }
  return result;
}

std::string trajectory_csv(std::span<const LossReport> trajectory) {
  std::string out = "step,gen,contrast,tag,total\n";
  char row[160];
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const auto& r = trajectory[i];
    std::snprintf(row, sizeof row, "%zu,%.17g,%.17g,%.17g,%.17g\n", i, r.gen, r.contrast, r.tag, r.total);
    out += row;
  }
  return out;
}

std::vector<TrainingExample> parse_training_corpus(std::string_view jsonl) {
  std::vector<TrainingExample> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    try {
      const auto record = nlohmann::json::parse(line);
      auto tokens = [&record](const char* field, bool required) {
        std::vector<TokenId> v;
        if (!record.contains(field)) {
          if (required) throw Error(ErrorKind::MalformedDocument, std::string("missing field '") + field + "'");
          return v;
        }
        return record.at(field).get<std::vector<TokenId>>();
      };
      TrainingExample example;
      example.prompt_tokens = tokens("prompt", false);
      example.target_tokens = tokens("target", true);
      example.feature_tokens = tokens("features", false);
      example.tag_target = tokens("tag_target", true);
      example.positive_tags = tokens("positive", false);
      example.negative_tags = tokens("negative", false);
      if (record.contains("extra_negatives")) {
        example.extra_negatives = record.at("extra_negatives").get<std::vector<std::vector<TokenId>>>();
      }
      out.push_back(std::move(example));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::MalformedDocument, e.what(), line_no, 1);
    } catch (const Error& e) {
      throw Error(e.kind(), e.message(), line_no, e.column() ? e.column() : 1);
    }
  }
  return out;
}

std::vector<TrainingExample> synthetic_batch(std::size_t n_examples, std::size_t vocab_size, std::uint64_t seed) {
  if (vocab_size < 4) throw Error(ErrorKind::InvalidArgument, "synthetic batch needs at least 4 tokens");
  std::mt19937_64 rng(seed);
  auto token = [&] { return static_cast<TokenId>(rng() % vocab_size); };
  auto sequence = [&](std::size_t n) {
    std::vector<TokenId> s(n);
    for (auto& t : s) t = token();
    return s;
  };

  std::vector<TrainingExample> batch;
  for (std::size_t i = 0; i < n_examples; ++i) {
    TrainingExample e;
    e.prompt_tokens = sequence(3);
    e.target_tokens = sequence(3);
    e.feature_tokens = sequence(2);
    e.tag_target = sequence(2);
    e.positive_tags = e.tag_target;
    e.positive_tags.push_back(token());
    e.negative_tags = sequence(2);
    batch.push_back(std::move(e));
  }
  return batch;
}

std::vector<TermGradCheck> check_toy_gradients(const TrainConfig& config, std::size_t n_examples, double eps,
                                               double tolerance) {
  const auto batch = synthetic_batch(n_examples, config.vocab_size, config.seed ^ 0xba7c4);
  const auto model = ToyModel::random(config.vocab_size, config.embed_dim, config.seed, config.init_scale);
  const auto point = model.parameters();
  const std::vector<double> x(point.begin(), point.end());

  const std::pair<const char*, LossWeights> terms[] = {
      {"gen", {1.0, 0.0, 0.0}},
      {"contrast", {0.0, 1.0, 0.0}},
      {"tag", {0.0, 0.0, 1.0}},
      {"total", config.weights},
  };
  std::vector<TermGradCheck> out;
  for (const auto& [name, weights] : terms) {
    std::vector<double> analytic;
    evaluate(model, batch, weights, config.options, &analytic);
    ToyModel probe = model;
    auto f = [&](std::span<const double> p) {
      std::copy(p.begin(), p.end(), probe.parameters().begin());
      return evaluate(probe, batch, weights, config.options).total;
    };
    out.push_back({name, grad_check(f, x, analytic, eps, tolerance)});
  }
  return out;
}

}  // namespace vrap::losses
