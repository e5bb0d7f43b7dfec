#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vrap/grad_check.hpp"
#include "vrap/losses.hpp"

namespace vrap::losses {

struct TrainConfig {
  std::size_t vocab_size = 16;
  std::size_t embed_dim = 8;
  LossWeights weights;
  LossOptions options;
  std::size_t steps = 200;
  double learning_rate = 0.5;
  std::uint64_t seed = 0;
  double init_scale = 0.1;
};

struct TrainResult {
  ToyModel model;
  /// steps + 1 reports: the initial loss, then the loss after every update.
  std::vector<LossReport> trajectory;
};

inline constexpr double kDivergenceThreshold = 1e6;

/// Full-batch gradient descent on the weighted total loss, starting from
/// ToyModel::random(vocab, dim, seed, init_scale). Throws
/// DivergenceDetected when the total exceeds 1e6 or is not finite.
TrainResult train_toy(std::span<const TrainingExample> corpus, const TrainConfig& config);

/// "step,gen,contrast,tag,total" header plus one row per report.
std::string trajectory_csv(std::span<const LossReport> trajectory);

/// One JSON object per line with integer-array fields "prompt", "target",
/// "features", "tag_target", "positive", "negative" and optionally
/// "extra_negatives" (array of arrays). Throws MalformedDocument.
std::vector<TrainingExample> parse_training_corpus(std::string_view jsonl);

/// Small deterministic batch over `vocab_size` tokens for demos and tests.
std::vector<TrainingExample> synthetic_batch(std::size_t n_examples, std::size_t vocab_size, std::uint64_t seed);

struct TermGradCheck {
  std::string term;  // gen | contrast | tag | total
  GradCheckReport report;
};

/// Finite-difference check of every loss term and of the weighted total on
/// a random ToyModel(vocab, dim, seed) and synthetic_batch(n_examples).
/// Throws InvalidArgument when the model has more than
/// kGradCheckMaxParameters parameters.
std::vector<TermGradCheck> check_toy_gradients(const TrainConfig& config, std::size_t n_examples = 4,
                                               double eps = 1e-5, double tolerance = 1e-4);

}  // namespace vrap::losses
