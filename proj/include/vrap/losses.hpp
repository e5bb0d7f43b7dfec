#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vrap/embedding.hpp"
#include "vrap/tags.hpp"

namespace vrap::losses {

using TokenId = std::uint32_t;

/// Single-layer autoregressive scorer. The next-token logits after a prefix
/// are mean(prefix token embeddings) x output_weights; an empty prefix
/// gives all-zero logits. The embedding table is shared by the response
/// head, the tag head and the contrastive tag-set embedding.
///
/// Parameters live in one flat buffer: token_embeddings (V x E, row-major)
/// followed by output_weights (E x V, row-major). Gradients use the same
/// layout.
class ToyModel {
 public:
  /// All-zero parameters.
  ToyModel(std::size_t vocab_size, std::size_t embed_dim, std::uint64_t seed = 0);

  /// Parameters drawn uniformly from [-scale, scale] by a seeded mt19937_64.
  static ToyModel random(std::size_t vocab_size, std::size_t embed_dim, std::uint64_t seed, double scale = 0.1);

  std::size_t vocab_size() const noexcept { return vocab_; }
  std::size_t embed_dim() const noexcept { return dim_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t num_parameters() const noexcept { return params_.size(); }

  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  std::size_t embedding_index(TokenId token, std::size_t j) const noexcept { return token * dim_ + j; }
  std::size_t output_index(std::size_t j, std::size_t v) const noexcept { return vocab_ * dim_ + j * vocab_ + v; }
  double embedding(TokenId token, std::size_t j) const noexcept { return params_[embedding_index(token, j)]; }
  double output_weight(std::size_t j, std::size_t v) const noexcept { return params_[output_index(j, v)]; }

  /// Next-token logits after `prefix`.
  std::vector<double> logits(std::span<const TokenId> prefix) const;

  bool operator==(const ToyModel&) const = default;

 private:
  std::size_t vocab_;
  std::size_t dim_;
  std::uint64_t seed_;
  std::vector<double> params_;
};

struct TrainingExample {
  std::vector<TokenId> prompt_tokens;
  std::vector<TokenId> target_tokens;   // y*
  std::vector<TokenId> feature_tokens;  // stands in for the visual features
  std::vector<TokenId> tag_target;      // T*, also the anchor of the contrastive term
  std::vector<TokenId> positive_tags;   // T+
  std::vector<TokenId> negative_tags;   // T-
  /// Additional negative sets, read only when LossOptions::multi_negative.
  std::vector<std::vector<TokenId>> extra_negatives;
};

/// Throws InvalidArgument (token id >= vocab) or EmptyTarget.
void validate(const TrainingExample& example, std::size_t vocab_size);

struct LossWeights {
  double gen = 1.0;
  double contrast = 0.1;
  double tag = 0.5;
};

/// Throws InvalidArgument unless all weights are finite, non-negative and
/// at least one is positive.
void validate(const LossWeights& weights);

struct LossOptions {
  /// Divide the sequence losses by their length instead of summing.
  bool average_over_steps = false;
  /// Use log-sum-exp over every negative set instead of the single one.
  bool multi_negative = false;
};

struct LossReport {
  double gen = 0.0;
  double contrast = 0.0;
  double tag = 0.0;
  double total = 0.0;
};

std::vector<double> log_softmax(std::span<const double> logits);

/// -sum_t log p(target_t | context, target_<t) under teacher forcing. When
/// `grad` is non-null the gradient (times `grad_scale`) is added to it.
/// Throws EmptyTarget.
double sequence_nll(const ToyModel& model, std::span<const TokenId> context, std::span<const TokenId> target,
                    bool average = false, std::span<double> grad = {}, double grad_scale = 1.0);

double gen_loss(const ToyModel& model, std::span<const TokenId> prompt_tokens, std::span<const TokenId> target,
                const LossOptions& options = {});

double tag_loss(const ToyModel& model, std::span<const TokenId> feature_tokens, std::span<const TokenId> tag_target,
                const LossOptions& options = {});

/// -log(e^pos / (e^pos + e^neg)) = softplus(neg - pos).
double contrastive_loss(double sim_pos, double sim_neg);

/// -log(e^pos / (e^pos + sum_j e^neg_j)).
double contrastive_loss(double sim_pos, std::span<const double> sim_negs);

/// Cosine similarity of the mean member embeddings of two tag sets.
/// Throws EmptyTagSet.
double tag_set_similarity(const scene::TagSet& a, const scene::TagSet& b, const retrieval::Embedder& embedder);

/// Cosine of the mean token embeddings of two token sets under the model;
/// 0 when either mean is the zero vector.
double embedding_set_similarity(const ToyModel& model, std::span<const TokenId> a, std::span<const TokenId> b);

/// Contrastive term of one example under the model: anchor = tag_target.
/// Zero when the example has neither positive nor negative tags.
double model_contrastive_loss(const ToyModel& model, const TrainingExample& example, const LossOptions& options = {},
                              std::span<double> grad = {}, double grad_scale = 1.0);

LossReport total_loss(double gen, double contrast, double tag, const LossWeights& weights);

/// Mean of each term over `batch` and their weighted total. Writes the
/// gradient of `total` into `grad` (resized) when non-null.
LossReport evaluate(const ToyModel& model, std::span<const TrainingExample> batch, const LossWeights& weights,
                    const LossOptions& options = {}, std::vector<double>* grad = nullptr);

/// Assigns consecutive token ids to strings.
class Vocabulary {
 public:
  TokenId intern(std::string_view text);
  std::size_t size() const noexcept { return words_.size(); }
  const std::string& word(TokenId id) const { return words_.at(id); }

  /// One token per tag-set member (see scene::member_texts).
  std::vector<TokenId> tag_tokens(const scene::TagSet& tags);
  std::vector<TokenId> text_tokens(std::string_view text);

 private:
  std::unordered_map<std::string, TokenId> ids_;
  std::vector<std::string> words_;
};

}  // namespace vrap::losses
