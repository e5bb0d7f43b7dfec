#include "vrap/losses.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "vrap/error.hpp"

namespace vrap::losses {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void check_tokens(std::span<const TokenId> tokens, std::size_t vocab, const char* what) {
  for (TokenId t : tokens) {
    if (t >= vocab) {
      throw Error(ErrorKind::InvalidArgument,
                  std::string(what) + " token " + std::to_string(t) + " >= vocab size " + std::to_string(vocab));
    }
  }
}

/// Mean embedding of a token multiset; empty input gives the zero vector.
std::vector<double> mean_embedding(const ToyModel& model, std::span<const TokenId> tokens) {
  std::vector<double> mean(model.embed_dim(), 0.0);
  if (tokens.empty()) return mean;
  for (TokenId t : tokens) {
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += model.embedding(t, j);
  }
  for (double& v : mean) v /= static_cast<double>(tokens.size());
  return mean;
}

struct CosineParts {
  double value = 0.0;
  std::vector<double> d_a;  // d cos / d a
  std::vector<double> d_b;  // d cos / d b
};

CosineParts cosine_with_grad(const std::vector<double>& a, const std::vector<double>& b) {
  CosineParts out;
  out.d_a.assign(a.size(), 0.0);
  out.d_b.assign(b.size(), 0.0);
  const double na = retrieval::l2_norm(a);
  const double nb = retrieval::l2_norm(b);
  if (na == 0.0 || nb == 0.0) return out;
  const double ab = retrieval::dot(a, b);
  out.value = ab / (na * nb);
  for (std::size_t j = 0; j < a.size(); ++j) {
    out.d_a[j] = b[j] / (na * nb) - out.value * a[j] / (na * na);
    out.d_b[j] = a[j] / (na * nb) - out.value * b[j] / (nb * nb);
  }
  return out;
}

/// Spreads d(loss)/d(mean embedding) back onto the member tokens.
void scatter_mean_grad(const ToyModel& model, std::span<const TokenId> tokens, const std::vector<double>& d_mean,
                       double scale, std::span<double> grad) {
  if (tokens.empty()) return;
  const double share = scale / static_cast<double>(tokens.size());
  for (TokenId t : tokens) {
    for (std::size_t j = 0; j < d_mean.size(); ++j) grad[model.embedding_index(t, j)] += share * d_mean[j];
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// ToyModel

ToyModel::ToyModel(std::size_t vocab_size, std::size_t embed_dim, std::uint64_t seed)
    : vocab_(vocab_size), dim_(embed_dim), seed_(seed), params_(2 * vocab_size * embed_dim, 0.0) {
  if (vocab_size == 0 || embed_dim == 0) throw Error(ErrorKind::InvalidArgument, "model shape must be positive");
}

ToyModel ToyModel::random(std::size_t vocab_size, std::size_t embed_dim, std::uint64_t seed, double scale) {
  ToyModel model(vocab_size, embed_dim, seed);
  std::mt19937_64 rng(seed);
  for (double& p : model.params_) {
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
    p = scale * (2.0 * unit - 1.0);
  }
  return model;
}

std::vector<double> ToyModel::logits(std::span<const TokenId> prefix) const {
  const auto h = mean_embedding(*this, prefix);
  std::vector<double> z(vocab_, 0.0);
  for (std::size_t j = 0; j < dim_; ++j) {
    if (h[j] == 0.0) continue;
    for (std::size_t v = 0; v < vocab_; ++v) z[v] += h[j] * output_weight(j, v);
  }
  return z;
}

// ---------------------------------------------------------------------------
// Validation

void validate(const TrainingExample& example, std::size_t vocab_size) {
  if (example.target_tokens.empty()) throw Error(ErrorKind::EmptyTarget, "target sequence is empty");
  if (example.tag_target.empty()) throw Error(ErrorKind::EmptyTarget, "tag target sequence is empty");
  check_tokens(example.prompt_tokens, vocab_size, "prompt");
  check_tokens(example.target_tokens, vocab_size, "target");
  check_tokens(example.feature_tokens, vocab_size, "feature");
  check_tokens(example.tag_target, vocab_size, "tag target");
  check_tokens(example.positive_tags, vocab_size, "positive tag");
  check_tokens(example.negative_tags, vocab_size, "negative tag");
  for (const auto& extra : example.extra_negatives) check_tokens(extra, vocab_size, "negative tag");
}

void validate(const LossWeights& w) {
  for (double v : {w.gen, w.contrast, w.tag}) {
    if (!std::isfinite(v) || v < 0.0) throw Error(ErrorKind::InvalidArgument, "loss weights must be finite and >= 0");
  }
  if (w.gen == 0.0 && w.contrast == 0.0 && w.tag == 0.0) {
    throw Error(ErrorKind::InvalidArgument, "at least one loss weight must be positive");
  }
}

// ---------------------------------------------------------------------------
// Losses

std::vector<double> log_softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double m = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (double z : out) sum += std::exp(z - m);
  const double lse = m + std::log(sum);
  for (double& z : out) z -= lse;
  return out;
}

double sequence_nll(const ToyModel& model, std::span<const TokenId> context, std::span<const TokenId> target,
                    bool average, std::span<double> grad, double grad_scale) {
  if (target.empty()) throw Error(ErrorKind::EmptyTarget, "target sequence is empty");
  check_tokens(context, model.vocab_size(), "context");
  check_tokens(target, model.vocab_size(), "target");
  if (!grad.empty() && grad.size() != model.num_parameters()) {
    throw Error(ErrorKind::DimensionMismatch, "gradient buffer does not match the model");
  }

  const std::size_t V = model.vocab_size();
  const std::size_t E = model.embed_dim();
  std::vector<TokenId> sequence(context.begin(), context.end());
  sequence.insert(sequence.end(), target.begin(), target.end());

  const double step_scale = average ? 1.0 / static_cast<double>(target.size()) : 1.0;
  std::vector<double> prefix_sum(E, 0.0);
  for (TokenId t : context) {
    for (std::size_t j = 0; j < E; ++j) prefix_sum[j] += model.embedding(t, j);
  }

  double loss = 0.0;
  std::vector<double> h(E), z(V), dz(V), dh(E);
  for (std::size_t t = 0; t < target.size(); ++t) {
    const std::size_t n = context.size() + t;
    for (std::size_t j = 0; j < E; ++j) h[j] = n == 0 ? 0.0 : prefix_sum[j] / static_cast<double>(n);
    std::fill(z.begin(), z.end(), 0.0);
    for (std::size_t j = 0; j < E; ++j) {
      for (std::size_t v = 0; v < V; ++v) z[v] += h[j] * model.output_weight(j, v);
    }
    const auto lp = log_softmax(z);
    const TokenId y = target[t];
    loss -= lp[y];

    if (!grad.empty()) {
      const double s = grad_scale * step_scale;
      for (std::size_t v = 0; v < V; ++v) dz[v] = s * (std::exp(lp[v]) - (v == y ? 1.0 : 0.0));
      for (std::size_t j = 0; j < E; ++j) {
        double acc = 0.0;
        for (std::size_t v = 0; v < V; ++v) {
          grad[model.output_index(j, v)] += h[j] * dz[v];
          acc += model.output_weight(j, v) * dz[v];
        }
        dh[j] = acc;
      }
      if (n > 0) {
        const double share = 1.0 / static_cast<double>(n);
        for (std::size_t p = 0; p < n; ++p) {
          for (std::size_t j = 0; j < E; ++j) grad[model.embedding_index(sequence[p], j)] += share * dh[j];
        }
      }
    }
    for (std::size_t j = 0; j < E; ++j) prefix_sum[j] += model.embedding(y, j);
  }
  return loss * step_scale;
}

double gen_loss(const ToyModel& model, std::span<const TokenId> prompt_tokens, std::span<const TokenId> target,
                const LossOptions& options) {
  return sequence_nll(model, prompt_tokens, target, options.average_over_steps);
}

double tag_loss(const ToyModel& model, std::span<const TokenId> feature_tokens, std::span<const TokenId> tag_target,
                const LossOptions& options) {
  return sequence_nll(model, feature_tokens, tag_target, options.average_over_steps);
}

double contrastive_loss(double sim_pos, double sim_neg) { return softplus(sim_neg - sim_pos); }

double contrastive_loss(double sim_pos, std::span<const double> sim_negs) {
  if (sim_negs.size() == 1) return contrastive_loss(sim_pos, sim_negs.front());
  double m = sim_pos;
  for (double s : sim_negs) m = std::max(m, s);
  double sum = std::exp(sim_pos - m);
  for (double s : sim_negs) sum += std::exp(s - m);
  return std::max(0.0, m + std::log(sum) - sim_pos);
}

double tag_set_similarity(const scene::TagSet& a, const scene::TagSet& b, const retrieval::Embedder& embedder) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::EmptyTagSet, "tag set similarity needs non-empty sets");
  auto mean = [&embedder](const scene::TagSet& tags) {
    retrieval::EmbeddingVector acc{std::vector<double>(embedder.dimension(), 0.0)};
    const auto members = scene::member_texts(tags);
    for (const auto& text : members) {
      const auto e = embedder.embed(text);
      for (std::size_t j = 0; j < acc.values.size(); ++j) acc.values[j] += e.values[j];
    }
    for (double& v : acc.values) v /= static_cast<double>(members.size());
    return acc;
  };
  return retrieval::cosine_sim(mean(a), mean(b));
}

double embedding_set_similarity(const ToyModel& model, std::span<const TokenId> a, std::span<const TokenId> b) {
  return cosine_with_grad(mean_embedding(model, a), mean_embedding(model, b)).value;
}

double model_contrastive_loss(const ToyModel& model, const TrainingExample& example, const LossOptions& options,
                              std::span<double> grad, double grad_scale) {
  if (example.positive_tags.empty() && example.negative_tags.empty()) return 0.0;
  if (example.positive_tags.empty() || example.negative_tags.empty() || example.tag_target.empty()) {
    throw Error(ErrorKind::EmptyTagSet, "contrastive term needs anchor, positive and negative tags");
  }

  std::vector<std::span<const TokenId>> negatives{example.negative_tags};
  if (options.multi_negative) {
    for (const auto& extra : example.extra_negatives) {
      if (extra.empty()) throw Error(ErrorKind::EmptyTagSet, "empty extra negative set");
      negatives.emplace_back(extra);
    }
  }

  const auto anchor = mean_embedding(model, example.tag_target);
  const auto pos = cosine_with_grad(anchor, mean_embedding(model, example.positive_tags));
  std::vector<CosineParts> neg;
  std::vector<double> neg_sims;
  for (auto tokens : negatives) {
    neg.push_back(cosine_with_grad(anchor, mean_embedding(model, tokens)));
    neg_sims.push_back(neg.back().value);
  }
  const double loss = contrastive_loss(pos.value, neg_sims);

  if (!grad.empty()) {
    // Softmax weights over (pos, neg...): dL/dpos = w_pos - 1, dL/dneg_j = w_j.
    double m = pos.value;
    for (double s : neg_sims) m = std::max(m, s);
    double z = std::exp(pos.value - m);
    for (double s : neg_sims) z += std::exp(s - m);
    const double d_pos = std::exp(pos.value - m) / z - 1.0;

    std::vector<double> d_anchor(anchor.size(), 0.0);
    std::vector<double> d_pos_mean(anchor.size());
    for (std::size_t j = 0; j < anchor.size(); ++j) {
      d_anchor[j] += d_pos * pos.d_a[j];
      d_pos_mean[j] = d_pos * pos.d_b[j];
    }
    scatter_mean_grad(model, example.positive_tags, d_pos_mean, grad_scale, grad);
    for (std::size_t n = 0; n < neg.size(); ++n) {
      const double d_neg = std::exp(neg_sims[n] - m) / z;
      std::vector<double> d_neg_mean(anchor.size());
      for (std::size_t j = 0; j < anchor.size(); ++j) {
        d_anchor[j] += d_neg * neg[n].d_a[j];
        d_neg_mean[j] = d_neg * neg[n].d_b[j];
      }
      scatter_mean_grad(model, negatives[n], d_neg_mean, grad_scale, grad);
    }
    scatter_mean_grad(model, example.tag_target, d_anchor, grad_scale, grad);
  }
  return loss;
}

LossReport total_loss(double gen, double contrast, double tag, const LossWeights& weights) {
  LossReport report{gen, contrast, tag, 0.0};
  report.total = weights.gen * gen + weights.contrast * contrast + weights.tag * tag;
  return report;
}

LossReport evaluate(const ToyModel& model, std::span<const TrainingExample> batch, const LossWeights& weights,
                    const LossOptions& options, std::vector<double>* grad) {
  if (batch.empty()) throw Error(ErrorKind::InvalidArgument, "empty training batch");
  if (grad) grad->assign(model.num_parameters(), 0.0);
  std::span<double> g = grad ? std::span<double>(*grad) : std::span<double>();

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double gen = 0.0, contrast = 0.0, tag = 0.0;
  for (const auto& example : batch) {
    validate(example, model.vocab_size());
    gen += sequence_nll(model, example.prompt_tokens, example.target_tokens, options.average_over_steps,
                        weights.gen != 0.0 ? g : std::span<double>(), weights.gen * inv_n);
    tag += sequence_nll(model, example.feature_tokens, example.tag_target, options.average_over_steps,
                        weights.tag != 0.0 ? g : std::span<double>(), weights.tag * inv_n);
    contrast += model_contrastive_loss(model, example, options, weights.contrast != 0.0 ? g : std::span<double>(),
                                       weights.contrast * inv_n);
  }
  return total_loss(gen * inv_n, contrast * inv_n, tag * inv_n, weights);
}

// ---------------------------------------------------------------------------
// Vocabulary

TokenId Vocabulary::intern(std::string_view text) {
  auto [it, inserted] = ids_.try_emplace(std::string(text), static_cast<TokenId>(words_.size()));
  if (inserted) words_.emplace_back(text);
  return it->second;
}

std::vector<TokenId> Vocabulary::tag_tokens(const scene::TagSet& tags) {
  std::vector<TokenId> out;
  for (const auto& member : scene::member_texts(tags)) out.push_back(intern(member));
  return out;
}

std::vector<TokenId> Vocabulary::text_tokens(std::string_view text) {
  std::vector<TokenId> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t start = i;
    while (i < text.size() && text[i] != ' ') ++i;
    if (i > start) out.push_back(intern(text.substr(start, i - start)));
  }
  return out;
}

}  // namespace vrap::losses
