#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vrap::retrieval {

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dimension() const noexcept { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

/// Text -> vector map. Implementations must be deterministic and safe to
/// call concurrently.
class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::string id() const = 0;
  virtual std::uint64_t seed() const = 0;
  virtual std::size_t dimension() const = 0;

  /// Throws EmptyText for an empty input.
  virtual EmbeddingVector embed(std::string_view text) const = 0;
};

/// Signless feature hashing of byte 3-grams into `dimension` buckets,
/// L2-normalized. The text is framed with STX/ETX bytes so that one- and
/// two-byte strings still produce 3-grams.
class HashEmbedder final : public Embedder {
 public:
  static constexpr std::string_view kId = "hash3";

  explicit HashEmbedder(std::size_t dimension = 64, std::uint64_t seed = 0);

  std::string id() const override { return std::string(kId); }
  std::uint64_t seed() const override { return seed_; }
  std::size_t dimension() const override { return dimension_; }
  EmbeddingVector embed(std::string_view text) const override;

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

double dot(std::span<const double> u, std::span<const double> v) noexcept;
double l2_norm(std::span<const double> u) noexcept;

/// u.v / (|u| |v|), clamped to [-1, 1]. Throws DimensionMismatch or ZeroVector.
double cosine_sim(const EmbeddingVector& u, const EmbeddingVector& v);

/// Same arithmetic as cosine_sim with the norms supplied by the caller.
double cosine_from_parts(double dot_uv, double norm_u, double norm_v) noexcept;

}  // namespace vrap::retrieval
