#include "vrap/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "vrap/error.hpp"
#include "vrap/hash.hpp"

namespace vrap::retrieval {

HashEmbedder::HashEmbedder(std::size_t dimension, std::uint64_t seed) : dimension_(dimension), seed_(seed) {
  if (dimension == 0) throw Error(ErrorKind::InvalidArgument, "embedding dimension must be positive");
}

EmbeddingVector HashEmbedder::embed(std::string_view text) const {
  if (text.empty()) throw Error(ErrorKind::EmptyText, "cannot embed empty text");

  std::string framed;
  framed.reserve(text.size() + 2);
  framed += '\x02';
  framed += text;
  framed += '\x03';

  const std::uint64_t seed_key = mix64(seed_ ^ 0x5eedULL);
  EmbeddingVector out{std::vector<double>(dimension_, 0.0)};
  for (std::size_t i = 0; i + 3 <= framed.size(); ++i) {
    const std::uint64_t h = mix64(fnv1a(std::string_view(framed).substr(i, 3)) ^ seed_key);
    out.values[h % dimension_] += 1.0;
  }
  const double norm = l2_norm(out.values);
  for (double& v : out.values) v /= norm;
  return out;
}

double dot(std::span<const double> u, std::span<const double> v) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
  return acc;
}

double l2_norm(std::span<const double> u) noexcept { return std::sqrt(dot(u, u)); }

double cosine_from_parts(double dot_uv, double norm_u, double norm_v) noexcept {
  return std::clamp(dot_uv / (norm_u * norm_v), -1.0, 1.0);
}

double cosine_sim(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dimension() != v.dimension()) {
    throw Error(ErrorKind::DimensionMismatch,
                std::to_string(u.dimension()) + " vs " + std::to_string(v.dimension()));
  }
  const double nu = l2_norm(u.values);
  const double nv = l2_norm(v.values);
  if (nu == 0.0 || nv == 0.0) throw Error(ErrorKind::ZeroVector, "cosine similarity of a zero vector");
  return cosine_from_parts(dot(u.values, v.values), nu, nv);
}

}  // namespace vrap::retrieval
