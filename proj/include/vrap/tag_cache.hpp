#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "vrap/enrich.hpp"
#include "vrap/scene.hpp"

namespace vrap::inference {

/// Precomputed enriched tags keyed by image id. Immutable once built.
struct TagCache {
  std::map<std::string, retrieval::EnrichedTagSet, std::less<>> entries;
  std::string store_fingerprint;
  std::int64_t created_at = 0;  // unix seconds
  std::size_t k = 0;
  double score_floor = 0.0;

  bool operator==(const TagCache&) const = default;
};

struct CacheBuildOptions {
  retrieval::EnrichOptions enrich;
  scene::ParseOptions parse;
  std::size_t jobs = 1;
  std::int64_t created_at = 0;
};

/// parse -> build_tag_set -> enrich for every document. Work is split over
/// `jobs` threads; the result does not depend on the job count. Parse
/// errors are rethrown with the document index and image id prepended.
/// Throws DuplicateImageId.
TagCache build_cache(std::span<const std::string> documents, const retrieval::KnowledgeSource& source,
                     const CacheBuildOptions& options = {});

/// Pipeline for one image, shared by build_cache and infer_online.
retrieval::EnrichedTagSet enrich_document(const scene::SceneGraph& graph, const retrieval::KnowledgeSource& source,
                                          const retrieval::EnrichOptions& options);

/// JSON-lines snapshot. Line 1 is the header
///   {"count":N,"created_at":T,"fingerprint":"<hex>","format":"vrap-tag-cache",
///    "k":K,"score_floor":F,"version":1}
/// followed by one line per image in image-id order:
///   {"attributes":[{"attribute":..,"hits":[..],"object":..},..],
///    "image_id":..,"objects":[{"hits":[..],"tag":..},..],"tags":"<tag line>"}
/// with hits as {"key","ordinal","score","snippet"}. Keys are sorted and
/// doubles are written in shortest round-trip form, so save(load(f)) == f.
std::string serialize_cache(const TagCache& cache);
/// One image line of the snapshot, without the trailing newline.
std::string serialize_entry(std::string_view image_id, const retrieval::EnrichedTagSet& enriched);
TagCache deserialize_cache(std::string_view text);

void save_cache(const TagCache& cache, const std::filesystem::path& path);

struct LoadedCache {
  TagCache cache;
  /// Set when the cache was built against a different knowledge store.
  std::optional<std::string> staleness_warning;

  bool stale() const noexcept { return staleness_warning.has_value(); }
};

/// Loads a snapshot; when `current` is given its fingerprint is compared
/// with the one recorded at build time.
LoadedCache load_cache(const std::filesystem::path& path, const retrieval::KnowledgeSource* current = nullptr);

std::optional<std::string> staleness(const TagCache& cache, const retrieval::KnowledgeSource& current);

}  // namespace vrap::inference
