#include "vrap/tag_cache.hpp"

#include <exception>
#include <fstream>
#include <sstream>
#include <thread>
#include <vector>

#include "json.hpp"
#include "vrap/error.hpp"
#include "vrap/tags.hpp"

namespace vrap::inference {

using nlohmann::json;

namespace {

constexpr std::string_view kFormat = "vrap-tag-cache";
constexpr int kVersion = 1;

// Image id from the first `image` line of a document that failed to parse,
// or empty when there is none.
std::string declared_image_id(std::string_view text) {
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    std::istringstream words(line);
    std::string keyword, id;
    if (words >> keyword >> id && keyword == "image") return id;
  }
  return {};
}

json hits_to_json(const std::vector<retrieval::Enrichment>& hits) {
  json out = json::array();
  for (const auto& h : hits) {
    out.push_back({{"key", h.key}, {"ordinal", h.ordinal}, {"score", h.score}, {"snippet", h.snippet}});
  }
  return out;
}

std::vector<retrieval::Enrichment> hits_from_json(const json& j) {
  std::vector<retrieval::Enrichment> out;
  for (const auto& h : j) {
    out.push_back({h.at("key").get<std::string>(), h.at("snippet").get<std::string>(),
                   h.at("ordinal").get<std::size_t>(), h.at("score").get<double>()});
  }
  return out;
}

}  // namespace

retrieval::EnrichedTagSet enrich_document(const scene::SceneGraph& graph, const retrieval::KnowledgeSource& source,
                                          const retrieval::EnrichOptions& options) {
  return retrieval::enrich(scene::canonicalize(scene::build_tag_set(graph)), source, options);
}

TagCache build_cache(std::span<const std::string> documents, const retrieval::KnowledgeSource& source,
                     const CacheBuildOptions& options) {
  struct Slot {
    std::string image_id;
    retrieval::EnrichedTagSet tags;
    std::exception_ptr error;
  };
  std::vector<Slot> slots(documents.size());

  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < documents.size(); i += stride) {
      try {
        const auto doc = scene::parse_scene_document(documents[i], options.parse);
        slots[i].image_id = doc.image.image_id;
        slots[i].tags = enrich_document(doc.graph, source, options.enrich);
      } catch (const Error& e) {
        std::string where = "document " + std::to_string(i);
        const std::string id = slots[i].image_id.empty() ? declared_image_id(documents[i]) : slots[i].image_id;
        if (!id.empty()) where += " (image " + id + ")";
        slots[i].error = std::make_exception_ptr(e.line() ? Error(e.kind(), where + ": " + e.message(), e.line(), e.column())
                                                          : Error(e.kind(), where + ": " + e.message()));
      } catch (...) {
        slots[i].error = std::current_exception();
      }
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, documents.size()));
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t j = 0; j < jobs; ++j) threads.emplace_back(work, j, jobs);
  }

  TagCache cache;
  cache.store_fingerprint = source.fingerprint();
  cache.created_at = options.created_at;
  cache.k = options.enrich.k;
  cache.score_floor = options.enrich.score_floor;
  for (auto& slot : slots) {
    if (slot.error) std::rethrow_exception(slot.error);
    if (!cache.entries.emplace(slot.image_id, std::move(slot.tags)).second) {
      throw Error(ErrorKind::DuplicateImageId, "image id '" + slot.image_id + "' appears more than once");
    }
  }
  return cache;
}

std::string serialize_entry(std::string_view image_id, const retrieval::EnrichedTagSet& enriched) {
  json objects = json::array();
  for (const auto& [tag, hits] : enriched.object_enrichments) objects.push_back({{"tag", tag}, {"hits", hits_to_json(hits)}});
  json attributes = json::array();
  for (const auto& [attr, hits] : enriched.attribute_enrichments) {
    attributes.push_back({{"object", attr.object}, {"attribute", attr.attribute}, {"hits", hits_to_json(hits)}});
  }
  json line = {{"image_id", image_id},
               {"tags", scene::serialize_tags(enriched.base)},
               {"objects", std::move(objects)},
               {"attributes", std::move(attributes)}};
  return line.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string serialize_cache(const TagCache& cache) {
  json header = {{"format", kFormat},       {"version", kVersion},
                 {"fingerprint", cache.store_fingerprint},
                 {"created_at", cache.created_at},
                 {"k", cache.k},
                 {"score_floor", cache.score_floor},
                 {"count", cache.entries.size()}};
  std::string out = header.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
  for (const auto& [image_id, enriched] : cache.entries) out += serialize_entry(image_id, enriched) + "\n";
  return out;
}

TagCache deserialize_cache(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  TagCache cache;
  try {
    if (!std::getline(in, line)) throw Error(ErrorKind::CorruptSnapshot, "empty cache file");
    ++line_no;
    const auto header = json::parse(line);
    if (header.at("format").get<std::string>() != kFormat) throw Error(ErrorKind::CorruptSnapshot, "not a tag cache");
    if (header.at("version").get<int>() != kVersion) {
      throw Error(ErrorKind::CorruptSnapshot, "unsupported cache version " + header.at("version").dump());
    }
    cache.store_fingerprint = header.at("fingerprint").get<std::string>();
    cache.created_at = header.at("created_at").get<std::int64_t>();
    cache.k = header.at("k").get<std::size_t>();
    cache.score_floor = header.at("score_floor").get<double>();
    const auto count = header.at("count").get<std::size_t>();

    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto record = json::parse(line);
      retrieval::EnrichedTagSet enriched;
      enriched.base = scene::deserialize_tags(record.at("tags").get<std::string>());
      for (const auto& o : record.at("objects")) {
        enriched.object_enrichments.emplace(o.at("tag").get<std::string>(), hits_from_json(o.at("hits")));
      }
      for (const auto& a : record.at("attributes")) {
        enriched.attribute_enrichments.emplace(
            scene::AttributeTag{a.at("object").get<std::string>(), a.at("attribute").get<std::string>()},
            hits_from_json(a.at("hits")));
      }
      retrieval::validate(enriched, cache.k);
      auto id = record.at("image_id").get<std::string>();
      if (!cache.entries.emplace(id, std::move(enriched)).second) {
        throw Error(ErrorKind::DuplicateImageId, "image id '" + id + "' appears more than once");
      }
    }
    if (cache.entries.size() != count) {
      throw Error(ErrorKind::CorruptSnapshot, "header promises " + std::to_string(count) + " images, found " +
                                                  std::to_string(cache.entries.size()));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::CorruptSnapshot, e.what(), line_no, 1);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::CorruptSnapshot || e.kind() == ErrorKind::DuplicateImageId) throw;
    throw Error(ErrorKind::CorruptSnapshot, std::string(to_string(e.kind())) + ": " + e.message(), line_no, 1);
  }
  return cache;
}

void save_cache(const TagCache& cache, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << serialize_cache(cache);
  if (!out) throw Error(ErrorKind::Io, "short write to '" + path.string() + "'");
}

std::optional<std::string> staleness(const TagCache& cache, const retrieval::KnowledgeSource& current) {
  if (cache.store_fingerprint == current.fingerprint()) return std::nullopt;
  return "tag cache was built against knowledge store " + cache.store_fingerprint + " but the current store is " +
         current.fingerprint();
}

LoadedCache load_cache(const std::filesystem::path& path, const retrieval::KnowledgeSource* current) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  LoadedCache loaded{deserialize_cache(ss.str()), std::nullopt};
  if (current) loaded.staleness_warning = staleness(loaded.cache, *current);
  return loaded;
}

}  // namespace vrap::inference
