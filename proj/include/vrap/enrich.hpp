#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "vrap/knowledge_store.hpp"
#include "vrap/tags.hpp"

namespace vrap::retrieval {

struct Enrichment {
  std::string key;      // key of the knowledge entry that matched
  std::string snippet;
  std::size_t ordinal = 0;  // entry position in the store
  double score = 0.0;

  bool operator==(const Enrichment&) const = default;
};

/// A canonical TagSet plus retrieved knowledge for each object tag and each
/// attribute pair. Lists are ordered by (score desc, ordinal asc) and hold
/// at most k entries; every tag of `base` that was queried has a (possibly
/// empty) list.
struct EnrichedTagSet {
  scene::TagSet base;
  std::map<std::string, std::vector<Enrichment>> object_enrichments;
  std::map<scene::AttributeTag, std::vector<Enrichment>> attribute_enrichments;

  bool operator==(const EnrichedTagSet&) const = default;
};

struct EnrichOptions {
  std::size_t k = 3;
  double score_floor = 0.15;
};

/// Query text used for an object tag ("person#2" -> "person") and for an
/// attribute pair ("person tall").
std::string object_query(const std::string& label);
std::string attribute_query(const scene::AttributeTag& tag);

/// Attaches up to k retrieved snippets with score >= score_floor to every
/// object tag and attribute pair of `tags`. Relation triples are not
/// queried. Throws EmptyStore, InvalidArgument (k == 0 or non-canonical tags).
EnrichedTagSet enrich(const scene::TagSet& tags, const KnowledgeSource& source, const EnrichOptions& options = {});

/// Checks the EnrichedTagSet invariants; throws InvalidArgument.
void validate(const EnrichedTagSet& enriched, std::size_t k);

}  // namespace vrap::retrieval
