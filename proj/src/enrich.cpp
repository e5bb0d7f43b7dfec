#include "vrap/enrich.hpp"

#include <algorithm>
#include <set>

#include "vrap/error.hpp"

namespace vrap::retrieval {

namespace {

std::vector<Enrichment> lookup(const KnowledgeSource& source, const std::string& query, const EnrichOptions& options) {
  std::vector<Enrichment> out;
  for (const auto& hit : source.retrieve(query, options.k)) {
    if (hit.score < options.score_floor) break;
    out.push_back({hit.entry->key, hit.entry->snippet, hit.ordinal, hit.score});
  }
  return out;
}

void check_list(const std::vector<Enrichment>& list, std::size_t k) {
  if (list.size() > k) throw Error(ErrorKind::InvalidArgument, "enrichment list longer than k");
  for (std::size_t i = 1; i < list.size(); ++i) {
    const auto& a = list[i - 1];
    const auto& b = list[i];
    if (a.score < b.score || (a.score == b.score && a.ordinal >= b.ordinal)) {
      throw Error(ErrorKind::InvalidArgument, "enrichment list is not ordered by (score desc, ordinal asc)");
    }
  }
  for (const auto& e : list) {
    if (!(e.score >= -1.0 && e.score <= 1.0)) throw Error(ErrorKind::InvalidArgument, "score outside [-1, 1]");
  }
}

}  // namespace

std::string object_query(const std::string& label) { return std::string(scene::base_label(label)); }

std::string attribute_query(const scene::AttributeTag& tag) {
  return std::string(scene::base_label(tag.object)) + " " + tag.attribute;
}

EnrichedTagSet enrich(const scene::TagSet& tags, const KnowledgeSource& source, const EnrichOptions& options) {
  if (options.k == 0) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
  if (source.size() == 0) throw Error(ErrorKind::EmptyStore, "knowledge store is empty");
  if (!scene::is_canonical(tags)) throw Error(ErrorKind::InvalidArgument, "enrich expects a canonical tag set");

  EnrichedTagSet out;
  out.base = tags;
  for (const auto& label : tags.object_tags) {
    out.object_enrichments.emplace(label, lookup(source, object_query(label), options));
  }
  for (const auto& attr : tags.attribute_tags) {
    out.attribute_enrichments.emplace(attr, lookup(source, attribute_query(attr), options));
  }
  return out;
}

void validate(const EnrichedTagSet& enriched, std::size_t k) {
  const std::set<std::string> objects(enriched.base.object_tags.begin(), enriched.base.object_tags.end());
  const std::set<scene::AttributeTag> attributes(enriched.base.attribute_tags.begin(),
                                                 enriched.base.attribute_tags.end());
  for (const auto& [label, list] : enriched.object_enrichments) {
    if (!objects.contains(label)) throw Error(ErrorKind::InvalidArgument, "enrichment for unknown tag '" + label + "'");
    check_list(list, k);
  }
  for (const auto& [attr, list] : enriched.attribute_enrichments) {
    if (!attributes.contains(attr)) {
      throw Error(ErrorKind::InvalidArgument, "enrichment for unknown attribute '" + attr.attribute + "'");
    }
    check_list(list, k);
  }
}

}  // namespace vrap::retrieval
