#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "vrap/scene.hpp"

namespace vrap::scene {

struct AttributeTag {
  std::string object;
  std::string attribute;

  auto operator<=>(const AttributeTag&) const = default;
};

struct RelationTag {
  std::string subject;
  std::string predicate;
  std::string object;

  auto operator<=>(const RelationTag&) const = default;
};

/// Structured tag set: object labels, (object, attribute) pairs and
/// (subject, predicate, object) triples. Instances produced by
/// build_tag_set / canonicalize / deserialize_tags are canonical: every
/// collection is sorted and duplicate-free and object labels are unique,
/// so member-wise equality is set equality.
struct TagSet {
  std::vector<std::string> object_tags;
  std::vector<AttributeTag> attribute_tags;
  std::vector<RelationTag> relation_tags;

  std::size_t n_objects() const noexcept { return object_tags.size(); }
  std::size_t n_relations() const noexcept { return relation_tags.size(); }
  std::size_t size() const noexcept { return object_tags.size() + attribute_tags.size() + relation_tags.size(); }
  bool empty() const noexcept { return size() == 0; }

  bool operator==(const TagSet&) const = default;
};

/// Tag set of a scene graph. Objects sharing a label are told apart with
/// "#1", "#2", ... in order of appearance; attribute and relation tags use
/// the disambiguated labels.
TagSet build_tag_set(const SceneGraph& graph);

/// Deduplicates and sorts. Repeated object labels are suffixed "#n" in
/// first-appearance order; attribute/relation tags that name a label which
/// got suffixed are attached to its first occurrence. Idempotent.
TagSet canonicalize(const TagSet& tags);

bool is_canonical(const TagSet& tags);

/// Every attribute and relation tag names a label in object_tags.
bool is_referentially_closed(const TagSet& tags);

/// `label(attr1, attr2)` per object, `(subj, pred, obj)` per relation,
/// joined by "; ". Objects come first in canonical order, then relations.
/// Empty string for an empty set.
std::string serialize_tags(const TagSet& tags);

/// Object items of serialize_tags (attributes folded in), one per object.
std::vector<std::string> serialize_object_items(const TagSet& tags);
std::string serialize_relation(const RelationTag& relation);

/// Inverse of serialize_tags; throws MalformedDocument on bad input.
TagSet deserialize_tags(std::string_view text);

/// Label without its "#n" disambiguation suffix.
std::string_view base_label(std::string_view label) noexcept;

/// Natural-language text of each member: "dog", "dog brown",
/// "dog chases ball". Disambiguation suffixes are dropped.
std::vector<std::string> member_texts(const TagSet& tags);

struct CompletenessReport {
  std::vector<std::string> missing_objects;
  std::vector<AttributeTag> missing_attributes;
  std::vector<RelationTag> missing_relations;

  std::size_t missing_object_count() const noexcept { return missing_objects.size(); }
  std::size_t missing_attribute_count() const noexcept { return missing_attributes.size(); }
  std::size_t missing_relation_count() const noexcept { return missing_relations.size(); }
  bool complete() const noexcept {
    return missing_objects.empty() && missing_attributes.empty() && missing_relations.empty();
  }
};

/// Members of build_tag_set(graph) that `tags` lacks.
CompletenessReport validate_completeness(const TagSet& tags, const SceneGraph& graph);

}  // namespace vrap::scene
