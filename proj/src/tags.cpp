#include "vrap/tags.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "vrap/error.hpp"

namespace vrap::scene {

namespace {

template <typename T>
void sort_unique(std::vector<T>& items) {
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
}

/// Suffixes repeated labels "#1", "#2", ... in order of appearance.
std::vector<std::string> disambiguate(const std::vector<std::string>& labels) {
  std::map<std::string_view, std::size_t> counts;
  for (const auto& label : labels) ++counts[label];
  std::map<std::string_view, std::size_t> seen;
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (const auto& label : labels) {
    if (counts[label] > 1) {
      out.push_back(label + "#" + std::to_string(++seen[label]));
    } else {
      out.push_back(label);
    }
  }
  return out;
}

std::vector<std::string> split_top_level(std::string_view text, std::string_view separator) {
  std::vector<std::string> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth == 0 && text.compare(i, separator.size(), separator) == 0) {
      parts.emplace_back(text.substr(start, i - start));
      i += separator.size() - 1;
      start = i + 1;
    }
  }
  parts.emplace_back(text.substr(start));
  return parts;
}

}  // namespace

TagSet build_tag_set(const SceneGraph& graph) {
  std::vector<std::string> raw;
  raw.reserve(graph.objects.size());
  for (const auto& object : graph.objects) raw.push_back(object.label);
  const auto labels = disambiguate(raw);

  TagSet tags;
  tags.object_tags = labels;
  for (std::size_t i = 0; i < graph.objects.size(); ++i) {
    for (const auto& attr : graph.objects[i].attributes) tags.attribute_tags.push_back({labels[i], attr});
  }
  for (const auto& edge : graph.relations) {
    tags.relation_tags.push_back({labels.at(edge.subject_idx), edge.predicate, labels.at(edge.object_idx)});
  }
  sort_unique(tags.object_tags);
  sort_unique(tags.attribute_tags);
  sort_unique(tags.relation_tags);
  return tags;
}

TagSet canonicalize(const TagSet& tags) {
  TagSet out;
  out.object_tags = disambiguate(tags.object_tags);

  std::map<std::string_view, std::string> renamed;
  for (std::size_t i = 0; i < tags.object_tags.size(); ++i) {
    if (out.object_tags[i] != tags.object_tags[i]) renamed.try_emplace(tags.object_tags[i], out.object_tags[i]);
  }
  auto resolve = [&](const std::string& label) {
    auto it = renamed.find(label);
    return it == renamed.end() ? label : it->second;
  };
  for (const auto& a : tags.attribute_tags) out.attribute_tags.push_back({resolve(a.object), a.attribute});
  for (const auto& r : tags.relation_tags) {
    out.relation_tags.push_back({resolve(r.subject), r.predicate, resolve(r.object)});
  }
  sort_unique(out.object_tags);
  sort_unique(out.attribute_tags);
  sort_unique(out.relation_tags);
  return out;
}

bool is_canonical(const TagSet& tags) {
  auto strictly_sorted = [](const auto& v) {
    return std::adjacent_find(v.begin(), v.end(), [](const auto& a, const auto& b) { return !(a < b); }) == v.end();
  };
  return strictly_sorted(tags.object_tags) && strictly_sorted(tags.attribute_tags) &&
         strictly_sorted(tags.relation_tags);
}

bool is_referentially_closed(const TagSet& tags) {
  std::set<std::string_view> labels(tags.object_tags.begin(), tags.object_tags.end());
  for (const auto& a : tags.attribute_tags) {
    if (!labels.contains(a.object)) return false;
  }
  for (const auto& r : tags.relation_tags) {
    if (!labels.contains(r.subject) || !labels.contains(r.object)) return false;
  }
  return true;
}

std::vector<std::string> serialize_object_items(const TagSet& tags) {
  std::map<std::string_view, std::vector<std::string_view>> attrs;
  for (const auto& a : tags.attribute_tags) attrs[a.object].push_back(a.attribute);
  if (!is_referentially_closed(tags)) {
    throw Error(ErrorKind::InvalidArgument, "tag set references a label missing from its object tags");
  }

  std::vector<std::string> items;
  items.reserve(tags.object_tags.size());
  for (const auto& label : tags.object_tags) {
    std::string item = label;
    if (auto it = attrs.find(label); it != attrs.end()) {
      item += '(';
      for (std::size_t i = 0; i < it->second.size(); ++i) {
        if (i) item += ", ";
        item += it->second[i];
      }
      item += ')';
    }
    items.push_back(std::move(item));
  }
  return items;
}

std::string serialize_relation(const RelationTag& relation) {
  return "(" + relation.subject + ", " + relation.predicate + ", " + relation.object + ")";
}

std::string serialize_tags(const TagSet& tags) {
  std::string out;
  auto append = [&out](const std::string& item) {
    if (!out.empty()) out += "; ";
    out += item;
  };
  for (const auto& item : serialize_object_items(tags)) append(item);
  for (const auto& relation : tags.relation_tags) append(serialize_relation(relation));
  return out;
}

TagSet deserialize_tags(std::string_view text) {
  TagSet tags;
  if (text.empty()) return tags;

  std::size_t column = 1;
  auto fail = [&column](const std::string& message) -> void {
    throw Error(ErrorKind::MalformedDocument, message, 1, column);
  };
  auto checked = [&](std::string_view raw) {
    std::string label;
    try {
      label = normalize_label(raw);
    } catch (const Error& e) {
      fail(e.message());
    }
    if (label != raw) fail("unexpected whitespace around '" + label + "'");
    return label;
  };
  auto checked_label = [&](std::string_view raw) {
    // Object labels may carry a "#n" suffix, which normalize_label rejects.
    std::string_view base = base_label(raw);
    return checked(base) + std::string(raw.substr(base.size()));
  };

  for (const auto& item : split_top_level(text, "; ")) {
    std::string_view view = item;
    if (view.empty()) fail("empty item");
    if (view.front() == '(') {
      if (view.back() != ')') fail("unterminated relation");
      auto parts = split_top_level(view.substr(1, view.size() - 2), ", ");
      if (parts.size() != 3) fail("relation must have exactly three parts");
      tags.relation_tags.push_back({checked_label(parts[0]), checked(parts[1]), checked_label(parts[2])});
    } else {
      auto open = view.find('(');
      std::string label = checked_label(view.substr(0, open));
      if (open != std::string_view::npos) {
        if (view.back() != ')') fail("unterminated attribute list");
        for (const auto& attr : split_top_level(view.substr(open + 1, view.size() - open - 2), ", ")) {
          tags.attribute_tags.push_back({label, checked(attr)});
        }
      }
      tags.object_tags.push_back(std::move(label));
    }
    column += item.size() + 2;
  }
  TagSet canonical = canonicalize(tags);
  if (!is_referentially_closed(canonical)) {
    throw Error(ErrorKind::MalformedDocument, "relation names an object that is not listed", 1, 1);
  }
  return canonical;
}

std::string_view base_label(std::string_view label) noexcept {
  auto hash = label.rfind('#');
  if (hash == std::string_view::npos || hash + 1 == label.size()) return label;
  for (std::size_t i = hash + 1; i < label.size(); ++i) {
    if (label[i] < '0' || label[i] > '9') return label;
  }
  return label.substr(0, hash);
}

std::vector<std::string> member_texts(const TagSet& tags) {
  std::vector<std::string> out;
  out.reserve(tags.size());
  for (const auto& label : tags.object_tags) out.emplace_back(base_label(label));
  for (const auto& a : tags.attribute_tags) out.push_back(std::string(base_label(a.object)) + " " + a.attribute);
  for (const auto& r : tags.relation_tags) {
    out.push_back(std::string(base_label(r.subject)) + " " + r.predicate + " " + std::string(base_label(r.object)));
  }
  return out;
}

CompletenessReport validate_completeness(const TagSet& tags, const SceneGraph& graph) {
  const TagSet expected = build_tag_set(graph);
  CompletenessReport report;
  const std::set<std::string> objects(tags.object_tags.begin(), tags.object_tags.end());
  const std::set<AttributeTag> attributes(tags.attribute_tags.begin(), tags.attribute_tags.end());
  const std::set<RelationTag> relations(tags.relation_tags.begin(), tags.relation_tags.end());
  for (const auto& o : expected.object_tags) {
    if (!objects.contains(o)) report.missing_objects.push_back(o);
  }
  for (const auto& a : expected.attribute_tags) {
    if (!attributes.contains(a)) report.missing_attributes.push_back(a);
  }
  for (const auto& r : expected.relation_tags) {
    if (!relations.contains(r)) report.missing_relations.push_back(r);
  }
  return report;
}

}  // namespace vrap::scene
