#include "vrap/prompt.hpp"

#include <map>
#include <set>

#include "vrap/error.hpp"

namespace vrap::prompting {

namespace {

std::string clean_snippet(std::string_view snippet) {
  std::string out(snippet);
  for (char& c : out) {
    if (c == '[') c = '(';
    else if (c == ']') c = ')';
    else if (static_cast<unsigned char>(c) < 0x20 || c == 0x7f) c = ' ';
  }
  return out;
}

// `seen` holds entry ordinals already inlined into this item.
void append_enrichments(std::string& item, const std::vector<retrieval::Enrichment>& list,
                        std::set<std::size_t>& seen) {
  for (const auto& e : list) {
    if (!seen.insert(e.ordinal).second) continue;
    item += " [";
    item += clean_snippet(e.key);
    item += ": ";
    item += clean_snippet(e.snippet);
    item += ']';
  }
}

}  // namespace

void validate(const Query& query) {
  if (query.text.empty()) throw Error(ErrorKind::InvalidQuery, "query text is empty");
  for (char c : query.text) {
    auto u = static_cast<unsigned char>(c);
    if (u < 0x20 || u == 0x7f) throw Error(ErrorKind::InvalidQuery, "query text contains a control character");
  }
}

std::vector<std::string> prompt_items(const retrieval::EnrichedTagSet& tags) {
  std::map<std::string_view, std::vector<const scene::AttributeTag*>> attrs_of;
  for (const auto& a : tags.base.attribute_tags) attrs_of[a.object].push_back(&a);

  auto items = scene::serialize_object_items(tags.base);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& label = tags.base.object_tags[i];
    std::set<std::size_t> seen;
    if (auto it = tags.object_enrichments.find(label); it != tags.object_enrichments.end()) {
      append_enrichments(items[i], it->second, seen);
    }
    if (auto it = attrs_of.find(label); it != attrs_of.end()) {
      for (const auto* attr : it->second) {
        if (auto e = tags.attribute_enrichments.find(*attr); e != tags.attribute_enrichments.end()) {
          append_enrichments(items[i], e->second, seen);
        }
      }
    }
  }
  for (const auto& relation : tags.base.relation_tags) items.push_back(scene::serialize_relation(relation));
  return items;
}

Prompt build_prompt(const Query& query, const retrieval::EnrichedTagSet& tags, std::size_t budget) {
  validate(query);
  if (budget < query.text.size() + kTagSeparator.size()) {
    throw Error(ErrorKind::BudgetTooSmall, "budget " + std::to_string(budget) + " cannot hold the query plus separator (" +
                                               std::to_string(query.text.size() + kTagSeparator.size()) + " bytes)");
  }

  const auto items = prompt_items(tags);
  Prompt prompt{query.text, 0, false};
  for (const auto& item : items) {
    const std::string_view joiner = prompt.tag_count_included == 0 ? kTagSeparator : kItemSeparator;
    if (prompt.text.size() + joiner.size() + item.size() > budget) {
      prompt.truncated = true;
      break;
    }
    prompt.text += joiner;
    prompt.text += item;
    ++prompt.tag_count_included;
  }
  return prompt;
}

}  // namespace vrap::prompting
