#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vrap/enrich.hpp"

namespace vrap::prompting {

inline constexpr std::string_view kTagSeparator = " Tags: ";
inline constexpr std::string_view kItemSeparator = "; ";

struct Query {
  std::string text;
  std::optional<std::string> query_id;
};

/// Throws InvalidQuery if the text is empty or holds control characters.
void validate(const Query& query);

struct Prompt {
  std::string text;
  std::size_t tag_count_included = 0;
  bool truncated = false;

  bool operator==(const Prompt&) const = default;
};

/// Prompt items in inclusion order. Each object contributes one item,
/// `label(attr, ...)` followed by ` [key: snippet]` for its own enrichments
/// and then for those of its attribute pairs, each knowledge entry at most
/// once per item; each relation contributes
/// `(subj, pred, obj)`. Square brackets inside snippets become parentheses
/// and control characters become spaces.
std::vector<std::string> prompt_items(const retrieval::EnrichedTagSet& tags);

/// query + " Tags: " + items joined by "; ", packing whole items greedily
/// and stopping at the first one that would push the byte length past
/// `budget`. No separator is emitted when no item fits or there are none.
/// Throws BudgetTooSmall when budget < |query| + 7, InvalidQuery.
Prompt build_prompt(const Query& query, const retrieval::EnrichedTagSet& tags, std::size_t budget);

}  // namespace vrap::prompting
