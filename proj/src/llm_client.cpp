#include "vrap/llm_client.hpp"

#include <optional>
#include <vector>

#include "vrap/prompt.hpp"

namespace vrap::inference {

namespace {

/// Splits the tag section on "; " outside parentheses and brackets.
/// Parentheses inside a bracketed snippet are not counted.
std::vector<std::string_view> tag_items(std::string_view section) {
  std::vector<std::string_view> items;
  int parens = 0;
  int brackets = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < section.size(); ++i) {
    switch (section[i]) {
      case '(': parens += brackets == 0; break;
      case ')': parens -= brackets == 0; break;
      case '[': ++brackets; break;
      case ']': --brackets; break;
      default: break;
    }
    if (parens == 0 && brackets == 0 && section.compare(i, 2, "; ") == 0) {
      items.push_back(section.substr(start, i - start));
      start = i + 2;
      ++i;
    }
  }
  if (start < section.size()) items.push_back(section.substr(start));
  return items;
}

}  // namespace

std::string stub_answer(std::string_view prompt) {
  const auto sep = prompt.find(prompting::kTagSeparator);
  if (sep == std::string_view::npos) return "No tags available.";

  std::optional<std::string> object;
  std::optional<std::string> relation;
  for (auto item : tag_items(prompt.substr(sep + prompting::kTagSeparator.size()))) {
    if (item.empty()) continue;
    if (item.front() == '(') {
      if (relation) continue;
      auto close = item.find(')');
      if (close == std::string_view::npos) continue;
      std::string words;
      auto inner = item.substr(1, close - 1);
      std::size_t pos = 0;
      while (true) {
        auto comma = inner.find(", ", pos);
        if (!words.empty()) words += ' ';
        words += inner.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        if (comma == std::string_view::npos) break;
        pos = comma + 2;
      }
      relation = std::move(words);
    } else if (!object) {
      auto end = item.find_first_of("([");
      auto label = item.substr(0, end);
      while (!label.empty() && label.back() == ' ') label.remove_suffix(1);
      object = std::string(label);
    }
    if (object && relation) break;
  }
  if (!object) return "No tags available.";
  if (!relation) return "The image shows " + *object + ".";
  return "The image shows " + *object + "; " + *relation + ".";
}

std::string StubClient::complete(std::string_view prompt, const GenerationParams&) { return stub_answer(prompt); }

}  // namespace vrap::inference
