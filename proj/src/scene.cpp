#include "vrap/scene.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <tuple>

#include "vrap/error.hpp"
#include "vrap/hash.hpp"

namespace vrap::scene {

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

bool is_blank(char c) { return c == ' ' || c == '\t'; }

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_blank(line[i])) ++i;
    if (i >= line.size()) break;
    std::size_t start = i;
    while (i < line.size() && !is_blank(line[i])) ++i;
    tokens.push_back({line.substr(start, i - start), start + 1});
  }
  return tokens;
}

std::string join(const std::vector<Token>& tokens, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (!out.empty()) out += ' ';
    out += tokens[i].text;
  }
  return out;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view text) {
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

class DocumentParser {
 public:
  DocumentParser(std::string_view text, const ParseOptions& options) : text_(text), options_(options) {}

  SceneDocument run() {
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      std::size_t end = text_.find('\n', pos);
      if (end == std::string_view::npos) end = text_.size();
      std::string_view line = text_.substr(pos, end - pos);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      ++line_no_;
      handle_line(line);
      pos = end + 1;
    }
    if (!saw_header_) {
      throw Error(ErrorKind::MalformedDocument, "missing 'SAF 1' header", std::max<std::size_t>(line_no_, 1), 1);
    }
    if (!saw_image_) {
      throw Error(ErrorKind::MalformedDocument, "missing 'image' line", line_no_, 1);
    }
    for (std::size_t r = 0; r < doc_.graph.relations.size(); ++r) {
      const auto& edge = doc_.graph.relations[r];
      std::size_t n = doc_.graph.objects.size();
      if (edge.subject_idx >= n || edge.object_idx >= n) {
        throw Error(ErrorKind::DanglingReference,
                    "relation references object " + std::to_string(std::max(edge.subject_idx, edge.object_idx)) +
                        " but only " + std::to_string(n) + " objects exist",
                    relation_lines_[r], 1);
      }
    }
    return std::move(doc_);
  }

 private:
  [[noreturn]] void fail(ErrorKind kind, const std::string& message, std::size_t column) const {
    throw Error(kind, message, line_no_, column);
  }

  std::string label_from(const std::vector<Token>& tokens, std::size_t begin, std::size_t end,
                         std::string_view what) const {
    std::size_t column = begin < tokens.size() ? tokens[begin].column : (tokens.empty() ? 1 : tokens.back().column);
    if (begin >= end) fail(ErrorKind::EmptyLabel, std::string("empty ") + std::string(what), column);
    try {
      return normalize_label(join(tokens, begin, end));
    } catch (const Error& e) {
      fail(e.kind(), std::string(what) + ": " + e.message(), column);
    }
  }

  void handle_line(std::string_view line) {
    auto tokens = tokenize(line);
    if (tokens.empty() || tokens.front().text.front() == '#') return;

    const Token& keyword = tokens.front();
    if (!saw_header_) {
      if (keyword.text != "SAF") fail(ErrorKind::MalformedDocument, "expected 'SAF 1' header", keyword.column);
      if (tokens.size() != 2) fail(ErrorKind::MalformedDocument, "header takes exactly one version", keyword.column);
      if (tokens[1].text != "1") {
        fail(ErrorKind::MalformedDocument, "unsupported SAF version '" + std::string(tokens[1].text) + "'",
             tokens[1].column);
      }
      saw_header_ = true;
      return;
    }

    if (keyword.text == "image") {
      handle_image(tokens);
    } else if (keyword.text == "object") {
      handle_object(tokens);
    } else if (keyword.text == "relation") {
      handle_relation(tokens);
    } else {
      fail(ErrorKind::MalformedDocument, "unknown directive '" + std::string(keyword.text) + "'", keyword.column);
    }
  }

  void handle_image(const std::vector<Token>& tokens) {
    if (saw_image_) fail(ErrorKind::MalformedDocument, "duplicate 'image' line", tokens[0].column);
    if (tokens.size() < 2) fail(ErrorKind::MalformedDocument, "image line needs an id", tokens[0].column);
    saw_image_ = true;
    doc_.image.image_id = std::string(tokens[1].text);
    doc_.graph.image_id = doc_.image.image_id;
    std::size_t i = 2;
    while (i < tokens.size()) {
      if (tokens[i].text == "uri" && i + 1 < tokens.size()) {
        doc_.image.source_uri = std::string(tokens[i + 1].text);
        i += 2;
      } else if (tokens[i].text == "size" && i + 2 < tokens.size()) {
        auto w = parse_int<std::uint32_t>(tokens[i + 1].text);
        auto h = parse_int<std::uint32_t>(tokens[i + 2].text);
        if (!w || !h || *w == 0 || *h == 0) {
          fail(ErrorKind::MalformedDocument, "size needs two positive integers", tokens[i + 1].column);
        }
        doc_.image.width = *w;
        doc_.image.height = *h;
        i += 3;
      } else {
        fail(ErrorKind::MalformedDocument, "unexpected '" + std::string(tokens[i].text) + "' on image line",
             tokens[i].column);
      }
    }
  }

  void handle_object(const std::vector<Token>& tokens) {
    std::vector<std::size_t> attr_at;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      if (tokens[i].text == "attr") attr_at.push_back(i);
    }
    std::size_t label_end = attr_at.empty() ? tokens.size() : attr_at.front();
    if (label_end == 1) {
      fail(ErrorKind::EmptyLabel, "object has no label", label_end < tokens.size() ? tokens[label_end].column : 1);
    }
    ObjectNode node;
    node.label = label_from(tokens, 1, label_end, "object label");
    for (std::size_t a = 0; a < attr_at.size(); ++a) {
      std::size_t begin = attr_at[a] + 1;
      std::size_t end = a + 1 < attr_at.size() ? attr_at[a + 1] : tokens.size();
      if (begin >= end) fail(ErrorKind::EmptyLabel, "empty attribute", tokens[attr_at[a]].column);
      std::string attr = label_from(tokens, begin, end, "attribute");
      if (std::find(node.attributes.begin(), node.attributes.end(), attr) == node.attributes.end()) {
        node.attributes.push_back(std::move(attr));
      }
    }
    doc_.graph.objects.push_back(std::move(node));
  }

  void handle_relation(const std::vector<Token>& tokens) {
    if (tokens.size() < 4) {
      fail(ErrorKind::MalformedDocument, "relation needs <subject_idx> <predicate> <object_idx>", tokens[0].column);
    }
    auto subject = parse_int<std::size_t>(tokens[1].text);
    if (!subject) fail(ErrorKind::MalformedDocument, "subject index is not a non-negative integer", tokens[1].column);
    auto object = parse_int<std::size_t>(tokens.back().text);
    if (!object) {
      fail(ErrorKind::MalformedDocument, "object index is not a non-negative integer", tokens.back().column);
    }
    RelationEdge edge{*subject, label_from(tokens, 2, tokens.size() - 1, "predicate"), *object};
    if (edge.subject_idx == edge.object_idx && !options_.reflexive_predicates.contains(edge.predicate)) {
      fail(ErrorKind::SelfRelation, "object " + std::to_string(edge.subject_idx) + " relates to itself via '" +
                                        edge.predicate + "'",
           tokens[1].column);
    }
    auto& relations = doc_.graph.relations;
    if (std::find(relations.begin(), relations.end(), edge) == relations.end()) {
      relations.push_back(std::move(edge));
      relation_lines_.push_back(line_no_);
    }
  }

  std::string_view text_;
  const ParseOptions& options_;
  SceneDocument doc_;
  std::vector<std::size_t> relation_lines_;
  std::size_t line_no_ = 0;
  bool saw_header_ = false;
  bool saw_image_ = false;
};

}  // namespace

std::string normalize_label(std::string_view raw) {
  std::size_t begin = 0;
  std::size_t end = raw.size();
  auto space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  while (begin < end && space(raw[begin])) ++begin;
  while (end > begin && space(raw[end - 1])) --end;
  std::string_view label = raw.substr(begin, end - begin);
  if (label.empty()) throw Error(ErrorKind::EmptyLabel, "label is empty");
  for (char c : label) {
    if (kReservedLabelChars.find(c) != std::string_view::npos) {
      throw Error(ErrorKind::InvalidLabel, "label '" + std::string(label) + "' contains reserved character '" +
                                               std::string(1, c) + "'");
    }
    if (static_cast<unsigned char>(c) < 0x20 && c != ' ') {
      throw Error(ErrorKind::InvalidLabel, "label contains a control character");
    }
  }
  return std::string(label);
}

SceneDocument parse_scene_document(std::string_view text, const ParseOptions& options) {
  return DocumentParser(text, options).run();
}

SceneGraph parse_scene_graph(std::string_view text, const ParseOptions& options) {
  return parse_scene_document(text, options).graph;
}

std::string write_scene_document(const SceneDocument& doc) {
  std::string out = "SAF 1\nimage " + doc.image.image_id;
  if (doc.image.source_uri) out += " uri " + *doc.image.source_uri;
  if (doc.image.width && doc.image.height) {
    out += " size " + std::to_string(*doc.image.width) + " " + std::to_string(*doc.image.height);
  }
  out += '\n';
  for (const auto& object : doc.graph.objects) {
    out += "object " + object.label;
    for (const auto& attr : object.attributes) out += " attr " + attr;
    out += '\n';
  }
  for (const auto& edge : doc.graph.relations) {
    out += "relation " + std::to_string(edge.subject_idx) + " " + edge.predicate + " " +
           std::to_string(edge.object_idx) + "\n";
  }
  return out;
}

void validate(const SceneGraph& graph, const ParseOptions& options) {
  for (const auto& object : graph.objects) {
    if (normalize_label(object.label) != object.label) {
      throw Error(ErrorKind::InvalidLabel, "label '" + object.label + "' has surrounding whitespace");
    }
    std::set<std::string_view> seen;
    for (const auto& attr : object.attributes) {
      if (normalize_label(attr) != attr) throw Error(ErrorKind::InvalidLabel, "attribute has surrounding whitespace");
      if (!seen.insert(attr).second) {
        throw Error(ErrorKind::InvalidArgument, "duplicate attribute '" + attr + "' on '" + object.label + "'");
      }
    }
  }
  std::set<std::tuple<std::size_t, std::string_view, std::size_t>> triples;
  for (const auto& edge : graph.relations) {
    if (edge.subject_idx >= graph.objects.size() || edge.object_idx >= graph.objects.size()) {
      throw Error(ErrorKind::DanglingReference, "relation endpoint out of range");
    }
    if (normalize_label(edge.predicate) != edge.predicate) {
      throw Error(ErrorKind::InvalidLabel, "predicate has surrounding whitespace");
    }
    if (edge.subject_idx == edge.object_idx && !options.reflexive_predicates.contains(edge.predicate)) {
      throw Error(ErrorKind::SelfRelation, "reflexive relation '" + edge.predicate + "'");
    }
    if (!triples.emplace(edge.subject_idx, edge.predicate, edge.object_idx).second) {
      throw Error(ErrorKind::InvalidArgument, "duplicate relation '" + edge.predicate + "'");
    }
  }
}

void validate(const FeatureMap& features) {
  if (features.height == 0 || features.width == 0 || features.depth == 0) {
    throw Error(ErrorKind::InvalidArgument, "feature map dimensions must be positive");
  }
  if (features.grid.size() != features.height * features.width * features.depth) {
    throw Error(ErrorKind::DimensionMismatch, "feature grid length does not equal H*W*D");
  }
  for (double v : features.grid) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "feature grid holds a non-finite value");
  }
}

FeatureMap encode_features(const SceneGraph& graph, std::size_t height, std::size_t width, std::size_t depth,
                           std::uint64_t seed) {
  FeatureMap out{graph.image_id, height, width, depth, {}};
  if (height == 0 || width == 0 || depth == 0) {
    throw Error(ErrorKind::InvalidArgument, "feature map dimensions must be positive");
  }
  out.grid.assign(height * width * depth, 0.0);

  // Each object stamps a label-specific pattern onto a cell chosen by its
  // index; the rest of the grid carries a weak image-id pattern.
  FieldHasher base;
  base.add_u64(seed);
  base.add(graph.image_id);
  const std::uint64_t image_key = base.digest();
  auto unit = [](std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0; };

  for (std::size_t i = 0; i < out.grid.size(); ++i) out.grid[i] = 0.1 * unit(mix64(image_key ^ i));
  const std::size_t cells = height * width;
  for (std::size_t o = 0; o < graph.objects.size(); ++o) {
    FieldHasher h;
    h.add_u64(seed);
    h.add(graph.objects[o].label);
    const std::uint64_t label_key = h.digest();
    const std::size_t cell = o % cells;
    for (std::size_t d = 0; d < depth; ++d) {
      out.grid[cell * depth + d] += unit(mix64(label_key + d));
    }
  }
  return out;
}

std::vector<std::uint32_t> feature_tokens(const FeatureMap& features, std::uint32_t vocab_size) {
  validate(features);
  if (vocab_size == 0) throw Error(ErrorKind::InvalidArgument, "vocab_size must be positive");
  std::vector<std::uint32_t> tokens;
  tokens.reserve(features.height * features.width);
  for (std::size_t cell = 0; cell < features.height * features.width; ++cell) {
    auto begin = features.grid.begin() + static_cast<std::ptrdiff_t>(cell * features.depth);
    auto best = std::max_element(begin, begin + static_cast<std::ptrdiff_t>(features.depth));
    tokens.push_back(static_cast<std::uint32_t>(std::distance(begin, best)) % vocab_size);
  }
  return tokens;
}

}  // namespace vrap::scene
