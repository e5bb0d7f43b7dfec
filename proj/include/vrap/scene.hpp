#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vrap::scene {

struct ImageRecord {
  std::string image_id;
  std::optional<std::string> source_uri;
  std::optional<std::uint32_t> width;
  std::optional<std::uint32_t> height;

  bool operator==(const ImageRecord&) const = default;
};

struct ObjectNode {
  std::string label;
  std::vector<std::string> attributes;

  bool operator==(const ObjectNode&) const = default;
};

struct RelationEdge {
  std::size_t subject_idx = 0;
  std::string predicate;
  std::size_t object_idx = 0;

  bool operator==(const RelationEdge&) const = default;
};

struct SceneGraph {
  std::string image_id;
  std::vector<ObjectNode> objects;
  std::vector<RelationEdge> relations;

  bool operator==(const SceneGraph&) const = default;
};

struct SceneDocument {
  ImageRecord image;
  SceneGraph graph;
};

struct ParseOptions {
  /// Predicates allowed to relate an object to itself.
  std::set<std::string, std::less<>> reflexive_predicates;
};

/// Parses a Scene Annotation Format document:
///
///   SAF 1
///   image <image_id> [uri <uri>] [size <width> <height>]
///   object <label> [attr <attribute>]*
///   relation <subject_idx> <predicate> <object_idx>
///
/// Labels, attributes and predicates may span several whitespace-separated
/// words; they are rejoined with single spaces. Blank lines and lines whose
/// first non-blank character is '#' are ignored. Object indices are 0-based
/// in order of appearance. Duplicate attributes and duplicate relation
/// triples are dropped (first occurrence wins).
SceneDocument parse_scene_document(std::string_view text, const ParseOptions& options = {});

SceneGraph parse_scene_graph(std::string_view text, const ParseOptions& options = {});

/// Inverse of parse_scene_document for well-formed graphs.
std::string write_scene_document(const SceneDocument& doc);

/// Checks the SceneGraph invariants; throws vrap::Error on violation.
void validate(const SceneGraph& graph, const ParseOptions& options = {});

/// Characters that cannot appear in labels, attributes or predicates because
/// the tag and prompt formats use them as delimiters.
inline constexpr std::string_view kReservedLabelChars = "(),;#[]";

/// Trims surrounding whitespace and checks the label alphabet. Throws
/// EmptyLabel / InvalidLabel.
std::string normalize_label(std::string_view raw);

// ---------------------------------------------------------------------------
// Visual features. The encoder is a deterministic stand-in that derives an
// H x W x D grid from the annotation content; no pixels are read.

struct FeatureMap {
  std::string image_id;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t depth = 0;
  std::vector<double> grid;  // row-major [h][w][d]

  double at(std::size_t h, std::size_t w, std::size_t d) const {
    return grid[(h * width + w) * depth + d];
  }
};

void validate(const FeatureMap& features);

FeatureMap encode_features(const SceneGraph& graph, std::size_t height, std::size_t width,
                           std::size_t depth, std::uint64_t seed = 0);

/// One token per spatial cell: the index of the strongest channel, reduced
/// modulo `vocab_size`. Gives the toy tag head something to condition on.
std::vector<std::uint32_t> feature_tokens(const FeatureMap& features, std::uint32_t vocab_size);

}  // namespace vrap::scene
