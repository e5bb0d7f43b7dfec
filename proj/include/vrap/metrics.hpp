#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vrap::eval {

struct EvalRecord {
  std::string query_id;
  std::string prediction;
  std::vector<std::string> references;
  // Optional retrieval judgement for Recall@K.
  std::vector<std::string> ranked;
  std::vector<std::string> relevant;
};

/// Lowercase (ASCII), trim, collapse internal whitespace runs to one space,
/// strip trailing . , ! ? ; : characters.
std::string normalize_answer(std::string_view text);

/// Fraction of records whose normalized prediction equals a normalized
/// reference. Throws EmptyEvalSet.
double exact_match_accuracy(std::span<const EvalRecord> records);

/// Sentence BLEU-4 over whitespace tokens: clipped n-gram precisions for
/// n = 1..4, uniform geometric mean, brevity penalty exp(1 - r/c) when
/// c < r with r the closest reference length (shorter wins ties). A zero
/// precision for n >= 2 is replaced by (0 + 1) / (total + 1); a zero
/// unigram precision makes the score 0. Throws EmptyCandidate.
double bleu4(std::string_view candidate, std::span<const std::string> references);

/// |top-k(ranked) ∩ relevant| / |relevant|. Throws EmptyRelevantSet.
double recall_at_k(std::span<const std::string> ranked, const std::set<std::string>& relevant, std::size_t k);

/// JSON lines: {"query_id", "prediction", "references": [..],
/// optional "ranked": [..], "relevant": [..]}. Throws MalformedDocument.
std::vector<EvalRecord> parse_eval_records(std::string_view jsonl);

}  // namespace vrap::eval
