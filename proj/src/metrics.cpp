#include "vrap/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>

#include "json.hpp"
#include "vrap/error.hpp"

namespace vrap::eval {

namespace {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

using NGramCounts = std::map<std::vector<std::string>, std::size_t>;

NGramCounts ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NGramCounts counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::string out;
  for (const auto& token : tokenize(text)) {
    if (!out.empty()) out += ' ';
    out += token;
  }
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  while (!out.empty() && std::string_view(".,!?;:").find(out.back()) != std::string_view::npos) {
    out.pop_back();
    while (!out.empty() && out.back() == ' ') out.pop_back();
  }
  return out;
}

double exact_match_accuracy(std::span<const EvalRecord> records) {
  if (records.empty()) throw Error(ErrorKind::EmptyEvalSet, "no records to score");
  std::size_t hits = 0;
  for (const auto& r : records) {
    if (r.references.empty()) throw Error(ErrorKind::InvalidArgument, "record '" + r.query_id + "' has no references");
    const auto prediction = normalize_answer(r.prediction);
    if (std::any_of(r.references.begin(), r.references.end(),
                    [&](const std::string& ref) { return normalize_answer(ref) == prediction; })) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double bleu4(std::string_view candidate, std::span<const std::string> references) {
  const auto cand = tokenize(candidate);
  if (cand.empty()) throw Error(ErrorKind::EmptyCandidate, "candidate has no tokens");
  if (references.empty()) throw Error(ErrorKind::InvalidArgument, "bleu4 needs at least one reference");

  std::vector<std::vector<std::string>> refs;
  for (const auto& r : references) refs.push_back(tokenize(r));

  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto cand_counts = ngrams(cand, n);
    NGramCounts max_ref;
    for (const auto& ref : refs) {
      for (const auto& [gram, count] : ngrams(ref, n)) max_ref[gram] = std::max(max_ref[gram], count);
    }
    std::size_t matched = 0;
    std::size_t total = 0;
    for (const auto& [gram, count] : cand_counts) {
      total += count;
      if (auto it = max_ref.find(gram); it != max_ref.end()) matched += std::min(count, it->second);
    }
    double precision;
    if (matched > 0) {
      precision = static_cast<double>(matched) / static_cast<double>(total);
    } else if (n == 1) {
      return 0.0;
    } else {
      precision = 1.0 / static_cast<double>(total + 1);
    }
    log_sum += std::log(precision);
  }

  const double c = static_cast<double>(cand.size());
  std::size_t closest = refs.front().size();
  for (const auto& ref : refs) {
    const auto diff = [&](std::size_t len) { return std::abs(static_cast<double>(len) - c); };
    if (diff(ref.size()) < diff(closest) || (diff(ref.size()) == diff(closest) && ref.size() < closest)) {
      closest = ref.size();
    }
  }
  const double r = static_cast<double>(closest);
  const double brevity = c < r ? std::exp(1.0 - r / c) : 1.0;
  return std::clamp(brevity * std::exp(log_sum / 4.0), 0.0, 1.0);
}

double recall_at_k(std::span<const std::string> ranked, const std::set<std::string>& relevant, std::size_t k) {
  if (relevant.empty()) throw Error(ErrorKind::EmptyRelevantSet, "relevant set is empty");
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
  std::set<std::string_view> found;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    if (relevant.contains(ranked[i])) found.insert(ranked[i]);
  }
  return static_cast<double>(found.size()) / static_cast<double>(relevant.size());
}

std::vector<EvalRecord> parse_eval_records(std::string_view jsonl) {
  std::vector<EvalRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EvalRecord r;
      r.query_id = j.value("query_id", std::to_string(out.size()));
      r.prediction = j.at("prediction").get<std::string>();
      r.references = j.at("references").get<std::vector<std::string>>();
      if (r.references.empty()) throw Error(ErrorKind::MalformedDocument, "references must be non-empty", line_no, 1);
      r.ranked = j.value("ranked", std::vector<std::string>{});
      r.relevant = j.value("relevant", std::vector<std::string>{});
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::MalformedDocument, e.what(), line_no, 1);
    }
  }
  return out;
}

}  // namespace vrap::eval
