#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "vrap/embedding.hpp"

namespace vrap::retrieval {

struct CorpusRecord {
  std::string key;
  std::string snippet;

  bool operator==(const CorpusRecord&) const = default;
};

struct KnowledgeEntry {
  std::string key;
  std::string snippet;
  EmbeddingVector embedding;
};

struct RetrievalHit {
  std::size_t ordinal = 0;
  double score = 0.0;
  const KnowledgeEntry* entry = nullptr;
};

/// Read-only top-k retrieval surface. infer_online and enrich only ever see
/// this interface, which lets tests count calls.
class KnowledgeSource {
 public:
  virtual ~KnowledgeSource() = default;

  /// Exact top-k by cosine similarity to embed(query); ties go to the lower
  /// entry ordinal. Throws EmptyStore, InvalidArgument (k == 0).
  virtual std::vector<RetrievalHit> retrieve(std::string_view query, std::size_t k) const = 0;

  virtual std::size_t size() const = 0;

  /// Stable 16-hex-digit content hash of the store.
  virtual std::string fingerprint() const = 0;
};

/// Parses `key<TAB>snippet` lines. Blank lines and lines starting with '#'
/// are skipped. Throws MalformedDocument with the line number.
std::vector<CorpusRecord> parse_knowledge_corpus(std::string_view text);
std::vector<CorpusRecord> load_knowledge_corpus(const std::filesystem::path& path);

class KnowledgeStore final : public KnowledgeSource {
 public:
  KnowledgeStore(std::vector<CorpusRecord> records, std::shared_ptr<const Embedder> embedder);

  std::vector<RetrievalHit> retrieve(std::string_view query, std::size_t k) const override;
  std::vector<RetrievalHit> retrieve(const EmbeddingVector& query, std::size_t k) const;
  std::size_t size() const override { return entries_.size(); }
  std::string fingerprint() const override { return fingerprint_; }

  const std::vector<KnowledgeEntry>& entries() const noexcept { return entries_; }
  const Embedder& embedder() const noexcept { return *embedder_; }
  std::size_t dimension() const noexcept { return embedder_->dimension(); }

  /// Binary snapshot, little-endian:
  ///   magic "VRAPKS01" | u32 version | str embedder_id | u64 seed | u32 d |
  ///   u64 count | count x (str key | str snippet | d x f64) | u64 checksum
  /// where str is a u32 byte length followed by the bytes and checksum is
  /// FNV-1a over everything before it.
  void save(const std::filesystem::path& path) const;

  /// Loads a snapshot written by save(). The embedder must match the stored
  /// id, seed and dimension; every 100th entry's embedding is recomputed and
  /// compared bit-for-bit. Throws CorruptSnapshot / Io.
  static KnowledgeStore load(const std::filesystem::path& path, std::shared_ptr<const Embedder> embedder);

 private:
  KnowledgeStore(std::vector<KnowledgeEntry> entries, std::shared_ptr<const Embedder> embedder, int);
  void index();

  std::vector<KnowledgeEntry> entries_;
  std::vector<double> norms_;
  std::shared_ptr<const Embedder> embedder_;
  std::string fingerprint_;
};

}  // namespace vrap::retrieval
