#include "vrap/knowledge_store.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vrap/error.hpp"
#include "vrap/hash.hpp"

namespace vrap::retrieval {

namespace {

constexpr std::string_view kMagic = "VRAPKS01";
constexpr std::uint32_t kSnapshotVersion = 1;
constexpr std::size_t kVerifyStride = 100;
constexpr std::uint32_t kMaxString = 64u << 20;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes_.append(s);
  }
  void raw(std::string_view s) { bytes_.append(s); }
  const std::string& bytes() const { return bytes_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_ += static_cast<char>((v >> (8 * i)) & 0xff);
  }
  std::string bytes_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    std::uint32_t n = u32();
    if (n > kMaxString) throw Error(ErrorKind::CorruptSnapshot, "string length out of range");
    return std::string(take(n));
  }
  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw Error(ErrorKind::CorruptSnapshot, "truncated snapshot");
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::size_t position() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::uint64_t get(int n) {
    auto b = take(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<CorpusRecord> parse_knowledge_corpus(std::string_view text) {
  std::vector<CorpusRecord> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorKind::MalformedDocument, "expected key<TAB>snippet", line_no, 1);
    }
    auto key = trim(line.substr(0, tab));
    auto snippet = trim(line.substr(tab + 1));
    if (key.empty()) throw Error(ErrorKind::MalformedDocument, "empty key", line_no, 1);
    if (snippet.empty()) throw Error(ErrorKind::MalformedDocument, "empty snippet", line_no, tab + 2);
    records.push_back({std::string(key), std::string(snippet)});
  }
  return records;
}

std::vector<CorpusRecord> load_knowledge_corpus(const std::filesystem::path& path) {
  return parse_knowledge_corpus(read_file(path));
}

KnowledgeStore::KnowledgeStore(std::vector<CorpusRecord> records, std::shared_ptr<const Embedder> embedder)
    : embedder_(std::move(embedder)) {
  if (!embedder_) throw Error(ErrorKind::InvalidArgument, "knowledge store needs an embedder");
  entries_.reserve(records.size());
  for (auto& record : records) {
    if (record.key.empty() || record.snippet.empty()) {
      throw Error(ErrorKind::InvalidArgument, "knowledge entries need a key and a snippet");
    }
    EmbeddingVector embedding = embedder_->embed(record.key);
    entries_.push_back({std::move(record.key), std::move(record.snippet), std::move(embedding)});
  }
  index();
}

KnowledgeStore::KnowledgeStore(std::vector<KnowledgeEntry> entries, std::shared_ptr<const Embedder> embedder, int)
    : entries_(std::move(entries)), embedder_(std::move(embedder)) {
  index();
}

void KnowledgeStore::index() {
  norms_.clear();
  norms_.reserve(entries_.size());
  FieldHasher h;
  h.add(embedder_->id());
  h.add_u64(embedder_->seed());
  h.add_u64(embedder_->dimension());
  h.add_u64(entries_.size());
  for (const auto& e : entries_) {
    if (e.embedding.dimension() != embedder_->dimension()) {
      throw Error(ErrorKind::DimensionMismatch, "entry '" + e.key + "' has the wrong dimension");
    }
    const double norm = l2_norm(e.embedding.values);
    if (norm == 0.0) throw Error(ErrorKind::ZeroVector, "entry '" + e.key + "' has a zero embedding");
    norms_.push_back(norm);
    h.add(e.key);
    h.add(e.snippet);
  }
  fingerprint_ = hex16(h.digest());
}

std::vector<RetrievalHit> KnowledgeStore::retrieve(std::string_view query, std::size_t k) const {
  if (entries_.empty()) throw Error(ErrorKind::EmptyStore, "knowledge store is empty");
  return retrieve(embedder_->embed(query), k);
}

std::vector<RetrievalHit> KnowledgeStore::retrieve(const EmbeddingVector& query, std::size_t k) const {
  if (entries_.empty()) throw Error(ErrorKind::EmptyStore, "knowledge store is empty");
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
  if (query.dimension() != dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "query dimension does not match the store");
  }
  const double query_norm = l2_norm(query.values);
  if (query_norm == 0.0) throw Error(ErrorKind::ZeroVector, "query embedding is zero");

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    scored.emplace_back(cosine_from_parts(dot(query.values, entries_[i].embedding.values), query_norm, norms_[i]),
                        i);
  }
  const std::size_t n = std::min(k, scored.size());
  auto better = [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), better);

  std::vector<RetrievalHit> hits;
  hits.reserve(n);
  for (std::size_t i = 0; i < n; ++i) hits.push_back({scored[i].second, scored[i].first, &entries_[scored[i].second]});
  return hits;
}

void KnowledgeStore::save(const std::filesystem::path& path) const {
  Writer w;
  w.raw(kMagic);
  w.u32(kSnapshotVersion);
  w.str(embedder_->id());
  w.u64(embedder_->seed());
  w.u32(static_cast<std::uint32_t>(dimension()));
  w.u64(entries_.size());
  for (const auto& e : entries_) {
    w.str(e.key);
    w.str(e.snippet);
    for (double v : e.embedding.values) w.f64(v);
  }
  const std::uint64_t checksum = fnv1a(w.bytes());
  w.u64(checksum);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw Error(ErrorKind::Io, "short write to '" + path.string() + "'");
}

KnowledgeStore KnowledgeStore::load(const std::filesystem::path& path, std::shared_ptr<const Embedder> embedder) {
  if (!embedder) throw Error(ErrorKind::InvalidArgument, "knowledge store needs an embedder");
  const std::string bytes = read_file(path);
  if (bytes.size() < kMagic.size() + 8) throw Error(ErrorKind::CorruptSnapshot, "file too short");
  const std::string_view body(bytes.data(), bytes.size() - 8);
  Reader tail(std::string_view(bytes).substr(bytes.size() - 8));
  if (tail.u64() != fnv1a(body)) throw Error(ErrorKind::CorruptSnapshot, "checksum mismatch");

  Reader r(body);
  if (r.take(kMagic.size()) != kMagic) throw Error(ErrorKind::CorruptSnapshot, "bad magic");
  if (auto v = r.u32(); v != kSnapshotVersion) {
    throw Error(ErrorKind::CorruptSnapshot, "unsupported snapshot version " + std::to_string(v));
  }
  const std::string id = r.str();
  const std::uint64_t seed = r.u64();
  const std::uint32_t d = r.u32();
  if (id != embedder->id() || seed != embedder->seed() || d != embedder->dimension()) {
    throw Error(ErrorKind::CorruptSnapshot, "snapshot was built with embedder " + id + "/seed " +
                                                std::to_string(seed) + "/d " + std::to_string(d));
  }
  const std::uint64_t count = r.u64();
  if (count > body.size()) throw Error(ErrorKind::CorruptSnapshot, "entry count out of range");

  std::vector<KnowledgeEntry> entries;
  entries.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    KnowledgeEntry e;
    e.key = r.str();
    e.snippet = r.str();
    e.embedding.values.resize(d);
    for (auto& v : e.embedding.values) v = r.f64();
    if (i % kVerifyStride == 0 && embedder->embed(e.key) != e.embedding) {
      throw Error(ErrorKind::CorruptSnapshot, "stored embedding of '" + e.key + "' does not match the embedder");
    }
    entries.push_back(std::move(e));
  }
  if (!r.done()) throw Error(ErrorKind::CorruptSnapshot, "trailing bytes");
  return KnowledgeStore(std::move(entries), std::move(embedder), 0);
}

}  // namespace vrap::retrieval
