#pragma once

#include <atomic>

#include "vrap/knowledge_store.hpp"

namespace testing_support {

/// Forwards to a real source and counts retrieve() calls.
class CountingSource final : public vrap::retrieval::KnowledgeSource {
 public:
  explicit CountingSource(const vrap::retrieval::KnowledgeSource& inner) : inner_(inner) {}

  std::vector<vrap::retrieval::RetrievalHit> retrieve(std::string_view query, std::size_t k) const override {
    ++calls_;
    return inner_.retrieve(query, k);
  }
  std::size_t size() const override { return inner_.size(); }
  std::string fingerprint() const override { return inner_.fingerprint(); }

  std::size_t calls() const { return calls_; }
  void reset() { calls_ = 0; }

 private:
  const vrap::retrieval::KnowledgeSource& inner_;
  mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace testing_support
