#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "strapsim/core.hpp"

namespace strapsim::constituent {

// Lowercased runs of letters and digits; every other ASCII byte separates
// tokens. Bytes outside ASCII are kept inside tokens.
std::vector<std::string> tokenize(std::string_view text);

struct SparseTerm {
  std::uint32_t term;
  double weight;
};

class TfidfIndex {
 public:
  const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }
  const std::vector<double>& idf() const noexcept { return idf_; }
  std::size_t documents() const noexcept { return doc_ids_.size(); }
  const std::vector<std::string>& document_ids() const noexcept { return doc_ids_; }

  std::optional<std::size_t> find_document(const std::string& id) const;
  std::optional<std::size_t> find_term(const std::string& term) const;
  // tf * idf entries sorted by term index.
  const std::vector<SparseTerm>& vector(std::size_t doc) const { return vectors_.at(doc); }
  double norm(std::size_t doc) const { return norms_.at(doc); }

  friend TfidfIndex tfidf_build(const std::vector<std::pair<std::string, std::string>>& docs);

 private:
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, std::uint32_t> term_index_;
  std::vector<double> idf_;
  std::vector<std::string> doc_ids_;
  std::unordered_map<std::string, std::size_t> doc_index_;
  std::vector<std::vector<SparseTerm>> vectors_;
  std::vector<double> norms_;
};

/// tf = raw count, idf = ln((1 + N) / (1 + df)) + 1. Vocabulary columns are
/// numbered in order of first appearance. Errors: EmptyCorpus, DuplicateId.
TfidfIndex tfidf_build(const std::vector<std::pair<std::string, std::string>>& docs);

double tfidf_cosine(const TfidfIndex& index, std::size_t a, std::size_t b);

// Square matrix over `ids`. Errors: UnknownDocument, ZeroVector.
SimilarityMatrix tfidf_cosine_matrix(const TfidfIndex& index, const std::vector<std::string>& ids,
                                     std::size_t threads = 0);

}  // namespace strapsim::constituent
