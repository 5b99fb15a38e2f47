#include "strapsim/constituent/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "strapsim/error.hpp"
#include "strapsim/util/parallel.hpp"

namespace strapsim::constituent {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    const bool word = c >= 0x80 || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
                      (c >= 'A' && c <= 'Z');
    if (word) {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::optional<std::size_t> TfidfIndex::find_document(const std::string& id) const {
  auto it = doc_index_.find(id);
  if (it == doc_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> TfidfIndex::find_term(const std::string& term) const {
  auto it = term_index_.find(term);
  if (it == term_index_.end()) return std::nullopt;
  return it->second;
}

TfidfIndex tfidf_build(const std::vector<std::pair<std::string, std::string>>& docs) {
  if (docs.empty()) throw Error(ErrorCode::EmptyCorpus, "no documents");
  TfidfIndex index;
  std::vector<std::map<std::uint32_t, double>> counts(docs.size());
  std::vector<std::size_t> df;

  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto& [id, text] = docs[d];
    if (!index.doc_index_.emplace(id, d).second) {
      throw Error(ErrorCode::DuplicateId, "document '" + id + "' appears twice");
    }
    index.doc_ids_.push_back(id);
    for (auto& token : tokenize(text)) {
      auto [it, fresh] = index.term_index_.emplace(token, static_cast<std::uint32_t>(index.vocabulary_.size()));
      if (fresh) {
        index.vocabulary_.push_back(std::move(token));
        df.push_back(0);
      }
      if (counts[d][it->second]++ == 0.0) ++df[it->second];
    }
  }

  const double n = static_cast<double>(docs.size());
  index.idf_.resize(df.size());
  for (std::size_t t = 0; t < df.size(); ++t) {
    index.idf_[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[t]))) + 1.0;
  }

  index.vectors_.resize(docs.size());
  index.norms_.resize(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    double sq = 0.0;
    for (const auto& [term, tf] : counts[d]) {
      const double w = tf * index.idf_[term];
      index.vectors_[d].push_back({term, w});
      sq += w * w;
    }
    index.norms_[d] = std::sqrt(sq);
  }
  return index;
}

double tfidf_cosine(const TfidfIndex& index, std::size_t a, std::size_t b) {
  const auto& va = index.vector(a);
  const auto& vb = index.vector(b);
  const double na = index.norm(a);
  const double nb = index.norm(b);
  if (!(na > 0.0) || !(nb > 0.0)) return 0.0;
  double dot = 0.0;
  auto ia = va.begin();
  auto ib = vb.begin();
  while (ia != va.end() && ib != vb.end()) {
    if (ia->term < ib->term) {
      ++ia;
    } else if (ib->term < ia->term) {
      ++ib;
    } else {
      dot += ia->weight * ib->weight;
      ++ia;
      ++ib;
    }
  }
  return std::clamp(dot / (na * nb), 0.0, 1.0);
}

SimilarityMatrix tfidf_cosine_matrix(const TfidfIndex& index, const std::vector<std::string>& ids,
                                     std::size_t threads) {
  const std::size_t n = ids.size();
  std::vector<std::size_t> docs(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto d = index.find_document(ids[i]);
    if (!d) throw Error(ErrorCode::UnknownDocument, "document '" + ids[i] + "' is not indexed");
    if (!(index.norm(*d) > 0.0)) {
      throw Error(ErrorCode::ZeroVector, "document '" + ids[i] + "' has no terms");
    }
    docs[i] = *d;
  }
  std::vector<double> values(n * n, 0.0);
  util::parallel_for(n, threads, [&](std::size_t i) {
    values[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) values[i * n + j] = tfidf_cosine(index, docs[i], docs[j]);
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) values[i * n + j] = values[j * n + i];
  return SimilarityMatrix::square(ids, std::move(values));
}

}  // namespace strapsim::constituent
