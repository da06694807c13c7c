#ifndef PARMINE_EMBEDDINGS_H_
#define PARMINE_EMBEDDINGS_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace parmine {

struct EmbeddingLoadStats {
  std::size_t rows_read = 0;
  std::size_t malformed = 0;
  std::size_t duplicates = 0;
};

// Word vectors of a fixed dimension. Immutable once built.
class EmbeddingTable {
 public:
  class Builder {
   public:
    explicit Builder(std::size_t dim);
    // False (and nothing stored) if the word is already present.
    // Throws InvalidInput on a dimension mismatch.
    bool add(std::string word, std::span<const float> vector);
    EmbeddingTable build(EmbeddingLoadStats stats = {}) &&;

   private:
    std::size_t dim_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<float> values_;
  };

  EmbeddingTable() = default;

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }
  const EmbeddingLoadStats& load_stats() const { return stats_; }

  // Exact lookup; empty span when absent.
  std::span<const float> find(std::string_view word) const;
  // Exact lookup first, then the lowercased word.
  std::span<const float> lookup(std::string_view word) const;

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> values_;
  EmbeddingLoadStats stats_;
};

// word2vec text format, optionally gzip-compressed: a "count dim" header,
// then "word v1 ... v_dim" rows. Rows of the wrong arity or with
// unparseable numbers are skipped and counted; more than 10% of them is a
// LoadError, as are a missing file and a bad header.
EmbeddingTable load_embeddings(const std::filesystem::path& path);

// Mean of the in-vocabulary token vectors, zero vector if none match.
std::vector<double> sentence_embedding(std::span<const std::string> tokens,
                                       const EmbeddingTable& table);

// 0 when either vector has zero norm. Throws InvalidInput on a size mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

}  // namespace parmine

#endif  // PARMINE_EMBEDDINGS_H_
