#include "parmine/embeddings.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <memory>

#include <zlib.h>

#include "parmine/error.h"
#include "parmine/text.h"

namespace parmine {

EmbeddingTable::Builder::Builder(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw InvalidInput("embedding dimension must be positive");
}

bool EmbeddingTable::Builder::add(std::string word,
                                  std::span<const float> vector) {
  if (vector.size() != dim_) {
    throw InvalidInput("vector for '" + word + "' has " +
                       std::to_string(vector.size()) + " values, expected " +
                       std::to_string(dim_));
  }
  auto [it, inserted] = index_.try_emplace(std::move(word), index_.size());
  if (!inserted) return false;
  values_.insert(values_.end(), vector.begin(), vector.end());
  return true;
}

EmbeddingTable EmbeddingTable::Builder::build(EmbeddingLoadStats stats) && {
  EmbeddingTable table;
  table.dim_ = dim_;
  table.index_ = std::move(index_);
  table.values_ = std::move(values_);
  table.stats_ = stats;
  return table;
}

std::span<const float> EmbeddingTable::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return {};
  return {values_.data() + it->second * dim_, dim_};
}

std::span<const float> EmbeddingTable::lookup(std::string_view word) const {
  auto hit = find(word);
  if (!hit.empty()) return hit;
  std::string lowered = to_lower(word);
  if (lowered == word) return {};
  return find(lowered);
}

namespace {

struct GzCloser {
  void operator()(gzFile f) const { gzclose(f); }
};
using GzHandle = std::unique_ptr<gzFile_s, GzCloser>;

// gzread handles uncompressed files transparently.
bool read_line(gzFile file, std::string& line) {
  line.clear();
  char buf[8192];
  while (gzgets(file, buf, sizeof buf) != nullptr) {
    line += buf;
    if (!line.empty() && line.back() == '\n') {
      line.pop_back();
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return true;
    }
  }
  return !line.empty();
}

bool parse_size(std::string_view s, std::size_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  GzHandle file(gzopen(path.c_str(), "rb"));
  if (!file || !std::filesystem::is_regular_file(path)) {
    throw LoadError("cannot open embeddings " + path.string());
  }
  std::string line;
  if (!read_line(file.get(), line)) {
    throw LoadError(path.string() + ": empty embeddings file");
  }
  auto header = split_whitespace(line);
  std::size_t declared = 0, dim = 0;
  if (header.size() != 2 || !parse_size(header[0], declared) ||
      !parse_size(header[1], dim) || dim == 0) {
    throw LoadError(path.string() + ": malformed header '" + line + "'");
  }

  EmbeddingTable::Builder builder(dim);
  EmbeddingLoadStats stats;
  std::vector<float> values(dim);
  while (read_line(file.get(), line)) {
    if (trim(line).empty()) continue;
    ++stats.rows_read;
    // Words never contain spaces in this format; values are separated by
    // single spaces but tolerate runs of whitespace.
    std::string_view rest = line;
    std::size_t pos = 0;
    auto next_field = [&]() -> std::string_view {
      while (pos < rest.size() && is_space(rest[pos])) ++pos;
      const std::size_t start = pos;
      while (pos < rest.size() && !is_space(rest[pos])) ++pos;
      return rest.substr(start, pos - start);
    };
    std::string_view word = next_field();
    bool good = !word.empty();
    for (std::size_t d = 0; good && d < dim; ++d) {
      std::string_view field = next_field();
      auto [p, ec] =
          std::from_chars(field.data(), field.data() + field.size(), values[d]);
      good = !field.empty() && ec == std::errc() &&
             p == field.data() + field.size() && std::isfinite(values[d]);
    }
    if (good && !next_field().empty()) good = false;
    if (!good) {
      ++stats.malformed;
      continue;
    }
    if (!builder.add(std::string(word), values)) ++stats.duplicates;
  }
  int err = 0;
  gzerror(file.get(), &err);
  if (err != Z_OK && err != Z_STREAM_END) {
    throw LoadError(path.string() + ": read error");
  }
  if (stats.rows_read > 0 && stats.malformed * 10 > stats.rows_read) {
    throw LoadError(path.string() + ": " + std::to_string(stats.malformed) +
                    " of " + std::to_string(stats.rows_read) +
                    " rows do not have " + std::to_string(dim) + " values");
  }
  return std::move(builder).build(stats);
}

std::vector<double> sentence_embedding(std::span<const std::string> tokens,
                                       const EmbeddingTable& table) {
  std::vector<double> sum(table.dim(), 0.0);
  std::size_t found = 0;
  for (const auto& token : tokens) {
    auto v = table.lookup(token);
    if (v.empty()) continue;
    for (std::size_t d = 0; d < sum.size(); ++d) sum[d] += v[d];
    ++found;
  }
  if (found > 1) {
    for (double& x : sum) x /= static_cast<double>(found);
  }
  return sum;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw InvalidInput("cosine of vectors with dimensions " +
                       std::to_string(u.size()) + " and " +
                       std::to_string(v.size()));
  }
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  // sqrt(fl(x*x)) == x, so cosine(v, v) is exactly 1.
  const double c = dot / std::sqrt(uu * vv);
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace parmine
