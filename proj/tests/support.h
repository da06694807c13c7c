// Helpers shared by the test binaries.
#ifndef PARMINE_TESTS_SUPPORT_H_
#define PARMINE_TESTS_SUPPORT_H_

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "parmine/corpus.h"

namespace parmine::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("parmine-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

inline Document doc_of(const std::vector<std::string>& lines,
                       const std::string& id = "d") {
  return Document(id, "", lines);
}

inline DocumentPair pair_of(const std::vector<std::string>& src,
                            const std::vector<std::string>& tgt,
                            const std::string& id = "p") {
  return DocumentPair(id, doc_of(src, id + ".src"), doc_of(tgt, id + ".tgt"));
}

// Word "w<k>" for generated vocabularies.
inline std::string word(std::size_t k) { return "w" + std::to_string(k); }

}  // namespace parmine::testing

#endif  // PARMINE_TESTS_SUPPORT_H_
