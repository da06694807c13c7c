// End-to-end fixture helpers.
#ifndef PARMINE_TESTS_E2E_SUPPORT_H_
#define PARMINE_TESTS_E2E_SUPPORT_H_

#include <filesystem>
#include <map>
#include <sstream>
#include <string>

#include "parmine/pipeline.h"
#include "support.h"

namespace parmine::testing {

inline std::filesystem::path fixture_dir() { return PARMINE_FIXTURE_DIR; }

inline PipelineConfig fixture_config(const std::filesystem::path& out_dir,
                                     std::map<std::string, std::string> overrides = {}) {
  auto values = read_config_file(fixture_dir() / "e2e.conf");
  values["out_dir"] = out_dir.string();
  for (auto& [k, v] : overrides) values[k] = v;
  return PipelineConfig::from_key_values(values, fixture_dir());
}

// Relative path -> content of every regular file under root.
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      files[std::filesystem::relative(e.path(), root).generic_string()] = slurp(e.path());
    }
  }
  return files;
}

struct RunOutput {
  int status = 0;
  std::string out;
  std::string log;
};

inline RunOutput run_fixture(const PipelineConfig& cfg, const std::string& answers) {
  std::istringstream in(answers);
  std::ostringstream out, log;
  RunOutput r;
  r.status = run_pipeline(cfg, in, out, log);
  r.out = out.str();
  r.log = log.str();
  return r;
}

}  // namespace parmine::testing

#endif  // PARMINE_TESTS_E2E_SUPPORT_H_
