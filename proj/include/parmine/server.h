#ifndef PARMINE_SERVER_H_
#define PARMINE_SERVER_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "parmine/splitbuilder.h"

namespace parmine {

// JSON API over a SplitSession for the annotation UI:
//   GET  /api/state      phase, judged, accepted_pairs, volume, ratio
//   GET  /api/next       next candidate or {"done": true}
//   POST /api/judgment   {pair_id, src_index, tgt_index, verdict, annotator}
//   GET  /api/manifest   split manifest once both builds are complete
// Errors come back as {"error": "..."} with a 4xx status. When static_dir
// is set its files are served under /.
class JudgmentServer {
 public:
  JudgmentServer(SplitSession& session,
                 std::optional<std::filesystem::path> static_dir = {});
  ~JudgmentServer();

  // Binds and serves until stop(); returns false if binding failed.
  bool listen(const std::string& host, int port);
  // Binds to a free port and returns it, or -1.
  int bind_any_port(const std::string& host);
  // Serves on a socket bound by bind_any_port.
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace parmine

#endif  // PARMINE_SERVER_H_
