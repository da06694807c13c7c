#include "parmine/server.h"

#include "httplib.h"
#include "json.hpp"

#include "parmine/error.h"

namespace parmine {

using nlohmann::json;
using nlohmann::ordered_json;

struct JudgmentServer::Impl {
  SplitSession& session;
  httplib::Server http;

  explicit Impl(SplitSession& s) : session(s) {}
};

namespace {

void reply(httplib::Response& res, const ordered_json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void reply_error(httplib::Response& res, int status, const std::string& msg) {
  ordered_json body;
  body["error"] = msg;
  reply(res, body, status);
}

ordered_json state_json(const SplitSession& session) {
  const SessionState st = session.state();
  const SplitConfig& cfg =
      session.config(st.phase == Phase::kTest ? Phase::kTest : Phase::kDev);
  ordered_json o;
  o["phase"] = to_string(st.phase);
  o["judged"] = st.judged;
  o["accepted_pairs"] = st.accepted_pairs();
  o["volume"] = cfg.volume;
  o["ratio"] = cfg.ratio;
  return o;
}

ordered_json next_json(const NextItem& item) {
  ordered_json o;
  if (std::holds_alternative<Complete>(item)) {
    o["done"] = true;
    return o;
  }
  const auto& next = std::get<NextPair>(item);
  o["pair_id"] = next.candidate.pair_id;
  o["src_index"] = next.candidate.src_index;
  o["tgt_index"] = next.candidate.tgt_index;
  o["src_text"] = next.candidate.src_text;
  o["tgt_text"] = next.candidate.tgt_text;
  o["score"] = next.candidate.score;
  o["phase"] = to_string(next.phase);
  o["doc_progress"] = {{"document_rank", next.document_rank},
                       {"judged", next.document_judged},
                       {"total", next.document_total}};
  return o;
}

}  // namespace

JudgmentServer::JudgmentServer(SplitSession& session,
                               std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(session)) {
  auto& http = impl_->http;
  SplitSession& s = impl_->session;

  http.Get("/api/state", [&s](const httplib::Request&, httplib::Response& res) {
    reply(res, state_json(s));
  });

  http.Get("/api/next", [&s](const httplib::Request&, httplib::Response& res) {
    reply(res, next_json(s.next_unjudged()));
  });

  http.Post("/api/judgment", [&s](const httplib::Request& req,
                                  httplib::Response& res) {
    Judgment j;
    try {
      const json body = json::parse(req.body);
      j.pair_id = body.at("pair_id").get<std::string>();
      j.src_index = body.at("src_index").get<std::size_t>();
      j.tgt_index = body.at("tgt_index").get<std::size_t>();
      j.verdict = parse_verdict(body.at("verdict").get<std::string>());
      j.annotator = body.value("annotator", std::string());
    } catch (const json::exception& e) {
      reply_error(res, 400, std::string("malformed judgment: ") + e.what());
      return;
    } catch (const InvalidInput& e) {
      reply_error(res, 400, e.what());
      return;
    }
    if (j.annotator.empty()) {
      reply_error(res, 400, "annotator is required");
      return;
    }
    try {
      const Ack ack = s.record_judgment(j);
      ordered_json o;
      o["ok"] = true;
      o["next_available"] = ack.next_available;
      if (ack.superseded) o["warning"] = "superseded an earlier verdict";
      reply(res, o);
    } catch (const InvalidInput& e) {
      reply_error(res, 404, e.what());
    } catch (const DataError& e) {
      reply_error(res, 500, e.what());
    }
  });

  http.Get("/api/manifest",
           [&s](const httplib::Request&, httplib::Response& res) {
             try {
               res.status = 200;
               res.set_content(manifest_to_json(s.manifest()),
                               "application/json; charset=utf-8");
             } catch (const StateError& e) {
               reply_error(res, 409, e.what());
             }
           });

  if (static_dir) http.set_mount_point("/", static_dir->string());
}

JudgmentServer::~JudgmentServer() { stop(); }

bool JudgmentServer::listen(const std::string& host, int port) {
  return impl_->http.listen(host, port);
}

int JudgmentServer::bind_any_port(const std::string& host) {
  return impl_->http.bind_to_any_port(host);
}

bool JudgmentServer::listen_after_bind() {
  return impl_->http.listen_after_bind();
}

void JudgmentServer::stop() {
  if (impl_) impl_->http.stop();
}

void JudgmentServer::wait_until_ready() const {
  impl_->http.wait_until_ready();
}

}  // namespace parmine
