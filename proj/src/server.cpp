#include "ideaspace/server.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ideaspace/diagnostics.hpp"
#include "ideaspace/error.hpp"

namespace ideaspace::server {
namespace {

using nlohmann::json;

constexpr const char* kSuffix = ".report.json";

ReportServer::Response reply(int status, const json& body) {
  return {status, body.dump()};
}

ReportServer::Response field_error(const std::string& field, const std::string& message) {
  return reply(400, {{"error", "invalid selection"},
                     {"fields", json::array({{{"field", field}, {"message", message}}})}});
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::pair<std::string, int> parse_bind_address(const std::string& addr) {
  std::string host = "127.0.0.1";
  std::string port_text = addr;
  if (const auto colon = addr.rfind(':'); colon != std::string::npos) {
    if (colon > 0) host = addr.substr(0, colon);
    port_text = addr.substr(colon + 1);
  }
  if (host.size() > 2 && host.front() == '[' && host.back() == ']') {
    host = host.substr(1, host.size() - 2);
  }
  int port = -1;
  try {
    std::size_t used = 0;
    port = std::stoi(port_text, &used);
    if (used != port_text.size()) port = -1;
  } catch (const std::exception&) {
    port = -1;
  }
  if (port < 0 || port > 65535) throw ParameterError("invalid bind address '" + addr + "'");
  return {host, port};
}

ReportServer::ReportServer(std::filesystem::path reports_dir)
    : dir_(std::move(reports_dir)), log_path_(dir_ / "selections.jsonl") {
  if (!std::filesystem::is_directory(dir_)) {
    throw IoError("reports directory not found: " + dir_.string());
  }
  load_reports();
  replay_selections();
}

ReportServer::~ReportServer() { stop(); }

std::vector<std::string> ReportServer::set_ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, state] : sets_) ids.push_back(id);
  return ids;
}

void ReportServer::load_reports() {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.is_regular_file() && ends_with(entry.path().filename().string(), kSuffix)) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    try {
      SetState state;
      state.report = report::load_report(path);
      state.report_text = report::emit(state.report);
      const auto id = state.report.set_id;
      if (!sets_.emplace(id, std::move(state)).second) {
        warn("duplicate report for set '" + id + "' in " + path.string() + " ignored");
      }
    } catch (const Error& e) {
      warn("skipping " + path.string() + ": " + e.what());
    }
  }
}

void ReportServer::replay_selections() {
  std::ifstream in(log_path_);
  if (!in) return;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto doc = json::parse(line);
      metrics::SelectionRecord rec;
      rec.plot_id = doc.at("set_id").get<std::string>();
      rec.participant_id = doc.at("participant_id").get<std::string>();
      for (const auto& id : doc.at("selected_idea_ids")) rec.selected_idea_ids.insert(id.get<std::string>());
      auto it = sets_.find(rec.plot_id);
      if (it == sets_.end()) continue;
      it->second.latest[rec.participant_id] = std::move(rec);
    } catch (const json::exception& e) {
      // A torn final line from a crash is expected; skip it.
      warn(log_path_.string() + ":" + std::to_string(line_no) + ": unreadable selection (" +
           e.what() + ")");
    }
  }
}

ReportServer::Response ReportServer::handle_selection(const std::string& set_id,
                                                      const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    return field_error("body", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) return field_error("body", "expected a JSON object");
  if (!doc.contains("participant_id") || !doc["participant_id"].is_string() ||
      doc["participant_id"].get<std::string>().empty()) {
    return field_error("participant_id", "required non-empty string");
  }
  if (!doc.contains("selected_idea_ids") || !doc["selected_idea_ids"].is_array()) {
    return field_error("selected_idea_ids", "required array of idea ids");
  }
  metrics::SelectionRecord rec;
  rec.plot_id = set_id;
  rec.participant_id = doc["participant_id"].get<std::string>();
  for (const auto& id : doc["selected_idea_ids"]) {
    if (!id.is_string()) return field_error("selected_idea_ids", "idea ids must be strings");
    rec.selected_idea_ids.insert(id.get<std::string>());
  }
  if (rec.selected_idea_ids.empty()) {
    return field_error("selected_idea_ids", "at least one idea must be selected");
  }

  std::lock_guard lock(mutex_);
  auto it = sets_.find(set_id);
  if (it == sets_.end()) return reply(404, {{"error", "unknown set '" + set_id + "'"}});
  const auto ids = it->second.report.idea_ids();
  const std::set<std::string> known(ids.begin(), ids.end());
  json unknown = json::array();
  for (const auto& id : rec.selected_idea_ids) {
    if (!known.count(id)) unknown.push_back(id);
  }
  if (!unknown.empty()) {
    return reply(400, {{"error", "invalid selection"},
                       {"fields", json::array({{{"field", "selected_idea_ids"},
                                                {"message", "unknown idea ids"},
                                                {"unknown", unknown}}})}});
  }

  const json line = {{"set_id", set_id},
                     {"participant_id", rec.participant_id},
                     {"selected_idea_ids", rec.selected_idea_ids}};
  {
    std::ofstream out(log_path_, std::ios::app);
    out << line.dump() << '\n';
    out.flush();
    if (!out) return reply(500, {{"error", "could not persist selection"}});
  }
  it->second.latest[rec.participant_id] = std::move(rec);
  return reply(201, {{"status", "recorded"}, {"set_id", set_id}});
}

ReportServer::Response ReportServer::handle_metrics(const std::string& set_id) const {
  std::lock_guard lock(mutex_);
  auto it = sets_.find(set_id);
  if (it == sets_.end()) return reply(404, {{"error", "unknown set '" + set_id + "'"}});
  const auto& state = it->second;
  std::vector<metrics::SelectionRecord> records;
  for (const auto& [participant, rec] : state.latest) records.push_back(rec);
  const auto clustering = state.report.clustering();
  const auto ids = state.report.idea_ids();
  const auto si = metrics::selection_index(records, clustering, ids);
  const int x = static_cast<int>(records.size());
  const int c = static_cast<int>(clustering.cluster_ids.size());
  const double ss = x >= 1 && c >= 1 ? metrics::sampling_score(si, x, c) : 0.0;
  json si_doc = json::object();
  for (const auto& [cluster_id, count] : si) si_doc[std::to_string(cluster_id)] = count;
  return reply(200, {{"si", si_doc}, {"ss", ss}, {"x", x}});
}

void ReportServer::setup_routes() {
  auto& http = *http_;
  http.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  http.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  http.Get("/api/sets", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(json(set_ids()).dump(), "application/json");
  });
  http.Get(R"(/api/sets/([^/]+)/report)", [this](const httplib::Request& req,
                                                  httplib::Response& res) {
    std::lock_guard lock(mutex_);
    auto it = sets_.find(req.matches[1]);
    if (it == sets_.end()) {
      res.status = 404;
      res.set_content(json{{"error", "unknown set '" + req.matches[1].str() + "'"}}.dump(),
                      "application/json");
      return;
    }
    res.set_content(it->second.report_text, "application/json");
  });
  http.Get(R"(/api/sets/([^/]+)/selection-metrics)",
           [this](const httplib::Request& req, httplib::Response& res) {
             const auto r = handle_metrics(req.matches[1]);
             res.status = r.status;
             res.set_content(r.text, "application/json");
           });
  http.Post(R"(/api/sets/([^/]+)/selections)",
            [this](const httplib::Request& req, httplib::Response& res) {
              const auto r = handle_selection(req.matches[1], req.body);
              res.status = r.status;
              res.set_content(r.text, "application/json");
            });
}

int ReportServer::bind(const std::string& host, int port) {
  http_ = std::make_unique<httplib::Server>();
  setup_routes();
  int bound = port;
  if (port == 0) {
    bound = http_->bind_to_any_port(host);
  } else if (!http_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void ReportServer::listen() {
  if (!http_) throw PreconditionError("ReportServer::listen: bind() first");
  http_->listen_after_bind();
}

void ReportServer::stop() {
  if (http_) http_->stop();
}

}  // namespace ideaspace::server
