#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ideaspace/report.hpp"

namespace httplib {
class Server;
}

namespace ideaspace::server {

// Serves the reports found in a directory (files named *.report.json) plus
// selection ingestion for the explorer:
//   GET  /api/sets
//   GET  /api/sets/{id}/report
//   GET  /api/sets/{id}/selection-metrics   -> {si: {cluster: count}, ss, x}
//   POST /api/sets/{id}/selections          body {participant_id, selected_idea_ids}
// Selections are appended to <dir>/selections.jsonl. A later submission from
// the same participant replaces the earlier one when metrics are computed.
class ReportServer {
 public:
  explicit ReportServer(std::filesystem::path reports_dir);
  ~ReportServer();
  ReportServer(const ReportServer&) = delete;
  ReportServer& operator=(const ReportServer&) = delete;

  std::vector<std::string> set_ids() const;

  // Binds and returns the port; port 0 picks a free one. Throws IoError.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called.
  void listen();
  void stop();

  // Handlers without the HTTP layer; status codes follow the endpoints.
  struct Response {
    int status = 200;
    std::string text;  // serialized JSON
  };
  Response handle_selection(const std::string& set_id, const std::string& body);
  Response handle_metrics(const std::string& set_id) const;

 private:
  struct SetState {
    report::AnalysisReport report;
    std::string report_text;
    std::map<std::string, metrics::SelectionRecord> latest;  // by participant
  };

  void load_reports();
  void replay_selections();
  void setup_routes();

  std::filesystem::path dir_;
  std::filesystem::path log_path_;
  std::map<std::string, SetState> sets_;
  mutable std::mutex mutex_;
  std::unique_ptr<httplib::Server> http_;
};

// Parses "host:port" (or ":port" / "port"); the host defaults to 127.0.0.1.
std::pair<std::string, int> parse_bind_address(const std::string& addr);

}  // namespace ideaspace::server
