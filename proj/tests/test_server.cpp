#include <gtest/gtest.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <thread>

#include "ideaspace/error.hpp"
#include "ideaspace/server.hpp"
#include "test_support.hpp"

// After the ideaspace headers: <resolv.h> (pulled in by httplib) defines
// macros that collide with Eigen identifiers.
#include <httplib.h>

using namespace ideaspace;
using nlohmann::json;

namespace {

// One saved report with known cluster structure in a scratch directory.
class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    report::PipelineConfig cfg;
    cfg.embedder.dim = 128;
    cfg.created_at = "2026-01-01T00:00:00Z";
    auto sets = corpus::synthesize_corpus(2, 60, 11);
    const auto run = report::run_pipeline(sets, cfg);
    ASSERT_EQ(run.reports.size(), 2u);
    for (const auto& r : run.reports) {
      report::save_report(r, dir_ / report::report_file_name(r.set_id));
    }
    report_ = run.reports[0];
    set_id_ = report_.set_id;
    const auto ids = report_.idea_ids();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const int label = report_.labels[i];
      if (label >= 0 && !first_in_cluster_.count(label)) first_in_cluster_[label] = ids[i];
    }
  }

  json selection(const std::string& participant, const std::vector<std::string>& ids) {
    return {{"participant_id", participant}, {"selected_idea_ids", ids}};
  }

  std::vector<std::string> one_per_cluster() const {
    std::vector<std::string> out;
    for (const auto& [label, id] : first_in_cluster_) out.push_back(id);
    return out;
  }

  TempDir dir_;
  report::AnalysisReport report_;
  std::string set_id_;
  std::map<int, std::string> first_in_cluster_;
};

}  // namespace

TEST_F(ServerTest, ListsLoadedSets) {
  server::ReportServer srv(dir_.path());
  EXPECT_EQ(srv.set_ids().size(), 2u);
}

TEST_F(ServerTest, SelectionsDriveSamplingScore) {
  server::ReportServer srv(dir_.path());
  auto m = json::parse(srv.handle_metrics(set_id_).text);
  EXPECT_EQ(m["x"], 0);
  EXPECT_EQ(m["ss"], 0.0);

  const auto all = one_per_cluster();
  ASSERT_GE(all.size(), 2u);
  EXPECT_EQ(srv.handle_selection(set_id_, selection("p1", all).dump()).status, 201);
  EXPECT_EQ(srv.handle_selection(set_id_, selection("p2", all).dump()).status, 201);
  m = json::parse(srv.handle_metrics(set_id_).text);
  EXPECT_EQ(m["x"], 2);
  EXPECT_DOUBLE_EQ(m["ss"].get<double>(), 1.0);
  for (const auto& [label, id] : first_in_cluster_) EXPECT_EQ(m["si"][std::to_string(label)], 2);

  // p2 resubmits with one cluster only: last submission wins.
  EXPECT_EQ(srv.handle_selection(set_id_, selection("p2", {all[0]}).dump()).status, 201);
  m = json::parse(srv.handle_metrics(set_id_).text);
  EXPECT_EQ(m["x"], 2);
  EXPECT_DOUBLE_EQ(m["ss"].get<double>(), 1.0 / static_cast<double>(all.size()));
}

TEST_F(ServerTest, RejectsBadSelections) {
  server::ReportServer srv(dir_.path());
  const auto id = one_per_cluster().front();
  auto r = srv.handle_selection(set_id_, selection("p", {id, "no-such-idea"}).dump());
  EXPECT_EQ(r.status, 400);
  const auto body = json::parse(r.text);
  EXPECT_EQ(body["error"], "invalid selection");
  ASSERT_FALSE(body["fields"].empty());
  EXPECT_EQ(body["fields"][0]["field"], "selected_idea_ids");

  EXPECT_EQ(srv.handle_selection(set_id_, "{oops").status, 400);
  EXPECT_EQ(srv.handle_selection(set_id_, selection("", {id}).dump()).status, 400);
  EXPECT_EQ(srv.handle_selection(set_id_, selection("p", {}).dump()).status, 400);
  EXPECT_EQ(srv.handle_selection(set_id_, R"({"participant_id":"p","selected_idea_ids":"x"})").status,
            400);
  EXPECT_EQ(srv.handle_selection(set_id_, R"({"participant_id":"p","selected_idea_ids":[1]})").status,
            400);
  EXPECT_EQ(srv.handle_selection("nope", selection("p", {id}).dump()).status, 404);
  EXPECT_EQ(srv.handle_metrics("nope").status, 404);
  // Nothing rejected reaches the log.
  EXPECT_FALSE(std::filesystem::exists(dir_ / "selections.jsonl") &&
               std::filesystem::file_size(dir_ / "selections.jsonl") > 0);
}

TEST_F(ServerTest, ReplaysSelectionLog) {
  const auto all = one_per_cluster();
  {
    server::ReportServer srv(dir_.path());
    ASSERT_EQ(srv.handle_selection(set_id_, selection("p1", all).dump()).status, 201);
    ASSERT_EQ(srv.handle_selection(set_id_, selection("p2", {all[0]}).dump()).status, 201);
  }
  std::ifstream log(dir_ / "selections.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) {
    const auto rec = json::parse(line);
    EXPECT_EQ(rec["set_id"], set_id_);
    ++lines;
  }
  EXPECT_EQ(lines, 2);

  server::ReportServer again(dir_.path());
  const auto m = json::parse(again.handle_metrics(set_id_).text);
  EXPECT_EQ(m["x"], 2);
  EXPECT_EQ(m["si"][std::to_string(first_in_cluster_.begin()->first)], 2);
}

TEST_F(ServerTest, HttpEndpoints) {
  server::ReportServer srv(dir_.path());
  const int port = srv.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread t([&] { srv.listen(); });

  httplib::Client cli("127.0.0.1", port);
  cli.set_connection_timeout(5);

  auto res = cli.Get("/api/sets");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
  const auto sets = json::parse(res->body);
  ASSERT_TRUE(sets.is_array());
  EXPECT_EQ(sets.size(), 2u);

  res = cli.Get("/api/sets/" + set_id_ + "/report");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const auto loaded = report::parse(res->body);
  EXPECT_EQ(loaded.labels, report_.labels);

  res = cli.Post("/api/sets/" + set_id_ + "/selections", selection("web", one_per_cluster()).dump(),
                 "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 201);

  res = cli.Get("/api/sets/" + set_id_ + "/selection-metrics");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_DOUBLE_EQ(json::parse(res->body)["ss"].get<double>(), 1.0);

  res = cli.Post("/api/sets/" + set_id_ + "/selections", selection("web", {"ghost"}).dump(),
                 "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);

  res = cli.Get("/api/sets/missing/report");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);

  srv.stop();
  t.join();
}

TEST(BindAddress, Parses) {
  EXPECT_EQ(server::parse_bind_address("0.0.0.0:8080"), (std::pair<std::string, int>{"0.0.0.0", 8080}));
  EXPECT_EQ(server::parse_bind_address(":9000"), (std::pair<std::string, int>{"127.0.0.1", 9000}));
  EXPECT_EQ(server::parse_bind_address("7000"), (std::pair<std::string, int>{"127.0.0.1", 7000}));
  EXPECT_THROW(server::parse_bind_address("host:notaport"), Error);
}
