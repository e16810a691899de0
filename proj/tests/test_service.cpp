#include "doctest.h"

#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include <json.hpp>

#include "shekaste/service.hpp"
#include "test_support.hpp"

using namespace shekaste;
using nlohmann::json;

namespace {

std::shared_ptr<const Converter> shared_converter() {
  static auto c = std::make_shared<const Converter>(ConverterResources::load(testing::data_dir()));
  return c;
}

ServiceConfig config() {
  ServiceConfig cfg;
  cfg.port = 0;
  cfg.sessions = {parse_session_spec("ann-token:sara:annotator"), parse_session_spec("lead-token:reza:leader")};
  return cfg;
}

struct Api {
  explicit Api(int port) : client("127.0.0.1", port) {}

  httplib::Headers auth(const std::string& token) const { return {{"Authorization", "Bearer " + token}}; }

  std::pair<int, json> get(const std::string& path, const std::string& token = "ann-token") {
    auto r = client.Get(path, auth(token));
    REQUIRE(r);
    return {r->status, r->body.empty() ? json() : json::parse(r->body, nullptr, false)};
  }
  std::pair<int, json> post(const std::string& path, const json& body, const std::string& token = "ann-token") {
    auto r = client.Post(path, auth(token), body.dump(), "application/json");
    REQUIRE(r);
    return {r->status, json::parse(r->body, nullptr, false)};
  }
  std::pair<int, json> put(const std::string& path, const json& body, const std::string& token = "ann-token") {
    auto r = client.Put(path, auth(token), body.dump(), "application/json");
    REQUIRE(r);
    return {r->status, json::parse(r->body, nullptr, false)};
  }
  std::pair<int, json> del(const std::string& path, const std::string& token = "ann-token") {
    auto r = client.Delete(path, auth(token));
    REQUIRE(r);
    return {r->status, json::parse(r->body, nullptr, false)};
  }

  httplib::Client client;
};

json draft_from_conversion(Api& api, const std::string& informal, const std::string& source = "twitter") {
  auto [status, conv] = api.post("/convert", {{"text", informal}});
  REQUIRE(status == 200);
  json rec;
  rec["informal"] = informal;
  rec["formal"] = conv["formal_text"];
  rec["links"] = conv["links"];
  rec["source"] = source;
  rec["syntactic_change"] = conv["syntactic_change"];
  return rec;
}

}  // namespace

TEST_CASE("session specs parse") {
  const auto s = parse_session_spec("t:name:leader");
  CHECK(s.token == "t");
  CHECK(s.annotator == "name");
  CHECK(s.role == Role::leader);
  CHECK_THROWS_AS(parse_session_spec("t:name"), std::invalid_argument);
  CHECK_THROWS_AS(parse_session_spec("t:name:boss"), std::invalid_argument);
}

TEST_CASE("authentication") {
  Service service(shared_converter(), config());
  Api api(service.start());
  auto health = api.client.Get("/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(api.get("/stats", "wrong").first == 401);
  auto none = api.client.Get("/stats");
  REQUIRE(none);
  CHECK(none->status == 401);
  const auto [status, me] = api.get("/session", "lead-token");
  CHECK(status == 200);
  CHECK(me["annotator"] == "reza");
  CHECK(me["role"] == "leader");
}

TEST_CASE("convert, crud, status, suggest, stats, dictionary and evaluate over http") {
  Service service(shared_converter(), config());
  Api api(service.start());

  SUBCASE("convert fixture 1") {
    const auto [status, body] = api.post("/convert", {{"text", "یه هندونه وردار!"}});
    CHECK(status == 200);
    CHECK(body["formal_text"] == "یک هندوانه بردار!");
    CHECK(body["links"].size() == 3);
    CHECK(api.post("/convert", {{"nope", 1}}).first == 400);
  }

  SUBCASE("empty store stats are zero") {
    const auto [status, stats] = api.get("/stats");
    CHECK(status == 200);
    CHECK(stats["record_count"] == 0);
    CHECK(stats["avg_formal_length"] == 0.0);
    CHECK(stats["pct_syntactic_change"] == 0.0);
  }

  SUBCASE("full workflow") {
    // create
    auto [s1, created] = api.post("/records", draft_from_conversion(api, "یه هندونه وردار!"));
    REQUIRE(s1 == 201);
    const std::string id = created["record"]["id"];
    CHECK(created["version"] == 1);
    CHECK(created["record"]["annotator"] == "sara");
    CHECK(created["record"]["status"] == "draft");
    auto [s2, second] = api.post("/records", draft_from_conversion(api, "قلم کاغذ بیار", "movie"));
    REQUIRE(s2 == 201);
    const std::string id2 = second["record"]["id"];
    CHECK(id != id2);

    // validation errors carry issue lists; warnings pass through
    json bad = draft_from_conversion(api, "منو ندید");
    bad["links"] = json::array({{{"informal", {0, 1}}, {"formal", {0, 9}}}});
    auto [s3, err] = api.post("/records", bad);
    CHECK(s3 == 400);
    CHECK(err["error"] == "validation");
    CHECK(err["issues"][0]["code"] == "out-of-bounds");
    json gap = draft_from_conversion(api, "منو ندید");
    gap["links"] = json::array({{{"informal", {0, 1}}, {"formal", {0, 2}}}});
    auto [s4, warned] = api.post("/records", gap);
    CHECK(s4 == 201);
    CHECK(warned["issues"].size() >= 1);
    const std::string id3 = warned["record"]["id"];
    json confirmed = draft_from_conversion(api, "منو ندید");
    confirmed["status"] = "confirmed";
    CHECK(api.post("/records", confirmed).first == 400);

    // read and filter
    CHECK(api.get("/records/" + id).second["record"]["formal"] == "یک هندوانه بردار!");
    CHECK(api.get("/records/nope").first == 404);
    CHECK(api.get("/records").second["count"] == 3);
    CHECK(api.get("/records?source=movie").second["count"] == 1);
    CHECK(api.get("/records?status=draft&annotator=sara").second["count"] == 3);
    CHECK(api.get("/records?annotator=reza").second["count"] == 0);
    CHECK(api.get("/records?q=" + httplib::detail::encode_url("هندوانه")).second["count"] == 1);
    CHECK(api.get("/records?source=newspaper").first == 400);

    // optimistic versioning
    json update = api.get("/records/" + id).second;
    update["record"]["formal"] = "یک هندوانه بردار !";
    update["record"]["links"] = json::array({{{"informal", {0, 1}}, {"formal", {0, 1}}},
                                             {{"informal", {1, 2}}, {"formal", {1, 2}}},
                                             {{"informal", {2, 3}}, {"formal", {2, 4}}}});
    auto [s5, updated] = api.put("/records/" + id, update);
    CHECK(s5 == 200);
    CHECK(updated["version"] == 2);
    auto [s6, conflict] = api.put("/records/" + id, update);
    CHECK(s6 == 409);
    CHECK(conflict["error"] == "version-conflict");
    CHECK(conflict["current"]["version"] == 2);
    json status_edit = api.get("/records/" + id).second;
    status_edit["record"]["status"] = "reviewed";
    CHECK(api.put("/records/" + id, status_edit).first == 400);
    json wrong_path = api.get("/records/" + id).second;
    CHECK(api.put("/records/" + id2, wrong_path).first == 400);

    // status transitions
    CHECK(api.post("/records/" + id + "/status", {{"status", "confirmed"}}, "lead-token").first == 400);
    auto [s7, reviewed] = api.post("/records/" + id + "/status", {{"status", "reviewed"}, {"version", 2}});
    CHECK(s7 == 200);
    CHECK(reviewed["version"] == 3);
    CHECK(api.post("/records/" + id + "/status", {{"status", "confirmed"}}).first == 403);
    CHECK(api.post("/records/" + id + "/status", {{"status", "confirmed"}, {"version", 2}}, "lead-token").first ==
          409);
    CHECK(api.post("/records/" + id + "/status", {{"status", "confirmed"}}, "lead-token").first == 200);
    CHECK(api.post("/records/" + id + "/status", {{"status", "draft"}}, "lead-token").first == 400);
    CHECK(api.post("/records/nope/status", {{"status", "reviewed"}}).first == 404);

    // history picked up the reviewed record
    CHECK(service.history()->count("هندونه", "هندوانه") == 1);
    auto [s8, sug] = api.post("/suggest", {{"informal", "هندونه بخر"}, {"formal", "هندوانه بخر"}});
    CHECK(s8 == 200);
    bool from_history = false;
    for (const auto& s : sug["suggestions"]) {
      if (s["provenance"] == "history") {
        from_history = true;
        CHECK(s["informal"] == json::array({0, 1}));
        CHECK(s["formal"] == json::array({0, 1}));
        CHECK(s["score"] == 1);
      }
    }
    CHECK(from_history);
    CHECK(api.post("/suggest", {{"informal", ""}, {"formal", "x"}}).first == 400);

    // stats agree with the unfiltered record listing
    const auto listing = api.get("/records").second;
    std::vector<CorpusRecord> records;
    for (const auto& row : listing["records"]) records.push_back(record_from_json(row["record"]));
    const auto [s9, stats] = api.get("/stats");
    CHECK(s9 == 200);
    CHECK(stats == json::parse(stats_to_json(compute_stats(records)).dump()));
    const auto [s10, sources] = api.get("/stats/sources");
    CHECK(s10 == 200);
    CHECK(sources["total"] == records.size());
    CHECK(sources["sources"].size() == 8);

    // every record returned passes validation
    for (const auto& r : records) CHECK_FALSE(has_errors(validate_record(r)));

    // dictionary
    auto dict = api.client.Get("/dictionary", api.auth("ann-token"));
    REQUIRE(dict);
    CHECK(dict->status == 200);
    CHECK(dict->body.find("هندونه\tهندوانه") != std::string::npos);

    // delete
    CHECK(api.del("/records/" + id + "?version=4").first == 403);
    CHECK(api.del("/records/" + id3 + "?version=7").first == 409);
    CHECK(api.del("/records/" + id3 + "?version=1").first == 200);
    CHECK(api.get("/records/" + id3).first == 404);
    CHECK(api.del("/records/" + id + "?version=4", "lead-token").first == 200);
    CHECK(api.get("/records").second["count"] == 1);
    CHECK(service.history()->count("هندونه", "هندوانه") == 0);
  }

  SUBCASE("evaluate") {
    json body;
    body["hyp"] = json::array({"a b c d", "a b"});
    body["ref"] = json::array({"a b c d e", "a b c"});
    body["min_len"] = 4;
    body["max_len"] = 25;
    const auto [status, rep] = api.post("/evaluate", body);
    CHECK(status == 200);
    CHECK(rep["scored_pairs"] == 1);
    CHECK(rep["filtered_out"] == 1);
    CHECK(rep["corpus_bleu"].get<double>() == doctest::Approx(std::exp(-0.25)).epsilon(1e-9));
    body["ref"] = json::array({"a"});
    CHECK(api.post("/evaluate", body).first == 400);
    CHECK(api.post("/evaluate", {{"hyp", "a\nb"}, {"ref", "a\nb"}}).second["total_pairs"] == 2);
  }
}

TEST_CASE("concurrent stale writers: exactly one wins") {
  Service service(shared_converter(), config());
  const int port = service.start();
  Api api(port);
  auto [status, created] = api.post("/records", draft_from_conversion(api, "یه هندونه وردار!"));
  REQUIRE(status == 201);
  const std::string id = created["record"]["id"];
  const json base = api.get("/records/" + id).second;

  std::atomic<int> ok{0};
  std::atomic<int> conflicts{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      httplib::Client c("127.0.0.1", port);
      json body = base;
      body["record"]["annotator"] = "writer-" + std::to_string(t);
      auto r = c.Put("/records/" + id, {{"Authorization", "Bearer ann-token"}}, body.dump(), "application/json");
      if (r && r->status == 200) ++ok;
      if (r && r->status == 409) ++conflicts;
    });
  }
  for (auto& t : threads) t.join();
  CHECK(ok == 1);
  CHECK(conflicts == 7);
  CHECK(api.get("/records/" + id).second["version"] == 2);
}

TEST_CASE("corpus and history persist across restarts") {
  const auto dir = std::filesystem::temp_directory_path() / "shekaste-service-test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  auto cfg = config();
  cfg.corpus_path = dir / "corpus.jsonl";
  cfg.history_path = dir / "history.snap";
  std::string id;
  {
    Service service(shared_converter(), cfg);
    Api api(service.start());
    auto [status, created] = api.post("/records", draft_from_conversion(api, "یه هندونه وردار!"));
    REQUIRE(status == 201);
    id = created["record"]["id"];
    CHECK(api.post("/records/" + id + "/status", {{"status", "reviewed"}}).first == 200);
  }
  CHECK(load_corpus(cfg.corpus_path).size() == 1);
  CHECK(AlignmentHistory::load(cfg.history_path).count("هندونه", "هندوانه") == 1);
  {
    Service service(shared_converter(), cfg);
    Api api(service.start());
    const auto [status, body] = api.get("/records/" + id);
    CHECK(status == 200);
    CHECK(body["record"]["status"] == "reviewed");
    CHECK(service.history()->count("هندونه", "هندوانه") == 1);
    auto [s2, next] = api.post("/records", draft_from_conversion(api, "قلم کاغذ بیار"));
    CHECK(s2 == 201);
    CHECK(next["record"]["id"] != id);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("store rules without http") {
  CorpusStore store;
  auto r = testing::make_record("", "من", "من", testing::diagonal(1));
  const auto a = store.create(r);
  CHECK(a.record.id == "rec-1");
  CHECK_THROWS_AS(store.create(a.record), StoreError);
  CHECK_THROWS_AS(store.update(a.record, 5, Role::leader), StoreError);
  const auto b = store.set_status("rec-1", Status::reviewed, std::nullopt, Role::annotator);
  CHECK(b.version == 2);
  try {
    store.set_status("rec-1", Status::confirmed, std::nullopt, Role::annotator);
    FAIL("expected StoreError");
  } catch (const StoreError& e) {
    CHECK(e.kind() == StoreError::Kind::forbidden);
  }
  CHECK(store.set_status("rec-1", Status::confirmed, 2, Role::leader).version == 3);
  auto edited = store.get("rec-1")->record;
  edited.formal = "من!";
  try {
    store.update(edited, 3, Role::annotator);
    FAIL("expected StoreError");
  } catch (const StoreError& e) {
    CHECK(e.kind() == StoreError::Kind::forbidden);
  }
  CHECK(store.update(edited, 3, Role::leader).version == 4);
  RecordFilter f;
  f.query = "!";
  CHECK(store.list(f).size() == 1);
}
