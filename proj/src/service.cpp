#include "shekaste/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "shekaste/bleu.hpp"
#include "shekaste/serialize.hpp"
#include "shekaste/text.hpp"

namespace shekaste {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Role role) { return role == Role::leader ? "leader" : "annotator"; }

std::optional<Role> parse_role(std::string_view name) {
  if (name == "leader") return Role::leader;
  if (name == "annotator") return Role::annotator;
  return std::nullopt;
}

ApiSession parse_session_spec(std::string_view spec) {
  const auto a = spec.find(':');
  const auto b = a == std::string_view::npos ? a : spec.find(':', a + 1);
  if (b == std::string_view::npos) throw std::invalid_argument("session must be token:annotator:role");
  ApiSession s;
  s.token = std::string(spec.substr(0, a));
  s.annotator = std::string(spec.substr(a + 1, b - a - 1));
  const auto role = parse_role(spec.substr(b + 1));
  if (s.token.empty() || s.annotator.empty() || !role) {
    throw std::invalid_argument("session must be token:annotator:role with role annotator or leader");
  }
  s.role = *role;
  return s;
}

bool RecordFilter::matches(const CorpusRecord& r) const {
  if (source && r.source != *source) return false;
  if (status && r.status != *status) return false;
  if (annotator && r.annotator != *annotator) return false;
  if (!query.empty() && r.informal.find(query) == std::string::npos && r.formal.find(query) == std::string::npos) {
    return false;
  }
  return true;
}

StoreError::StoreError(Kind kind, const std::string& message, std::vector<RecordIssue> issues,
                       std::optional<StoredRecord> current)
    : std::runtime_error(message), kind_(kind), issues_(std::move(issues)), current_(std::move(current)) {}

// ---- store -----------------------------------------------------------------

namespace {

std::vector<RecordIssue> split_warnings(std::vector<RecordIssue> issues, std::vector<RecordIssue>* warnings) {
  std::vector<RecordIssue> errors;
  for (auto& i : issues) {
    if (i.is_error()) errors.push_back(std::move(i));
    else if (warnings) warnings->push_back(std::move(i));
  }
  return errors;
}

RecordIssue simple_issue(std::string code, std::string message) {
  RecordIssue i;
  i.code = std::move(code);
  i.message = std::move(message);
  return i;
}

std::uint64_t numeric_suffix(const std::string& id) {
  if (id.rfind("rec-", 0) != 0) return 0;
  try {
    return std::stoull(id.substr(4));
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

CorpusStore::CorpusStore(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.empty() || !std::filesystem::exists(path_)) return;
  std::ifstream in(path_, std::ios::binary);
  CorpusReader reader(in, path_.string());
  while (auto r = reader.next()) {
    const auto issues = validate_record(*r);
    if (has_errors(issues)) throw CorpusError(path_.string(), reader.line(), "record fails validation", r->id);
    if (records_.count(r->id)) throw CorpusError(path_.string(), reader.line(), "duplicate record id", r->id);
    next_id_ = std::max(next_id_, numeric_suffix(r->id) + 1);
    std::string id = r->id;
    order_.push_back(id);
    records_.emplace(std::move(id), StoredRecord{std::move(*r), 1});
  }
}

void CorpusStore::persist_locked() const {
  if (path_.empty()) return;
  std::vector<CorpusRecord> out;
  out.reserve(order_.size());
  for (const auto& id : order_) out.push_back(records_.at(id).record);
  save_corpus(out, path_);
}

StoredRecord& CorpusStore::find_locked(const std::string& id) {
  const auto it = records_.find(id);
  if (it == records_.end()) throw StoreError(StoreError::Kind::not_found, "no record '" + id + "'");
  return it->second;
}

void CorpusStore::check_version(const StoredRecord& stored, std::uint64_t expected) const {
  if (stored.version != expected) {
    throw StoreError(StoreError::Kind::conflict,
                     "record '" + stored.record.id + "' is at version " + std::to_string(stored.version) +
                         ", not " + std::to_string(expected),
                     {}, stored);
  }
}

StoredRecord CorpusStore::create(CorpusRecord record, std::vector<RecordIssue>* warnings) {
  std::unique_lock lock(mutex_);
  if (record.status != Status::draft) {
    throw StoreError(StoreError::Kind::invalid, "new records start as drafts",
                     {simple_issue("initial-status", "new records must have status draft")});
  }
  if (record.id.empty()) {
    while (records_.count("rec-" + std::to_string(next_id_))) ++next_id_;
    record.id = "rec-" + std::to_string(next_id_++);
  } else if (records_.count(record.id)) {
    throw StoreError(StoreError::Kind::exists, "record '" + record.id + "' already exists");
  }
  auto errors = split_warnings(validate_record(record), warnings);
  if (!errors.empty()) throw StoreError(StoreError::Kind::invalid, "record fails validation", std::move(errors));
  next_id_ = std::max(next_id_, numeric_suffix(record.id) + 1);
  std::string id = record.id;
  order_.push_back(id);
  const auto& stored = records_.emplace(std::move(id), StoredRecord{std::move(record), 1}).first->second;
  persist_locked();
  return stored;
}

std::optional<StoredRecord> CorpusStore::get(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const auto it = records_.find(id);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::vector<StoredRecord> CorpusStore::list(const RecordFilter& filter) const {
  std::shared_lock lock(mutex_);
  std::vector<StoredRecord> out;
  for (const auto& id : order_) {
    const auto& s = records_.at(id);
    if (filter.matches(s.record)) out.push_back(s);
  }
  return out;
}

std::vector<CorpusRecord> CorpusStore::records() const {
  std::shared_lock lock(mutex_);
  std::vector<CorpusRecord> out;
  out.reserve(order_.size());
  for (const auto& id : order_) out.push_back(records_.at(id).record);
  return out;
}

std::size_t CorpusStore::size() const {
  std::shared_lock lock(mutex_);
  return records_.size();
}

StoredRecord CorpusStore::update(CorpusRecord record, std::uint64_t expected_version, Role role,
                                 std::vector<RecordIssue>* warnings) {
  std::unique_lock lock(mutex_);
  auto& stored = find_locked(record.id);
  check_version(stored, expected_version);
  if (stored.record.status == Status::confirmed && role != Role::leader) {
    throw StoreError(StoreError::Kind::forbidden, "only a leader may edit a confirmed record");
  }
  if (record.status != stored.record.status) {
    throw StoreError(StoreError::Kind::invalid, "status changes go through the status endpoint",
                     {simple_issue("status-via-put", "status must stay " + std::string(to_string(stored.record.status)))});
  }
  auto errors = split_warnings(validate_record(record, &stored.record), warnings);
  if (!errors.empty()) throw StoreError(StoreError::Kind::invalid, "record fails validation", std::move(errors));
  stored.record = std::move(record);
  ++stored.version;
  persist_locked();
  return stored;
}

StoredRecord CorpusStore::set_status(const std::string& id, Status status,
                                     std::optional<std::uint64_t> expected_version, Role role) {
  std::unique_lock lock(mutex_);
  auto& stored = find_locked(id);
  if (expected_version) check_version(stored, *expected_version);
  if (!status_transition_allowed(stored.record.status, status)) {
    throw StoreError(StoreError::Kind::invalid, "illegal status transition",
                     {simple_issue("illegal-transition", std::string(to_string(stored.record.status)) + " -> " +
                                                             std::string(to_string(status)))});
  }
  if (status == Status::confirmed && stored.record.status != Status::confirmed && role != Role::leader) {
    throw StoreError(StoreError::Kind::forbidden, "only a leader may confirm a record");
  }
  if (status == stored.record.status) return stored;
  stored.record.status = status;
  ++stored.version;
  persist_locked();
  return stored;
}

StoredRecord CorpusStore::remove(const std::string& id, std::uint64_t expected_version, Role role) {
  std::unique_lock lock(mutex_);
  auto& stored = find_locked(id);
  check_version(stored, expected_version);
  if (stored.record.status != Status::draft && role != Role::leader) {
    throw StoreError(StoreError::Kind::forbidden, "only a leader may delete a reviewed or confirmed record");
  }
  StoredRecord removed = std::move(stored);
  records_.erase(id);
  order_.erase(std::find(order_.begin(), order_.end(), id));
  persist_locked();
  return removed;
}

// ---- HTTP ------------------------------------------------------------------

namespace {

struct HttpError {
  int status;
  std::string code;
  std::string message;
  std::vector<RecordIssue> issues;
  std::optional<StoredRecord> current;
};

ordered_json stored_to_json(const StoredRecord& s) {
  ordered_json out;
  out["record"] = record_to_json(s.record);
  out["version"] = s.version;
  return out;
}

ordered_json issues_to_json(const std::vector<RecordIssue>& issues) {
  ordered_json out = ordered_json::array();
  for (const auto& i : issues) out.push_back(issue_to_json(i));
  return out;
}

void send_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, const HttpError& e) {
  ordered_json body;
  body["error"] = e.code;
  body["message"] = e.message;
  body["issues"] = issues_to_json(e.issues);
  if (e.current) body["current"] = stored_to_json(*e.current);
  if (e.status == 401) res.set_header("WWW-Authenticate", "Bearer");
  send_json(res, e.status, body);
}

HttpError from_store_error(const StoreError& e) {
  switch (e.kind()) {
    case StoreError::Kind::not_found:
      return {404, "not-found", e.what(), e.issues(), {}};
    case StoreError::Kind::conflict:
      return {409, "version-conflict", e.what(), e.issues(), e.current()};
    case StoreError::Kind::forbidden:
      return {403, "forbidden", e.what(), e.issues(), {}};
    case StoreError::Kind::exists:
      return {409, "exists", e.what(), e.issues(), {}};
    case StoreError::Kind::invalid:
      break;
  }
  return {400, "validation", e.what(), e.issues(), {}};
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw HttpError{400, "bad-request", "body must be a JSON object", {}, {}};
  return body;
}

std::string string_field(const json& body, const char* key) {
  const auto it = body.find(key);
  if (it == body.end() || !it->is_string()) {
    throw HttpError{400, "bad-request", std::string("'") + key + "' must be a string", {}, {}};
  }
  return it->get<std::string>();
}

std::uint64_t version_field(const json& body) {
  const auto it = body.find("version");
  if (it == body.end() || !it->is_number_unsigned()) {
    throw HttpError{400, "bad-request", "'version' must be a positive integer", {}, {}};
  }
  return it->get<std::uint64_t>();
}

CorpusRecord record_field(const json& body) {
  const auto it = body.find("record");
  const json& value = it == body.end() ? body : *it;
  try {
    return record_from_json(value);
  } catch (const std::invalid_argument& e) {
    throw HttpError{400, "bad-request", e.what(), {}, {}};
  }
}

// Fills defaults so a client may omit bookkeeping fields on create.
json with_defaults(json value, const ApiSession& session) {
  if (!value.contains("id")) value["id"] = "";
  if (!value.contains("links")) value["links"] = json::array();
  if (!value.contains("source")) value["source"] = "web";
  if (!value.contains("annotator")) value["annotator"] = session.annotator;
  if (!value.contains("created_at")) value["created_at"] = current_timestamp();
  if (!value.contains("status")) value["status"] = "draft";
  if (!value.contains("syntactic_change")) value["syntactic_change"] = false;
  return value;
}

std::vector<std::string> lines_field(const json& body, const char* key) {
  const auto it = body.find(key);
  std::vector<std::string> out;
  if (it != body.end() && it->is_string()) {
    std::istringstream in(it->get<std::string>());
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      out.push_back(line);
    }
    return out;
  }
  if (it != body.end() && it->is_array()) {
    for (const auto& v : *it) {
      if (!v.is_string()) break;
      out.push_back(v.get<std::string>());
    }
    if (out.size() == it->size()) return out;
  }
  throw HttpError{400, "bad-request", std::string("'") + key + "' must be a string or an array of strings", {}, {}};
}

}  // namespace

struct Service::Impl {
  std::shared_ptr<const Converter> converter;
  ServiceConfig config;
  CorpusStore store;
  httplib::Server server;
  std::map<std::string, ApiSession, std::less<>> sessions;

  struct Snapshot {
    std::shared_ptr<const AlignmentHistory> history;
    std::shared_ptr<const Lexicon> lexicon;
  };
  mutable std::mutex snapshot_mutex;
  Snapshot snapshot;
  // Serializes store writes with the history rebuild that follows them.
  std::mutex writer;
  std::thread thread;
  int port = -1;

  Impl(std::shared_ptr<const Converter> c, ServiceConfig cfg)
      : converter(std::move(c)), config(std::move(cfg)), store(config.corpus_path) {
    for (const auto& s : config.sessions) sessions[s.token] = s;
    rebuild();
    routes();
  }

  Snapshot current() const {
    std::lock_guard lock(snapshot_mutex);
    return snapshot;
  }

  void rebuild() {
    const auto records = store.records();
    auto history = std::make_shared<const AlignmentHistory>(rebuild_history(records));
    auto lexicon = std::make_shared<const Lexicon>(history->to_lexicon());
    if (!config.history_path.empty()) history->save(config.history_path);
    std::lock_guard lock(snapshot_mutex);
    snapshot = {std::move(history), std::move(lexicon)};
  }

  const ApiSession& authenticate(const httplib::Request& req) const {
    const auto header = req.get_header_value("Authorization");
    constexpr std::string_view prefix = "Bearer ";
    if (header.rfind(prefix, 0) == 0) {
      const auto it = sessions.find(std::string_view(header).substr(prefix.size()));
      if (it != sessions.end()) return it->second;
    }
    throw HttpError{401, "unauthorized", "missing or unknown bearer token", {}, {}};
  }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&, const ApiSession&)>;

  httplib::Server::Handler wrap(Handler h) {
    return [this, h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res, authenticate(req));
      } catch (const HttpError& e) {
        send_error(res, e);
      } catch (const StoreError& e) {
        send_error(res, from_store_error(e));
      } catch (const InvalidRecordError& e) {
        send_error(res, {400, "validation", e.what(), e.issues(), {}});
      } catch (const DecodeError& e) {
        send_error(res, {400, "bad-request", e.what(), {}, {}});
      } catch (const std::invalid_argument& e) {
        send_error(res, {400, "bad-request", e.what(), {}, {}});
      } catch (const std::exception& e) {
        send_error(res, {500, "internal", e.what(), {}, {}});
      }
    };
  }

  // Writes that can change the reviewed/confirmed set refresh the history.
  template <typename F>
  auto write(F&& f) {
    std::lock_guard lock(writer);
    auto result = f();
    rebuild();
    return result;
  }

  void routes() {
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, ordered_json{{"status", "ok"}});
    });

    server.Get("/session", wrap([](const auto&, auto& res, const ApiSession& s) {
      send_json(res, 200, ordered_json{{"annotator", s.annotator}, {"role", std::string(to_string(s.role))}});
    }));

    server.Post("/convert", wrap([this](const auto& req, auto& res, const ApiSession&) {
      const json body = parse_body(req);
      ConverterConfig cfg;
      if (body.contains("syntactic_transforms")) {
        if (!body["syntactic_transforms"].is_boolean()) {
          throw HttpError{400, "bad-request", "'syntactic_transforms' must be a boolean", {}, {}};
        }
        cfg.syntactic_transforms = body["syntactic_transforms"].get<bool>();
      }
      cfg.history = current().lexicon;
      send_json(res, 200, conversion_to_json(converter->convert(string_field(body, "text"), cfg)));
    }));

    server.Post("/suggest", wrap([this](const auto& req, auto& res, const ApiSession&) {
      const json body = parse_body(req);
      const auto inf = normalized_tokens(string_field(body, "informal"));
      const auto form = normalized_tokens(string_field(body, "formal"));
      if (inf.empty() || form.empty()) {
        throw HttpError{400, "bad-request", "both sentences must contain tokens", {}, {}};
      }
      const auto snap = current();
      ordered_json out;
      out["informal_tokens"] = inf;
      out["formal_tokens"] = form;
      out["suggestions"] = suggestions_to_json(suggest(inf, form, *snap.history));
      send_json(res, 200, out);
    }));

    server.Post("/records", wrap([this](const auto& req, auto& res, const ApiSession& s) {
      const json body = parse_body(req);
      json value = body.contains("record") ? body["record"] : body;
      if (!value.is_object()) throw HttpError{400, "bad-request", "'record' must be an object", {}, {}};
      auto record = record_field(with_defaults(std::move(value), s));
      std::vector<RecordIssue> warnings;
      const auto stored = write([&] { return store.create(std::move(record), &warnings); });
      auto out = stored_to_json(stored);
      out["issues"] = issues_to_json(warnings);
      send_json(res, 201, out);
    }));

    server.Get("/records", wrap([this](const auto& req, auto& res, const ApiSession&) {
      RecordFilter filter;
      if (req.has_param("source")) {
        filter.source = parse_source(req.get_param_value("source"));
        if (!filter.source) throw HttpError{400, "bad-request", "unknown source", {}, {}};
      }
      if (req.has_param("status")) {
        filter.status = parse_status(req.get_param_value("status"));
        if (!filter.status) throw HttpError{400, "bad-request", "unknown status", {}, {}};
      }
      if (req.has_param("annotator")) filter.annotator = req.get_param_value("annotator");
      if (req.has_param("q")) filter.query = req.get_param_value("q");
      ordered_json rows = ordered_json::array();
      for (const auto& r : store.list(filter)) rows.push_back(stored_to_json(r));
      ordered_json out;
      out["count"] = rows.size();
      out["records"] = std::move(rows);
      send_json(res, 200, out);
    }));

    server.Get(R"(/records/([^/]+))", wrap([this](const auto& req, auto& res, const ApiSession&) {
      const auto r = store.get(req.matches[1]);
      if (!r) throw HttpError{404, "not-found", "no record '" + std::string(req.matches[1]) + "'", {}, {}};
      send_json(res, 200, stored_to_json(*r));
    }));

    server.Put(R"(/records/([^/]+))", wrap([this](const auto& req, auto& res, const ApiSession& s) {
      const json body = parse_body(req);
      const auto version = version_field(body);
      auto record = record_field(body);
      if (record.id != req.matches[1]) throw HttpError{400, "bad-request", "record id does not match the path", {}, {}};
      std::vector<RecordIssue> warnings;
      const auto stored = write([&] { return store.update(std::move(record), version, s.role, &warnings); });
      auto out = stored_to_json(stored);
      out["issues"] = issues_to_json(warnings);
      send_json(res, 200, out);
    }));

    server.Delete(R"(/records/([^/]+))", wrap([this](const auto& req, auto& res, const ApiSession& s) {
      if (!req.has_param("version")) throw HttpError{400, "bad-request", "'version' query parameter required", {}, {}};
      std::uint64_t version = 0;
      try {
        version = std::stoull(req.get_param_value("version"));
      } catch (const std::exception&) {
        throw HttpError{400, "bad-request", "'version' must be a positive integer", {}, {}};
      }
      const std::string id = req.matches[1];
      const auto removed = write([&] { return store.remove(id, version, s.role); });
      send_json(res, 200, stored_to_json(removed));
    }));

    server.Post(R"(/records/([^/]+)/status)", wrap([this](const auto& req, auto& res, const ApiSession& s) {
      const json body = parse_body(req);
      const auto status = parse_status(string_field(body, "status"));
      if (!status) throw HttpError{400, "bad-request", "unknown status", {}, {}};
      std::optional<std::uint64_t> version;
      if (body.contains("version")) version = version_field(body);
      const std::string id = req.matches[1];
      const auto stored = write([&] { return store.set_status(id, *status, version, s.role); });
      send_json(res, 200, stored_to_json(stored));
    }));

    server.Get("/stats", wrap([this](const auto&, auto& res, const ApiSession&) {
      send_json(res, 200, stats_to_json(compute_stats(store.records())));
    }));

    server.Get("/stats/sources", wrap([this](const auto&, auto& res, const ApiSession&) {
      send_json(res, 200, source_distribution_json(compute_stats(store.records())));
    }));

    server.Get("/dictionary", wrap([this](const auto&, auto& res, const ApiSession&) {
      const auto records = store.records();
      std::ostringstream out;
      write_lexicon(extract_dictionary(records).dictionary, out);
      auto text = std::make_shared<std::string>(out.str());
      res.set_chunked_content_provider("text/tab-separated-values; charset=utf-8",
                                       [text](std::size_t offset, httplib::DataSink& sink) {
                                         constexpr std::size_t kChunk = 64 * 1024;
                                         if (offset < text->size()) {
                                           sink.write(text->data() + offset, std::min(kChunk, text->size() - offset));
                                         }
                                         if (offset + kChunk >= text->size()) sink.done();
                                         return true;
                                       });
    }));

    server.Post("/evaluate", wrap([](const auto& req, auto& res, const ApiSession&) {
      const json body = parse_body(req);
      const auto hyp = lines_field(body, "hyp");
      const auto ref = lines_field(body, "ref");
      if (hyp.size() != ref.size()) {
        throw HttpError{400, "bad-request",
                        "hyp has " + std::to_string(hyp.size()) + " lines, ref has " + std::to_string(ref.size()),
                        {}, {}};
      }
      BleuConfig cfg;
      const bool has_min = body.contains("min_len");
      const bool has_max = body.contains("max_len");
      if (has_min || has_max) {
        LengthRange range{0, std::numeric_limits<std::size_t>::max()};
        if (has_min) {
          if (!body["min_len"].is_number_unsigned()) throw HttpError{400, "bad-request", "bad 'min_len'", {}, {}};
          range.min = body["min_len"].get<std::size_t>();
        }
        if (has_max) {
          if (!body["max_len"].is_number_unsigned()) throw HttpError{400, "bad-request", "bad 'max_len'", {}, {}};
          range.max = body["max_len"].get<std::size_t>();
        }
        cfg.length_filter = range;
      }
      send_json(res, 200, report_to_json(evaluate_lines(hyp, ref, cfg)));
    }));
  }
};

Service::Service(std::shared_ptr<const Converter> converter, ServiceConfig config)
    : impl_(std::make_unique<Impl>(std::move(converter), std::move(config))) {}

Service::~Service() { stop(); }

int Service::bind() {
  if (impl_->port >= 0) return impl_->port;
  if (impl_->config.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(impl_->config.host);
  } else if (impl_->server.bind_to_port(impl_->config.host, impl_->config.port)) {
    impl_->port = impl_->config.port;
  }
  if (impl_->port < 0) {
    throw std::runtime_error("cannot bind " + impl_->config.host + ":" + std::to_string(impl_->config.port));
  }
  return impl_->port;
}

void Service::run() {
  bind();
  impl_->server.listen_after_bind();
}

int Service::start() {
  const int port = bind();
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void Service::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

CorpusStore& Service::store() { return impl_->store; }

std::shared_ptr<const AlignmentHistory> Service::history() const { return impl_->current().history; }

}  // namespace shekaste
