#pragma once

// HTTP API over the converter, the suggestion history and a versioned
// record store.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "shekaste/converter.hpp"
#include "shekaste/corpus.hpp"
#include "shekaste/suggest.hpp"

namespace shekaste {

enum class Role { annotator, leader };
std::string_view to_string(Role role);
std::optional<Role> parse_role(std::string_view name);

struct ApiSession {
  std::string annotator;
  std::string token;
  Role role = Role::annotator;
};

// "token:annotator:role". Throws std::invalid_argument.
ApiSession parse_session_spec(std::string_view spec);

struct StoredRecord {
  CorpusRecord record;
  std::uint64_t version = 1;
};

struct RecordFilter {
  std::optional<Source> source;
  std::optional<Status> status;
  std::optional<std::string> annotator;
  std::string query;  // substring of informal or formal text

  bool matches(const CorpusRecord& record) const;
};

class StoreError : public std::runtime_error {
 public:
  enum class Kind { not_found, conflict, invalid, forbidden, exists };

  StoreError(Kind kind, const std::string& message, std::vector<RecordIssue> issues = {},
             std::optional<StoredRecord> current = std::nullopt);
  Kind kind() const { return kind_; }
  const std::vector<RecordIssue>& issues() const { return issues_; }
  // Server copy on a version conflict.
  const std::optional<StoredRecord>& current() const { return current_; }

 private:
  Kind kind_;
  std::vector<RecordIssue> issues_;
  std::optional<StoredRecord> current_;
};

// Readers share, writers are exclusive. With a path, every write rewrites
// the JSONL file atomically; versions restart at 1 on load.
class CorpusStore {
 public:
  CorpusStore() = default;
  explicit CorpusStore(std::filesystem::path path);

  // New records must be drafts. An empty id is assigned. Returns the stored
  // copy plus validation warnings.
  StoredRecord create(CorpusRecord record, std::vector<RecordIssue>* warnings = nullptr);
  std::optional<StoredRecord> get(const std::string& id) const;
  std::vector<StoredRecord> list(const RecordFilter& filter = {}) const;
  std::vector<CorpusRecord> records() const;
  std::size_t size() const;

  // Content edit; the status must stay as stored.
  StoredRecord update(CorpusRecord record, std::uint64_t expected_version, Role role,
                      std::vector<RecordIssue>* warnings = nullptr);
  StoredRecord set_status(const std::string& id, Status status, std::optional<std::uint64_t> expected_version,
                          Role role);
  StoredRecord remove(const std::string& id, std::uint64_t expected_version, Role role);

 private:
  void persist_locked() const;
  StoredRecord& find_locked(const std::string& id);
  void check_version(const StoredRecord& stored, std::uint64_t expected) const;

  mutable std::shared_mutex mutex_;
  std::map<std::string, StoredRecord, std::less<>> records_;
  std::vector<std::string> order_;
  std::uint64_t next_id_ = 1;
  std::filesystem::path path_;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path corpus_path;
  std::filesystem::path history_path;
  std::vector<ApiSession> sessions;
};

class Service {
 public:
  Service(std::shared_ptr<const Converter> converter, ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds the socket and returns the port.
  int bind();
  // Blocks until stop().
  void run();
  // bind() then run() on a background thread.
  int start();
  void stop();

  CorpusStore& store();
  std::shared_ptr<const AlignmentHistory> history() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace shekaste
