#include "rfim/result_store.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rfim/version.hpp"

namespace rfim {

namespace fs = std::filesystem;

const char* ResultStore::kRecordHeader = "disorder_index,disorder_seed,statistic,value,stderr";

ResultStore::ResultStore(std::string directory) : dir_(std::move(directory)) {
  fs::create_directories(dir_);
}

std::string ResultStore::path(const std::string& relative) const {
  return (fs::path(dir_) / relative).string();
}

void ResultStore::note_artifact(const std::string& file) {
  if (std::find(artifacts_.begin(), artifacts_.end(), file) == artifacts_.end())
    artifacts_.push_back(file);
}

void ResultStore::append_ledger(const std::string& kind, const std::string& config_hash,
                                const std::vector<std::string>& artifacts) {
  nlohmann::json j;
  j["kind"] = kind;
  j["config_hash"] = config_hash;
  j["code_version"] = kCodeVersion;
  j["timestamp"] = static_cast<long long>(
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
  j["artifacts"] = artifacts;
  std::ofstream os(path("ledger.jsonl"), std::ios::app);
  if (!os) throw std::runtime_error("store: cannot append ledger");
  os << j.dump() << '\n';
}

std::vector<std::string> ResultStore::ledger_lines() const {
  std::vector<std::string> lines;
  std::ifstream is(path("ledger.jsonl"));
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

void ResultStore::append_rows(const std::string& file, const std::vector<std::string>& rows) {
  append_rows(file, rows, kRecordHeader);
}

void ResultStore::append_rows(const std::string& file, const std::vector<std::string>& rows,
                              const std::string& header) {
  const std::string p = path(file);
  const bool fresh = !fs::exists(p);
  std::ofstream os(p, std::ios::app);
  if (!os) throw std::runtime_error("store: cannot append to " + file);
  if (fresh) os << header << '\n';
  for (const std::string& r : rows) os << r << '\n';
  note_artifact(file);
}

bool ResultStore::exists(const std::string& file) const { return fs::exists(path(file)); }

std::vector<std::string> ResultStore::read_lines(const std::string& file) const {
  std::vector<std::string> lines;
  std::ifstream is(path(file));
  if (!is) return lines;
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  return lines;
}

void ResultStore::write_text(const std::string& file, const std::string& content) {
  std::ofstream os(path(file));
  if (!os) throw std::runtime_error("store: cannot write " + file);
  os << content;
  note_artifact(file);
}

std::set<int> ResultStore::completed(const std::string& scope) const {
  std::set<int> done;
  std::ifstream is(path("checkpoints.jsonl"));
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;
    if (j.value("scope", "") == scope) done.insert(j.value("index", -1));
  }
  return done;
}

void ResultStore::mark_completed(const std::string& scope, int index) {
  nlohmann::json j;
  j["scope"] = scope;
  j["index"] = index;
  std::ofstream os(path("checkpoints.jsonl"), std::ios::app);
  if (!os) throw std::runtime_error("store: cannot append checkpoint");
  os << j.dump() << '\n';
}

}  // namespace rfim
