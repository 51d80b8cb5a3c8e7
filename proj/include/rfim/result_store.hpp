// Append-only run ledger, long-format record CSVs, JSON summaries, sample
// spools and per-disorder checkpoint markers. No database; everything is a
// diffable flat file.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace rfim {

class ResultStore {
 public:
  explicit ResultStore(std::string directory);

  const std::string& directory() const { return dir_; }
  std::string path(const std::string& relative) const;

  // Ledger: one JSON line per event, immutable once written.
  void append_ledger(const std::string& kind, const std::string& config_hash,
                     const std::vector<std::string>& artifacts);
  std::vector<std::string> ledger_lines() const;

  // CSV appenders; the header is written once when the file is created.
  void append_rows(const std::string& file, const std::vector<std::string>& rows);
  void append_rows(const std::string& file, const std::vector<std::string>& rows,
                   const std::string& header);
  bool exists(const std::string& file) const;
  std::vector<std::string> read_lines(const std::string& file) const;

  void write_text(const std::string& file, const std::string& content);

  // Checkpoints: completed disorder indices per scope string.
  std::set<int> completed(const std::string& scope) const;
  void mark_completed(const std::string& scope, int index);

  // Artifact files registered through this store (relative paths).
  const std::vector<std::string>& artifacts() const { return artifacts_; }
  void register_artifact(const std::string& file) { note_artifact(file); }

  static const char* kRecordHeader;

 private:
  void note_artifact(const std::string& file);
  std::string dir_;
  std::vector<std::string> artifacts_;
};

}  // namespace rfim
