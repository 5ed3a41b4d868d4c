#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>

#include <nlohmann/json.hpp>

namespace mblab::cli {

enum class CellStatus { Pending, Done, Gap };

struct CellKey {
  std::size_t eps_index = 0;
  std::size_t v_index = 0;
  std::size_t realization = 0;

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct CellRecord {
  CellStatus status = CellStatus::Pending;
  std::string file;       // relative to the run directory, Done only
  std::string hash;       // fnv1a64 of the file contents, Done only
  nlohmann::json detail;  // instance (Done) or best gap (Gap)
};

// Per-cell progress of a sweep, persisted as JSON next to the cell files. A
// cell only counts as done when its file exists with the recorded hash.
class CheckpointLedger {
 public:
  CheckpointLedger(std::filesystem::path run_dir, std::string config_hash);

  // Loads an existing ledger; entries for another config hash are discarded.
  void load();
  void save() const;

  CellStatus status(const CellKey& key) const;
  std::optional<CellRecord> record(const CellKey& key) const;

  // Thread-safe; persists immediately.
  void mark_done(const CellKey& key, const std::string& relative_file, const nlohmann::json& instance);
  void mark_gap(const CellKey& key, const nlohmann::json& detail);

  std::size_t count(CellStatus s) const;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  void save_locked() const;

  std::filesystem::path run_dir_;
  std::filesystem::path path_;
  std::string config_hash_;
  std::map<CellKey, CellRecord> cells_;
  mutable std::mutex mutex_;
};

std::string cell_key_string(const CellKey& key);

}  // namespace mblab::cli
