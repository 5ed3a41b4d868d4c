#include "mblab/cli/checkpoint.hpp"

#include <cstdio>

#include "mblab/error.hpp"
#include "mblab/io.hpp"

namespace mblab::cli {

namespace fs = std::filesystem;

std::string cell_key_string(const CellKey& key) {
  return std::to_string(key.eps_index) + "/" + std::to_string(key.v_index) + "/" +
         std::to_string(key.realization);
}

CheckpointLedger::CheckpointLedger(fs::path run_dir, std::string config_hash)
    : run_dir_(std::move(run_dir)), path_(run_dir_ / "checkpoint.json"), config_hash_(std::move(config_hash)) {}

void CheckpointLedger::load() {
  std::lock_guard lock(mutex_);
  cells_.clear();
  if (!fs::exists(path_)) return;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(path_));
  } catch (const nlohmann::json::exception&) {
    std::fprintf(stderr, "warning: unreadable checkpoint %s ignored\n", path_.string().c_str());
    return;
  }
  if (j.value("config_hash", std::string{}) != config_hash_) return;
  for (const auto& c : j.at("cells")) {
    CellKey key{c.at("eps_index").get<std::size_t>(), c.at("v_index").get<std::size_t>(),
                c.at("realization").get<std::size_t>()};
    CellRecord rec;
    const auto status = c.at("status").get<std::string>();
    rec.detail = c.value("detail", nlohmann::json());
    if (status == "done") {
      rec.status = CellStatus::Done;
      rec.file = c.at("file").get<std::string>();
      rec.hash = c.at("hash").get<std::string>();
      const fs::path file = run_dir_ / rec.file;
      if (!fs::exists(file) || io::file_hash(file) != rec.hash) continue;
    } else if (status == "gap") {
      rec.status = CellStatus::Gap;
    } else {
      continue;
    }
    cells_[key] = std::move(rec);
  }
}

void CheckpointLedger::save() const {
  std::lock_guard lock(mutex_);
  save_locked();
}

void CheckpointLedger::save_locked() const {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& [key, rec] : cells_) {
    nlohmann::json c{{"eps_index", key.eps_index},
                     {"v_index", key.v_index},
                     {"realization", key.realization},
                     {"status", rec.status == CellStatus::Done ? "done" : "gap"},
                     {"detail", rec.detail}};
    if (rec.status == CellStatus::Done) {
      c["file"] = rec.file;
      c["hash"] = rec.hash;
    }
    cells.push_back(std::move(c));
  }
  const nlohmann::json j{{"config_hash", config_hash_}, {"cells", std::move(cells)}};
  io::write_file_atomic(path_, j.dump(1) + "\n");
}

CellStatus CheckpointLedger::status(const CellKey& key) const {
  std::lock_guard lock(mutex_);
  const auto it = cells_.find(key);
  return it == cells_.end() ? CellStatus::Pending : it->second.status;
}

std::optional<CellRecord> CheckpointLedger::record(const CellKey& key) const {
  std::lock_guard lock(mutex_);
  const auto it = cells_.find(key);
  if (it == cells_.end()) return std::nullopt;
  return it->second;
}

void CheckpointLedger::mark_done(const CellKey& key, const std::string& relative_file,
                                 const nlohmann::json& instance) {
  const std::string hash = io::file_hash(run_dir_ / relative_file);
  std::lock_guard lock(mutex_);
  cells_[key] = CellRecord{CellStatus::Done, relative_file, hash, instance};
  save_locked();
}

void CheckpointLedger::mark_gap(const CellKey& key, const nlohmann::json& detail) {
  std::lock_guard lock(mutex_);
  cells_[key] = CellRecord{CellStatus::Gap, {}, {}, detail};
  save_locked();
}

std::size_t CheckpointLedger::count(CellStatus s) const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& [key, rec] : cells_) n += rec.status == s;
  return n;
}

}  // namespace mblab::cli
