#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mblab/evolve.hpp"
#include "mblab/model.hpp"
#include "mblab/prepare.hpp"

namespace mblab::io {

// {"n_sites", "J_mhz": strict lower triangle row by row, "V_mhz", "seed"}; the
// disorder keys are present only when a realization is given.
nlohmann::json model_to_json(const CouplingMatrix& couplings,
                             const std::optional<DisorderRealization>& disorder = std::nullopt);

struct ModelRecord {
  CouplingMatrix couplings{0};
  std::optional<DisorderRealization> disorder;
};
ModelRecord model_from_json(const nlohmann::json& j);

// Device file: {"delta_mhz": ..., "qubits": [{"label", "g_mhz", "f0", "f1"}, ...],
// optional "lambda_mhz": strict lower triangle}.
DeviceParameters device_parameters_from_json(const nlohmann::json& j);
DeviceParameters load_device_parameters(const std::filesystem::path& path);

// One line of an ensemble file. The disorder is regenerated from (V, seed).
nlohmann::json instance_to_json(const QuenchInstance& q);
QuenchInstance instance_from_json(const nlohmann::json& j);

// Raw little-endian complex64 samples, time-major, plus a JSON sidecar
// (<path>.json) describing the sector and the schedule.
void write_state_dump(const std::filesystem::path& path, const SectorBasis& basis,
                      std::span<const double> times_ns, std::span<const StateVector> states);
std::vector<StateVector> read_state_dump(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t v);
std::string file_hash(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary and renames over the destination.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Shortest round-trippable rendering; NaN renders as an empty field.
std::string format_number(double v);

class CsvWriter {
 public:
  CsvWriter(std::vector<std::string> header, std::string config_hash = {});
  CsvWriter& comment(std::string_view text);
  CsvWriter& row(const std::vector<std::string>& fields);
  std::string str() const;
  void write(const std::filesystem::path& path) const { write_file_atomic(path, str()); }

 private:
  std::vector<std::string> header_;
  std::vector<std::string> comments_;
  std::vector<std::string> lines_;
};

struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by name; throws ConfigError naming the column when absent.
  std::size_t column(std::string_view name) const;
};
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace mblab::io
