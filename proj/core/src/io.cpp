#include "mblab/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "mblab/error.hpp"

namespace mblab::io {

namespace fs = std::filesystem;

nlohmann::json model_to_json(const CouplingMatrix& couplings,
                             const std::optional<DisorderRealization>& disorder) {
  nlohmann::json j;
  const int n = couplings.n_sites();
  j["n_sites"] = n;
  std::vector<double> lower;
  for (int m = 1; m < n; ++m) {
    for (int k = 0; k < m; ++k) lower.push_back(couplings(m, k));
  }
  j["J_mhz"] = lower;
  if (disorder) {
    require(disorder->n_sites() == n, ErrorCode::ShapeMismatch,
            "disorder and couplings have different site counts");
    j["V_mhz"] = disorder->values_mhz;
    j["V_amplitude_mhz"] = disorder->amplitude_mhz;
    j["seed"] = disorder->seed;
  }
  return j;
}

namespace {

Eigen::MatrixXd lower_to_matrix(const std::vector<double>& lower, int n) {
  require(lower.size() == static_cast<std::size_t>(n * (n - 1) / 2), ErrorCode::ShapeMismatch,
          "lower triangle needs n(n-1)/2 entries");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  std::size_t idx = 0;
  for (int r = 1; r < n; ++r) {
    for (int c = 0; c < r; ++c) {
      m(r, c) = lower[idx];
      m(c, r) = lower[idx];
      ++idx;
    }
  }
  return m;
}

template <class F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, e.what());
  }
}

}  // namespace

ModelRecord model_from_json(const nlohmann::json& j) {
  return guarded([&] {
    ModelRecord rec;
    const int n = j.at("n_sites").get<int>();
    rec.couplings = CouplingMatrix(lower_to_matrix(j.at("J_mhz").get<std::vector<double>>(), n));
    if (j.contains("V_mhz")) {
      DisorderRealization d;
      d.values_mhz = j.at("V_mhz").get<std::vector<double>>();
      require(d.n_sites() == n, ErrorCode::ShapeMismatch, "V_mhz length differs from n_sites");
      d.seed = j.value("seed", std::uint64_t{0});
      double amp = 0.0;
      for (double v : d.values_mhz) amp = std::max(amp, std::abs(v));
      d.amplitude_mhz = j.value("V_amplitude_mhz", amp);
      rec.disorder = std::move(d);
    }
    return rec;
  });
}

DeviceParameters device_parameters_from_json(const nlohmann::json& j) {
  return guarded([&] {
    DeviceParameters p;
    p.delta_mhz = j.at("delta_mhz").get<double>();
    for (const auto& q : j.at("qubits")) {
      p.g_mhz.push_back(q.at("g_mhz").get<double>());
      if (q.contains("f0")) p.readout_f0.push_back(q.at("f0").get<double>());
      if (q.contains("f1")) p.readout_f1.push_back(q.at("f1").get<double>());
    }
    const auto n = static_cast<int>(p.g_mhz.size());
    if (j.contains("lambda_mhz")) {
      p.lambda_mhz = lower_to_matrix(j.at("lambda_mhz").get<std::vector<double>>(), n);
    }
    if (p.readout_f0.size() != p.g_mhz.size()) p.readout_f0.clear();
    if (p.readout_f1.size() != p.g_mhz.size()) p.readout_f1.clear();
    return p;
  });
}

DeviceParameters load_device_parameters(const fs::path& path) {
  const std::string text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  return device_parameters_from_json(j);
}

nlohmann::json instance_to_json(const QuenchInstance& q) {
  nlohmann::json j;
  j["seed"] = q.disorder.seed;
  j["V_mhz"] = q.disorder.amplitude_mhz;
  j["eps_target"] = q.eps_target;
  j["eps_achieved"] = q.eps_achieved;
  j["initial_state"] = q.initial_state.to_string();
  j["E_mhz"] = q.energy_mhz;
  j["E_min_mhz"] = q.e_min_mhz;
  j["E_max_mhz"] = q.e_max_mhz;
  j["tolerance"] = q.tolerance;
  return j;
}

QuenchInstance instance_from_json(const nlohmann::json& j) {
  return guarded([&] {
    QuenchInstance q;
    q.initial_state = FockState::from_string(j.at("initial_state").get<std::string>());
    q.disorder = sample_disorder(q.initial_state.n_sites(), j.at("V_mhz").get<double>(),
                                 j.at("seed").get<std::uint64_t>());
    q.eps_target = j.at("eps_target").get<double>();
    q.eps_achieved = j.at("eps_achieved").get<double>();
    q.e_min_mhz = j.at("E_min_mhz").get<double>();
    q.e_max_mhz = j.at("E_max_mhz").get<double>();
    q.energy_mhz = diagonal_energy(q.initial_state, q.disorder);
    q.tolerance = j.value("tolerance", kDefaultEpsTolerance);
    SectorBasis basis(q.initial_state.n_sites(), q.initial_state.n_excitations());
    q.basis_index = basis.index_of(q.initial_state);
    return q;
  });
}

namespace {

void put_f32_le(std::string& out, float f) {
  auto u = std::bit_cast<std::uint32_t>(f);
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((u >> (8 * b)) & 0xffu));
}

float get_f32_le(const unsigned char* p) {
  std::uint32_t u = 0;
  for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return std::bit_cast<float>(u);
}

}  // namespace

void write_state_dump(const fs::path& path, const SectorBasis& basis,
                      std::span<const double> times_ns, std::span<const StateVector> states) {
  require(times_ns.size() == states.size(), ErrorCode::ShapeMismatch,
          "one state per scheduled time is required");
  std::string bytes;
  bytes.reserve(states.size() * basis.size() * 8);
  for (const StateVector& s : states) {
    require(static_cast<std::size_t>(s.size()) == basis.size(), ErrorCode::ShapeMismatch,
            "state length does not match the sector");
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      put_f32_le(bytes, static_cast<float>(s(i).real()));
      put_f32_le(bytes, static_cast<float>(s(i).imag()));
    }
  }
  write_file_atomic(path, bytes);

  nlohmann::json side;
  side["format"] = "complex64-le";
  side["layout"] = "time-major";
  side["n_sites"] = basis.n_sites();
  side["n_excitations"] = basis.n_excitations();
  side["dim"] = basis.size();
  side["ordering"] = "ascending integer value of the occupation bit pattern";
  side["times_ns"] = std::vector<double>(times_ns.begin(), times_ns.end());
  write_file_atomic(fs::path(path.string() + ".json"), side.dump(2) + "\n");
}

std::vector<StateVector> read_state_dump(const fs::path& path) {
  const auto side = nlohmann::json::parse(read_file(fs::path(path.string() + ".json")));
  const auto dim = side.at("dim").get<std::size_t>();
  const auto times = side.at("times_ns").get<std::vector<double>>();
  const std::string bytes = read_file(path);
  require(bytes.size() == times.size() * dim * 8, ErrorCode::IoError,
          "state dump size does not match its sidecar");
  std::vector<StateVector> out;
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t t = 0; t < times.size(); ++t) {
    StateVector s(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i, p += 8) {
      s(static_cast<Eigen::Index>(i)) = {get_f32_le(p), get_f32_le(p + 4)};
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xfu];
  return s;
}

std::string file_hash(const fs::path& path) { return hex64(fnv1a64(read_file(path))); }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
  const fs::path tmp = path.string() + ".tmp." + hex64(tid);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) fail(ErrorCode::IoError, "short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::IoError, "cannot rename into " + path.string() + ": " + ec.message());
}

std::string format_number(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> header, std::string config_hash)
    : header_(std::move(header)) {
  if (!config_hash.empty()) comments_.push_back("config-hash: " + config_hash);
}

CsvWriter& CsvWriter::comment(std::string_view text) {
  comments_.emplace_back(text);
  return *this;
}

CsvWriter& CsvWriter::row(const std::vector<std::string>& fields) {
  require(fields.size() == header_.size(), ErrorCode::ShapeMismatch,
          "CSV row has " + std::to_string(fields.size()) + " fields, header has " +
              std::to_string(header_.size()));
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line.push_back(',');
    line += fields[i];
  }
  lines_.push_back(std::move(line));
  return *this;
}

std::string CsvWriter::str() const {
  std::string out;
  for (const auto& c : comments_) out += "# " + c + "\n";
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i) out.push_back(',');
    out += header_[i];
  }
  out.push_back('\n');
  for (const auto& l : lines_) out += l + "\n";
  return out;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  fail(ErrorCode::ConfigError, "CSV is missing column '" + std::string(name) + "'");
}

CsvTable read_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  CsvTable t;
  std::string line;
  bool have_header = false;
  auto split = [](const std::string& l) {
    std::vector<std::string> f;
    std::string cur;
    for (char c : l) {
      if (c == ',') {
        f.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur.push_back(c);
      }
    }
    f.push_back(cur);
    return f;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.starts_with("#")) {
      t.comments.push_back(line.size() > 2 ? line.substr(2) : std::string{});
      continue;
    }
    if (!have_header) {
      t.header = split(line);
      have_header = true;
    } else {
      t.rows.push_back(split(line));
    }
  }
  if (!have_header) fail(ErrorCode::IoError, path.string() + " has no header row");
  return t;
}

}  // namespace mblab::io
