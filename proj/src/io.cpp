#include "specgauss/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "specgauss/error.hpp"

namespace specgauss {

std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) throw Error(Errc::Io, "could not format a double");
  return std::string(buf.data(), end);
}

std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(Errc::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::Io, "rename to " + path.string() + " failed: " + ec.message());
}

std::string provenance_line(std::uint64_t seed, std::uint64_t config_hash) {
  std::ostringstream os;
  os << "# specgauss version=" << kVersion << " seed=" << seed << " config=" << std::hex
     << config_hash;
  return os.str();
}

void write_paths_csv(std::ostream& os, const PathBatch& batch, std::string_view header_line) {
  if (!header_line.empty()) os << header_line << '\n';
  os << 't';
  for (int p = 0; p < batch.n_paths; ++p) os << ",path_" << p;
  os << '\n';
  for (std::size_t j = 0; j < batch.points(); ++j) {
    os << format_double(batch.grid[j]);
    for (int p = 0; p < batch.n_paths; ++p) os << ',' << format_double(batch.at(p, j));
    os << '\n';
  }
}

namespace {

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw Error(Errc::Io, "malformed number '" + std::string(text) + "'");
  return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

PathBatch read_paths_csv(std::istream& is) {
  PathBatch batch;
  std::string line;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("seed=");
      if (pos != std::string::npos) batch.seed = std::stoull(line.substr(pos + 5));
      continue;
    }
    const auto fields = split_commas(line);
    if (!have_header) {
      if (fields.empty() || fields[0] != "t") throw Error(Errc::Io, "path CSV must start with column t");
      batch.n_paths = static_cast<int>(fields.size()) - 1;
      have_header = true;
      continue;
    }
    if (static_cast<int>(fields.size()) != batch.n_paths + 1)
      throw Error(Errc::Io, "ragged path CSV row");
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) row.push_back(parse_double(f));
    rows.push_back(std::move(row));
  }
  if (!have_header) throw Error(Errc::Io, "empty path CSV");
  batch.grid.resize(rows.size());
  batch.values.assign(static_cast<std::size_t>(batch.n_paths) * rows.size(), 0.0);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    batch.grid[j] = rows[j][0];
    for (int p = 0; p < batch.n_paths; ++p)
      batch.values[static_cast<std::size_t>(p) * rows.size() + j] = rows[j][static_cast<std::size_t>(p) + 1];
  }
  return batch;
}

namespace {

static_assert(std::endian::native == std::endian::little, "binary format assumes little-endian host");

template <class T>
void put(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw Error(Errc::Io, "truncated binary path file");
  return value;
}

}  // namespace

void write_paths_bin(std::ostream& os, const PathBatch& batch) {
  os.write("SGPB", 4);
  put<std::uint32_t>(os, kBinaryVersion);
  put<std::uint64_t>(os, batch.points());
  put<std::uint64_t>(os, static_cast<std::uint64_t>(batch.n_paths));
  put<std::uint64_t>(os, batch.seed);
  for (double t : batch.grid) put<double>(os, t);
  for (int p = 0; p < batch.n_paths; ++p)
    for (double v : batch.path(p)) put<double>(os, v);
}

PathBatch read_paths_bin(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "SGPB", 4) != 0) throw Error(Errc::Io, "bad magic in binary path file");
  const auto version = get<std::uint32_t>(is);
  if (version != kBinaryVersion) throw Error(Errc::Io, "unsupported binary path version");
  const auto points = get<std::uint64_t>(is);
  const auto paths = get<std::uint64_t>(is);
  PathBatch batch;
  batch.seed = get<std::uint64_t>(is);
  batch.n_paths = static_cast<int>(paths);
  batch.grid.resize(points);
  for (auto& t : batch.grid) t = get<double>(is);
  batch.values.resize(points * paths);
  for (auto& v : batch.values) v = get<double>(is);
  return batch;
}

std::string validation_report_json(const std::vector<CheckRecord>& checks) {
  nlohmann::ordered_json report;
  report["version"] = std::string(kVersion);
  bool all = true;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    all = all && c.pass;
    list.push_back({{"name", c.name}, {"statistic", c.statistic}, {"bound", c.bound}, {"pass", c.pass}});
  }
  report["passed"] = all;
  report["checks"] = std::move(list);
  return report.dump(2) + "\n";
}

}  // namespace specgauss
