#include <matcol/io.hpp>

#include <array>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

namespace matcol {

namespace {

constexpr char kMagic[5] = {'M', 'C', 'O', 'L', '1'};

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

[[noreturn]] void fail_parse(const std::string& what, std::size_t line, std::size_t column) {
  throw ParseError(what + " at line " + std::to_string(line) + ", column " +
                       std::to_string(column),
                   line, column);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

void append_le_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t read_le_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

Matrix read_matrix_csv(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<std::vector<double>> data;
  std::size_t line_no = 1;
  std::size_t pos = 0;

  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::size_t end = eol;
    if (end > pos && text[end - 1] == '\r') --end;
    const std::string_view line(text.data() + pos, end - pos);

    if (!line.empty()) {
      std::vector<double> row;
      std::size_t field_start = 0;
      while (true) {
        std::size_t comma = line.find(',', field_start);
        const std::size_t field_end = comma == std::string_view::npos ? line.size() : comma;
        const std::string field(line.substr(field_start, field_end - field_start));
        const std::size_t column = field_start + 1;
        if (field.empty()) fail_parse("empty field", line_no, column);
        errno = 0;
        char* parse_end = nullptr;
        const double value = std::strtod(field.c_str(), &parse_end);
        if (parse_end != field.c_str() + field.size() || errno == ERANGE)
          fail_parse("malformed number '" + field + "'", line_no, column);
        if (!std::isfinite(value))
          fail_parse("non-finite value '" + field + "'", line_no, column);
        row.push_back(value);
        if (comma == std::string_view::npos) break;
        field_start = comma + 1;
      }
      if (!data.empty() && row.size() != data.front().size())
        fail_parse("row has " + std::to_string(row.size()) + " fields, expected " +
                       std::to_string(data.front().size()),
                   line_no, 1);
      data.push_back(std::move(row));
    }
    pos = eol + 1;
    ++line_no;
  }

  if (data.empty()) throw ParseError("empty matrix file " + path.string(), 1, 1);
  Matrix m(static_cast<Index>(data.size()), static_cast<Index>(data.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = data[i][j];
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  require_finite(m, "matrix for " + path.string());
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()) * 20);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out.push_back(',');
      out += format_double(m(i, j));
    }
    out.push_back('\n');
  }
  atomic_write(path, out);
}

Matrix read_matrix_binary(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < sizeof(kMagic) + 16 ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw ParseError("not an MCOL1 matrix file: " + path.string(), 1, 1);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + sizeof(kMagic);
  const std::uint64_t rows = read_le_u64(p);
  const std::uint64_t cols = read_le_u64(p + 8);
  const std::size_t expected = sizeof(kMagic) + 16 + rows * cols * sizeof(double);
  if (rows == 0 || cols == 0 || bytes.size() != expected)
    throw ParseError("MCOL1 size mismatch in " + path.string(), 1, 1);

  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  const unsigned char* data = p + 16;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      double value;
      std::memcpy(&value, data, sizeof(double));
      data += sizeof(double);
      m(i, j) = value;
    }
  require_finite(m, "matrix from " + path.string());
  return m;
}

void write_matrix_binary(const std::filesystem::path& path, const Matrix& m) {
  require_finite(m, "matrix for " + path.string());
  std::string out;
  out.reserve(sizeof(kMagic) + 16 + static_cast<std::size_t>(m.size()) * sizeof(double));
  out.append(kMagic, sizeof(kMagic));
  append_le_u64(out, static_cast<std::uint64_t>(m.rows()));
  append_le_u64(out, static_cast<std::uint64_t>(m.cols()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      const double value = m(i, j);
      char bytes[sizeof(double)];
      std::memcpy(bytes, &value, sizeof(double));
      out.append(bytes, sizeof(double));
    }
  atomic_write(path, out);
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  char magic[sizeof(kMagic)] = {};
  in.read(magic, sizeof(kMagic));
  if (in.gcount() == sizeof(kMagic) && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0)
    return read_matrix_binary(path);
  return read_matrix_csv(path);
}

ObservationSet read_observation_json(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("invalid JSON in " + path.string() + ": " + e.what(), 1, e.byte);
  }

  try {
    ObservationSet obs;
    obs.rows = j.at("m").get<Index>();
    obs.cols = j.at("n").get<Index>();
    obs.entries_per_column = j.at("s").get<Index>();
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "aligned")
      obs.mode = ObservationMode::kAligned;
    else if (mode == "independent")
      obs.mode = ObservationMode::kIndependent;
    else
      throw ConfigError("observation mode must be 'aligned' or 'independent', got '" + mode +
                        "'");

    for (const auto& fc : j.at("full_columns")) {
      FullColumn full;
      full.index = fc.at("index").get<Index>();
      const auto& values = fc.at("values");
      full.values.resize(static_cast<Index>(values.size()));
      for (Index k = 0; k < full.values.size(); ++k)
        full.values[k] = values.at(static_cast<std::size_t>(k)).get<double>();
      obs.full_columns.push_back(std::move(full));
    }
    const Index declared_d = j.at("d").get<Index>();
    if (declared_d != obs.num_draws())
      throw ConfigError("observation file declares d = " + std::to_string(declared_d) +
                        " but lists " + std::to_string(obs.num_draws()) + " full draws");

    for (const auto& pc : j.at("partial_columns")) {
      PartialColumn partial;
      partial.index = pc.at("index").get<Index>();
      for (const auto& row : pc.at("rows")) partial.rows.push_back(row.get<Index>());
      const auto& values = pc.at("values");
      partial.values.resize(static_cast<Index>(values.size()));
      for (Index k = 0; k < partial.values.size(); ++k)
        partial.values[k] = values.at(static_cast<std::size_t>(k)).get<double>();
      obs.partial_columns.push_back(std::move(partial));
    }
    obs.validate();
    return obs;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad observation file " + path.string() + ": " + e.what(), 1, 1);
  }
}

void write_observation_json(const std::filesystem::path& path, const ObservationSet& obs) {
  obs.validate();
  nlohmann::json j;
  j["m"] = obs.rows;
  j["n"] = obs.cols;
  j["d"] = obs.num_draws();
  j["s"] = obs.entries_per_column;
  j["mode"] = obs.mode == ObservationMode::kAligned ? "aligned" : "independent";
  j["full_columns"] = nlohmann::json::array();
  for (const auto& fc : obs.full_columns) {
    nlohmann::json entry;
    entry["index"] = fc.index;
    entry["values"] = std::vector<double>(fc.values.data(), fc.values.data() + fc.values.size());
    j["full_columns"].push_back(std::move(entry));
  }
  j["partial_columns"] = nlohmann::json::array();
  for (const auto& pc : obs.partial_columns) {
    nlohmann::json entry;
    entry["index"] = pc.index;
    entry["rows"] = pc.rows;
    entry["values"] = std::vector<double>(pc.values.data(), pc.values.data() + pc.values.size());
    j["partial_columns"].push_back(std::move(entry));
  }
  atomic_write(path, j.dump(2) + "\n");
}

// SHA-256 (FIPS 180-4), self-contained so manifests carry real digests
// without an extra dependency.
namespace {

struct Sha256 {
  std::array<std::uint32_t, 8> h = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                                    0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
  std::array<unsigned char, 64> block{};
  std::size_t block_len = 0;
  std::uint64_t total_bits = 0;

  static std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

  void process(const unsigned char* p) {
    static constexpr std::uint32_t k[64] = {
        0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
        0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
        0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
        0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
        0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
        0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
        0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
        0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
        0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
        0xc67178f2};
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i)
      w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
             (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
    for (int i = 16; i < 64; ++i) {
      const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
      const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    auto [a, b, c, d, e, f, g, hh] = h;
    for (int i = 0; i < 64; ++i) {
      const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      const std::uint32_t ch = (e & f) ^ (~e & g);
      const std::uint32_t temp1 = hh + s1 + ch + k[i] + w[i];
      const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      const std::uint32_t temp2 = s0 + maj;
      hh = g;
      g = f;
      f = e;
      e = d + temp1;
      d = c;
      c = b;
      b = a;
      a = temp1 + temp2;
    }
    h[0] += a; h[1] += b; h[2] += c; h[3] += d;
    h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
  }

  void update(const unsigned char* data, std::size_t len) {
    total_bits += std::uint64_t(len) * 8;
    while (len > 0) {
      const std::size_t take = std::min(len, block.size() - block_len);
      std::memcpy(block.data() + block_len, data, take);
      block_len += take;
      data += take;
      len -= take;
      if (block_len == block.size()) {
        process(block.data());
        block_len = 0;
      }
    }
  }

  std::string finish() {
    const std::uint64_t bits = total_bits;
    const unsigned char pad = 0x80;
    update(&pad, 1);
    const unsigned char zero = 0x00;
    while (block_len != 56) update(&zero, 1);
    unsigned char len_bytes[8];
    for (int i = 0; i < 8; ++i) len_bytes[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
    update(len_bytes, 8);

    std::string hex;
    hex.reserve(64);
    static constexpr char digits[] = "0123456789abcdef";
    for (const std::uint32_t word : h)
      for (int shift = 28; shift >= 0; shift -= 4) hex.push_back(digits[(word >> shift) & 0xf]);
    return hex;
  }
};

}  // namespace

std::string sha256_hex(std::span<const unsigned char> bytes) {
  Sha256 state;
  state.update(bytes.data(), bytes.size());
  return state.finish();
}

std::string sha256_hex(const std::string& text) {
  return sha256_hex(
      std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(text.data()),
                                     text.size()));
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  Sha256 state;
  std::array<char, 65536> buffer;
  while (in.read(buffer.data(), buffer.size()) || in.gcount() > 0)
    state.update(reinterpret_cast<const unsigned char*>(buffer.data()),
                 static_cast<std::size_t>(in.gcount()));
  return state.finish();
}

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
  const std::filesystem::path dir =
      path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::filesystem::create_directories(dir);
  const std::filesystem::path tmp = dir / (path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw ConfigError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ConfigError("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                      ec.message());
  }
}

}  // namespace matcol
