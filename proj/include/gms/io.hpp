#ifndef GMS_IO_HPP
#define GMS_IO_HPP

#include "gms/core.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace gms {

// ---------------------------------------------------------------------------
// TensorFile: magic "GMS1", element tag byte (0 = f64 LE), order byte
// d in {2,3}, d little-endian u64 dims, payload column-major (order 3:
// slice-major). Writes go through a temp file and rename so a crashed run
// never leaves a truncated file that validates.
// ---------------------------------------------------------------------------

namespace detail_io {

inline void put_u64_le(std::ostream& os, std::uint64_t v) {
  std::array<unsigned char, 8> b;
  for (int i = 0; i < 8; ++i) b[std::size_t(i)] = (v >> (8 * i)) & 0xff;
  os.write(reinterpret_cast<const char*>(b.data()), 8);
}

inline std::uint64_t get_u64_le(std::istream& is) {
  std::array<unsigned char, 8> b;
  is.read(reinterpret_cast<char*>(b.data()), 8);
  if (!is) throw IoError("tensor file: truncated header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[std::size_t(i)]) << (8 * i);
  return v;
}

inline void write_payload(std::ostream& os, const double* data, std::uint64_t count) {
  // assumes little-endian IEEE-754 host, as everywhere this library runs
  os.write(reinterpret_cast<const char*>(data), std::streamsize(count * 8));
}

struct AtomicFile {
  std::filesystem::path final_path, tmp_path;
  std::ofstream stream;

  explicit AtomicFile(const std::filesystem::path& path)
      : final_path(path), tmp_path(path.string() + ".tmp") {
    stream.open(tmp_path, std::ios::binary | std::ios::trunc);
    if (!stream) throw IoError("cannot open for writing: " + tmp_path.string());
  }

  void commit() {
    stream.flush();
    if (!stream) throw IoError("write failed: " + tmp_path.string());
    stream.close();
    std::error_code ec;
    std::filesystem::rename(tmp_path, final_path, ec);
    if (ec) throw IoError("rename failed: " + final_path.string() + ": " + ec.message());
  }

  ~AtomicFile() {
    if (stream.is_open()) {
      stream.close();
      std::error_code ec;
      std::filesystem::remove(tmp_path, ec);
    }
  }
};

}  // namespace detail_io

inline void write_tensor_file(const std::filesystem::path& path, const Matrix& M) {
  detail_io::AtomicFile f(path);
  f.stream.write("GMS1", 4);
  f.stream.put(0);  // f64
  f.stream.put(2);  // order
  detail_io::put_u64_le(f.stream, std::uint64_t(M.rows()));
  detail_io::put_u64_le(f.stream, std::uint64_t(M.cols()));
  detail_io::write_payload(f.stream, M.data(), std::uint64_t(M.size()));
  f.commit();
}

inline void write_tensor_file(const std::filesystem::path& path, const Tensor3& T) {
  detail_io::AtomicFile f(path);
  f.stream.write("GMS1", 4);
  f.stream.put(0);
  f.stream.put(3);
  detail_io::put_u64_le(f.stream, std::uint64_t(T.dim1()));
  detail_io::put_u64_le(f.stream, std::uint64_t(T.dim2()));
  detail_io::put_u64_le(f.stream, std::uint64_t(T.dim3()));
  detail_io::write_payload(f.stream, T.raw().data(), std::uint64_t(T.size()));
  f.commit();
}

using TensorFileData = std::variant<Matrix, Tensor3>;

inline TensorFileData read_tensor_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "GMS1", 4) != 0)
    throw IoError("bad magic in tensor file: " + path.string());
  int tag = is.get(), order = is.get();
  if (tag != 0) throw IoError("unsupported element type tag in " + path.string());
  if (order != 2 && order != 3) throw IoError("unsupported order in " + path.string());
  std::vector<std::uint64_t> dims(std::size_t(order), 0);
  std::uint64_t total = 1;
  for (auto& d : dims) {
    d = detail_io::get_u64_le(is);
    total *= d;
  }
  const std::uint64_t expected_size = 4 + 1 + 1 + 8 * std::uint64_t(order) + 8 * total;
  if (std::filesystem::file_size(path) != expected_size)
    throw IoError("tensor file payload length mismatch: " + path.string());
  std::vector<double> payload(total);
  is.read(reinterpret_cast<char*>(payload.data()), std::streamsize(total * 8));
  if (!is) throw IoError("tensor file truncated: " + path.string());
  for (double v : payload)
    if (!std::isfinite(v)) throw DataError("tensor file has non-finite entries: " + path.string());
  if (order == 2) {
    Matrix M(static_cast<Index>(dims[0]), static_cast<Index>(dims[1]));
    std::memcpy(M.data(), payload.data(), total * 8);
    return M;
  }
  Tensor3 T(static_cast<Index>(dims[0]), static_cast<Index>(dims[1]),
            static_cast<Index>(dims[2]));
  std::memcpy(T.raw().data(), payload.data(), total * 8);
  return T;
}

// ---------------------------------------------------------------------------
// PGM (P5, 8-bit) frames; pixel values map to [0,1] via /255
// ---------------------------------------------------------------------------

inline Matrix read_pgm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path.string());
  std::string magic;
  is >> magic;
  if (magic != "P5") throw IoError("not a P5 PGM: " + path.string());
  auto next_token = [&is, &path]() -> long {
    // skip whitespace and # comments
    for (;;) {
      int c = is.peek();
      if (c == '#') {
        std::string line;
        std::getline(is, line);
      } else if (std::isspace(c)) {
        is.get();
      } else {
        break;
      }
    }
    long v;
    if (!(is >> v)) throw IoError("malformed PGM header: " + path.string());
    return v;
  };
  long w = next_token(), h = next_token(), maxval = next_token();
  if (w < 1 || h < 1 || maxval != 255)
    throw IoError("unsupported PGM (need 8-bit): " + path.string());
  is.get();  // single whitespace after maxval
  std::vector<unsigned char> buf(std::size_t(w) * std::size_t(h));
  is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
  if (!is) throw IoError("PGM truncated: " + path.string());
  Matrix M(h, w);
  for (long r = 0; r < h; ++r)
    for (long c = 0; c < w; ++c) M(r, c) = double(buf[std::size_t(r) * std::size_t(w) + std::size_t(c)]) / 255.0;
  return M;
}

inline void write_pgm(const std::filesystem::path& path, const Matrix& M) {
  detail_io::AtomicFile f(path);
  f.stream << "P5\n" << M.cols() << ' ' << M.rows() << "\n255\n";
  std::vector<unsigned char> buf(std::size_t(M.size()));
  for (Index r = 0; r < M.rows(); ++r)
    for (Index c = 0; c < M.cols(); ++c) {
      double v = std::min(1.0, std::max(0.0, M(r, c)));
      buf[std::size_t(r) * std::size_t(M.cols()) + std::size_t(c)] =
          static_cast<unsigned char>(std::lround(v * 255.0));
    }
  f.stream.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  f.commit();
}

// ---------------------------------------------------------------------------
// Flat key = value config files (UTF-8, # comments); unknown keys rejected
// by the consumer via the parsed map.
// ---------------------------------------------------------------------------

inline std::map<std::string, std::string> parse_config(std::istream& is) {
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return std::string();
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (out.count(key))
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key " + key);
    out[key] = val;
  }
  return out;
}

inline std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config: " + path.string());
  return parse_config(is);
}

inline void write_text_file_atomic(const std::filesystem::path& path, const std::string& body) {
  detail_io::AtomicFile f(path);
  f.stream << body;
  f.commit();
}

}  // namespace gms

#endif  // GMS_IO_HPP
