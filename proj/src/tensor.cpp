#include "cimforge/tensor.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <string_view>
#include <system_error>
#include <type_traits>

namespace cimforge {
namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string() + " for reading");
  }
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw IoError("read failed on " + path.string());
  }
  return bytes;
}

void spill(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("write failed on " + path.string());
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
T parse_cell(std::string_view cell, const std::filesystem::path& path) {
  cell = trim(cell);
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if constexpr (std::is_floating_point_v<T>) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || cell.empty()) {
      throw IoError("bad numeric cell '" + std::string(cell) + "' in " +
                    path.string());
    }
    return value;
  } else {
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || cell.empty()) {
      throw IoError("bad integer cell '" + std::string(cell) + "' in " +
                    path.string());
    }
    if (value < static_cast<long long>(std::numeric_limits<T>::min()) ||
        value > static_cast<long long>(std::numeric_limits<T>::max())) {
      throw IoError("integer cell '" + std::string(cell) + "' out of range in " +
                    path.string());
    }
    return static_cast<T>(value);
  }
}

template <typename T>
std::string render_cell(T value) {
  if constexpr (std::is_floating_point_v<T>) {
    return format_full(value);
  } else {
    return std::to_string(static_cast<long long>(value));
  }
}

void append_le(std::string& out, std::uint64_t value, int bytes) {
  for (int i = 0; i < bytes; ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xffu));
  }
}

std::uint64_t take_le(const std::string& bytes, std::size_t& offset, int width,
                      const std::filesystem::path& path) {
  if (offset + static_cast<std::size_t>(width) > bytes.size()) {
    throw IoError("truncated tensor file " + path.string());
  }
  std::uint64_t value = 0;
  for (int i = 0; i < width; ++i) {
    value |= static_cast<std::uint64_t>(
                 static_cast<unsigned char>(bytes[offset + i]))
             << (8 * i);
  }
  offset += static_cast<std::size_t>(width);
  return value;
}

template <typename T>
std::uint64_t to_bits(T value) {
  if constexpr (sizeof(T) == 1) {
    return static_cast<std::uint8_t>(value);
  } else if constexpr (sizeof(T) == 4) {
    return std::bit_cast<std::uint32_t>(value);
  } else {
    return std::bit_cast<std::uint64_t>(value);
  }
}

template <typename T>
T from_bits(std::uint64_t bits) {
  if constexpr (sizeof(T) == 1) {
    return static_cast<T>(static_cast<std::uint8_t>(bits));
  } else if constexpr (sizeof(T) == 4) {
    return std::bit_cast<T>(static_cast<std::uint32_t>(bits));
  } else {
    return std::bit_cast<T>(bits);
  }
}

constexpr char kMagic[4] = {'C', 'I', 'M', 'T'};
constexpr std::uint8_t kVersion = 1;

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  return slurp(path);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  spill(path, text);
}

std::string format_full(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) {
    throw IoError("failed to format a double");
  }
  return std::string(buf, ptr);
}

std::string format_sig(double value) {
  char buf[64];
  const int n = std::snprintf(buf, sizeof(buf), "%.10g", value);
  return std::string(buf, static_cast<std::size_t>(n));
}

template <typename T>
Matrix<T> read_csv_matrix(const std::filesystem::path& path) {
  const std::string text = slurp(path);
  std::vector<std::vector<T>> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) {
      eol = text.size();
    }
    std::string_view line = trim(std::string_view(text).substr(pos, eol - pos));
    pos = eol + 1;
    if (line.empty()) {
      continue;
    }
    std::vector<T> row;
    std::size_t cell_start = 0;
    while (true) {
      const std::size_t comma = line.find(',', cell_start);
      const std::string_view cell =
          line.substr(cell_start, comma == std::string_view::npos
                                      ? std::string_view::npos
                                      : comma - cell_start);
      row.push_back(parse_cell<T>(cell, path));
      if (comma == std::string_view::npos) {
        break;
      }
      cell_start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("ragged csv rows in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw IoError("empty csv file " + path.string());
  }
  Matrix<T> m(static_cast<std::int64_t>(rows.size()),
              static_cast<std::int64_t>(rows.front().size()));
  for (std::int64_t r = 0; r < m.rows(); ++r) {
    for (std::int64_t c = 0; c < m.cols(); ++c) {
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
  }
  return m;
}

template <typename T>
void write_csv_matrix(const std::filesystem::path& path, const Matrix<T>& m) {
  std::string out;
  for (std::int64_t r = 0; r < m.rows(); ++r) {
    for (std::int64_t c = 0; c < m.cols(); ++c) {
      if (c > 0) {
        out.push_back(',');
      }
      out += render_cell(m(r, c));
    }
    out.push_back('\n');
  }
  spill(path, out);
}

template <typename T>
Matrix<T> read_tensor(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  std::size_t offset = 0;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw IoError(path.string() + " is not a tensor file (bad magic)");
  }
  offset = 4;
  const auto version = take_le(bytes, offset, 1, path);
  if (version != kVersion) {
    throw IoError("unsupported tensor version in " + path.string());
  }
  const auto dtype = static_cast<TensorDtype>(take_le(bytes, offset, 1, path));
  take_le(bytes, offset, 2, path);  // reserved
  if (dtype != DtypeOf<T>::value) {
    throw IoError("tensor dtype mismatch in " + path.string());
  }
  const auto ndim = take_le(bytes, offset, 4, path);
  if (ndim != 2) {
    throw IoError("expected a 2-d tensor in " + path.string());
  }
  const auto rows = take_le(bytes, offset, 8, path);
  const auto cols = take_le(bytes, offset, 8, path);
  if (rows > (1u << 24) || cols > (1u << 24)) {
    throw IoError("unreasonable tensor shape in " + path.string());
  }
  const std::uint64_t count = rows * cols;
  if (bytes.size() - offset != count * sizeof(T)) {
    throw IoError("tensor payload size mismatch in " + path.string());
  }
  Matrix<T> m(static_cast<std::int64_t>(rows), static_cast<std::int64_t>(cols));
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t raw = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      raw |= static_cast<std::uint64_t>(static_cast<unsigned char>(
                 bytes[offset + i * sizeof(T) + b]))
             << (8 * b);
    }
    m.data()[i] = from_bits<T>(raw);
  }
  return m;
}

template <typename T>
void write_tensor(const std::filesystem::path& path, const Matrix<T>& m) {
  std::string out;
  out.append(kMagic, 4);
  append_le(out, kVersion, 1);
  append_le(out, static_cast<std::uint64_t>(DtypeOf<T>::value), 1);
  append_le(out, 0, 2);
  append_le(out, 2, 4);
  append_le(out, static_cast<std::uint64_t>(m.rows()), 8);
  append_le(out, static_cast<std::uint64_t>(m.cols()), 8);
  for (std::int64_t i = 0; i < m.size(); ++i) {
    append_le(out, to_bits(m.data()[i]), static_cast<int>(sizeof(T)));
  }
  spill(path, out);
}

template <typename T>
Matrix<T> read_matrix_auto(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? read_csv_matrix<T>(path)
                                    : read_tensor<T>(path);
}

template <typename T>
void write_matrix_auto(const std::filesystem::path& path, const Matrix<T>& m) {
  if (path.extension() == ".csv") {
    write_csv_matrix(path, m);
  } else {
    write_tensor(path, m);
  }
}

#define CIMFORGE_INSTANTIATE_TENSOR(T)                                        \
  template Matrix<T> read_csv_matrix<T>(const std::filesystem::path&);        \
  template void write_csv_matrix<T>(const std::filesystem::path&,             \
                                    const Matrix<T>&);                        \
  template Matrix<T> read_tensor<T>(const std::filesystem::path&);            \
  template void write_tensor<T>(const std::filesystem::path&,                 \
                                const Matrix<T>&);                            \
  template Matrix<T> read_matrix_auto<T>(const std::filesystem::path&);       \
  template void write_matrix_auto<T>(const std::filesystem::path&,            \
                                     const Matrix<T>&);

CIMFORGE_INSTANTIATE_TENSOR(std::uint8_t)
CIMFORGE_INSTANTIATE_TENSOR(std::int8_t)
CIMFORGE_INSTANTIATE_TENSOR(std::int32_t)
CIMFORGE_INSTANTIATE_TENSOR(std::int64_t)
CIMFORGE_INSTANTIATE_TENSOR(double)

#undef CIMFORGE_INSTANTIATE_TENSOR

}  // namespace cimforge
