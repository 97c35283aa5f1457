#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cimforge/errors.hpp"

namespace cimforge {

// Row-major 2-D container used for weights, activations and results.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::int64_t rows, std::int64_t cols)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows * cols), T{}) {
    if (rows < 0 || cols < 0) {
      throw std::invalid_argument("matrix dimensions must be non-negative");
    }
  }

  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }
  std::int64_t size() const { return rows_ * cols_; }

  T& operator()(std::int64_t r, std::int64_t c) {
    return data_[static_cast<std::size_t>(r * cols_ + c)];
  }
  const T& operator()(std::int64_t r, std::int64_t c) const {
    return data_[static_cast<std::size_t>(r * cols_ + c)];
  }

  T& at(std::int64_t r, std::int64_t c) {
    check(r, c);
    return (*this)(r, c);
  }
  const T& at(std::int64_t r, std::int64_t c) const {
    check(r, c);
    return (*this)(r, c);
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  void check(std::int64_t r, std::int64_t c) const {
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_) {
      throw std::out_of_range("matrix index out of range");
    }
  }

  std::int64_t rows_ = 0;
  std::int64_t cols_ = 0;
  std::vector<T> data_;
};

// Round-trip and presentation formatting for CSV cells. Decimal separator is
// always '.', independent of locale.
std::string format_full(double value);  // shortest round-trip-safe (%.17g)
std::string format_sig(double value);   // report precision (%.10g)

// Whole-file text I/O; throws IoError on failure.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Plain numeric CSV, no header: one row per line, ',' separated, '\n' ends a
// line. All rows must have the same width.
template <typename T>
Matrix<T> read_csv_matrix(const std::filesystem::path& path);
template <typename T>
void write_csv_matrix(const std::filesystem::path& path, const Matrix<T>& m);

// Binary tensor container: "CIMT" magic, u8 version, u8 dtype, u16 reserved,
// u32 ndim, then ndim little-endian u64 dims and the row-major payload.
enum class TensorDtype : std::uint8_t { U8 = 1, I8 = 2, I32 = 3, I64 = 4, F64 = 5 };

template <typename T>
struct DtypeOf;
template <> struct DtypeOf<std::uint8_t> {
  static constexpr TensorDtype value = TensorDtype::U8;
};
template <> struct DtypeOf<std::int8_t> {
  static constexpr TensorDtype value = TensorDtype::I8;
};
template <> struct DtypeOf<std::int32_t> {
  static constexpr TensorDtype value = TensorDtype::I32;
};
template <> struct DtypeOf<std::int64_t> {
  static constexpr TensorDtype value = TensorDtype::I64;
};
template <> struct DtypeOf<double> {
  static constexpr TensorDtype value = TensorDtype::F64;
};

template <typename T>
Matrix<T> read_tensor(const std::filesystem::path& path);
template <typename T>
void write_tensor(const std::filesystem::path& path, const Matrix<T>& m);

// Reads either format based on the extension: ".csv" is text, everything
// else is the binary container.
template <typename T>
Matrix<T> read_matrix_auto(const std::filesystem::path& path);
template <typename T>
void write_matrix_auto(const std::filesystem::path& path, const Matrix<T>& m);

}  // namespace cimforge
