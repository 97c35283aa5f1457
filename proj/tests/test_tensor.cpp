#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>

#include "cimforge/tensor.hpp"
#include "oracles.hpp"

namespace cf = cimforge;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() /
                       ("cimforge-tensor-" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir / name;
}

template <typename T>
cf::Matrix<T> iota_matrix(std::int64_t rows, std::int64_t cols, T start) {
  cf::Matrix<T> m(rows, cols);
  T v = start;
  for (std::int64_t i = 0; i < m.size(); ++i) {
    m.data()[i] = v;
    v = static_cast<T>(v + T{1});
  }
  return m;
}

}  // namespace

TEST_CASE("matrix shape, access and equality") {
  cf::Matrix<int> m(2, 3);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.size() == 6);
  m(1, 2) = 9;
  CHECK(m.at(1, 2) == 9);
  CHECK_THROWS_AS(m.at(2, 0), std::out_of_range);
  CHECK_THROWS_AS(m.at(0, 3), std::out_of_range);
  CHECK_THROWS_AS(m.at(-1, 0), std::out_of_range);

  cf::Matrix<int> same(2, 3);
  same(1, 2) = 9;
  CHECK(m == same);
  same(0, 0) = 1;
  CHECK_FALSE(m == same);
  CHECK_FALSE(m == cf::Matrix<int>(3, 2));
}

TEST_CASE("format_full round-trips doubles through text") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 1234.5678, 0.0, 1e300, -0.45}) {
    const std::string s = cf::format_full(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(cf::format_full(0.5) == "0.5");
}

TEST_CASE("format_sig keeps ten significant digits") {
  CHECK(cf::format_sig(0.5) == "0.5");
  CHECK(cf::format_sig(227.27272727272725) == "227.2727273");
  CHECK(cf::format_sig(1.0 / 3.0) == "0.3333333333");
}

TEST_CASE("text file round trip and IO errors") {
  const fs::path p = scratch("plain.txt");
  cf::write_text_file(p, "hello\nworld\n");
  CHECK(cf::read_text_file(p) == "hello\nworld\n");
  CHECK_THROWS_AS(cf::read_text_file(scratch("missing.txt")), cf::IoError);
  CHECK_THROWS_AS(cf::write_text_file(scratch("no-such-dir") / "x.txt", "y"),
                  cf::IoError);
}

TEST_CASE("csv round trip per element type") {
  SUBCASE("u8") {
    const auto m = iota_matrix<std::uint8_t>(3, 4, 0);
    const fs::path p = scratch("m_u8.csv");
    cf::write_csv_matrix(p, m);
    CHECK(cf::read_csv_matrix<std::uint8_t>(p) == m);
  }
  SUBCASE("i8 with negatives") {
    cf::Matrix<std::int8_t> m(2, 3);
    const std::int8_t vals[6] = {-128, -1, 0, 1, 77, 127};
    for (int i = 0; i < 6; ++i) {
      m.data()[i] = vals[i];
    }
    const fs::path p = scratch("m_i8.csv");
    cf::write_csv_matrix(p, m);
    CHECK(cf::read_csv_matrix<std::int8_t>(p) == m);
  }
  SUBCASE("i64 with extremes") {
    cf::Matrix<std::int64_t> m(1, 3);
    m(0, 0) = std::numeric_limits<std::int64_t>::min();
    m(0, 1) = 0;
    m(0, 2) = std::numeric_limits<std::int64_t>::max();
    const fs::path p = scratch("m_i64.csv");
    cf::write_csv_matrix(p, m);
    CHECK(cf::read_csv_matrix<std::int64_t>(p) == m);
  }
  SUBCASE("doubles survive bitwise") {
    cf::Matrix<double> m(2, 2);
    m(0, 0) = 0.1;
    m(0, 1) = -1.0 / 3.0;
    m(1, 0) = 2.5e-300;
    m(1, 1) = 123456.789012345;
    const fs::path p = scratch("m_f64.csv");
    cf::write_csv_matrix(p, m);
    CHECK(cf::read_csv_matrix<double>(p) == m);
  }
}

TEST_CASE("csv reader tolerates spacing, CRLF and blank lines") {
  const fs::path p = scratch("spaced.csv");
  cf::write_text_file(p, " 1 ,\t2\r\n\n3,4\r\n");
  const auto m = cf::read_csv_matrix<std::int32_t>(p);
  REQUIRE(m.rows() == 2);
  REQUIRE(m.cols() == 2);
  CHECK(m(0, 0) == 1);
  CHECK(m(0, 1) == 2);
  CHECK(m(1, 0) == 3);
  CHECK(m(1, 1) == 4);
}

TEST_CASE("csv reader rejects malformed input") {
  const fs::path ragged = scratch("ragged.csv");
  cf::write_text_file(ragged, "1,2\n3\n");
  CHECK_THROWS_AS(cf::read_csv_matrix<std::int32_t>(ragged), cf::IoError);

  const fs::path empty = scratch("empty.csv");
  cf::write_text_file(empty, "\n\n");
  CHECK_THROWS_AS(cf::read_csv_matrix<std::int32_t>(empty), cf::IoError);

  const fs::path garbage = scratch("garbage.csv");
  cf::write_text_file(garbage, "1,two\n");
  CHECK_THROWS_AS(cf::read_csv_matrix<std::int32_t>(garbage), cf::IoError);

  const fs::path hole = scratch("hole.csv");
  cf::write_text_file(hole, "1,,3\n");
  CHECK_THROWS_AS(cf::read_csv_matrix<std::int32_t>(hole), cf::IoError);

  const fs::path overflow = scratch("overflow.csv");
  cf::write_text_file(overflow, "300\n");
  CHECK_THROWS_AS(cf::read_csv_matrix<std::int8_t>(overflow), cf::IoError);
  CHECK(cf::read_csv_matrix<std::int32_t>(overflow)(0, 0) == 300);
}

TEST_CASE("binary tensor round trip per dtype") {
  SUBCASE("u8") {
    const auto m = iota_matrix<std::uint8_t>(5, 7, 100);
    const fs::path p = scratch("t_u8.cimt");
    cf::write_tensor(p, m);
    CHECK(cf::read_tensor<std::uint8_t>(p) == m);
  }
  SUBCASE("i8") {
    const auto m = iota_matrix<std::int8_t>(4, 4, -8);
    const fs::path p = scratch("t_i8.cimt");
    cf::write_tensor(p, m);
    CHECK(cf::read_tensor<std::int8_t>(p) == m);
  }
  SUBCASE("i32") {
    const auto m = iota_matrix<std::int32_t>(2, 9, -100000);
    const fs::path p = scratch("t_i32.cimt");
    cf::write_tensor(p, m);
    CHECK(cf::read_tensor<std::int32_t>(p) == m);
  }
  SUBCASE("i64") {
    cf::Matrix<std::int64_t> m(1, 2);
    m(0, 0) = -(1ll << 62);
    m(0, 1) = (1ll << 62) + 12345;
    const fs::path p = scratch("t_i64.cimt");
    cf::write_tensor(p, m);
    CHECK(cf::read_tensor<std::int64_t>(p) == m);
  }
  SUBCASE("f64 bit patterns") {
    cf::Matrix<double> m(1, 3);
    m(0, 0) = 0.1;
    m(0, 1) = -0.0;
    m(0, 2) = 5e-324;  // smallest subnormal
    const fs::path p = scratch("t_f64.cimt");
    cf::write_tensor(p, m);
    CHECK(cf::read_tensor<double>(p) == m);
  }
}

TEST_CASE("binary tensor header layout") {
  cf::Matrix<std::uint8_t> m(2, 3);
  for (int i = 0; i < 6; ++i) {
    m.data()[i] = static_cast<std::uint8_t>(10 + i);
  }
  const fs::path p = scratch("header.cimt");
  cf::write_tensor(p, m);
  const std::string bytes = cf::read_text_file(p);
  REQUIRE(bytes.size() == 4 + 1 + 1 + 2 + 4 + 8 + 8 + 6);
  CHECK(bytes.substr(0, 4) == "CIMT");
  CHECK(static_cast<unsigned char>(bytes[4]) == 1);  // version
  CHECK(static_cast<unsigned char>(bytes[5]) == 1);  // dtype u8
  CHECK(static_cast<unsigned char>(bytes[8]) == 2);  // ndim, little endian
  CHECK(static_cast<unsigned char>(bytes[12]) == 2);  // rows
  CHECK(static_cast<unsigned char>(bytes[20]) == 3);  // cols
  CHECK(static_cast<unsigned char>(bytes[28]) == 10);  // first payload byte
}

TEST_CASE("binary tensor reader rejects corrupted files") {
  const auto m = iota_matrix<std::int32_t>(2, 2, 5);
  const fs::path good = scratch("good.cimt");
  cf::write_tensor(good, m);
  const std::string bytes = cf::read_text_file(good);

  const fs::path bad_magic = scratch("bad_magic.cimt");
  cf::write_text_file(bad_magic, "XIMT" + bytes.substr(4));
  CHECK_THROWS_AS(cf::read_tensor<std::int32_t>(bad_magic), cf::IoError);

  std::string wrong_version = bytes;
  wrong_version[4] = 9;
  const fs::path bad_version = scratch("bad_version.cimt");
  cf::write_text_file(bad_version, wrong_version);
  CHECK_THROWS_AS(cf::read_tensor<std::int32_t>(bad_version), cf::IoError);

  // Declared dtype i32 but read as i64.
  CHECK_THROWS_AS(cf::read_tensor<std::int64_t>(good), cf::IoError);

  const fs::path truncated = scratch("truncated.cimt");
  cf::write_text_file(truncated, bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(cf::read_tensor<std::int32_t>(truncated), cf::IoError);

  const fs::path tiny = scratch("tiny.cimt");
  cf::write_text_file(tiny, "CI");
  CHECK_THROWS_AS(cf::read_tensor<std::int32_t>(tiny), cf::IoError);

  std::string bad_ndim = bytes;
  bad_ndim[8] = 3;
  const fs::path nd = scratch("bad_ndim.cimt");
  cf::write_text_file(nd, bad_ndim);
  CHECK_THROWS_AS(cf::read_tensor<std::int32_t>(nd), cf::IoError);
}

TEST_CASE("auto format dispatch follows the extension") {
  auto gen = oracles::make_gen(11);
  const auto m = oracles::random_weights(gen, 6, 5);
  const fs::path text = scratch("auto.csv");
  const fs::path bin = scratch("auto.cimt");
  cf::write_matrix_auto(text, m);
  cf::write_matrix_auto(bin, m);
  CHECK(cf::read_matrix_auto<std::int8_t>(text) == m);
  CHECK(cf::read_matrix_auto<std::int8_t>(bin) == m);
  // The .csv route really is text, the other really is the container.
  CHECK(cf::read_text_file(text).find(',') != std::string::npos);
  CHECK(cf::read_text_file(bin).substr(0, 4) == "CIMT");
  CHECK_THROWS_AS(cf::read_matrix_auto<std::int8_t>(scratch("absent.cimt")),
                  cf::IoError);
}
