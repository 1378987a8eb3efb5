#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "cennq/errors.hpp"
#include "cennq/pgm.hpp"

using namespace cennq;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "cennq_test_pgm";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

}  // namespace

TEST_CASE("pixel mapping") {
  CHECK(pixel_to_cell(0, 255) == 1.0);
  CHECK(pixel_to_cell(255, 255) == -1.0);
  CHECK(cell_to_pixel(1.0, 255) == 0);
  CHECK(cell_to_pixel(-1.0, 255) == 255);
  CHECK(cell_to_pixel(7.0, 255) == 0);
  CHECK(cell_to_pixel(0.0, 255) == 128);
  for (std::uint32_t p = 0; p <= 255; ++p) CHECK(cell_to_pixel(pixel_to_cell(p, 255), 255) == p);
}

TEST_CASE("binary and ascii round trips") {
  PgmImage img{3, 2, 255, {0, 10, 20, 30, 40, 255}};
  for (auto f : {PgmFormat::Binary, PgmFormat::Ascii}) {
    const auto p = scratch(f == PgmFormat::Binary ? "rt5.pgm" : "rt2.pgm");
    write_pgm_image(p, img, f);
    const auto back = read_pgm_image(p);
    CHECK(back.width == 3);
    CHECK(back.height == 2);
    CHECK(back.pixels == img.pixels);
  }
  PgmImage wide{2, 2, 65535, {0, 300, 40000, 65535}};
  const auto p = scratch("rt16.pgm");
  write_pgm_image(p, wide);
  CHECK(read_pgm_image(p).pixels == wide.pixels);
}

TEST_CASE("grid round trip keeps binary cells") {
  CellGrid g(2, 3, std::vector<double>{1, -1, 1, -1, -1, 1});
  const auto p = scratch("grid.pgm");
  write_pgm(p, g);
  CHECK(read_pgm(p) == g);
}

TEST_CASE("comments and whitespace") {
  const auto p = scratch("comment.pgm");
  write_text(p, "P2\n# made by hand\n2 # width\n2\n255\n0 255\n# mid\n255 0\n");
  const auto img = read_pgm_image(p);
  CHECK(img.pixels == std::vector<std::uint16_t>{0, 255, 255, 0});
}

TEST_CASE("malformed files") {
  const auto p = scratch("bad.pgm");
  write_text(p, "P6\n1 1\n255\n\xff\xff\xff");
  CHECK_THROWS_AS(read_pgm_image(p), DataError);
  write_text(p, "P5\n4 4\n255\nab");
  CHECK_THROWS_AS(read_pgm_image(p), DataError);
  write_text(p, "P2\n0 3\n255\n");
  CHECK_THROWS_AS(read_pgm_image(p), DataError);
  write_text(p, "P2\n1 1\n255\n300\n");
  CHECK_THROWS_AS(read_pgm_image(p), DataError);
  CHECK_THROWS_AS(read_pgm_image(scratch("missing.pgm")), DataError);
}
