#include "cennq/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>

#include "cennq/errors.hpp"

namespace cennq {

namespace {

// Header tokens are whitespace separated; '#' starts a comment to end of line.
class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

  std::uint32_t next_uint(const char* what) {
    skip_space_and_comments();
    std::size_t start = pos_;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (start == pos_) throw DataError(std::string("PGM: expected ") + what);
    const auto token = bytes_.substr(start, pos_ - start);
    if (token.size() > 9) throw DataError(std::string("PGM: ") + what + " too large");
    return static_cast<std::uint32_t>(std::stoul(token));
  }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char ch = bytes_[pos_];
      if (ch == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

PgmImage read_pgm_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
    throw DataError("'" + path.string() + "' is not a P2/P5 PGM file");
  const bool binary = bytes[1] == '5';

  HeaderReader hdr(bytes);
  hdr.advance(2);
  PgmImage img;
  img.width = hdr.next_uint("width");
  img.height = hdr.next_uint("height");
  img.maxval = hdr.next_uint("maxval");
  if (img.width == 0 || img.height == 0) throw DataError("PGM: zero image dimension");
  if (img.maxval == 0 || img.maxval > 65535) throw DataError("PGM: maxval out of range");
  const std::size_t count = img.width * img.height;
  img.pixels.resize(count);

  if (binary) {
    // Exactly one whitespace byte separates the header from the raster.
    std::size_t pos = hdr.pos();
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
      throw DataError("PGM: missing separator before raster");
    ++pos;
    const std::size_t bpp = img.maxval > 255 ? 2 : 1;
    if (bytes.size() - pos < count * bpp) throw DataError("PGM: truncated raster");
    for (std::size_t i = 0; i < count; ++i) {
      const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos + i * bpp);
      img.pixels[i] = bpp == 2 ? static_cast<std::uint16_t>((p[0] << 8) | p[1]) : p[0];
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) img.pixels[i] = static_cast<std::uint16_t>(hdr.next_uint("pixel"));
  }
  for (auto px : img.pixels)
    if (px > img.maxval) throw DataError("PGM: pixel exceeds maxval");
  return img;
}

void write_pgm_image(const std::filesystem::path& path, const PgmImage& img, PgmFormat format) {
  if (img.pixels.size() != img.width * img.height)
    throw std::invalid_argument("write_pgm: pixel count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write image '" + path.string() + "'");
  out << (format == PgmFormat::Binary ? "P5" : "P2") << '\n'
      << img.width << ' ' << img.height << '\n'
      << img.maxval << '\n';
  if (format == PgmFormat::Binary) {
    const bool wide = img.maxval > 255;
    for (auto px : img.pixels) {
      if (wide) out.put(static_cast<char>(px >> 8));
      out.put(static_cast<char>(px & 0xff));
    }
  } else {
    for (std::size_t r = 0; r < img.height; ++r) {
      for (std::size_t c = 0; c < img.width; ++c) {
        if (c) out << ' ';
        out << img.pixels[r * img.width + c];
      }
      out << '\n';
    }
  }
  if (!out) throw DataError("failed writing image '" + path.string() + "'");
}

double pixel_to_cell(std::uint32_t pixel, std::uint32_t maxval) {
  return 1.0 - 2.0 * static_cast<double>(pixel) / static_cast<double>(maxval);
}

std::uint32_t cell_to_pixel(double cell, std::uint32_t maxval) {
  const double px = std::round((1.0 - cell) * 0.5 * static_cast<double>(maxval));
  return static_cast<std::uint32_t>(std::clamp(px, 0.0, static_cast<double>(maxval)));
}

CellGrid to_grid(const PgmImage& img) {
  CellGrid g(img.height, img.width);
  auto v = g.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = pixel_to_cell(img.pixels[i], img.maxval);
  return g;
}

PgmImage from_grid(const CellGrid& grid, std::uint32_t maxval) {
  if (maxval == 0 || maxval > 65535) throw std::invalid_argument("maxval out of range");
  PgmImage img{grid.cols(), grid.rows(), maxval, {}};
  img.pixels.reserve(grid.size());
  for (double v : grid.values()) img.pixels.push_back(static_cast<std::uint16_t>(cell_to_pixel(v, maxval)));
  return img;
}

CellGrid read_pgm(const std::filesystem::path& path) { return to_grid(read_pgm_image(path)); }

void write_pgm(const std::filesystem::path& path, const CellGrid& grid, PgmFormat format,
               std::uint32_t maxval) {
  write_pgm_image(path, from_grid(grid, maxval), format);
}

}  // namespace cennq
