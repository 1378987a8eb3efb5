#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cennq/grid.hpp"

namespace cennq {

enum class PgmFormat { Ascii /* P2 */, Binary /* P5 */ };

/// Raw gray image as stored on disk.
struct PgmImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::uint32_t maxval = 255;
  std::vector<std::uint16_t> pixels;  // row-major
};

/// Reads P2 or P5 (8- or 16-bit). Throws DataError on malformed files.
PgmImage read_pgm_image(const std::filesystem::path& path);
void write_pgm_image(const std::filesystem::path& path, const PgmImage& img,
                     PgmFormat format = PgmFormat::Binary);

// Cell mapping u = 1 - 2 * pixel / maxval: black is +1, white is -1.
double pixel_to_cell(std::uint32_t pixel, std::uint32_t maxval);
/// Inverse mapping, rounded to the nearest level and clamped to [0, maxval].
std::uint32_t cell_to_pixel(double cell, std::uint32_t maxval);

CellGrid to_grid(const PgmImage& img);
PgmImage from_grid(const CellGrid& grid, std::uint32_t maxval = 255);

CellGrid read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const CellGrid& grid,
               PgmFormat format = PgmFormat::Binary, std::uint32_t maxval = 255);

}  // namespace cennq
