#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tcrf/core.hpp"

namespace tcrf {

// Grayscale PNG, 8 or 16 bit; 16-bit samples are mapped onto [0, 255]
// (divided by 257) so channel grids share one scale.
GridF read_png_channel(const std::filesystem::path& path);

// Strict 8-bit grayscale read for index label maps.
GridU8 read_png_index(const std::filesystem::path& path);

void write_png_gray8(const std::filesystem::path& path, const GridU8& grid);

// Interleaved RGB, row-major, 3 bytes per pixel.
void write_png_rgb8(const std::filesystem::path& path, int width, int height,
                    const std::vector<uint8_t>& rgb);

// Raw float grid: magic "F32G", u32 width, u32 height, then w*h
// little-endian floats in row-major order.
GridF read_f32grid(const std::filesystem::path& path);
void write_f32grid(const std::filesystem::path& path, const GridF& grid);

} // namespace tcrf
