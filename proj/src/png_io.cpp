#include "tcrf/png_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include <png.h>

namespace tcrf {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

struct PngRead {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngRead() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    }
};

struct PngWrite {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWrite() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    }
};

// Reads any grayscale/paletted/color PNG as grayscale rows of the stated
// bit depth (8 or 16), averaging color inputs down via libpng transforms.
void read_gray(const std::filesystem::path& path, int& width, int& height, int& depth,
               std::vector<std::vector<uint8_t>>& rows) {
    FilePtr file(std::fopen(path.string().c_str(), "rb"));
    if (!file) throw DataError("cannot open '" + path.string() + "'");

    PngRead ctx;
    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!ctx.png) throw std::runtime_error("libpng: read struct allocation failed");
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.info) throw std::runtime_error("libpng: info struct allocation failed");
    if (setjmp(png_jmpbuf(ctx.png)))
        throw DataError("failed to decode PNG '" + path.string() + "'");

    png_init_io(ctx.png, file.get());
    png_read_info(ctx.png, ctx.info);

    png_set_palette_to_rgb(ctx.png);
    png_set_expand_gray_1_2_4_to_8(ctx.png);
    png_set_strip_alpha(ctx.png);
    if (png_get_color_type(ctx.png, ctx.info) & PNG_COLOR_MASK_COLOR)
        png_set_rgb_to_gray(ctx.png, 1, -1, -1);
    png_read_update_info(ctx.png, ctx.info);

    width = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
    height = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
    depth = png_get_bit_depth(ctx.png, ctx.info);
    if (depth != 8 && depth != 16)
        throw DataError("unsupported PNG bit depth in '" + path.string() + "'");

    const size_t row_bytes = png_get_rowbytes(ctx.png, ctx.info);
    rows.assign(height, std::vector<uint8_t>(row_bytes));
    std::vector<png_bytep> row_ptrs(height);
    for (int y = 0; y < height; ++y) row_ptrs[y] = rows[y].data();
    png_read_image(ctx.png, row_ptrs.data());
    png_read_end(ctx.png, nullptr);
}

void write_png(const std::filesystem::path& path, int width, int height, int color_type,
               const std::vector<png_bytep>& row_ptrs) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        FilePtr file(std::fopen(tmp.string().c_str(), "wb"));
        if (!file) throw DataError("cannot write '" + tmp.string() + "'");
        PngWrite ctx;
        ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (!ctx.png) throw std::runtime_error("libpng: write struct allocation failed");
        ctx.info = png_create_info_struct(ctx.png);
        if (!ctx.info) throw std::runtime_error("libpng: info struct allocation failed");
        if (setjmp(png_jmpbuf(ctx.png)))
            throw DataError("failed to encode PNG '" + path.string() + "'");
        png_init_io(ctx.png, file.get());
        png_set_IHDR(ctx.png, ctx.info, width, height, 8, color_type, PNG_INTERLACE_NONE,
                     PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(ctx.png, ctx.info);
        png_write_image(ctx.png, const_cast<png_bytep*>(row_ptrs.data()));
        png_write_end(ctx.png, nullptr);
    }
    std::filesystem::rename(tmp, path);
}

} // namespace

GridF read_png_channel(const std::filesystem::path& path) {
    int width = 0, height = 0, depth = 0;
    std::vector<std::vector<uint8_t>> rows;
    read_gray(path, width, height, depth, rows);
    GridF out(width, height);
    for (int y = 0; y < height; ++y) {
        if (depth == 8) {
            for (int x = 0; x < width; ++x) out(x, y) = rows[y][x];
        } else {
            for (int x = 0; x < width; ++x) {
                const uint16_t v = static_cast<uint16_t>((rows[y][2 * x] << 8) | rows[y][2 * x + 1]);
                out(x, y) = v / 257.0;
            }
        }
    }
    return out;
}

GridU8 read_png_index(const std::filesystem::path& path) {
    int width = 0, height = 0, depth = 0;
    std::vector<std::vector<uint8_t>> rows;
    read_gray(path, width, height, depth, rows);
    if (depth != 8) throw DataError("label map '" + path.string() + "' must be 8-bit");
    GridU8 out(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) out(x, y) = rows[y][x];
    return out;
}

void write_png_gray8(const std::filesystem::path& path, const GridU8& grid) {
    std::vector<png_bytep> row_ptrs(grid.height());
    for (int y = 0; y < grid.height(); ++y)
        row_ptrs[y] = const_cast<png_bytep>(grid.data() + static_cast<size_t>(y) * grid.width());
    write_png(path, grid.width(), grid.height(), PNG_COLOR_TYPE_GRAY, row_ptrs);
}

void write_png_rgb8(const std::filesystem::path& path, int width, int height,
                    const std::vector<uint8_t>& rgb) {
    if (rgb.size() != static_cast<size_t>(width) * height * 3)
        throw std::invalid_argument("write_png_rgb8: buffer size mismatch");
    std::vector<png_bytep> row_ptrs(height);
    for (int y = 0; y < height; ++y)
        row_ptrs[y] = const_cast<png_bytep>(rgb.data() + static_cast<size_t>(y) * width * 3);
    write_png(path, width, height, PNG_COLOR_TYPE_RGB, row_ptrs);
}

GridF read_f32grid(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    char magic[4];
    uint32_t w = 0, h = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&w), 4);
    in.read(reinterpret_cast<char*>(&h), 4);
    if (!in || std::memcmp(magic, "F32G", 4) != 0)
        throw DataError("'" + path.string() + "' is not a float grid file");
    if (w == 0 || h == 0 || w > 1u << 20 || h > 1u << 20)
        throw DataError("'" + path.string() + "' has implausible dimensions");
    GridF out(static_cast<int>(w), static_cast<int>(h));
    std::vector<float> buf(out.size());
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
    if (!in) throw DataError("'" + path.string() + "' is truncated");
    for (size_t i = 0; i < buf.size(); ++i) out.values()[i] = buf[i];
    return out;
}

void write_f32grid(const std::filesystem::path& path, const GridF& grid) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write '" + tmp.string() + "'");
        const uint32_t w = static_cast<uint32_t>(grid.width());
        const uint32_t h = static_cast<uint32_t>(grid.height());
        out.write("F32G", 4);
        out.write(reinterpret_cast<const char*>(&w), 4);
        out.write(reinterpret_cast<const char*>(&h), 4);
        std::vector<float> buf(grid.size());
        for (size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(grid.values()[i]);
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * 4));
        if (!out) throw DataError("failed writing '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

} // namespace tcrf
