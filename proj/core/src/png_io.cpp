#include "signmon/png_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace signmon {

namespace {

struct ByteReader {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos = 0;
};

void read_from_buffer(png_structp png, png_bytep out, png_size_t n) {
    auto* r = static_cast<ByteReader*>(png_get_io_ptr(png));
    if (r->pos + n > r->size) png_error(png, "truncated PNG stream");
    std::memcpy(out, r->data + r->pos, n);
    r->pos += n;
}

void write_to_buffer(png_structp png, png_bytep data, png_size_t n) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + n);
}

void flush_noop(png_structp) {}

void on_png_error(png_structp png, png_const_charp msg) {
    *static_cast<std::string*>(png_get_error_ptr(png)) = msg ? msg : "libpng error";
    longjmp(png_jmpbuf(png), 1);
}

void on_png_warning(png_structp, png_const_charp) {}

} // namespace

Image decode_png(const std::vector<std::uint8_t>& bytes) {
    std::string errmsg;
    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, &errmsg, on_png_error, on_png_warning);
    if (!png) throw ImageDecodeError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw ImageDecodeError("png_create_info_struct failed");
    }

    std::vector<png_bytep> rows;
    Image img;
    ByteReader reader{bytes.data(), bytes.size()};

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageDecodeError("PNG decode failed: " + errmsg);
    }

    png_set_read_fn(png, &reader, read_from_buffer);
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);

    // Normalize everything to 8-bit gray or RGB.
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (depth == 16) png_set_strip_16(png);
    if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_strip_alpha(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    int out_channels = png_get_channels(png, info);
    if (out_channels != 1 && out_channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageDecodeError("PNG decode: unsupported channel layout");
    }

    img = Image(static_cast<int>(w), static_cast<int>(h), out_channels);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = img.pixels.data() + img.index(0, static_cast<int>(y));
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

std::vector<std::uint8_t> encode_png(const Image& img) {
    if (img.width < 1 || img.height < 1)
        throw std::invalid_argument("encode_png: empty image");

    std::string errmsg;
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, &errmsg, on_png_error, on_png_warning);
    if (!png) throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }

    std::vector<std::uint8_t> out;
    std::vector<png_const_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y) rows[y] = img.pixels.data() + img.index(0, y);

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encode failed: " + errmsg);
    }

    png_set_write_fn(png, &out, write_to_buffer, flush_noop);
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, img.width, img.height, 8,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_rows(png, const_cast<png_bytepp>(rows.data()),
                   static_cast<png_uint_32>(img.height));
    png_write_end(png, info);
    png_destroy_write_struct(&png, &info);
    return out;
}

Image read_png(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_png(bytes);
}

void write_png(const std::string& path, const Image& img) {
    auto bytes = encode_png(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path);
}

} // namespace signmon
