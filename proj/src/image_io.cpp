#include <png.h>

#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

#include "wmbench/image.hpp"

namespace wmb {
namespace {

[[noreturn]] void io_fail(const std::string& path, const std::string& what) {
    fail(ErrorCategory::Io, path + ": " + what);
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool has_suffix(const std::string& s, const std::string& suf) {
    if (s.size() < suf.size()) return false;
    for (size_t i = 0; i < suf.size(); ++i) {
        char a = static_cast<char>(
            std::tolower(static_cast<unsigned char>(s[s.size() - suf.size() + i])));
        if (a != suf[i]) return false;
    }
    return true;
}

// --- PNG --------------------------------------------------------------------

Image load_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) io_fail(path, "cannot open for reading");

    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 ||
        png_sig_cmp(header, 0, 8) != 0)
        io_fail(path, "not a PNG file");

    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) io_fail(path, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        io_fail(path, "png_create_info_struct failed");
    }
    std::vector<png_bytep> rows;
    std::vector<png_byte> data;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        io_fail(path, "libpng decode error");
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    // Normalize everything to 8-bit gray or RGB.
    png_byte color = png_get_color_type(png, info);
    png_byte depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (depth == 16) png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    color = png_get_color_type(png, info);
    const int nch = (color == PNG_COLOR_TYPE_GRAY) ? 1 : 3;
    const size_t rowbytes = png_get_rowbytes(png, info);

    data.resize(rowbytes * h);
    rows.resize(h);
    for (int y = 0; y < h; ++y) rows[y] = data.data() + rowbytes * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(w, h, nch);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < nch; ++c)
                img.at(c, y, x) =
                    data[rowbytes * y + static_cast<size_t>(x) * nch + c] / 255.0;
    return img;
}

void save_png(const Image& img, const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) io_fail(path, "cannot open for writing");

    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) io_fail(path, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        io_fail(path, "png_create_info_struct failed");
    }
    std::vector<png_bytep> rows;
    std::vector<png_byte> data;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        io_fail(path, "libpng encode error");
    }
    png_init_io(png, fp.get());
    const int color = img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, img.width, img.height, 8, color,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const size_t rowbytes = static_cast<size_t>(img.width) * img.channels;
    data.resize(rowbytes * img.height);
    rows.resize(img.height);
    for (int y = 0; y < img.height; ++y) {
        rows[y] = data.data() + rowbytes * y;
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                double v = std::clamp(img.at(c, y, x), 0.0, 1.0);
                data[rowbytes * y + static_cast<size_t>(x) * img.channels + c] =
                    static_cast<png_byte>(std::lround(v * 255.0));
            }
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// --- PNM (binary PGM/PPM, maxval 255) ---------------------------------------

int pnm_token(std::istream& in, const std::string& path) {
    // Skips whitespace and '#' comments, then reads one decimal integer.
    int ch = in.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = in.get();
        } else if (std::isspace(ch)) {
            ch = in.get();
        } else {
            break;
        }
    }
    if (ch == EOF || !std::isdigit(ch)) io_fail(path, "malformed PNM header");
    long v = 0;
    while (ch != EOF && std::isdigit(ch)) {
        v = v * 10 + (ch - '0');
        if (v > 1000000000L) io_fail(path, "PNM header value out of range");
        ch = in.get();
    }
    return static_cast<int>(v);
}

Image load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_fail(path, "cannot open for reading");
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || (m1 != '5' && m1 != '6'))
        io_fail(path, "unsupported PNM magic (want P5 or P6)");
    const int nch = (m1 == '5') ? 1 : 3;
    const int w = pnm_token(in, path);
    const int h = pnm_token(in, path);
    const int maxval = pnm_token(in, path);
    if (w <= 0 || h <= 0) io_fail(path, "bad PNM dimensions");
    if (maxval != 255) io_fail(path, "only maxval 255 PNM supported");

    std::vector<unsigned char> data(static_cast<size_t>(w) * h * nch);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
    if (static_cast<size_t>(in.gcount()) != data.size())
        io_fail(path, "truncated PNM pixel data");

    Image img(w, h, nch);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < nch; ++c)
                img.at(c, y, x) =
                    data[(static_cast<size_t>(y) * w + x) * nch + c] / 255.0;
    return img;
}

void save_pnm(const Image& img, const std::string& path) {
    const bool color = img.channels == 3;
    std::ofstream out(path, std::ios::binary);
    if (!out) io_fail(path, "cannot open for writing");
    out << (color ? "P6" : "P5") << "\n"
        << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> data(img.size());
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                double v = std::clamp(img.at(c, y, x), 0.0, 1.0);
                data[(static_cast<size_t>(y) * img.width + x) * img.channels + c] =
                    static_cast<unsigned char>(std::lround(v * 255.0));
            }
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) io_fail(path, "write failed");
}

}  // namespace

Image load_image(const std::string& path) {
    Image img;
    if (has_suffix(path, ".png"))
        img = load_png(path);
    else if (has_suffix(path, ".pgm") || has_suffix(path, ".ppm") ||
             has_suffix(path, ".pnm"))
        img = load_pnm(path);
    else
        fail(ErrorCategory::Config,
             "'" + path + "': unsupported image format (want .png/.pgm/.ppm)");
    validate(img, path);
    return img;
}

void save_image(const Image& img, const std::string& path) {
    validate(img, path);
    if (has_suffix(path, ".png"))
        save_png(img, path);
    else if (has_suffix(path, ".pgm") || has_suffix(path, ".ppm") ||
             has_suffix(path, ".pnm")) {
        if (has_suffix(path, ".pgm") && img.channels != 1)
            io_fail(path, "PGM requires a single-channel image");
        if (has_suffix(path, ".ppm") && img.channels != 3)
            io_fail(path, "PPM requires a 3-channel image");
        save_pnm(img, path);
    } else {
        fail(ErrorCategory::Config,
             "'" + path + "': unsupported image format (want .png/.pgm/.ppm)");
    }
}

}  // namespace wmb
