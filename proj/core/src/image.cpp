#include "bsr/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "bsr/errors.hpp"

namespace bsr {

void clamp_unit(Image& img) {
  for (double& v : img.data) v = std::clamp(v, 0.0, 1.0);
}

Image clamped(Image img) {
  clamp_unit(img);
  return img;
}

Image crop(const Image& img, std::size_t x0, std::size_t y0, std::size_t w, std::size_t h) {
  if (x0 + w > img.width || y0 + h > img.height) {
    throw DataError("crop window exceeds image bounds");
  }
  Image out(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) out.at(x, y) = img.at(x0 + x, y0 + y);
  }
  return out;
}

Image crop_to_multiple(const Image& img, std::size_t factor) {
  if (factor == 0) throw DataError("crop factor must be positive");
  const std::size_t w = img.width - img.width % factor;
  const std::size_t h = img.height - img.height % factor;
  if (w == 0 || h == 0) throw DataError("image smaller than the scale factor");
  if (w == img.width && h == img.height) return img;
  return crop(img, 0, 0, w, h);
}

double max_abs_difference(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height) {
    throw DataError("image dimensions differ");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

unsigned char quantize(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  (void)png;
  throw DataError(std::string("png: ") + msg);
}

void png_warn(png_structp, png_const_charp) {}

Image read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw DataError("cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  if (png == nullptr) throw DataError("png: out of memory");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};

  png_init_io(png, file.get());
  png_read_info(png, info);

  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  const auto color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
      color == PNG_COLOR_TYPE_PALETTE) {
    // Rec. 601 luma weights, in units of 1/100000.
    png_set_rgb_to_gray_fixed(png, 1, 29900, 58700);
  }
  png_read_update_info(png, info);

  const std::size_t w = png_get_image_width(png, info);
  const std::size_t h = png_get_image_height(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  if (png_get_channels(png, info) != 1 || rowbytes != w) {
    throw DataError("png: unsupported pixel layout in " + path.string());
  }
  std::vector<unsigned char> buffer(rowbytes * h);
  std::vector<png_bytep> rows(h);
  for (std::size_t y = 0; y < h; ++y) rows[y] = buffer.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);

  Image img(w, h);
  for (std::size_t i = 0; i < buffer.size(); ++i) img.data[i] = buffer[i] / 255.0;
  return img;
}

// Skips whitespace and '#' comments in a PNM header.
void skip_pnm_space(std::istream& in) {
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (magic != "P5") throw DataError("not a binary PGM: " + path.string());
  std::size_t w = 0, h = 0, maxval = 0;
  skip_pnm_space(in);
  in >> w;
  skip_pnm_space(in);
  in >> h;
  skip_pnm_space(in);
  in >> maxval;
  if (!in || w == 0 || h == 0 || maxval == 0 || maxval > 65535) {
    throw DataError("malformed PGM header: " + path.string());
  }
  in.get();
  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(w * h * bytes_per);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw DataError("truncated PGM: " + path.string());
  }
  Image img(w, h);
  for (std::size_t i = 0; i < w * h; ++i) {
    const double v = bytes_per == 1 ? raw[i] : (raw[2 * i] << 8 | raw[2 * i + 1]);
    img.data[i] = v / static_cast<double>(maxval);
  }
  return img;
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw DataError("cannot open " + path.string());
  unsigned char sig[8] = {};
  probe.read(reinterpret_cast<char*>(sig), 8);
  const auto got = probe.gcount();
  probe.close();
  if (got == 8 && png_sig_cmp(sig, 0, 8) == 0) return read_png(path);
  if (got >= 2 && sig[0] == 'P' && sig[1] == '5') return read_pgm(path);
  throw DataError("unsupported image format: " + path.string());
}

void write_png(const Image& img, const std::filesystem::path& path) {
  if (img.empty()) throw DataError("cannot write an empty image");
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw DataError("cannot create " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  if (png == nullptr) throw DataError("png: out of memory");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};

  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<unsigned char> row(img.width);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) row[x] = quantize(img.at(x, y));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
}

void write_pgm(const Image& img, const std::filesystem::path& path) {
  if (img.empty()) throw DataError("cannot write an empty image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot create " + path.string());
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  std::vector<unsigned char> raw(img.size());
  std::transform(img.data.begin(), img.data.end(), raw.begin(), quantize);
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

void write_image(const Image& img, const std::filesystem::path& path) {
  if (path.extension() == ".pgm") {
    write_pgm(img, path);
  } else {
    write_png(img, path);
  }
}

}  // namespace bsr
