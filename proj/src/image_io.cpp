#include "neoscan/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "neoscan/errors.hpp"

namespace neoscan {

namespace {

std::string lower_ext(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

// Reads the next PGM header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (!std::isspace(c)) break;
  }
  if (c == EOF) return tok;
  do {
    tok.push_back(static_cast<char>(c));
  } while ((c = in.get()) != EOF && !std::isspace(c));
  return tok;
}

int parse_dim(const std::string& tok, const std::filesystem::path& path, const char* what) {
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(),
                                  [](unsigned char c) { return std::isdigit(c); }))
    throw FormatError(path.string() + ": bad PGM " + what);
  long v = std::stol(tok);
  if (v < 1 || v > 1 << 20) throw FormatError(path.string() + ": bad PGM " + what);
  return static_cast<int>(v);
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open");

  const std::string magic = next_token(in);
  if (magic != "P5") throw FormatError(path.string() + ": not a binary PGM (P5)");

  const int w = parse_dim(next_token(in), path, "width");
  const int h = parse_dim(next_token(in), path, "height");
  const std::string maxval = next_token(in);
  if (maxval != "255")
    throw FormatError(path.string() + ": unsupported PGM maxval " + maxval + " (only 255)");

  GrayImage img(w, h);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.size()))
    throw FormatError(path.string() + ": truncated PGM pixel data");
  return img;
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.size()));
  if (!out) throw FormatError(path.string() + ": write failed");
}

GrayImage read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw FormatError(path.string() + ": cannot open");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw FormatError("libpng: read struct allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError("libpng: info struct allocation failed");
  }

  GrayImage img;
  std::vector<png_bytep> row_ptrs;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": corrupt PNG");
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  const png_byte bit_depth = png_get_bit_depth(png, info);
  if (color_type != PNG_COLOR_TYPE_GRAY || bit_depth != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": PNG must be 8-bit grayscale (got color type " +
                      std::to_string(color_type) + ", depth " + std::to_string(bit_depth) + ")");
  }

  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  img = GrayImage(w, h);
  row_ptrs.resize(h);
  for (int y = 0; y < h; ++y)
    row_ptrs[y] = img.pixels.data() + static_cast<std::size_t>(y) * w;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_png(const GrayImage& img, const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw FormatError(path.string() + ": cannot open for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw FormatError("libpng: write struct allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw FormatError("libpng: info struct allocation failed");
  }

  std::vector<png_bytep> row_ptrs(img.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError(path.string() + ": PNG write failed");
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y)
    row_ptrs[y] =
        const_cast<png_bytep>(img.pixels.data() + static_cast<std::size_t>(y) * img.width);
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

GrayImage read_image(const std::filesystem::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".png") return read_png(path);
  throw FormatError(path.string() + ": unsupported image extension '" + ext + "'");
}

void write_image(const GrayImage& img, const std::filesystem::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".pgm")
    write_pgm(img, path);
  else if (ext == ".png")
    write_png(img, path);
  else
    throw FormatError(path.string() + ": unsupported image extension '" + ext + "'");
}

}  // namespace neoscan
