#pragma once

#include <filesystem>

#include "neoscan/image.hpp"

namespace neoscan {

// Binary PGM (P5) and 8-bit grayscale PNG. Anything else, including color
// or 16-bit input, raises FormatError. The format is picked from the file
// extension (.pgm / .png, case-insensitive).
GrayImage read_image(const std::filesystem::path& path);
void write_image(const GrayImage& img, const std::filesystem::path& path);

GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayImage& img, const std::filesystem::path& path);

GrayImage read_png(const std::filesystem::path& path);
void write_png(const GrayImage& img, const std::filesystem::path& path);

}  // namespace neoscan
