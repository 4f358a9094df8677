#include "handqc/pnm.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "handqc/error.hpp"

namespace handqc {
namespace {

// Header tokens are separated by whitespace; '#' starts a comment running to end of line.
int read_header_int(std::istream& in) {
  int c = in.peek();
  while (c != EOF) {
    if (std::isspace(c)) {
      in.get();
    } else if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else {
      break;
    }
    c = in.peek();
  }
  int value = 0;
  if (!(in >> value)) throw ParseError("malformed PNM header");
  return value;
}

}  // namespace

Raster read_pnm(std::istream& in) {
  char magic[2] = {0, 0};
  if (!in.read(magic, 2) || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
    throw ParseError("not a binary PGM/PPM file (expected P5 or P6)");
  }
  const int channels = magic[1] == '5' ? 1 : 3;
  const int width = read_header_int(in);
  const int height = read_header_int(in);
  const int maxval = read_header_int(in);
  if (width < 1 || height < 1) throw InvalidInputError("PNM image has zero dimension");
  if (maxval < 1 || maxval > 255) {
    throw ParseError("only 8-bit PNM is supported (maxval " + std::to_string(maxval) + ")");
  }
  // Exactly one whitespace byte separates the header from the raster.
  if (!std::isspace(in.get())) throw ParseError("malformed PNM header");

  Raster image(width, height, channels);
  in.read(reinterpret_cast<char*>(image.pixels.data()),
          static_cast<std::streamsize>(image.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(image.pixels.size())) {
    throw ParseError("truncated PNM raster");
  }
  return image;
}

Raster read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open " + path.string());
  try {
    return read_pnm(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_pnm(std::ostream& out, const Raster& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw InvalidInputError("PNM output needs 1 or 3 channels");
  }
  out << (image.channels == 1 ? "P5" : "P6") << '\n'
      << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
}

void write_pnm(const std::filesystem::path& path, const Raster& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("cannot write " + path.string());
  write_pnm(out, image);
}

bool has_pnm_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

}  // namespace handqc
