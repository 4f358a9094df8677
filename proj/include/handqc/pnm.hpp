#pragma once

#include <filesystem>
#include <iosfwd>

#include "handqc/imaging.hpp"

namespace handqc {

/// Reads binary PGM (P5) or PPM (P6) with maxval <= 255.
Raster read_pnm(std::istream& in);
Raster read_pnm(const std::filesystem::path& path);

/// Writes P5 for single-channel rasters and P6 for RGB.
void write_pnm(std::ostream& out, const Raster& image);
void write_pnm(const std::filesystem::path& path, const Raster& image);

bool has_pnm_extension(const std::filesystem::path& path);

}  // namespace handqc
