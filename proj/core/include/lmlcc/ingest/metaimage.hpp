#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "lmlcc/ingest/ct_volume.hpp"

namespace lmlcc {

enum class MetaElementType { Char, UChar, Short, UShort, Int, UInt, Float, Double };

std::string to_string(MetaElementType t);
MetaElementType parse_meta_element_type(const std::string& name);
std::size_t element_size(MetaElementType t);

/// Reads an uncompressed MetaImage header (.mhd) and its ElementDataFile.
/// Required keys: DimSize, ElementSpacing, ElementType, ElementDataFile.
/// Offset defaults to 0 0 0. The series id is the header file stem.
CtVolume read_mhd_volume(const std::filesystem::path& header_path);

/// Writes `<header_path>` plus a sibling `.raw` with the same stem.
/// Short/UShort/Char/UChar/Int/UInt outputs are rounded; values that do not
/// fit the element type raise ValidationError.
void write_mhd(const std::filesystem::path& header_path, const VolumeGeometry& geometry,
               std::span<const float> voxels, MetaElementType type = MetaElementType::Short);

inline void write_mhd_volume(const std::filesystem::path& header_path, const CtVolume& volume,
                             MetaElementType type = MetaElementType::Short) {
  write_mhd(header_path, volume.geometry, volume.hu, type);
}

}  // namespace lmlcc
