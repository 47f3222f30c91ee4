#pragma once

#include <filesystem>
#include <vector>

#include "lmlcc/preprocess/patch.hpp"

namespace lmlcc {

/// Binary patch cache. File header "LMLCCPCH" + u32 version, then one record
/// per patch: nodule_id, side (u32), augmentation_tag, label (i32, -1 when
/// absent), side^3 little-endian float32. Strings are u32 length + bytes.
/// A CSV index (`index,nodule_id,side,augmentation_tag,label,byte_offset`) is
/// written next to it with the `.csv` extension.
void write_patch_cache(const std::filesystem::path& path, const std::vector<Patch>& patches);
std::vector<Patch> read_patch_cache(const std::filesystem::path& path);

}  // namespace lmlcc
