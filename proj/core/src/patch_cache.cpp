#include "lmlcc/preprocess/patch_cache.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "lmlcc/common/binary_io.hpp"
#include "lmlcc/common/error.hpp"

namespace lmlcc {
namespace {
constexpr char kMagic[8] = {'L', 'M', 'L', 'C', 'C', 'P', 'C', 'H'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void write_patch_cache(const std::filesystem::path& path, const std::vector<Patch>& patches) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  auto index_path = path;
  index_path.replace_extension(".csv");
  std::ofstream index(index_path, std::ios::trunc);
  if (!index) throw IoError("cannot write " + index_path.string());
  index << "index,nodule_id,side,augmentation_tag,label,byte_offset\n";

  out.write(kMagic, sizeof(kMagic));
  io::write_le<std::uint32_t>(out, kVersion);
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const auto& p = patches[i];
    if (p.voxels.size() != p.side * p.side * p.side) {
      throw SizeMismatchError("patch '" + p.nodule_id + "' is not cubic");
    }
    index << i << ',' << p.nodule_id << ',' << p.side << ',' << p.augmentation_tag << ','
          << (p.label ? std::to_string(*p.label) : std::string()) << ',' << out.tellp() << '\n';
    io::write_string(out, p.nodule_id);
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.side));
    io::write_string(out, p.augmentation_tag);
    io::write_le<std::int32_t>(out, p.label ? *p.label : -1);
    for (const float v : p.voxels) io::write_le(out, v);
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<Patch> read_patch_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open patch cache: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError(path.string() + " is not a patch cache");
  }
  if (io::read_le<std::uint32_t>(in, "version") != kVersion) {
    throw ParseError("unsupported patch cache version in " + path.string());
  }
  std::vector<Patch> out;
  while (in.peek() != std::char_traits<char>::eof()) {
    Patch p;
    p.nodule_id = io::read_string(in, "nodule_id");
    p.side = io::read_le<std::uint32_t>(in, "side");
    if (p.side == 0 || p.side > 512) throw ParseError("implausible patch side in " + path.string());
    p.augmentation_tag = io::read_string(in, "augmentation_tag");
    const auto label = io::read_le<std::int32_t>(in, "label");
    if (label == 0 || label == 1) {
      p.label = label;
    } else if (label != -1) {
      throw ParseError("invalid patch label in " + path.string());
    }
    p.voxels.resize(p.side * p.side * p.side);
    for (auto& v : p.voxels) v = io::read_le<float>(in, "voxels");
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace lmlcc
