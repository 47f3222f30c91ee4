#include "lmlcc/ingest/metaimage.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "lmlcc/common/binary_io.hpp"
#include "lmlcc/common/error.hpp"
#include "lmlcc/common/text.hpp"

namespace lmlcc {
namespace {

struct TypeInfo {
  MetaElementType type;
  const char* name;
  std::size_t size;
};

constexpr TypeInfo kTypes[] = {
    {MetaElementType::Char, "MET_CHAR", 1},    {MetaElementType::UChar, "MET_UCHAR", 1},
    {MetaElementType::Short, "MET_SHORT", 2},  {MetaElementType::UShort, "MET_USHORT", 2},
    {MetaElementType::Int, "MET_INT", 4},      {MetaElementType::UInt, "MET_UINT", 4},
    {MetaElementType::Float, "MET_FLOAT", 4},  {MetaElementType::Double, "MET_DOUBLE", 8},
};

using Header = std::map<std::string, std::string>;

Header parse_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open MetaImage header: " + path.string());
  Header h;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 'Key = Value'");
    }
    h[std::string(text::trim(t.substr(0, eq)))] = std::string(text::trim(t.substr(eq + 1)));
  }
  return h;
}

const std::string& require(const Header& h, const std::string& key) {
  const auto it = h.find(key);
  if (it == h.end()) throw ParseError("MetaImage header is missing required key " + key);
  return it->second;
}

Vec3 parse_triple(const std::string& value, const std::string& key) {
  const auto parts = text::split_ws(value);
  if (parts.size() != 3) throw ParseError("MetaImage key " + key + " must have 3 values");
  Vec3 out{};
  for (int a = 0; a < 3; ++a) out[a] = text::parse_double(parts[a], key);
  return out;
}

template <typename E>
void decode(const std::vector<char>& bytes, bool swap, std::vector<float>& out) {
  const std::size_t n = bytes.size() / sizeof(E);
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    E v;
    std::memcpy(&v, bytes.data() + i * sizeof(E), sizeof(E));
    if (swap) v = io::byteswap_value(v);
    out[i] = static_cast<float>(v);
  }
}

template <typename E>
void encode(std::span<const float> voxels, std::ostream& out) {
  for (const float f : voxels) {
    E v{};
    if constexpr (std::is_integral_v<E>) {
      const double r = std::nearbyint(static_cast<double>(f));
      if (!(r >= static_cast<double>(std::numeric_limits<E>::lowest()) &&
            r <= static_cast<double>(std::numeric_limits<E>::max()))) {
        throw ValidationError("voxel value " + text::format_double(f) +
                              " does not fit the requested MetaImage element type");
      }
      v = static_cast<E>(r);
    } else {
      v = static_cast<E>(f);
    }
    io::write_le(out, v);
  }
}

}  // namespace

std::string to_string(MetaElementType t) {
  for (const auto& info : kTypes) {
    if (info.type == t) return info.name;
  }
  return "MET_UNKNOWN";
}

MetaElementType parse_meta_element_type(const std::string& name) {
  for (const auto& info : kTypes) {
    if (name == info.name) return info.type;
  }
  throw ParseError("unsupported MetaImage ElementType " + name);
}

std::size_t element_size(MetaElementType t) {
  for (const auto& info : kTypes) {
    if (info.type == t) return info.size;
  }
  return 0;
}

CtVolume read_mhd_volume(const std::filesystem::path& header_path) {
  const Header h = parse_header(header_path);

  if (const auto it = h.find("NDims"); it != h.end() && text::parse_int(it->second, "NDims") != 3) {
    throw ParseError("only 3-dimensional MetaImage volumes are supported (NDims)");
  }
  if (const auto it = h.find("CompressedData");
      it != h.end() && text::parse_bool(it->second, "CompressedData")) {
    throw ParseError("compressed MetaImage data is not supported (CompressedData)");
  }

  CtVolume vol;
  vol.series_id = header_path.stem().string();

  const auto dim_parts = text::split_ws(require(h, "DimSize"));
  if (dim_parts.size() != 3) throw ParseError("MetaImage key DimSize must have 3 values");
  for (int a = 0; a < 3; ++a) {
    const auto d = text::parse_int(dim_parts[a], "DimSize");
    if (d < 1) throw ParseError("MetaImage key DimSize must be positive");
    vol.geometry.dims[a] = static_cast<std::size_t>(d);
  }
  vol.geometry.spacing = parse_triple(require(h, "ElementSpacing"), "ElementSpacing");
  if (const auto it = h.find("Offset"); it != h.end()) {
    vol.geometry.origin = parse_triple(it->second, "Offset");
  }
  const MetaElementType type = parse_meta_element_type(require(h, "ElementType"));
  const std::string& data_file = require(h, "ElementDataFile");
  if (data_file == "LOCAL" || data_file == "LIST" || data_file.find('%') != std::string::npos) {
    throw ParseError("ElementDataFile must name a single external raw file, got '" + data_file + "'");
  }
  try {
    vol.geometry.validate();
  } catch (const ValidationError& e) {
    throw ParseError(std::string("MetaImage key ElementSpacing: ") + e.what());
  }

  bool msb = false;
  for (const char* key : {"BinaryDataByteOrderMSB", "ElementByteOrderMSB"}) {
    if (const auto it = h.find(key); it != h.end()) msb = text::parse_bool(it->second, key);
  }
  std::uint64_t header_skip = 0;
  if (const auto it = h.find("HeaderSize"); it != h.end()) {
    const auto hs = text::parse_int(it->second, "HeaderSize");
    if (hs < 0) throw ParseError("HeaderSize = -1 is not supported");
    header_skip = static_cast<std::uint64_t>(hs);
  }

  const auto raw_path = header_path.parent_path() / data_file;
  std::ifstream raw(raw_path, std::ios::binary);
  if (!raw) throw IoError("cannot open MetaImage data file: " + raw_path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(raw)), std::istreambuf_iterator<char>());

  const std::size_t esize = element_size(type);
  const std::uint64_t expected = vol.geometry.voxel_count() * esize;
  if (bytes.size() < header_skip || bytes.size() - header_skip != expected) {
    throw SizeMismatchError("MetaImage data file " + raw_path.string() + " holds " +
                            std::to_string(bytes.size() - std::min<std::uint64_t>(bytes.size(), header_skip)) +
                            " bytes, expected " + std::to_string(expected) + " (" +
                            std::to_string(vol.geometry.voxel_count()) + " x " + std::to_string(esize) +
                            ")");
  }
  if (header_skip > 0) bytes.erase(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(header_skip));

  const bool swap = msb == (std::endian::native == std::endian::little);
  switch (type) {
    case MetaElementType::Char: decode<std::int8_t>(bytes, swap, vol.hu); break;
    case MetaElementType::UChar: decode<std::uint8_t>(bytes, swap, vol.hu); break;
    case MetaElementType::Short: decode<std::int16_t>(bytes, swap, vol.hu); break;
    case MetaElementType::UShort: decode<std::uint16_t>(bytes, swap, vol.hu); break;
    case MetaElementType::Int: decode<std::int32_t>(bytes, swap, vol.hu); break;
    case MetaElementType::UInt: decode<std::uint32_t>(bytes, swap, vol.hu); break;
    case MetaElementType::Float: decode<float>(bytes, swap, vol.hu); break;
    case MetaElementType::Double: decode<double>(bytes, swap, vol.hu); break;
  }
  return vol;
}

void write_mhd(const std::filesystem::path& header_path, const VolumeGeometry& geometry,
               std::span<const float> voxels, MetaElementType type) {
  geometry.validate();
  if (voxels.size() != geometry.voxel_count()) {
    throw SizeMismatchError("voxel buffer does not match geometry");
  }
  auto raw_path = header_path;
  raw_path.replace_extension(".raw");

  std::ofstream raw(raw_path, std::ios::binary | std::ios::trunc);
  if (!raw) throw IoError("cannot write " + raw_path.string());
  switch (type) {
    case MetaElementType::Char: encode<std::int8_t>(voxels, raw); break;
    case MetaElementType::UChar: encode<std::uint8_t>(voxels, raw); break;
    case MetaElementType::Short: encode<std::int16_t>(voxels, raw); break;
    case MetaElementType::UShort: encode<std::uint16_t>(voxels, raw); break;
    case MetaElementType::Int: encode<std::int32_t>(voxels, raw); break;
    case MetaElementType::UInt: encode<std::uint32_t>(voxels, raw); break;
    case MetaElementType::Float: encode<float>(voxels, raw); break;
    case MetaElementType::Double: encode<double>(voxels, raw); break;
  }
  if (!raw) throw IoError("failed writing " + raw_path.string());

  std::ofstream hdr(header_path, std::ios::trunc);
  if (!hdr) throw IoError("cannot write " + header_path.string());
  const auto& g = geometry;
  hdr << "ObjectType = Image\n"
      << "NDims = 3\n"
      << "BinaryData = True\n"
      << "BinaryDataByteOrderMSB = False\n"
      << "CompressedData = False\n"
      << "Offset = " << text::format_double(g.origin[0]) << ' ' << text::format_double(g.origin[1]) << ' '
      << text::format_double(g.origin[2]) << '\n'
      << "ElementSpacing = " << text::format_double(g.spacing[0]) << ' '
      << text::format_double(g.spacing[1]) << ' ' << text::format_double(g.spacing[2]) << '\n'
      << "DimSize = " << g.dims[0] << ' ' << g.dims[1] << ' ' << g.dims[2] << '\n'
      << "ElementType = " << to_string(type) << '\n'
      << "ElementDataFile = " << raw_path.filename().string() << '\n';
  if (!hdr) throw IoError("failed writing " + header_path.string());
}

}  // namespace lmlcc
