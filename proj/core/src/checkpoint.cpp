#include "lmlcc/diffkit/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "lmlcc/common/binary_io.hpp"
#include "lmlcc/common/error.hpp"

namespace lmlcc::diff {
namespace {

constexpr char kMagic[8] = {'L', 'M', 'L', 'C', 'C', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

void write_tensor(std::ostream& out, const NamedTensor& t) {
  if (shape_size(t.shape) != t.data.size()) {
    throw ShapeError("checkpoint tensor '" + t.name + "' data does not match its shape");
  }
  io::write_string(out, t.name);
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
  for (const auto d : t.shape) io::write_le<std::uint64_t>(out, d);
  for (const float v : t.data) io::write_le(out, v);
}

NamedTensor read_tensor(std::istream& in) {
  NamedTensor t;
  t.name = io::read_string(in, "tensor name");
  const auto rank = io::read_le<std::uint32_t>(in, "tensor rank");
  if (rank > 8) throw ParseError("implausible rank for checkpoint tensor '" + t.name + "'");
  for (std::uint32_t i = 0; i < rank; ++i) {
    t.shape.push_back(static_cast<std::size_t>(io::read_le<std::uint64_t>(in, "tensor extent")));
  }
  const std::size_t n = shape_size(t.shape);
  if (n > (std::size_t{1} << 30)) throw ParseError("implausible size for checkpoint tensor '" + t.name + "'");
  t.data.resize(n);
  for (auto& v : t.data) v = io::read_le<float>(in, "tensor data");
  return t;
}

}  // namespace

const NamedTensor* Checkpoint::find(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::uint64_t config_digest(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  io::write_le<std::uint32_t>(out, kVersion);
  io::write_string(out, ckpt.config_text);
  io::write_le<std::uint64_t>(out, config_digest(ckpt.config_text));
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) write_tensor(out, t);
  io::write_le<std::uint8_t>(out, ckpt.adam ? 1 : 0);
  if (ckpt.adam) {
    const auto& a = *ckpt.adam;
    if (a.m.size() != a.v.size()) throw ShapeError("Adam snapshot moment lists differ in length");
    io::write_le<std::uint64_t>(out, a.t);
    io::write_le<double>(out, a.lr);
    io::write_le<double>(out, a.beta1);
    io::write_le<double>(out, a.beta2);
    io::write_le<double>(out, a.epsilon);
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(a.m.size()));
    for (std::size_t i = 0; i < a.m.size(); ++i) {
      write_tensor(out, a.m[i]);
      write_tensor(out, a.v[i]);
    }
  }
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError(path.string() + " is not an lmlcc checkpoint");
  }
  const auto version = io::read_le<std::uint32_t>(in, "version");
  if (version != kVersion) throw ParseError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.config_text = io::read_string(in, "config");
  const auto digest = io::read_le<std::uint64_t>(in, "config digest");
  if (digest != config_digest(ckpt.config_text)) {
    throw ParseError("checkpoint config digest mismatch in " + path.string());
  }
  const auto count = io::read_le<std::uint32_t>(in, "tensor count");
  for (std::uint32_t i = 0; i < count; ++i) ckpt.tensors.push_back(read_tensor(in));
  if (io::read_le<std::uint8_t>(in, "adam flag") != 0) {
    AdamSnapshot a;
    a.t = io::read_le<std::uint64_t>(in, "adam t");
    a.lr = io::read_le<double>(in, "adam lr");
    a.beta1 = io::read_le<double>(in, "adam beta1");
    a.beta2 = io::read_le<double>(in, "adam beta2");
    a.epsilon = io::read_le<double>(in, "adam epsilon");
    const auto n = io::read_le<std::uint32_t>(in, "adam count");
    for (std::uint32_t i = 0; i < n; ++i) {
      a.m.push_back(read_tensor(in));
      a.v.push_back(read_tensor(in));
    }
    ckpt.adam = std::move(a);
  }
  return ckpt;
}

}  // namespace lmlcc::diff
