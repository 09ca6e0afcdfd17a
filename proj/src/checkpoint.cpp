#include "avdelay/checkpoint.hpp"

#include <fstream>

#include "avdelay/binio.hpp"

namespace avdelay {
namespace {
constexpr char kMagic[8] = {'A', 'V', 'C', 'K', 'P', 'T', '0', '1'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ck) {
  out.write(kMagic, sizeof kMagic);
  binio::put_u32(out, kVersion);
  binio::put_u32(out, 0);
  binio::put_string(out, ck.kind);
  binio::put_u64(out, ck.params.size());
  binio::put_f64s(out, ck.params);
  binio::put_string(out, ck.config.dump());
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[8];
  binio::read_exact(in, magic, sizeof magic);
  if (!std::equal(magic, magic + 8, kMagic)) throw SchemaError("not a model checkpoint");
  if (binio::get_u32(in) != kVersion) throw SchemaError("unsupported checkpoint version");
  binio::get_u32(in);
  Checkpoint ck;
  ck.kind = binio::get_string(in, 256);
  const auto n = binio::get_u64(in);
  if (n > (std::uint64_t{1} << 36)) throw SchemaError("implausible parameter count");
  ck.params.resize(n);
  binio::get_f64s(in, ck.params);
  ck.config = nlohmann::json::parse(binio::get_string(in));
  return ck;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_checkpoint(out, ck);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("checkpoint not found: " + path.string());
  return read_checkpoint(in);
}

}  // namespace avdelay
