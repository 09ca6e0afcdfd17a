#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace avdelay {

// Model container shared by every model kind: magic "AVCKPT01", u32 version,
// u32 reserved, length-prefixed kind tag, u64 parameter count, the parameters
// as little-endian f64, then a length-prefixed JSON config block.
struct Checkpoint {
  std::string kind;
  std::vector<double> params;
  nlohmann::json config = nlohmann::json::object();

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ck);
Checkpoint read_checkpoint(std::istream& in);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace avdelay
