#include "netsel/format.hpp"

#include <fstream>
#include <sstream>

namespace netsel {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io_failure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  require(!in.bad(), ErrorCode::io_failure, "read failed: " + path.string());
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::io_failure, "cannot open " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  require(out.good(), ErrorCode::io_failure, "write failed: " + path.string());
}

std::string file_hash_hex(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  buf[16] = 0;
  return std::string(buf, 16);
}

}  // namespace netsel
