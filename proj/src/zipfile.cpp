#include "hmg/zipfile.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace hmg::zipfile {
namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;

std::vector<unsigned char> read_all(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open archive " + file.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint16_t u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (std::uint32_t(p[1]) << 8) |
         (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

struct CentralEntry {
  std::string name;
  std::uint16_t method = 0;
  std::uint32_t compressed = 0;
  std::uint32_t uncompressed = 0;
  std::uint32_t local_offset = 0;
};

std::vector<CentralEntry> central_directory(
    const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 22) throw std::runtime_error("archive too small");
  // locate end-of-central-directory (scan backwards past any comment)
  std::size_t eocd = bytes.size();
  for (std::size_t i = bytes.size() - 22 + 1; i-- > 0;) {
    if (u32(&bytes[i]) == kEndSig) {
      eocd = i;
      break;
    }
  }
  if (eocd == bytes.size()) {
    throw std::runtime_error("archive has no central directory");
  }
  const std::uint16_t count = u16(&bytes[eocd + 10]);
  std::size_t at = u32(&bytes[eocd + 16]);
  std::vector<CentralEntry> entries;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (at + 46 > bytes.size() || u32(&bytes[at]) != kCentralSig) {
      throw std::runtime_error("corrupt central directory");
    }
    CentralEntry entry;
    entry.method = u16(&bytes[at + 10]);
    entry.compressed = u32(&bytes[at + 20]);
    entry.uncompressed = u32(&bytes[at + 24]);
    const std::uint16_t name_len = u16(&bytes[at + 28]);
    const std::uint16_t extra_len = u16(&bytes[at + 30]);
    const std::uint16_t comment_len = u16(&bytes[at + 32]);
    entry.local_offset = u32(&bytes[at + 42]);
    entry.name.assign(reinterpret_cast<const char*>(&bytes[at + 46]), name_len);
    entries.push_back(std::move(entry));
    at += 46 + name_len + extra_len + comment_len;
  }
  return entries;
}

std::vector<unsigned char> entry_data(const std::vector<unsigned char>& bytes,
                                      const CentralEntry& entry) {
  std::size_t at = entry.local_offset;
  if (at + 30 > bytes.size() || u32(&bytes[at]) != kLocalSig) {
    throw std::runtime_error("corrupt local header for " + entry.name);
  }
  const std::uint16_t name_len = u16(&bytes[at + 26]);
  const std::uint16_t extra_len = u16(&bytes[at + 28]);
  at += 30 + name_len + extra_len;
  if (at + entry.compressed > bytes.size()) {
    throw std::runtime_error("truncated data for " + entry.name);
  }
  if (entry.method == 0) {  // stored
    return {bytes.begin() + at, bytes.begin() + at + entry.compressed};
  }
  if (entry.method != 8) {
    throw std::runtime_error("unsupported compression method for " +
                             entry.name);
  }
  std::vector<unsigned char> out(entry.uncompressed);
  z_stream stream{};
  if (inflateInit2(&stream, -15) != Z_OK) {  // raw deflate
    throw std::runtime_error("inflateInit2 failed");
  }
  stream.next_in = const_cast<unsigned char*>(bytes.data() + at);
  stream.avail_in = entry.compressed;
  stream.next_out = out.data();
  stream.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&stream, Z_FINISH);
  inflateEnd(&stream);
  if (rc != Z_STREAM_END || stream.total_out != entry.uncompressed) {
    throw std::runtime_error("inflate failed for " + entry.name);
  }
  return out;
}

}  // namespace

std::vector<Entry> list_entries(const std::filesystem::path& archive) {
  const auto bytes = read_all(archive);
  std::vector<Entry> entries;
  for (const auto& central : central_directory(bytes)) {
    entries.push_back({central.name,
                       !central.name.empty() && central.name.back() == '/',
                       central.uncompressed});
  }
  return entries;
}

void extract(const std::filesystem::path& archive,
             const std::filesystem::path& out_dir) {
  const auto bytes = read_all(archive);
  for (const auto& entry : central_directory(bytes)) {
    if (entry.name.find("..") != std::string::npos) {
      throw std::runtime_error("archive entry escapes output dir: " +
                               entry.name);
    }
    const auto target = out_dir / entry.name;
    if (!entry.name.empty() && entry.name.back() == '/') {
      std::filesystem::create_directories(target);
      continue;
    }
    std::filesystem::create_directories(target.parent_path());
    const auto data = entry_data(bytes, entry);
    std::ofstream out(target, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + target.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
  }
}

}  // namespace hmg::zipfile
