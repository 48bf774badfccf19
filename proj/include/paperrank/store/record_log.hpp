#pragma once

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "paperrank/error.hpp"

namespace paperrank::store {

/// Append-only file of length-prefixed, checksummed records:
///
///   [u32 payload length, LE][u32 crc32(payload), LE][payload]
///
/// Every append is fsync'd before it returns. On open, a torn or corrupt
/// tail (a crash mid-append) is cut off, so the log always holds exactly the
/// acknowledged records.
class RecordLog {
 public:
  explicit RecordLog(std::filesystem::path path) : path_(std::move(path)) {
    std::filesystem::create_directories(path_.parent_path());
    fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("open " + path_.string() + ": " + std::strerror(errno));
    recover();
  }

  RecordLog(const RecordLog&) = delete;
  RecordLog& operator=(const RecordLog&) = delete;

  ~RecordLog() {
    if (fd_ >= 0) ::close(fd_);
  }

  /// Records present when the log was opened.
  const std::vector<std::string>& initial_records() const { return initial_; }
  void release_initial_records() { std::vector<std::string>().swap(initial_); }

  void append(std::string_view payload) {
    if (payload.size() > 0xFFFFFFFFu) throw IoError("record too large");
    std::string frame(8, '\0');
    put_u32(frame.data(), static_cast<std::uint32_t>(payload.size()));
    put_u32(frame.data() + 4, checksum(payload));
    frame.append(payload);
    const char* p = frame.data();
    std::size_t left = frame.size();
    while (left > 0) {
      ssize_t n = ::pwrite(fd_, p, left, static_cast<off_t>(end_));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw IoError("write " + path_.string() + ": " + std::strerror(errno));
      }
      p += n;
      left -= static_cast<std::size_t>(n);
      end_ += static_cast<std::uint64_t>(n);
    }
    if (::fdatasync(fd_) != 0) throw IoError("fsync " + path_.string() + ": " + std::strerror(errno));
  }

  std::uint64_t size_bytes() const { return end_; }
  const std::filesystem::path& path() const { return path_; }

  static std::uint32_t checksum(std::string_view payload) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size())));
  }

 private:
  static void put_u32(char* out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  }
  static std::uint32_t get_u32(const char* in) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<unsigned char>(in[i])} << (8 * i);
    return v;
  }

  void recover() {
    struct stat st {};
    if (::fstat(fd_, &st) != 0) throw IoError("stat " + path_.string());
    std::string data(static_cast<std::size_t>(st.st_size), '\0');
    std::size_t got = 0;
    while (got < data.size()) {
      ssize_t n = ::pread(fd_, data.data() + got, data.size() - got, static_cast<off_t>(got));
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw IoError("read " + path_.string());
      got += static_cast<std::size_t>(n);
    }
    std::size_t pos = 0;
    while (pos + 8 <= data.size()) {
      std::uint32_t len = get_u32(data.data() + pos);
      std::uint32_t crc = get_u32(data.data() + pos + 4);
      if (pos + 8 + len > data.size()) break;
      std::string_view payload(data.data() + pos + 8, len);
      if (checksum(payload) != crc) break;
      initial_.emplace_back(payload);
      pos += 8 + len;
    }
    end_ = pos;
    if (pos != data.size()) {
      if (::ftruncate(fd_, static_cast<off_t>(pos)) != 0) throw IoError("truncate " + path_.string());
      ::fdatasync(fd_);
    }
  }

  std::filesystem::path path_;
  int fd_ = -1;
  std::uint64_t end_ = 0;
  std::vector<std::string> initial_;
};

}  // namespace paperrank::store
