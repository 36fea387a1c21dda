#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

// Little-endian byte encoding and atomic file output shared by the
// embedding cache, the model file and every report writer.

namespace bwe::io {

class ByteWriter {
 public:
  void bytes(std::string_view raw) { buf_.append(raw); }
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v);
  void f32(float v);
  void f64(double v);
  /// u32 length followed by the raw bytes.
  void str(std::string_view s);

  const std::string& data() const noexcept { return buf_; }

 private:
  std::string buf_;
};

/// Cursor over a byte buffer; every read throws FormatError on truncation.
class ByteReader {
 public:
  ByteReader(std::string_view data, std::string context)
      : data_(data), context_(std::move(context)) {}

  std::string_view bytes(std::size_t n);
  std::uint8_t u8();
  std::uint32_t u32();
  float f32();
  double f64();
  std::string str();

  bool at_end() const noexcept { return pos_ == data_.size(); }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
  std::string context_;
};

/// Reads a whole file; throws bwe::Error naming the path when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes `contents` to a sibling temp file and renames it over `path`,
/// so readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

}  // namespace bwe::io
