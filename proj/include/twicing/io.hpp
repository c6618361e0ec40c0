#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "twicing/error.hpp"
#include "twicing/matrix.hpp"

namespace twicing {

/// Grayscale image with pixel values in [0, maxval], row-major.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  int maxval = 255;
  std::vector<double> pixels;

  /// N x 1 signal, pixels in row-major order.
  Matrix as_signal() const { return Matrix::column(pixels); }

  static GrayImage from_signal(const Matrix& s, std::size_t width, std::size_t height,
                               int maxval = 255) {
    if (s.rows() != width * height || s.cols() != 1) {
      throw DomainError("GrayImage::from_signal: signal " + shape_string(s) + " is not " +
                        std::to_string(width) + "x" + std::to_string(height) + " pixels");
    }
    return {width, height, maxval, std::vector<double>(s.values().begin(), s.values().end())};
  }
};

namespace detail {

class PgmCursor {
 public:
  explicit PgmCursor(std::string_view bytes) : b_(bytes) {}

  std::size_t offset() const noexcept { return pos_; }
  bool done() const noexcept { return pos_ >= b_.size(); }

  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      const auto c = static_cast<unsigned char>(b_[pos_]);
      if (c == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_uint(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long v = 0;
    while (pos_ < b_.size() && std::isdigit(static_cast<unsigned char>(b_[pos_]))) {
      v = v * 10 + (b_[pos_] - '0');
      if (v > 1'000'000'000L) throw ParseError(std::string("PGM: ") + what + " too large", start);
      ++pos_;
    }
    if (pos_ == start) throw ParseError(std::string("PGM: expected ") + what, start);
    return v;
  }

  unsigned char byte() {
    if (pos_ >= b_.size()) throw ParseError("PGM: truncated pixel data", pos_);
    return static_cast<unsigned char>(b_[pos_++]);
  }

  void expect_single_space() {
    if (pos_ >= b_.size() || !std::isspace(static_cast<unsigned char>(b_[pos_]))) {
      throw ParseError("PGM: expected whitespace after maxval", pos_);
    }
    ++pos_;
  }

 private:
  std::string_view b_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses binary (P5) or ASCII (P2) PGM with maxval <= 255.
inline GrayImage parse_pgm(std::string_view bytes) {
  detail::PgmCursor cur(bytes);
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw ParseError("PGM: bad magic, expected P2 or P5", 0);
  }
  const bool binary = bytes[1] == '5';
  for (int i = 0; i < 2; ++i) cur.byte();

  GrayImage img;
  cur.skip_space_and_comments();
  const std::size_t dims_at = cur.offset();
  img.width = static_cast<std::size_t>(cur.read_uint("width"));
  img.height = static_cast<std::size_t>(cur.read_uint("height"));
  if (img.width == 0 || img.height == 0) throw ParseError("PGM: zero image dimension", dims_at);
  cur.skip_space_and_comments();
  const std::size_t maxval_at = cur.offset();
  img.maxval = static_cast<int>(cur.read_uint("maxval"));
  if (img.maxval < 1 || img.maxval > 255) {
    throw ParseError("PGM: maxval must be in 1..255", maxval_at);
  }
  const std::size_t n = img.width * img.height;
  img.pixels.reserve(n);
  if (binary) {
    cur.expect_single_space();
    for (std::size_t i = 0; i < n; ++i) img.pixels.push_back(cur.byte());
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      cur.skip_space_and_comments();
      if (cur.done()) throw ParseError("PGM: truncated pixel data", cur.offset());
      img.pixels.push_back(static_cast<double>(cur.read_uint("pixel value")));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (img.pixels[i] > img.maxval) {
      throw ParseError("PGM: pixel " + std::to_string(i) + " exceeds maxval", cur.offset());
    }
  }
  return img;
}

inline GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_pgm(bytes);
}

/// Binary P5. Pixels are rounded and clamped to [0, maxval].
inline std::string encode_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n" +
                    std::to_string(img.maxval) + "\n";
  for (double v : img.pixels) {
    const double c = std::clamp(std::round(v), 0.0, static_cast<double>(img.maxval));
    out.push_back(static_cast<char>(static_cast<unsigned char>(c)));
  }
  return out;
}

inline void write_pgm(const std::string& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << encode_pgm(img);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

/// 17 significant digits, enough to round-trip; "inf"/"-inf"/"nan" otherwise.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Reads a single-column CSV of numbers; blank lines and '#' comments are
/// skipped, as is a non-numeric first line (header).
inline std::vector<double> parse_signal_csv(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    const std::size_t line_start = pos;
    pos = end + 1;
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    char* stop = nullptr;
    const double v = std::strtod(line.c_str(), &stop);
    if (stop == line.c_str() || *stop != '\0') {
      if (first && out.empty()) {
        first = false;
        continue;
      }
      throw ParseError("CSV: not a number: '" + line + "'", line_start);
    }
    first = false;
    out.push_back(v);
  }
  return out;
}

}  // namespace twicing
