#include "lpr/image_io.hpp"

#include <png.h>

#include <csetjmp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace lpr {

namespace {

constexpr char kMagic[4] = {'L', 'P', 'R', 'F'};

void put_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(const unsigned char* b) {
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > UINT32_MAX) throw IoError(std::string("lprf: ") + what + " exceeds u32");
  return std::uint32_t(v);
}

LprfHeader parse_header(std::istream& is, const std::filesystem::path& path) {
  unsigned char raw[16];
  if (!is.read(reinterpret_cast<char*>(raw), 16)) {
    throw IoError("lprf: truncated header in " + path.string());
  }
  if (std::memcmp(raw, kMagic, 4) != 0) throw IoError("lprf: bad magic in " + path.string());
  LprfHeader h{get_u32(raw + 4), get_u32(raw + 8), get_u32(raw + 12)};
  if (h.height == 0 || h.width == 0) throw IoError("lprf: zero dimension in " + path.string());
  return h;
}

}  // namespace

void write_lprf(const std::filesystem::path& path, const std::vector<RealImage>& planes) {
  if (planes.empty()) throw ArgumentError("write_lprf: no planes");
  for (const auto& p : planes) {
    require_nonempty(p, "write_lprf");
    require_same_shape(p, planes.front(), "write_lprf");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("lprf: cannot open " + path.string() + " for writing");
  os.write(kMagic, 4);
  put_u32(os, checked_u32(planes.front().height(), "height"));
  put_u32(os, checked_u32(planes.front().width(), "width"));
  put_u32(os, checked_u32(planes.size(), "plane count"));
  std::vector<unsigned char> buf(planes.front().size() * 4);
  for (const auto& p : planes) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(p[i]));
      buf[4 * i] = static_cast<unsigned char>(bits);
      buf[4 * i + 1] = static_cast<unsigned char>(bits >> 8);
      buf[4 * i + 2] = static_cast<unsigned char>(bits >> 16);
      buf[4 * i + 3] = static_cast<unsigned char>(bits >> 24);
    }
    os.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  }
  if (!os) throw IoError("lprf: write failed for " + path.string());
}

LprfHeader read_lprf_header(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("lprf: cannot open " + path.string());
  return parse_header(is, path);
}

std::vector<RealImage> read_lprf(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("lprf: cannot open " + path.string());
  const LprfHeader h = parse_header(is, path);
  std::vector<RealImage> planes;
  planes.reserve(h.planes);
  std::vector<unsigned char> buf(std::size_t(h.height) * h.width * 4);
  for (std::uint32_t k = 0; k < h.planes; ++k) {
    if (!is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()))) {
      throw IoError("lprf: truncated plane data in " + path.string());
    }
    RealImage p(h.height, h.width);
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = std::bit_cast<float>(get_u32(buf.data() + 4 * i));
    }
    planes.push_back(std::move(p));
  }
  return planes;
}

void write_lprf_complex(const std::filesystem::path& path, const ComplexField& f) {
  write_lprf(path, {real(f), imag(f)});
}

ComplexField read_lprf_complex(const std::filesystem::path& path) {
  auto planes = read_lprf(path);
  if (planes.size() != 2) {
    throw IoError("lprf: complex field needs exactly 2 planes, found " +
                  std::to_string(planes.size()));
  }
  return from_real_imag(planes[0], planes[1]);
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void png_warn(png_structp, png_const_charp) {}

}  // namespace

std::vector<RealImage> read_png_channels(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("png: cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warn);
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp& p;
    png_infop& i;
    ~Guard() { png_destroy_read_struct(&p, &i, nullptr); }
  } guard{png, info};

  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) throw IoError("png: cannot decode " + path.string());

  png_init_io(png, fp.get());
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (std::endian::native == std::endian::little && png_get_bit_depth(png, info) == 16) {
    png_set_swap(png);
  }
  png_read_update_info(png, info);

  const std::size_t h = png_get_image_height(png, info);
  const std::size_t w = png_get_image_width(png, info);
  const int depth = png_get_bit_depth(png, info);
  const std::size_t channels = png_get_channels(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);

  pixels.resize(rowbytes * h);
  rows.resize(h);
  for (std::size_t r = 0; r < h; ++r) rows[r] = pixels.data() + r * rowbytes;
  png_read_image(png, rows.data());

  std::vector<RealImage> out(channels, RealImage(h, w));
  const double scale = depth == 16 ? 65535.0 : 255.0;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      for (std::size_t ch = 0; ch < channels; ++ch) {
        const std::size_t idx = c * channels + ch;
        double v;
        if (depth == 16) {
          std::uint16_t s;
          std::memcpy(&s, rows[r] + 2 * idx, 2);
          v = s;
        } else {
          v = rows[r][idx];
        }
        out[ch](r, c) = v / scale;
      }
    }
  }
  return out;
}

RealImage read_png_gray(const std::filesystem::path& path) {
  auto channels = read_png_channels(path);
  if (channels.size() == 1) return std::move(channels.front());
  RealImage gray(channels.front().height(), channels.front().width());
  for (const auto& ch : channels) {
    for (std::size_t i = 0; i < gray.size(); ++i) gray[i] += ch[i] / double(channels.size());
  }
  return gray;
}

void write_png_gray(const std::filesystem::path& path, const RealImage& img, double lo, double hi,
                    int bit_depth) {
  require_nonempty(img, "write_png_gray");
  if (bit_depth != 8 && bit_depth != 16) throw ArgumentError("png: bit depth must be 8 or 16");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("png: cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warn);
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp& p;
    png_infop& i;
    ~Guard() { png_destroy_write_struct(&p, &i); }
  } guard{png, info};

  const std::size_t bytes = std::size_t(bit_depth) / 8;
  std::vector<unsigned char> row(img.width() * bytes);
  if (setjmp(png_jmpbuf(png))) throw IoError("png: cannot encode " + path.string());

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, png_uint_32(img.width()), png_uint_32(img.height()), bit_depth,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const double top = bit_depth == 16 ? 65535.0 : 255.0;
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) {
      const double t = std::clamp((img(r, c) - lo) / span, 0.0, 1.0);
      const auto q = static_cast<std::uint32_t>(std::lround(t * top));
      if (bytes == 2) {
        row[2 * c] = static_cast<unsigned char>(q >> 8);  // PNG is big-endian
        row[2 * c + 1] = static_cast<unsigned char>(q);
      } else {
        row[c] = static_cast<unsigned char>(q);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
}

void write_png_gray_autoscale(const std::filesystem::path& path, const RealImage& img,
                              int bit_depth) {
  write_png_gray(path, img, min_value(img), max_value(img), bit_depth);
}

}  // namespace lpr
