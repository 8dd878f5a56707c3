#include "xmodseg/core/io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "xmodseg/core/error.hpp"

namespace xmodseg {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  check_io(f != nullptr, "cannot open " + path.string());
  return f;
}

class PngWriter {
 public:
  explicit PngWriter(const std::filesystem::path& path) : file_(open_file(path, "wb")) {
    png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    check_io(png_ != nullptr, "png: writer allocation failed");
    info_ = png_create_info_struct(png_);
    check_io(info_ != nullptr, "png: info allocation failed");
    png_init_io(png_, file_.get());
  }
  ~PngWriter() { png_destroy_write_struct(&png_, &info_); }
  PngWriter(const PngWriter&) = delete;
  PngWriter& operator=(const PngWriter&) = delete;

  void write(int rows, int cols, int bit_depth, int color_type,
             const std::vector<png_bytep>& row_ptrs) {
    if (setjmp(png_jmpbuf(png_))) throw IoError("png: write failed");
    png_set_IHDR(png_, info_, cols, rows, bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png_, info_);
    if (bit_depth == 16) png_set_swap(png_);
    png_write_image(png_, const_cast<png_bytepp>(row_ptrs.data()));
    png_write_end(png_, nullptr);
  }

 private:
  FilePtr file_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

class PngReader {
 public:
  explicit PngReader(const std::filesystem::path& path) : file_(open_file(path, "rb")) {
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    check_io(png_ != nullptr, "png: reader allocation failed");
    info_ = png_create_info_struct(png_);
    check_io(info_ != nullptr, "png: info allocation failed");
    png_init_io(png_, file_.get());
  }
  ~PngReader() { png_destroy_read_struct(&png_, &info_, nullptr); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  void read_header(const std::filesystem::path& path, int expect_depth) {
    if (setjmp(png_jmpbuf(png_))) throw IoError("png: read failed: " + path.string());
    png_read_info(png_, info_);
    check_io(png_get_color_type(png_, info_) == PNG_COLOR_TYPE_GRAY,
             "png: expected grayscale: " + path.string());
    check_io(png_get_bit_depth(png_, info_) == expect_depth,
             "png: unexpected bit depth: " + path.string());
    if (expect_depth == 16) png_set_swap(png_);
  }

  int rows() const { return static_cast<int>(png_get_image_height(png_, info_)); }
  int cols() const { return static_cast<int>(png_get_image_width(png_, info_)); }

  void read_rows(const std::vector<png_bytep>& row_ptrs) {
    if (setjmp(png_jmpbuf(png_))) throw IoError("png: read failed");
    png_read_image(png_, const_cast<png_bytepp>(row_ptrs.data()));
  }

 private:
  FilePtr file_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

template <typename T>
std::vector<png_bytep> make_row_ptrs(Grid2d<T>& img) {
  std::vector<png_bytep> ptrs(img.rows());
  for (int r = 0; r < img.rows(); ++r) {
    ptrs[r] = reinterpret_cast<png_bytep>(img.data() + static_cast<size_t>(r) * img.cols());
  }
  return ptrs;
}

}  // namespace

void write_png16(const std::filesystem::path& path, const Grid2d<std::uint16_t>& img) {
  auto copy = img;
  PngWriter w(path);
  w.write(img.rows(), img.cols(), 16, PNG_COLOR_TYPE_GRAY, make_row_ptrs(copy));
}

Grid2d<std::uint16_t> read_png16(const std::filesystem::path& path) {
  PngReader r(path);
  r.read_header(path, 16);
  Grid2d<std::uint16_t> img(r.rows(), r.cols());
  r.read_rows(make_row_ptrs(img));
  return img;
}

void write_png8(const std::filesystem::path& path, const Grid2d<std::uint8_t>& img) {
  auto copy = img;
  PngWriter w(path);
  w.write(img.rows(), img.cols(), 8, PNG_COLOR_TYPE_GRAY, make_row_ptrs(copy));
}

Grid2d<std::uint8_t> read_png8(const std::filesystem::path& path) {
  PngReader r(path);
  r.read_header(path, 8);
  Grid2d<std::uint8_t> img(r.rows(), r.cols());
  r.read_rows(make_row_ptrs(img));
  return img;
}

void write_png_rgb8(const std::filesystem::path& path, int rows, int cols,
                    const std::vector<Rgb8>& pixels) {
  check(static_cast<std::int64_t>(pixels.size()) == static_cast<std::int64_t>(rows) * cols,
        "write_png_rgb8: pixel count mismatch");
  std::vector<png_bytep> ptrs(rows);
  auto* base = reinterpret_cast<const std::uint8_t*>(pixels.data());
  for (int r = 0; r < rows; ++r) {
    ptrs[r] = const_cast<png_bytep>(base + static_cast<size_t>(r) * cols * 3);
  }
  PngWriter w(path);
  w.write(rows, cols, 8, PNG_COLOR_TYPE_RGB, ptrs);
}

Grid2d<std::uint16_t> quantize16(const Image2d& img, const Rescale& rescale) {
  check(rescale.hi > rescale.lo, "quantize16: degenerate rescale window");
  Grid2d<std::uint16_t> out(img.rows(), img.cols());
  const double scale = 65535.0 / (rescale.hi - rescale.lo);
  for (std::int64_t i = 0; i < img.size(); ++i) {
    double v = (img.raw()[i] - rescale.lo) * scale;
    v = std::min(65535.0, std::max(0.0, std::round(v)));
    out.raw()[i] = static_cast<std::uint16_t>(v);
  }
  return out;
}

Image2d dequantize16(const Grid2d<std::uint16_t>& img, const Rescale& rescale) {
  Image2d out(img.rows(), img.cols());
  const double scale = (rescale.hi - rescale.lo) / 65535.0;
  for (std::int64_t i = 0; i < img.size(); ++i) {
    out.raw()[i] = rescale.lo + scale * img.raw()[i];
  }
  return out;
}

Rescale rescale_of(const Image2d& img) {
  check(img.size() > 0, "rescale_of: empty image");
  double lo = img.raw()[0], hi = img.raw()[0];
  for (const double v : img.raw()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi <= lo) hi = lo + 1.0;  // constant image still round-trips
  return {lo, hi};
}

void write_image16(const std::filesystem::path& path, const Image2d& img,
                   const Rescale& rescale) {
  write_png16(path, quantize16(img, rescale));
}

Image2d read_image16(const std::filesystem::path& path, const Rescale& rescale) {
  return dequantize16(read_png16(path), rescale);
}

void write_mask(const std::filesystem::path& path, const Mask2d& mask) {
  Grid2d<std::uint8_t> img(mask.rows(), mask.cols());
  for (std::int64_t i = 0; i < mask.size(); ++i) {
    img.raw()[i] = mask.raw()[i] ? 255 : 0;
  }
  write_png8(path, img);
}

Mask2d read_mask(const std::filesystem::path& path) {
  auto img = read_png8(path);
  Mask2d mask(img.rows(), img.cols());
  for (std::int64_t i = 0; i < img.size(); ++i) {
    mask.raw()[i] = img.raw()[i] >= 128 ? 1 : 0;
  }
  return mask;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  check_io(in.good(), "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  check_io(out.good(), "cannot write " + path.string());
  out << content;
  check_io(out.good(), "write failed: " + path.string());
}

}  // namespace xmodseg
