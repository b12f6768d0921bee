#include "sasc/codec.hpp"

#include <png.h>
#include <tiffio.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

// jpeglib.h needs FILE and size_t declared first.
#include <jpeglib.h>

#include "sasc/errors.hpp"

namespace sasc {

namespace {

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

void png_warning_ignore(png_structp, png_const_charp) {}

// libpng reports errors by longjmp; these helpers keep everything with a
// destructor outside the setjmp frame. Return false on failure.
bool png_encode_rows(Bytes* out, std::size_t width, std::size_t height, int color_type, int bit_depth,
                     const std::uint8_t* rows, std::size_t row_bytes) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warning_ignore);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < height; ++r) png_write_row(png, const_cast<png_bytep>(rows + r * row_bytes));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

Bytes encode_png(std::size_t width, std::size_t height, int color_type, int bit_depth, const std::uint8_t* rows,
                 std::size_t row_bytes) {
  Bytes out;
  if (!png_encode_rows(&out, width, height, color_type, bit_depth, rows, row_bytes)) {
    throw MetricUnavailable("libpng failed to encode image");
  }
  return out;
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

struct PngHeader {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int color_type = 0;
  int bit_depth = 0;
};

// Decodes a grayscale PNG into `buffer` (8 bits, or 16 bits host order).
bool png_decode_gray(std::FILE* file, PngHeader* header, std::vector<std::uint8_t>* buffer,
                     std::vector<png_bytep>* rows) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warning_ignore);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, file);
  png_read_info(png, info);
  header->width = png_get_image_width(png, info);
  header->height = png_get_image_height(png, info);
  header->color_type = png_get_color_type(png, info);
  header->bit_depth = png_get_bit_depth(png, info);
  if (header->color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    return true;  // caller reports the color type
  }
  if (header->bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (header->bit_depth == 16) png_set_swap(png);
  png_read_update_info(png, info);
  const auto row_bytes = png_get_rowbytes(png, info);
  buffer->resize(row_bytes * header->height);
  rows->resize(header->height);
  for (std::size_t r = 0; r < header->height; ++r) (*rows)[r] = buffer->data() + r * row_bytes;
  png_read_image(png, rows->data());
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

Image2D read_png(const std::filesystem::path& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw DataError("cannot open " + path.string());
  PngHeader header;
  std::vector<std::uint8_t> buffer;
  std::vector<png_bytep> rows;
  if (!png_decode_gray(file.get(), &header, &buffer, &rows)) throw DataError(path.string() + ": undecodable PNG");
  if (header.color_type != PNG_COLOR_TYPE_GRAY) throw DataError(path.string() + ": expected a grayscale PNG");
  if (header.width == 0 || header.height == 0) throw DataError(path.string() + ": empty PNG");

  std::vector<double> values(static_cast<std::size_t>(header.width) * header.height);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (header.bit_depth == 16) {
      std::uint16_t v;
      std::memcpy(&v, buffer.data() + 2 * i, 2);
      values[i] = v;
    } else {
      values[i] = buffer[i];
    }
  }
  return Image2D(header.width, header.height, std::move(values));
}

struct TiffCloser {
  void operator()(TIFF* t) const { TIFFClose(t); }
};

void tiff_error_silent(const char*, const char*, va_list) {}

Image2D read_tiff(const std::filesystem::path& path) {
  TIFFSetErrorHandler(tiff_error_silent);
  TIFFSetWarningHandler(tiff_error_silent);
  std::unique_ptr<TIFF, TiffCloser> tif(TIFFOpen(path.c_str(), "r"));
  if (!tif) throw DataError("cannot open TIFF " + path.string());
  std::uint32_t width = 0, height = 0;
  std::uint16_t spp = 1, bps = 0, format = SAMPLEFORMAT_UINT, planar = PLANARCONFIG_CONTIG;
  TIFFGetField(tif.get(), TIFFTAG_IMAGEWIDTH, &width);
  TIFFGetField(tif.get(), TIFFTAG_IMAGELENGTH, &height);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLESPERPIXEL, &spp);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_BITSPERSAMPLE, &bps);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLEFORMAT, &format);
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_PLANARCONFIG, &planar);
  if (width == 0 || height == 0) throw DataError(path.string() + ": empty TIFF");
  if (spp != 1) throw DataError(path.string() + ": expected one sample per pixel");
  const bool is_float = format == SAMPLEFORMAT_IEEEFP && bps == 32;
  const bool is_uint = format == SAMPLEFORMAT_UINT && (bps == 8 || bps == 16);
  if (!is_float && !is_uint) throw DataError(path.string() + ": unsupported TIFF sample format");

  std::vector<std::uint8_t> line(static_cast<std::size_t>(TIFFScanlineSize(tif.get())));
  std::vector<double> values(static_cast<std::size_t>(width) * height);
  for (std::uint32_t r = 0; r < height; ++r) {
    if (TIFFReadScanline(tif.get(), line.data(), r, 0) < 0) {
      throw DataError(path.string() + ": failed to read row " + std::to_string(r));
    }
    for (std::uint32_t c = 0; c < width; ++c) {
      double v;
      if (is_float) {
        float f;
        std::memcpy(&f, line.data() + 4 * c, 4);
        v = f;
      } else if (bps == 16) {
        std::uint16_t u;
        std::memcpy(&u, line.data() + 2 * c, 2);
        v = u;
      } else {
        v = line[c];
      }
      if (!std::isfinite(v)) throw DataError(path.string() + ": non-finite pixel value");
      values[static_cast<std::size_t>(r) * width + c] = v;
    }
  }
  return Image2D(width, height, std::move(values));
}

}  // namespace

Bytes encode_png_rgb(const RgbImage& img) {
  return encode_png(img.width, img.height, PNG_COLOR_TYPE_RGB, 8, img.data.data(), img.width * 3);
}

Bytes encode_png_gray8(std::size_t width, std::size_t height, const std::vector<std::uint8_t>& pixels) {
  return encode_png(width, height, PNG_COLOR_TYPE_GRAY, 8, pixels.data(), width);
}

namespace {

bool jpeg_encode(const RgbImage& img, int quality, unsigned char** buffer, unsigned long* size, JpegError* err) {
  jpeg_compress_struct cinfo{};
  cinfo.err = jpeg_std_error(&err->mgr);
  err->mgr.error_exit = jpeg_error_exit;
  if (setjmp(err->jump)) {
    jpeg_destroy_compress(&cinfo);
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, buffer, size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width);
  cinfo.image_height = static_cast<JDIMENSION>(img.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPROW>(img.data.data() + static_cast<std::size_t>(cinfo.next_scanline) * img.width * 3);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return true;
}

bool jpeg_decode(const Bytes& jpeg, RgbImage* out, JpegError* err) {
  jpeg_decompress_struct cinfo{};
  cinfo.err = jpeg_std_error(&err->mgr);
  err->mgr.error_exit = jpeg_error_exit;
  if (setjmp(err->jump)) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, jpeg.data(), static_cast<unsigned long>(jpeg.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out->width = cinfo.output_width;
  out->height = cinfo.output_height;
  out->data.resize(out->width * out->height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out->data.data() + static_cast<std::size_t>(cinfo.output_scanline) * out->width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

}  // namespace

Bytes encode_jpeg_rgb(const RgbImage& img, int quality) {
  JpegError err{};
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  const bool ok = jpeg_encode(img, quality, &buffer, &size, &err);
  Bytes out;
  if (ok) out.assign(buffer, buffer + size);
  std::free(buffer);
  if (!ok) throw MetricUnavailable(std::string("libjpeg: ") + err.message);
  return out;
}

RgbImage decode_jpeg_rgb(const Bytes& jpeg) {
  JpegError err{};
  RgbImage out;
  if (!jpeg_decode(jpeg, &out, &err)) throw MetricUnavailable(std::string("libjpeg: ") + err.message);
  return out;
}

Image2D read_raster(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") return read_png(path);
  if (ext == ".tif" || ext == ".tiff") return read_tiff(path);
  throw DataError(path.string() + ": unsupported raster extension '" + ext + "'");
}

void write_tiff_float32(const std::filesystem::path& path, const Image2D& img) {
  TIFFSetErrorHandler(tiff_error_silent);
  std::unique_ptr<TIFF, TiffCloser> tif(TIFFOpen(path.c_str(), "w"));
  if (!tif) throw DataError("cannot create TIFF " + path.string());
  TIFFSetField(tif.get(), TIFFTAG_IMAGEWIDTH, static_cast<std::uint32_t>(img.width()));
  TIFFSetField(tif.get(), TIFFTAG_IMAGELENGTH, static_cast<std::uint32_t>(img.height()));
  TIFFSetField(tif.get(), TIFFTAG_SAMPLESPERPIXEL, 1);
  TIFFSetField(tif.get(), TIFFTAG_BITSPERSAMPLE, 32);
  TIFFSetField(tif.get(), TIFFTAG_SAMPLEFORMAT, SAMPLEFORMAT_IEEEFP);
  TIFFSetField(tif.get(), TIFFTAG_PHOTOMETRIC, PHOTOMETRIC_MINISBLACK);
  TIFFSetField(tif.get(), TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
  TIFFSetField(tif.get(), TIFFTAG_COMPRESSION, COMPRESSION_NONE);
  TIFFSetField(tif.get(), TIFFTAG_ROWSPERSTRIP, 1);
  std::vector<float> row(img.width());
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) row[c] = static_cast<float>(img(r, c));
    if (TIFFWriteScanline(tif.get(), row.data(), static_cast<std::uint32_t>(r), 0) < 0) {
      throw DataError("failed writing " + path.string());
    }
  }
}

void write_png_gray16(const std::filesystem::path& path, const Image2D& img) {
  std::vector<std::uint8_t> rows(img.size() * 2);
  const auto values = img.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto v = static_cast<std::uint16_t>(std::lround(std::clamp(values[i], 0.0, 65535.0)));
    rows[2 * i] = static_cast<std::uint8_t>(v >> 8);  // PNG is big endian
    rows[2 * i + 1] = static_cast<std::uint8_t>(v & 0xff);
  }
  Bytes encoded;
  if (!png_encode_rows(&encoded, img.width(), img.height(), PNG_COLOR_TYPE_GRAY, 16, rows.data(), img.width() * 2)) {
    throw DataError("libpng failed to encode " + path.string());
  }
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "wb"));
  if (!file || std::fwrite(encoded.data(), 1, encoded.size(), file.get()) != encoded.size()) {
    throw DataError("failed writing " + path.string());
  }
}

}  // namespace sasc
