// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#include <png.h>

#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

// jpeglib.h needs FILE and size_t declared first.
#include <jpeglib.h>

#include "imaging.hpp"

namespace deepclean {
namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    fail(ErrorCode::FileNotFound, "no such image file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool is_png(const std::vector<unsigned char>& bytes) {
  static constexpr unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 8 && std::equal(sig, sig + 8, bytes.begin());
}

bool is_jpeg(const std::vector<unsigned char>& bytes) {
  return bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF;
}

ImageU8 decode_png(const std::vector<unsigned char>& bytes, const std::string& name) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    fail(ErrorCode::CorruptFormat, "corrupt PNG " + name + ": " + image.message);
  const int channels = (image.format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
  image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (image.width < 1 || image.height < 1) {
    png_image_free(&image);
    fail(ErrorCode::CorruptFormat, "PNG has zero size: " + name);
  }
  std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(image));
  png_color black{0, 0, 0};
  if (!png_image_finish_read(&image, &black, data.data(), 0, nullptr))
    fail(ErrorCode::CorruptFormat, "corrupt PNG " + name + ": " + image.message);
  return ImageU8(static_cast<int>(image.height), static_cast<int>(image.width), channels, std::move(data));
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Kept free of objects with destructors between setjmp and the last libjpeg call.
bool decode_jpeg_raw(const std::vector<unsigned char>& bytes, std::vector<std::uint8_t>& out, int& h, int& w,
                     int& c, char* message) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    std::strncpy(message, err.message, JMSG_LENGTH_MAX);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  h = static_cast<int>(cinfo.output_height);
  w = static_cast<int>(cinfo.output_width);
  c = cinfo.output_components;
  out.resize(static_cast<std::size_t>(h) * w * c);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * c;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

ImageU8 decode_jpeg(const std::vector<unsigned char>& bytes, const std::string& name) {
  std::vector<std::uint8_t> data;
  int h = 0, w = 0, c = 0;
  char message[JMSG_LENGTH_MAX] = {0};
  if (!decode_jpeg_raw(bytes, data, h, w, c, message))
    fail(ErrorCode::CorruptFormat, "corrupt JPEG " + name + ": " + message);
  if (c != 1 && c != 3) fail(ErrorCode::CorruptFormat, "unsupported JPEG channel count in " + name);
  return ImageU8(h, w, c, std::move(data));
}

bool encode_jpeg_raw(const ImageU8& img, int quality, unsigned char** buffer, unsigned long* size, char* message) {
  jpeg_compress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    std::strncpy(message, err.message, JMSG_LENGTH_MAX);
    jpeg_destroy_compress(&cinfo);
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, buffer, size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width());
  cinfo.image_height = static_cast<JDIMENSION>(img.height());
  cinfo.input_components = img.channels();
  cinfo.in_color_space = img.channels() == 3 ? JCS_RGB : JCS_GRAYSCALE;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  const auto data = img.data();
  const std::size_t stride = static_cast<std::size_t>(img.width()) * img.channels();
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPLE*>(data.data() + cinfo.next_scanline * stride);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return true;
}

void write_file(const std::filesystem::path& path, const void* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) fail(ErrorCode::Io, "short write to " + path.string());
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return ext;
}

}  // namespace

ImageU8 load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (is_png(bytes)) return decode_png(bytes, path.string());
  if (is_jpeg(bytes)) return decode_jpeg(bytes, path.string());
  fail(ErrorCode::CorruptFormat, "unrecognized or corrupt image format: " + path.string());
}

void save_image(const ImageU8& img, const std::filesystem::path& path, int jpeg_quality) {
  require(!img.empty(), "cannot save an empty image");
  const std::string ext = lower_extension(path);
  if (ext == ".jpg" || ext == ".jpeg") {
    unsigned char* buffer = nullptr;
    unsigned long size = 0;
    char message[JMSG_LENGTH_MAX] = {0};
    const bool ok = encode_jpeg_raw(img, std::clamp(jpeg_quality, 1, 100), &buffer, &size, message);
    if (!ok) {
      std::free(buffer);
      fail(ErrorCode::Io, std::string("JPEG encoding failed: ") + message);
    }
    try {
      write_file(path, buffer, size);
    } catch (...) {
      std::free(buffer);
      throw;
    }
    std::free(buffer);
    return;
  }
  if (ext != ".png") fail(ErrorCode::InvalidArgument, "unsupported output format (use .png or .jpg): " + path.string());

  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.data().data(), 0, nullptr))
    fail(ErrorCode::Io, std::string("PNG encoding failed: ") + image.message);
  std::vector<unsigned char> buffer(size);
  if (!png_image_write_to_memory(&image, buffer.data(), &size, 0, img.data().data(), 0, nullptr))
    fail(ErrorCode::Io, std::string("PNG encoding failed: ") + image.message);
  write_file(path, buffer.data(), size);
}

}  // namespace deepclean
