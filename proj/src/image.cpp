#include "tvflow/image.hpp"

#include <zlib.h>

#include <cstdlib>
#include <cstring>
#include <fstream>

namespace tvflow {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open image '" + path.string() + "'");
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
         std::uint32_t(p[3]);
}

void put_be32(std::vector<std::uint8_t>& v, std::uint32_t x) {
  v.push_back(std::uint8_t(x >> 24));
  v.push_back(std::uint8_t(x >> 16));
  v.push_back(std::uint8_t(x >> 8));
  v.push_back(std::uint8_t(x));
}

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

void unfilter(std::vector<std::uint8_t>& raw, int height, std::size_t stride, int bpp) {
  for (int y = 0; y < height; ++y) {
    std::uint8_t* row = raw.data() + y * (stride + 1);
    const int filter = row[0];
    std::uint8_t* cur = row + 1;
    const std::uint8_t* prev = y > 0 ? raw.data() + (y - 1) * (stride + 1) + 1 : nullptr;
    for (std::size_t i = 0; i < stride; ++i) {
      const int a = i >= std::size_t(bpp) ? cur[i - bpp] : 0;
      const int b = prev ? prev[i] : 0;
      const int c = (prev && i >= std::size_t(bpp)) ? prev[i - bpp] : 0;
      int x = cur[i];
      switch (filter) {
        case 0: break;
        case 1: x += a; break;
        case 2: x += b; break;
        case 3: x += (a + b) / 2; break;
        case 4: x += paeth(a, b, c); break;
        default: throw UnsupportedFormat("png: unknown filter type");
      }
      cur[i] = std::uint8_t(x);
    }
  }
}

}  // namespace

Image read_png(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  static const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
  if (bytes.size() < 8 || std::memcmp(bytes.data(), sig, 8) != 0)
    throw UnsupportedFormat("'" + path.string() + "' is not a PNG file");

  Image img;
  int color_type = -1;
  std::vector<std::uint8_t> idat;
  std::size_t off = 8;
  while (off + 8 <= bytes.size()) {
    const std::uint32_t len = be32(&bytes[off]);
    if (off + 12 + len > bytes.size()) throw UnsupportedFormat("png: truncated chunk");
    const char* type = reinterpret_cast<const char*>(&bytes[off + 4]);
    const std::uint8_t* payload = &bytes[off + 8];
    if (std::memcmp(type, "IHDR", 4) == 0) {
      img.width = static_cast<int>(be32(payload));
      img.height = static_cast<int>(be32(payload + 4));
      img.bit_depth = payload[8];
      color_type = payload[9];
      if (payload[12] != 0) throw UnsupportedFormat("png: interlaced images unsupported");
      if (img.bit_depth != 8 && img.bit_depth != 16)
        throw UnsupportedFormat("png: only 8/16-bit images supported");
      if (color_type == 0)
        img.channels = 1;
      else if (color_type == 2)
        img.channels = 3;
      else if (color_type == 6)
        img.channels = 4;
      else
        throw UnsupportedFormat("png: palette/alpha-gray color types unsupported");
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), payload, payload + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    off += 12 + len;
  }
  if (img.width <= 0 || img.height <= 0 || idat.empty())
    throw UnsupportedFormat("png: missing image data");

  const int bytes_per_sample = img.bit_depth / 8;
  const int bpp = img.channels * bytes_per_sample;
  const std::size_t stride = static_cast<std::size_t>(img.width) * bpp;
  std::vector<std::uint8_t> raw((stride + 1) * img.height);
  uLongf raw_len = raw.size();
  if (uncompress(raw.data(), &raw_len, idat.data(), idat.size()) != Z_OK ||
      raw_len != raw.size())
    throw UnsupportedFormat("png: zlib stream corrupt");
  unfilter(raw, img.height, stride, bpp);

  img.data.resize(img.pixel_count() * img.channels);
  for (int y = 0; y < img.height; ++y) {
    const std::uint8_t* row = raw.data() + y * (stride + 1) + 1;
    for (std::size_t i = 0; i < static_cast<std::size_t>(img.width) * img.channels; ++i) {
      std::uint16_t v;
      if (bytes_per_sample == 1)
        v = row[i];
      else
        v = static_cast<std::uint16_t>((row[2 * i] << 8) | row[2 * i + 1]);
      img.data[static_cast<std::size_t>(y) * img.width * img.channels + i] = v;
    }
  }
  return img;
}

void write_png(const std::filesystem::path& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3 && img.channels != 4)
    throw UnsupportedFormat("png: only gray/RGB/RGBA output supported");
  const int bytes_per_sample = img.bit_depth / 8;
  const int bpp = img.channels * bytes_per_sample;
  const std::size_t stride = static_cast<std::size_t>(img.width) * bpp;

  std::vector<std::uint8_t> raw((stride + 1) * img.height);
  for (int y = 0; y < img.height; ++y) {
    std::uint8_t* row = raw.data() + y * (stride + 1);
    row[0] = 0;  // no filter
    for (std::size_t i = 0; i < static_cast<std::size_t>(img.width) * img.channels; ++i) {
      const std::uint16_t v = img.data[static_cast<std::size_t>(y) * img.width * img.channels + i];
      if (bytes_per_sample == 1) {
        row[1 + i] = std::uint8_t(v);
      } else {
        row[1 + 2 * i] = std::uint8_t(v >> 8);
        row[1 + 2 * i + 1] = std::uint8_t(v);
      }
    }
  }
  uLongf comp_cap = compressBound(raw.size());
  std::vector<std::uint8_t> comp(comp_cap);
  if (compress2(comp.data(), &comp_cap, raw.data(), raw.size(), 6) != Z_OK)
    throw Error("png: compression failed");
  comp.resize(comp_cap);

  std::vector<std::uint8_t> out;
  const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
  out.insert(out.end(), sig, sig + 8);
  auto chunk = [&out](const char* type, const std::vector<std::uint8_t>& payload) {
    put_be32(out, static_cast<std::uint32_t>(payload.size()));
    const std::size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    const auto crc = crc32(0, out.data() + start, static_cast<uInt>(out.size() - start));
    put_be32(out, static_cast<std::uint32_t>(crc));
  };
  std::vector<std::uint8_t> ihdr;
  put_be32(ihdr, static_cast<std::uint32_t>(img.width));
  put_be32(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr.push_back(std::uint8_t(img.bit_depth));
  ihdr.push_back(img.channels == 1 ? 0 : (img.channels == 3 ? 2 : 6));
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  chunk("IHDR", ihdr);
  chunk("IDAT", comp);
  chunk("IEND", {});

  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path.string() + "' for writing");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open image '" + path.string() + "'");
  std::string magic;
  in >> magic;
  if (magic != "P6" && magic != "P5") throw UnsupportedFormat("ppm: expected P5/P6");
  auto next_int = [&in]() {
    int v;
    while (in >> std::ws && in.peek() == '#') in.ignore(1 << 20, '\n');
    in >> v;
    return v;
  };
  Image img;
  img.width = next_int();
  img.height = next_int();
  const int maxval = next_int();
  in.ignore(1);  // single whitespace before payload
  img.channels = magic == "P6" ? 3 : 1;
  img.bit_depth = maxval > 255 ? 16 : 8;
  const std::size_t count = img.pixel_count() * img.channels;
  img.data.resize(count);
  if (img.bit_depth == 8) {
    std::vector<std::uint8_t> buf(count);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count));
    if (!in) throw UnsupportedFormat("ppm: truncated payload");
    for (std::size_t i = 0; i < count; ++i) img.data[i] = buf[i];
  } else {
    std::vector<std::uint8_t> buf(count * 2);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw UnsupportedFormat("ppm: truncated payload");
    for (std::size_t i = 0; i < count; ++i)
      img.data[i] = static_cast<std::uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
  }
  return img;
}

void write_ppm(const std::filesystem::path& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3)
    throw UnsupportedFormat("ppm: only gray/RGB output supported");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << (img.channels == 3 ? "P6" : "P5") << "\n"
      << img.width << " " << img.height << "\n"
      << (img.bit_depth == 16 ? 65535 : 255) << "\n";
  const std::size_t count = img.pixel_count() * img.channels;
  if (img.bit_depth == 8) {
    std::vector<std::uint8_t> buf(count);
    for (std::size_t i = 0; i < count; ++i) buf[i] = std::uint8_t(img.data[i]);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(count));
  } else {
    std::vector<std::uint8_t> buf(count * 2);
    for (std::size_t i = 0; i < count; ++i) {
      buf[2 * i] = std::uint8_t(img.data[i] >> 8);
      buf[2 * i + 1] = std::uint8_t(img.data[i]);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
}

Image read_image(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".png") return read_png(path);
  if (ext == ".ppm" || ext == ".pgm") return read_ppm(path);
  throw UnsupportedFormat("image '" + path.string() + "': unknown extension");
}

void write_image(const std::filesystem::path& path, const Image& img) {
  const auto ext = path.extension().string();
  if (ext == ".png") return write_png(path, img);
  if (ext == ".ppm" || ext == ".pgm") return write_ppm(path, img);
  throw UnsupportedFormat("image '" + path.string() + "': unknown extension");
}

}  // namespace tvflow
