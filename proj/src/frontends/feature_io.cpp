#include "medfront/frontends/feature_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "medfront/errors.hpp"

namespace medfront::frontends {

namespace {

constexpr char kMagic[4] = {'M', 'F', 'F', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) {
    b[i] = static_cast<unsigned char>(bits >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(b), 8);
}

class Reader {
 public:
  Reader(std::istream& in, const std::string& path) : in_(in), path_(path) {}

  std::uint8_t u8() {
    unsigned char b;
    read(&b, 1);
    return b;
  }

  std::uint32_t u32() {
    unsigned char b[4];
    read(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    }
    return v;
  }

  float f32() {
    const std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  double f64() {
    unsigned char b[8];
    read(b, 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
      bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    }
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  std::string bytes(std::size_t n) {
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }

 private:
  void read(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw DataError("feature file: " + path_ + " truncated at byte " +
                      std::to_string(offset_));
    }
    offset_ += n;
  }

  std::istream& in_;
  std::string path_;
  std::size_t offset_ = 0;
};

}  // namespace

void write_feature_file(const std::string& path, const FeatureMap& map,
                        FrontendKind kind) {
  if (map.data.size() != map.frames * map.channels) {
    throw std::invalid_argument(
        "write_feature_file: map data size " +
        std::to_string(map.data.size()) + " does not equal frames*channels");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("write_feature_file: cannot open " + path);
  }
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  const unsigned char tag = static_cast<unsigned char>(kind);
  out.write(reinterpret_cast<const char*>(&tag), 1);
  put_u32(out, static_cast<std::uint32_t>(map.frames));
  put_u32(out, static_cast<std::uint32_t>(map.channels));
  put_f64(out, map.frame_rate);
  for (double v : map.data) put_f32(out, static_cast<float>(v));
  if (!out) {
    throw DataError("write_feature_file: write failed for " + path);
  }
}

FeatureFile read_feature_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("read_feature_file: cannot open " + path);
  }
  Reader r(in, path);
  if (r.bytes(4) != std::string(kMagic, 4)) {
    throw DataError("read_feature_file: " + path + " is not a feature file");
  }
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw DataError("read_feature_file: " + path + " has version " +
                    std::to_string(version) + ", expected " +
                    std::to_string(kVersion));
  }
  const std::uint8_t tag = r.u8();
  if (tag > 2) {
    throw DataError("read_feature_file: " + path + " has unknown frontend tag " +
                    std::to_string(tag));
  }
  FeatureFile file;
  file.kind = static_cast<FrontendKind>(tag);
  file.map.frames = r.u32();
  file.map.channels = r.u32();
  file.map.frame_rate = r.f64();
  const std::size_t count = file.map.frames * file.map.channels;
  file.map.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    file.map.data[i] = static_cast<double>(r.f32());
  }
  return file;
}

void write_feature_pgm(const std::string& path, const FeatureMap& map) {
  if (map.frames == 0 || map.channels == 0) {
    throw std::invalid_argument("write_feature_pgm: empty feature map");
  }
  const auto [lo_it, hi_it] =
      std::minmax_element(map.data.begin(), map.data.end());
  const double lo = *lo_it;
  const double span = *hi_it - lo;

  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("write_feature_pgm: cannot open " + path);
  }
  out << "P5\n" << map.frames << " " << map.channels << "\n255\n";
  std::vector<unsigned char> row(map.frames);
  for (std::size_t r = 0; r < map.channels; ++r) {
    const std::size_t channel = map.channels - 1 - r;  // channel 0 at bottom
    for (std::size_t f = 0; f < map.frames; ++f) {
      const double v = map.at(f, channel);
      const double norm = span > 0.0 ? (v - lo) / span : 0.0;
      row[f] = static_cast<unsigned char>(std::lround(norm * 255.0));
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  if (!out) {
    throw DataError("write_feature_pgm: write failed for " + path);
  }
}

}  // namespace medfront::frontends
