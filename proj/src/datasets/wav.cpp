#include "medfront/datasets/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "medfront/errors.hpp"

namespace medfront::datasets {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;

// Bounds-checked little-endian cursor over the raw bytes.
class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& bytes, const std::string& name)
      : bytes_(bytes), name_(name) {}

  std::size_t offset() const { return offset_; }
  std::size_t remaining() const { return bytes_.size() - offset_; }

  void require(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw DataError("parse_wav: " + name_ + ": truncated " + what +
                      " at byte " + std::to_string(offset_));
    }
  }

  std::string fourcc() {
    require(4, "chunk id");
    std::string s(reinterpret_cast<const char*>(bytes_.data() + offset_), 4);
    offset_ += 4;
    return s;
  }

  std::uint16_t u16() {
    require(2, "field");
    const std::uint16_t v = static_cast<std::uint16_t>(
        bytes_[offset_] | (bytes_[offset_ + 1] << 8));
    offset_ += 2;
    return v;
  }

  std::uint32_t u32() {
    require(4, "field");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(bytes_[offset_ + i]) << (8 * i);
    }
    offset_ += 4;
    return v;
  }

  void skip(std::size_t n, const char* what) {
    require(n, what);
    offset_ += n;
  }

  const std::uint8_t* at() const { return bytes_.data() + offset_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::string name_;
  std::size_t offset_ = 0;
};

void put_u16(std::ostream& out, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v),
                              static_cast<unsigned char>(v >> 8)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

signal::Waveform parse_wav(const std::vector<std::uint8_t>& bytes,
                           const std::string& name) {
  ByteReader r(bytes, name);
  if (r.fourcc() != "RIFF") {
    throw DataError("parse_wav: " + name + ": missing RIFF magic at byte 0");
  }
  r.u32();  // declared riff size; trust the actual byte count instead
  if (r.fourcc() != "WAVE") {
    throw DataError("parse_wav: " + name + ": missing WAVE tag at byte 8");
  }

  bool have_fmt = false;
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;

  signal::Waveform w;
  w.source_id = name;
  bool have_data = false;

  while (r.remaining() > 0) {
    if (r.remaining() < 8) {
      throw DataError("parse_wav: " + name + ": dangling bytes at byte " +
                      std::to_string(r.offset()));
    }
    const std::string id = r.fourcc();
    const std::uint32_t size = r.u32();
    if (id == "fmt ") {
      const std::size_t fmt_at = r.offset();
      if (size < 16) {
        throw DataError("parse_wav: " + name + ": fmt chunk of " +
                        std::to_string(size) + " bytes at byte " +
                        std::to_string(fmt_at));
      }
      format = r.u16();
      channels = r.u16();
      sample_rate = r.u32();
      r.u32();  // byte rate
      r.u16();  // block align
      bits = r.u16();
      r.skip(size - 16, "fmt extension");
      if (format != kFormatPcm && format != kFormatFloat) {
        throw DataError("parse_wav: " + name + ": unsupported codec " +
                        std::to_string(format) + " at byte " +
                        std::to_string(fmt_at));
      }
      if ((format == kFormatPcm && bits != 16) ||
          (format == kFormatFloat && bits != 32)) {
        throw DataError("parse_wav: " + name + ": unsupported " +
                        std::to_string(bits) + "-bit depth for codec " +
                        std::to_string(format) + " at byte " +
                        std::to_string(fmt_at));
      }
      if (channels == 0 || sample_rate == 0) {
        throw DataError("parse_wav: " + name +
                        ": zero channels or sample rate at byte " +
                        std::to_string(fmt_at));
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) {
        throw DataError("parse_wav: " + name +
                        ": data chunk before fmt at byte " +
                        std::to_string(r.offset() - 8));
      }
      r.require(size, "data chunk");
      const std::size_t bytes_per_sample = bits / 8;
      const std::size_t frame_bytes = bytes_per_sample * channels;
      const std::size_t frames = size / frame_bytes;
      w.samples.resize(frames);
      const std::uint8_t* p = r.at();
      for (std::size_t f = 0; f < frames; ++f) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
          const std::uint8_t* s = p + f * frame_bytes + c * bytes_per_sample;
          if (format == kFormatPcm) {
            const std::int16_t v =
                static_cast<std::int16_t>(s[0] | (s[1] << 8));
            acc += static_cast<double>(v) / 32768.0;
          } else {
            std::uint32_t bits32 = 0;
            for (int i = 0; i < 4; ++i) {
              bits32 |= static_cast<std::uint32_t>(s[i]) << (8 * i);
            }
            float fv;
            std::memcpy(&fv, &bits32, 4);
            acc += static_cast<double>(fv);
          }
        }
        w.samples[f] = acc / channels;
      }
      r.skip(size, "data chunk");
      have_data = true;
    } else {
      r.skip(size, "chunk body");
    }
    if (size % 2 == 1 && r.remaining() > 0) {
      r.skip(1, "chunk padding");
    }
  }

  if (!have_data) {
    throw DataError("parse_wav: " + name + ": no data chunk");
  }
  w.sample_rate = static_cast<int>(sample_rate);
  return w;
}

signal::Waveform load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("load_wav: cannot open " + path);
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_wav(bytes, path);
}

void write_wav(const std::string& path, const signal::Waveform& w,
               WavFormat format) {
  if (w.sample_rate <= 0) {
    throw std::invalid_argument("write_wav: waveform has no sample rate");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("write_wav: cannot open " + path);
  }
  const std::uint16_t bits = format == WavFormat::kPcm16 ? 16 : 32;
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(w.samples.size() * (bits / 8));

  out << "RIFF";
  put_u32(out, 36 + data_bytes);
  out << "WAVE";
  out << "fmt ";
  put_u32(out, 16);
  put_u16(out, format == WavFormat::kPcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * (bits / 8));
  put_u16(out, bits / 8);
  put_u16(out, bits);
  out << "data";
  put_u32(out, data_bytes);
  for (double v : w.samples) {
    if (format == WavFormat::kPcm16) {
      const double scaled = std::round(v * 32768.0);
      const double clamped = std::clamp(scaled, -32768.0, 32767.0);
      put_u16(out, static_cast<std::uint16_t>(
                       static_cast<std::int16_t>(clamped)));
    } else {
      const float fv = static_cast<float>(v);
      std::uint32_t bits32;
      std::memcpy(&bits32, &fv, 4);
      put_u32(out, bits32);
    }
  }
  if (!out) {
    throw DataError("write_wav: write failed for " + path);
  }
}

}  // namespace medfront::datasets
