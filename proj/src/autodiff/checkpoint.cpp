#include "medfront/autodiff/checkpoint.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "medfront/errors.hpp"

namespace medfront::autodiff {

namespace {

constexpr char kMagic[4] = {'M', 'F', 'C', 'K'};

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

class Reader {
 public:
  Reader(std::istream& in, const std::string& path) : in_(in), path_(path) {}

  bool at_eof() {
    return in_.peek() == std::char_traits<char>::eof();
  }

  std::uint32_t u32() {
    unsigned char b[4];
    read(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }

  std::uint64_t u64() {
    unsigned char b[8];
    read(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }

  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  std::string bytes(std::size_t n) {
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }

  std::size_t offset() const { return offset_; }

 private:
  void read(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw DataError("checkpoint: " + path_ + " truncated at byte " +
                      std::to_string(offset_));
    }
    offset_ += n;
  }

  std::istream& in_;
  const std::string& path_;
  std::size_t offset_ = 0;
};

}  // namespace

void save_checkpoint(
    const std::string& path,
    const std::vector<std::pair<std::string, Tensor>>& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("checkpoint: cannot write " + path);
  out.write(kMagic, 4);
  put_u32(out, kCheckpointVersion);
  for (const auto& [name, t] : params) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put_u64(out, d);
    for (double v : t.values()) put_f64(out, v);
  }
  if (!out) throw DataError("checkpoint: write failed for " + path);
}

std::vector<std::pair<std::string, Tensor>> load_checkpoint(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot read " + path);
  Reader r(in, path);
  if (r.bytes(4) != std::string(kMagic, 4)) {
    throw DataError("checkpoint: " + path + " has wrong magic bytes");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint: " + path + " has unsupported version " +
                    std::to_string(version));
  }
  std::vector<std::pair<std::string, Tensor>> params;
  while (!r.at_eof()) {
    const std::uint32_t name_len = r.u32();
    if (name_len > 4096) {
      throw DataError("checkpoint: " + path +
                      " has implausible name length at byte " +
                      std::to_string(r.offset() - 4));
    }
    std::string name = r.bytes(name_len);
    const std::uint32_t rank = r.u32();
    if (rank > 8) {
      throw DataError("checkpoint: " + path + " has implausible rank " +
                      std::to_string(rank) + " at byte " +
                      std::to_string(r.offset() - 4));
    }
    std::vector<std::size_t> shape(rank);
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      shape[i] = static_cast<std::size_t>(r.u64());
      if (shape[i] == 0 || count > (1ull << 32) / std::max<std::size_t>(shape[i], 1)) {
        throw DataError("checkpoint: " + path + " has implausible dims");
      }
      count *= shape[i];
    }
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) values[i] = r.f64();
    params.emplace_back(std::move(name),
                        Tensor::from_values(std::move(shape),
                                            std::move(values)));
  }
  return params;
}

}  // namespace medfront::autodiff
