#include "sparseview/checkpoint.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace sparseview {
namespace {

constexpr char kMagic[4] = {'S', 'V', 'C', 'K'};

class Writer {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    auto bits = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(value);
    if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
    bytes_.insert(bytes_.end(), bits.begin(), bits.end());
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    std::array<std::uint8_t, sizeof(T)> bits;
    need(sizeof(T));
    std::memcpy(bits.data(), bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
    return std::bit_cast<T>(bits);
  }
  std::string get_string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw std::runtime_error("checkpoint: truncated data");
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const FieldParams& params) {
  Writer w;
  w.put_bytes(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kCheckpointVersion);
  const FieldArchitecture& arch = params.architecture();
  w.put<std::int32_t>(arch.trunk_layers);
  w.put<std::int32_t>(arch.trunk_width);
  w.put<std::int32_t>(arch.position_frequencies);
  w.put<std::int32_t>(arch.direction_frequencies);
  w.put<double>(arch.position_scale);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(params.store().size()));
  for (const auto& [name, array] : params.store()) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(name.size()));
    w.put_bytes(name.data(), name.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(array.rank()));
    for (std::size_t d : array.shape()) w.put<std::uint64_t>(d);
    for (double v : array.values()) w.put<double>(v);
  }
  return w.take();
}

FieldParams deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (r.get_string(4) != std::string(kMagic, 4)) {
    throw std::runtime_error("checkpoint: bad magic, not a sparseview checkpoint");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported format version " + std::to_string(version));
  }
  FieldArchitecture arch;
  arch.trunk_layers = r.get<std::int32_t>();
  arch.trunk_width = r.get<std::int32_t>();
  arch.position_frequencies = r.get<std::int32_t>();
  arch.direction_frequencies = r.get<std::int32_t>();
  arch.position_scale = r.get<double>();
  arch.validate();

  ParameterStore store;
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.get_string(r.get<std::uint32_t>());
    const auto rank = r.get<std::uint32_t>();
    if (rank > 8) throw std::runtime_error("checkpoint: implausible rank for '" + name + "'");
    std::vector<std::size_t> shape(rank);
    std::size_t total = 1;
    for (auto& d : shape) {
      d = static_cast<std::size_t>(r.get<std::uint64_t>());
      total *= d;
    }
    std::vector<double> values(total);
    for (double& v : values) v = r.get<double>();
    store.add(std::move(name), NumericArray(std::move(shape), std::move(values)));
  }
  if (!r.done()) throw std::runtime_error("checkpoint: trailing bytes");
  return FieldParams(arch, std::move(store));
}

void save_checkpoint(const std::filesystem::path& path, const FieldParams& params) {
  const auto bytes = serialize_checkpoint(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

FieldParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace sparseview
