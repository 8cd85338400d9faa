#include "hypersem/dataset_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "hypersem/error.hpp"

namespace hypersem::pipeline {

namespace {

constexpr char kMagic[4] = {'L', 'S', 'D', 'S'};
constexpr std::size_t kHeaderSize = 4 + 4 + 4 + 4 + 8 + 8 + 1;

template <typename T>
void put(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(bits & 0xFF));
    bits >>= 8;
  }
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    need(sizeof(T), what);
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return std::bit_cast<T>(bits);
  }

  std::uint8_t byte(const char* what) {
    need(1, what);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  [[noreturn]] void fail(std::size_t at, const std::string& why) const {
    throw Error(ErrorCode::MalformedFile,
                "dataset: " + why + " at byte offset " + std::to_string(at));
  }

 private:
  void need(std::size_t n, const char* what) const {
    if (remaining() < n) fail(pos_, std::string("truncated while reading ") + what);
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_dataset(const SampleDataset& ds) {
  if (ds.latents.size() != ds.count * ds.dim || ds.scores.size() != ds.count * ds.attribute_count) {
    throw Error(ErrorCode::DimensionMismatch, "dataset buffers do not match its header");
  }
  std::string out;
  out.reserve(kHeaderSize + ds.count * (ds.dim + ds.attribute_count) * 4);
  out.append(kMagic, 4);
  put(out, kDatasetVersion);
  put(out, ds.dim);
  put(out, ds.attribute_count);
  put(out, ds.count);
  put(out, ds.seed);
  out.push_back(static_cast<char>(ds.space));
  for (std::uint64_t i = 0; i < ds.count; ++i) {
    for (float v : ds.latent(i)) put(out, v);
    for (float v : ds.score_row(i)) put(out, v);
  }
  return out;
}

SampleDataset decode_dataset(const std::string& bytes) {
  Reader in(bytes);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    in.fail(0, "bad magic (expected LSDS)");
  }
  in.get<std::uint32_t>("magic");
  const std::size_t version_at = in.offset();
  const auto version = in.get<std::uint32_t>("version");
  if (version != kDatasetVersion) in.fail(version_at, "unsupported version " + std::to_string(version));

  SampleDataset ds;
  const std::size_t dim_at = in.offset();
  ds.dim = in.get<std::uint32_t>("dimension");
  if (ds.dim < 4) in.fail(dim_at, "dimension below 4");
  const std::size_t m_at = in.offset();
  ds.attribute_count = in.get<std::uint32_t>("attribute count");
  if (ds.attribute_count == 0) in.fail(m_at, "zero attributes");
  const std::size_t count_at = in.offset();
  ds.count = in.get<std::uint64_t>("count");
  if (ds.count == 0) in.fail(count_at, "zero samples");
  ds.seed = in.get<std::uint64_t>("seed");
  const std::size_t space_at = in.offset();
  const auto space = in.byte("space");
  if (space > 1) in.fail(space_at, "space byte must be 0 or 1");
  ds.space = static_cast<Space>(space);

  const std::uint64_t record = 4ull * (ds.dim + ds.attribute_count);
  if (in.remaining() / record < ds.count) {
    in.fail(kHeaderSize + (in.remaining() / record) * record,
            "truncated: header announces " + std::to_string(ds.count) + " records");
  }
  if (in.remaining() != ds.count * record) {
    in.fail(kHeaderSize + ds.count * record, "trailing bytes after the last record");
  }
  ds.latents.resize(ds.count * ds.dim);
  ds.scores.resize(ds.count * ds.attribute_count);
  for (std::uint64_t i = 0; i < ds.count; ++i) {
    for (std::uint32_t j = 0; j < ds.dim; ++j) ds.latents[i * ds.dim + j] = in.get<float>("latent");
    for (std::uint32_t a = 0; a < ds.attribute_count; ++a) {
      ds.scores[i * ds.attribute_count + a] = in.get<float>("score");
    }
  }
  return ds;
}

void write_dataset(const std::filesystem::path& path, const SampleDataset& ds) {
  const std::string bytes = encode_dataset(ds);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write to " + path.string() + " failed");
}

SampleDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoFailure, "read from " + path.string() + " failed");
  return decode_dataset(bytes);
}

}  // namespace hypersem::pipeline
