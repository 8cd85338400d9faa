#include <cstring>
#include <filesystem>

#include <doctest.h>

#include "hypersem/dataset_io.hpp"
#include "hypersem/error.hpp"

using namespace hypersem;
using namespace hypersem::pipeline;

namespace {

constexpr std::size_t kHeader = 33;

Error error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an error");
  return Error(ErrorCode::InvalidArgument, "");
}

bool mentions_offset(const Error& e, std::size_t offset) {
  return std::string(e.what()).find("byte offset " + std::to_string(offset)) != std::string::npos;
}

SampleDataset sample(std::uint64_t count = 20, Space space = Space::Z) {
  oracle::GeneratorConfig config;
  config.dim = 16;
  config.space = space;
  return synthesize_dataset(oracle::make_generator(config), count, 77, space);
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("hypersem_test_" + name);
}

}  // namespace

TEST_CASE("encode/decode round trip is bit exact") {
  for (Space space : {Space::Z, Space::W}) {
    const SampleDataset ds = sample(20, space);
    const std::string bytes = encode_dataset(ds);
    CHECK(bytes.size() == kHeader + 20 * (16 + 5) * 4);
    const SampleDataset back = decode_dataset(bytes);
    CHECK(back == ds);
    CHECK(std::memcmp(back.latents.data(), ds.latents.data(), ds.latents.size() * sizeof(float)) == 0);
    CHECK(encode_dataset(back) == bytes);
  }
}

TEST_CASE("header layout is little-endian") {
  const SampleDataset ds = sample(3);
  const std::string bytes = encode_dataset(ds);
  CHECK(bytes.substr(0, 4) == "LSDS");
  const auto u8 = [&](std::size_t i) { return static_cast<unsigned char>(bytes[i]); };
  CHECK(u8(4) == 1);
  CHECK(u8(5) == 0);
  CHECK(u8(8) == 16);
  CHECK(u8(12) == 5);
  CHECK(u8(16) == 3);
  CHECK(u8(24) == 77);
  CHECK(u8(32) == 0);
  float first = 0.0f;
  const std::uint32_t bits = static_cast<std::uint32_t>(u8(33)) | static_cast<std::uint32_t>(u8(34)) << 8 |
                             static_cast<std::uint32_t>(u8(35)) << 16 | static_cast<std::uint32_t>(u8(36)) << 24;
  std::memcpy(&first, &bits, 4);
  CHECK(first == ds.latents[0]);
}

TEST_CASE("malformed inputs report the offending offset") {
  const std::string good = encode_dataset(sample(4));
  const std::size_t record = (16 + 5) * 4;

  auto e = error_of([&] { decode_dataset("LSDX" + good.substr(4)); });
  CHECK(e.code() == ErrorCode::MalformedFile);
  CHECK(mentions_offset(e, 0));

  CHECK(mentions_offset(error_of([] { decode_dataset(""); }), 0));

  std::string bad = good;
  bad[4] = 2;
  CHECK(mentions_offset(error_of([&] { decode_dataset(bad); }), 4));

  bad = good;
  bad[8] = 3;
  CHECK(mentions_offset(error_of([&] { decode_dataset(bad); }), 8));

  bad = good;
  bad[32] = 2;
  CHECK(mentions_offset(error_of([&] { decode_dataset(bad); }), 32));

  e = error_of([&] { decode_dataset(good.substr(0, 10)); });
  CHECK(e.code() == ErrorCode::MalformedFile);
  CHECK(mentions_offset(e, 8));

  // Cut in the middle of the third record.
  e = error_of([&] { decode_dataset(good.substr(0, kHeader + 2 * record + 7)); });
  CHECK(e.code() == ErrorCode::MalformedFile);
  CHECK(mentions_offset(e, kHeader + 2 * record));

  e = error_of([&] { decode_dataset(good + "x"); });
  CHECK(mentions_offset(e, kHeader + 4 * record));
}

TEST_CASE("files round trip and missing files are I/O failures") {
  const auto path = temp_path("roundtrip.lsds");
  const SampleDataset ds = sample(50);
  write_dataset(path, ds);
  CHECK(read_dataset(path) == ds);
  std::filesystem::remove(path);

  CHECK(error_of([&] { read_dataset(path); }).code() == ErrorCode::IoFailure);
  CHECK(error_of([] { write_dataset("/nonexistent-dir/x.lsds", sample(1)); }).code() ==
        ErrorCode::IoFailure);
  CHECK(is_io_error(ErrorCode::MalformedFile));
}

TEST_CASE("inconsistent in-memory datasets are refused") {
  SampleDataset ds = sample(2);
  ds.latents.pop_back();
  CHECK(error_of([&] { encode_dataset(ds); }).code() == ErrorCode::DimensionMismatch);
}
