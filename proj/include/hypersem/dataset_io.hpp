#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "hypersem/pipeline.hpp"

namespace hypersem::pipeline {

/// LSDS layout, little-endian:
///   "LSDS" | u32 version = 1 | u32 d | u32 m | u64 count | u64 seed |
///   u8 space (0 = Z, 1 = W) | count × (d f32 latent, m f32 scores)
inline constexpr std::uint32_t kDatasetVersion = 1;

std::string encode_dataset(const SampleDataset& ds);
/// Throws MalformedFile carrying the byte offset of the first problem.
SampleDataset decode_dataset(const std::string& bytes);

void write_dataset(const std::filesystem::path& path, const SampleDataset& ds);
SampleDataset read_dataset(const std::filesystem::path& path);

}  // namespace hypersem::pipeline
