#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <span>

namespace hypersem {

using Rng = std::mt19937_64;

/// One step of the SplitMix64 finalizer. Used to derive independent
/// sub-seeds and counter-based noise.
std::uint64_t splitmix64(std::uint64_t x);

/// Mixes a base seed with a list of stream coordinates (chunk index,
/// attribute index, ...). Equal inputs give equal outputs on every platform.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> coords);

/// Hash of the exact bit patterns of a vector of doubles.
std::uint64_t hash_values(std::span<const double> values);

/// Standard normal variate as a pure function of a 64-bit key (Box-Muller on
/// two SplitMix64 outputs).
double keyed_normal(std::uint64_t key);

/// Number of worker threads used by the chunked loops.
std::size_t worker_count();
/// Overrides the worker count; 0 restores the hardware default.
void set_worker_count(std::size_t workers);

/// Runs body(chunk) for every chunk in [0, chunks). Work is distributed over
/// worker_count() threads; each chunk must only write its own output slot so
/// that results do not depend on the thread count.
void for_each_chunk(std::size_t chunks, const std::function<void(std::size_t)>& body);

}  // namespace hypersem
