#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "shiftconv/arith.hpp"

namespace shiftconv {

// Binary layout (all integers big-endian):
//   bytes 0..3   magic "TAUC"
//   u32          format version (1)
//   u64          n_max
//   then for n = 1..n_max: u32 length L, followed by L bytes holding tau(n)
//   as a minimal two's-complement big-endian integer.
inline constexpr std::uint32_t kTauCacheVersion = 1;

void write_tau_binary(std::ostream& out, std::span<const BigInt> tau);
std::vector<BigInt> read_tau_binary(std::istream& in);

// Text layout: line n holds tau(n) in decimal, n = 1..n_max.
void write_tau_text(std::ostream& out, std::span<const BigInt> tau);
std::vector<BigInt> read_tau_text(std::istream& in);

// Loads tau up to n_max from `dir/tau.bin` when it covers n_max, otherwise
// computes and (best effort) writes it.
std::vector<BigInt> load_or_compute_tau(std::size_t n_max,
                                        const std::optional<std::filesystem::path>& dir);

}  // namespace shiftconv
