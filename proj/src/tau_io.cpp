#include "shiftconv/tau_io.hpp"

#include <array>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include "shiftconv/errors.hpp"

namespace shiftconv {

namespace {

constexpr std::array<char, 4> kMagic{'T', 'A', 'U', 'C'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
  put_u32(out, static_cast<std::uint32_t>(v));
}

std::uint64_t get_be(std::istream& in, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw InvalidArgument("tau cache: truncated file");
    v = (v << 8) | static_cast<unsigned char>(c);
  }
  return v;
}

// Minimal two's-complement big-endian bytes.
std::vector<unsigned char> encode(const BigInt& v) {
  std::size_t len = 1;
  BigInt bound = 128;  // 2^{8 len - 1}
  if (v >= 0) {
    while (v >= bound) {
      ++len;
      bound <<= 8;
    }
  } else {
    while (v < -bound) {
      ++len;
      bound <<= 8;
    }
  }
  BigInt u = v >= 0 ? v : BigInt(v + (bound << 1));
  std::vector<unsigned char> bytes(len, 0);
  for (std::size_t i = 0; i < len; ++i) {
    bytes[len - 1 - i] = static_cast<unsigned char>(static_cast<unsigned>(u & 0xff));
    u >>= 8;
  }
  return bytes;
}

BigInt decode(const std::vector<unsigned char>& bytes) {
  BigInt u = 0;
  for (unsigned char b : bytes) {
    u <<= 8;
    u += b;
  }
  if (!bytes.empty() && (bytes.front() & 0x80)) {
    BigInt full = 1;
    full <<= 8 * bytes.size();
    u -= full;
  }
  return u;
}

}  // namespace

void write_tau_binary(std::ostream& out, std::span<const BigInt> tau) {
  out.write(kMagic.data(), 4);
  put_u32(out, kTauCacheVersion);
  const std::uint64_t n_max = tau.empty() ? 0 : tau.size() - 1;
  put_u64(out, n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    const auto bytes = encode(tau[n]);
    put_u32(out, static_cast<std::uint32_t>(bytes.size()));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
}

std::vector<BigInt> read_tau_binary(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kMagic) throw InvalidArgument("tau cache: bad magic");
  const auto version = get_be(in, 4);
  if (version != kTauCacheVersion) {
    throw InvalidArgument("tau cache: unsupported version " + std::to_string(version));
  }
  const auto n_max = get_be(in, 8);
  std::vector<BigInt> tau(n_max + 1, BigInt(0));
  std::vector<unsigned char> bytes;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    const auto len = get_be(in, 4);
    if (len == 0 || len > 4096) throw InvalidArgument("tau cache: bad value length");
    bytes.resize(len);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(len));
    if (!in) throw InvalidArgument("tau cache: truncated file");
    tau[n] = decode(bytes);
  }
  return tau;
}

void write_tau_text(std::ostream& out, std::span<const BigInt> tau) {
  for (std::size_t n = 1; n < tau.size(); ++n) out << tau[n].str() << '\n';
}

std::vector<BigInt> read_tau_text(std::istream& in) {
  std::vector<BigInt> tau(1, BigInt(0));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      tau.emplace_back(line);
    } catch (const std::exception&) {
      throw InvalidArgument("tau text: cannot parse line " + std::to_string(tau.size()));
    }
  }
  return tau;
}

std::vector<BigInt> load_or_compute_tau(std::size_t n_max,
                                        const std::optional<std::filesystem::path>& dir) {
  namespace fs = std::filesystem;
  if (dir) {
    const fs::path file = *dir / "tau.bin";
    std::ifstream in(file, std::ios::binary);
    if (in) {
      try {
        auto tau = read_tau_binary(in);
        if (tau.size() > n_max) {
          tau.resize(n_max + 1);
          return tau;
        }
      } catch (const InvalidArgument&) {
        // fall through to recompute
      }
    }
  }
  auto tau = compute_tau(n_max);
  if (dir) {
    std::error_code ec;
    fs::create_directories(*dir, ec);
    const fs::path tmp = *dir / "tau.bin.tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (out) write_tau_binary(out, tau);
    }
    fs::rename(tmp, *dir / "tau.bin", ec);
  }
  return tau;
}

}  // namespace shiftconv
