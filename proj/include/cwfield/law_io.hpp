#ifndef CWFIELD_LAW_IO_HPP
#define CWFIELD_LAW_IO_HPP

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "cwfield/distribution.hpp"

namespace cwfield {

/// FNV-1a over the bit patterns of the field values.
inline std::uint64_t field_hash(const FieldSequence& field) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : field.p) {
    unsigned char b[sizeof(double)];
    std::memcpy(b, &v, sizeof v);
    for (unsigned char c : b) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

struct LawCacheKey {
  std::uint64_t field_hash = 0;
  double beta = 0.0;
  double J = 0.0;
  std::uint64_t n = 0;

  bool operator==(const LawCacheKey&) const = default;

  static LawCacheKey of(const MagnetizationLaw& law) {
    return {cwfield::field_hash(law.field), law.params.beta, law.params.J, law.n};
  }
};

// Layout (native endianness): magic "CWFL", u32 version, key (u64 hash,
// f64 beta, f64 J, u64 n), then n + 1 f64 log-masses.
inline constexpr std::array<char, 4> kLawMagic = {'C', 'W', 'F', 'L'};
inline constexpr std::uint32_t kLawVersion = 1;

namespace detail {

template <class T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
bool get(std::ifstream& is, T& v) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof v));
}

}  // namespace detail

inline void write_law_cache(const std::string& path, const MagnetizationLaw& law) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open law cache for writing: " + path);
  os.write(kLawMagic.data(), kLawMagic.size());
  detail::put(os, kLawVersion);
  const auto key = LawCacheKey::of(law);
  detail::put(os, key.field_hash);
  detail::put(os, key.beta);
  detail::put(os, key.J);
  detail::put(os, key.n);
  os.write(reinterpret_cast<const char*>(law.log_mass.data()),
           static_cast<std::streamsize>(law.log_mass.size() * sizeof(double)));
  if (!os) throw std::runtime_error("failed writing law cache: " + path);
}

/// Loads a cached law if the file exists, is well formed and carries the
/// same key as (field, params); otherwise nullopt.
inline std::optional<MagnetizationLaw> read_law_cache(const std::string& path, const FieldSequence& field,
                                                      const ModelParams& params) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  std::array<char, 4> magic{};
  std::uint32_t version = 0;
  LawCacheKey key;
  if (!is.read(magic.data(), magic.size()) || magic != kLawMagic) return std::nullopt;
  if (!detail::get(is, version) || version != kLawVersion) return std::nullopt;
  if (!detail::get(is, key.field_hash) || !detail::get(is, key.beta) || !detail::get(is, key.J) ||
      !detail::get(is, key.n))
    return std::nullopt;
  const LawCacheKey want{cwfield::field_hash(field), params.beta, params.J, field.p.size()};
  if (!(key == want)) return std::nullopt;
  MagnetizationLaw law{static_cast<std::size_t>(key.n), std::vector<double>(key.n + 1), params, field};
  if (!is.read(reinterpret_cast<char*>(law.log_mass.data()),
               static_cast<std::streamsize>(law.log_mass.size() * sizeof(double))))
    return std::nullopt;
  return law;
}

/// gibbs_pmf with a file-backed cache.
inline MagnetizationLaw cached_gibbs_pmf(const std::string& path, const FieldSequence& field,
                                         const ModelParams& params) {
  if (auto law = read_law_cache(path, field, params)) return *law;
  auto law = gibbs_pmf(field, params);
  write_law_cache(path, law);
  return law;
}

}  // namespace cwfield

#endif  // CWFIELD_LAW_IO_HPP
