#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "skysweep/common/errors.hpp"
#include "skysweep/core/parameter.hpp"
#include "skysweep/core/tensor.hpp"

namespace skysweep {

// Parameter snapshot on disk. Little-endian throughout:
//   "REDN" | u32 version | u32 count
//   per parameter: u16 name length | name bytes | u8 rank | u32 extents | f32 data
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <typename U>
void write_pod(std::ostream& os, U v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

template <typename U>
U read_pod(std::istream& is, const char* what) {
  U v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(U));
  if (!is) throw format_error(std::string("checkpoint: truncated while reading ") + what);
  return v;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path,
                            const std::vector<const Parameter<float>*>& params) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw format_error("checkpoint: cannot open for writing: " + path);
  os.write("REDN", 4);
  detail::write_pod<std::uint32_t>(os, kCheckpointVersion);
  detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
  for (const Parameter<float>* p : params) {
    if (p->name.size() > 0xffff) throw contract_error("checkpoint: parameter name too long");
    detail::write_pod<std::uint16_t>(os, static_cast<std::uint16_t>(p->name.size()));
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    const Shape& s = p->value.shape();
    detail::write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(s.rank));
    for (int i = 0; i < s.rank; ++i)
      detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(s.extent[i]));
    os.write(reinterpret_cast<const char*>(p->value.data()),
             static_cast<std::streamsize>(sizeof(float) * p->value.numel()));
  }
  if (!os) throw format_error("checkpoint: write failed: " + path);
}

// Loads a snapshot into an existing parameter set. Every parameter must be
// present with a matching shape; extra entries in the file are rejected.
inline void load_checkpoint(const std::string& path,
                            const std::vector<Parameter<float>*>& params) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw format_error("checkpoint: cannot open: " + path);
  char magic[4] = {};
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "REDN", 4) != 0)
    throw format_error("checkpoint: bad magic in " + path);
  const auto version = detail::read_pod<std::uint32_t>(is, "version");
  if (version != kCheckpointVersion)
    throw format_error("checkpoint: unsupported version " + std::to_string(version));
  const auto count = detail::read_pod<std::uint32_t>(is, "count");

  std::unordered_map<std::string, Parameter<float>*> by_name;
  for (Parameter<float>* p : params) {
    if (!by_name.emplace(p->name, p).second)
      throw contract_error("checkpoint: duplicate parameter name " + p->name);
  }
  std::size_t applied = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = detail::read_pod<std::uint16_t>(is, "name length");
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (!is) throw format_error("checkpoint: truncated name");
    const auto rank = detail::read_pod<std::uint8_t>(is, "rank");
    if (rank < 1 || rank > 4) throw format_error("checkpoint: bad rank for " + name);
    Shape s;
    s.rank = rank;
    std::int64_t numel = 1;
    for (int r = 0; r < rank; ++r) {
      const auto e = detail::read_pod<std::uint32_t>(is, "extent");
      if (e == 0 || e > 0x7fffffffu) throw format_error("checkpoint: bad extent for " + name);
      s.extent[r] = static_cast<int>(e);
      numel *= s.extent[r];
    }
    auto it = by_name.find(name);
    if (it == by_name.end()) throw format_error("checkpoint: unknown parameter " + name);
    Parameter<float>* p = it->second;
    if (!(p->value.shape() == s))
      throw format_error("checkpoint: shape mismatch for " + name + ": file " + s.str() +
                         ", model " + p->value.shape().str());
    is.read(reinterpret_cast<char*>(p->value.data()),
            static_cast<std::streamsize>(sizeof(float) * numel));
    if (!is) throw format_error("checkpoint: truncated data for " + name);
    ++applied;
  }
  if (applied != by_name.size())
    throw format_error("checkpoint: file has " + std::to_string(applied) + " of " +
                       std::to_string(by_name.size()) + " model parameters");
}

}  // namespace skysweep
