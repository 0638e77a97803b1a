#include "gshs/dump.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "gshs/errors.hpp"

namespace gshs {
namespace {

static_assert(std::endian::native == std::endian::little, "DGRD I/O assumes a little-endian host");

constexpr std::array<char, 4> kMagic = {'D', 'G', 'R', 'D'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  os.write(bytes, sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  char bytes[sizeof(T)];
  if (!is.read(bytes, sizeof(T))) throw ConfigError("DGRD: truncated stream");
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_dgrd(std::ostream& os, const DensityGrid& d, double time) {
  const GridSpec& g = d.grid();
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.num_axes()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.mode_count()));
  for (int k = 0; k < g.num_axes(); ++k) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(g.count(k)));
    put<double>(os, g.length(k));
    put<double>(os, g.offset(k));
  }
  put<double>(os, time);
  os.write(reinterpret_cast<const char*>(d.values().data()),
           static_cast<std::streamsize>(d.values().size() * sizeof(double)));
  if (!os) throw ConfigError("DGRD: write failed");
}

void write_dgrd(const std::filesystem::path& path, const DensityGrid& d, double time) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  write_dgrd(os, d, time);
}

TimedDensity read_dgrd(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw ConfigError("DGRD: bad magic");
  if (get<std::uint32_t>(is) != kVersion) throw ConfigError("DGRD: unsupported version");
  const auto axes = get<std::uint32_t>(is);
  const auto modes = get<std::uint32_t>(is);
  if (axes == 0 || axes > static_cast<std::uint32_t>(kMaxAxes) || modes == 0) {
    throw ConfigError("DGRD: bad header");
  }
  std::vector<int> counts(axes);
  std::vector<double> lengths(axes), offsets(axes);
  for (std::uint32_t k = 0; k < axes; ++k) {
    counts[k] = static_cast<int>(get<std::uint32_t>(is));
    lengths[k] = get<double>(is);
    offsets[k] = get<double>(is);
  }
  TimedDensity out;
  out.time = get<double>(is);
  out.density = DensityGrid(GridSpec(counts, lengths, offsets, static_cast<int>(modes)));
  auto& v = out.density.values();
  if (!is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)))) {
    throw ConfigError("DGRD: truncated values");
  }
  return out;
}

TimedDensity read_dgrd(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path.string());
  return read_dgrd(is);
}

void write_density_csv(std::ostream& os, const DensityGrid& d) {
  const GridSpec& g = d.grid();
  os << "mode";
  for (int k = 0; k < g.num_axes(); ++k) os << ",r" << k;
  os << ",density\n";
  os << std::setprecision(17);
  for (int s = 0; s < g.mode_count(); ++s) {
    for (Index j = 0; j < g.num_points(); ++j) {
      os << s;
      const State r = g.point(j);
      for (int k = 0; k < g.num_axes(); ++k) os << ',' << r[k];
      os << ',' << d(s, j) << '\n';
    }
  }
}

void write_density_csv(const std::filesystem::path& path, const DensityGrid& d) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  write_density_csv(os, d);
}

}  // namespace gshs
