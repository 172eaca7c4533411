#include <cstring>

#include "slicenet/bytes.hpp"
#include "slicenet/volume.hpp"

namespace slicenet {

namespace {
constexpr std::uint8_t kRawVersion = 1;
}

std::vector<std::byte> write_raw_volume(const Volume& volume) {
  ByteWriter w(ByteOrder::Little);
  w.put_bytes("RVOL");
  w.put<std::uint8_t>(kRawVersion);
  w.put<std::uint8_t>(0);
  const Dims& d = volume.dims();
  w.put(static_cast<std::uint32_t>(d.nx));
  w.put(static_cast<std::uint32_t>(d.ny));
  w.put(static_cast<std::uint32_t>(d.nz));
  for (double v : volume.voxels()) w.put(static_cast<float>(v));
  return w.take();
}

Volume parse_raw_volume(std::span<const std::byte> bytes, std::string source_id) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "RVOL", 4) != 0)
    throw Error(ErrorCode::BadMagic, "stream does not start with RVOL");
  ByteReader r(bytes, ByteOrder::Little);
  r.seek(4);
  const auto version = r.get<std::uint8_t>();
  if (version != kRawVersion)
    throw Error(ErrorCode::VersionUnsupported, "RAWVOL version " + std::to_string(version));
  if (r.get<std::uint8_t>() != 0)
    throw Error(ErrorCode::BadParams, "RAWVOL endianness flag must be 0 (little-endian)");
  Dims d;
  d.nx = r.get<std::uint32_t>();
  d.ny = r.get<std::uint32_t>();
  d.nz = r.get<std::uint32_t>();
  if (d.nx == 0 || d.ny == 0 || d.nz == 0)
    throw Error(ErrorCode::BadParams, "RAWVOL extents must be positive");
  if (r.remaining() / sizeof(float) < d.count())
    throw Error(ErrorCode::TruncatedData, "RAWVOL voxel payload is short");
  std::vector<double> voxels(d.count());
  for (auto& v : voxels) v = r.get<float>();
  return Volume(d, std::move(voxels), std::move(source_id));
}

}  // namespace slicenet
