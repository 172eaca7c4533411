#include <cstring>

#include "slicenet/bytes.hpp"
#include "slicenet/volume.hpp"

namespace slicenet {

namespace {

constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kSingleFileOffset = 352;

constexpr std::size_t kDimOffset = 40;
constexpr std::size_t kDatatypeOffset = 70;
constexpr std::size_t kBitpixOffset = 72;
constexpr std::size_t kPixdimOffset = 76;
constexpr std::size_t kVoxOffsetOffset = 108;
constexpr std::size_t kSclSlopeOffset = 112;
constexpr std::size_t kQformOffset = 252;
constexpr std::size_t kMagicOffset = 344;

std::size_t element_size(NiftiDatatype t) {
  switch (t) {
    case NiftiDatatype::UInt8: return 1;
    case NiftiDatatype::Int16: return 2;
    case NiftiDatatype::Float32: return 4;
  }
  return 0;
}

}  // namespace

NiftiHeader parse_nifti_header(std::span<const std::byte> bytes) {
  NiftiHeader h;
  if (bytes.size() < 4) throw Error(ErrorCode::BadMagic, "stream too short for a NIfTI-1 header");

  ByteReader r(bytes, ByteOrder::Little);
  if (r.get<std::int32_t>() == static_cast<std::int32_t>(kHeaderSize)) {
    h.big_endian = false;
  } else {
    r.seek(0);
    r.set_order(ByteOrder::Big);
    if (r.get<std::int32_t>() != static_cast<std::int32_t>(kHeaderSize))
      throw Error(ErrorCode::BadMagic, "sizeof_hdr is not 348 in either byte order");
    h.big_endian = true;
  }
  if (bytes.size() < kHeaderSize)
    throw Error(ErrorCode::TruncatedData, "header shorter than 348 bytes");

  r.seek(kMagicOffset);
  const std::string magic = r.get_string(4);
  if (magic != std::string("n+1\0", 4)) throw Error(ErrorCode::BadMagic, "magic is not n+1");

  r.seek(kDimOffset);
  std::int16_t dim[8];
  for (auto& d : dim) d = r.get<std::int16_t>();
  if (dim[0] != 3)
    throw Error(ErrorCode::NonVolumetric, "dim[0] is " + std::to_string(dim[0]) + ", expected 3");
  for (int i = 1; i <= 3; ++i)
    if (dim[i] < 1) throw Error(ErrorCode::NonVolumetric, "non-positive extent in dim[1..3]");
  h.dims = {static_cast<std::size_t>(dim[1]), static_cast<std::size_t>(dim[2]),
            static_cast<std::size_t>(dim[3])};

  r.seek(kDatatypeOffset);
  const auto datatype = r.get<std::int16_t>();
  switch (datatype) {
    case 2: h.datatype = NiftiDatatype::UInt8; break;
    case 4: h.datatype = NiftiDatatype::Int16; break;
    case 16: h.datatype = NiftiDatatype::Float32; break;
    default:
      throw Error(ErrorCode::UnsupportedDatatype, "datatype code " + std::to_string(datatype));
  }
  r.seek(kBitpixOffset);
  h.bitpix = r.get<std::int16_t>();

  r.seek(kVoxOffsetOffset);
  h.vox_offset = r.get<float>();
  r.seek(kQformOffset);
  h.qform_code = r.get<std::int16_t>();
  h.sform_code = r.get<std::int16_t>();
  return h;
}

Volume parse_nifti(std::span<const std::byte> bytes, std::string source_id) {
  const NiftiHeader h = parse_nifti_header(bytes);
  std::size_t offset = h.vox_offset >= static_cast<float>(kHeaderSize)
                           ? static_cast<std::size_t>(h.vox_offset)
                           : kSingleFileOffset;
  const std::size_t n = h.dims.count();
  const std::size_t need = n * element_size(h.datatype);
  if (bytes.size() < offset || bytes.size() - offset < need)
    throw Error(ErrorCode::TruncatedData, "voxel data holds " +
                                              std::to_string(bytes.size() > offset ? bytes.size() - offset : 0) +
                                              " bytes, need " + std::to_string(need));

  ByteReader r(bytes, h.big_endian ? ByteOrder::Big : ByteOrder::Little);
  r.seek(offset);
  std::vector<double> voxels(n);
  switch (h.datatype) {
    case NiftiDatatype::UInt8:
      for (auto& v : voxels) v = r.get<std::uint8_t>();
      break;
    case NiftiDatatype::Int16:
      for (auto& v : voxels) v = r.get<std::int16_t>();
      break;
    case NiftiDatatype::Float32:
      for (auto& v : voxels) v = r.get<float>();
      break;
  }
  return Volume(h.dims, std::move(voxels), std::move(source_id));
}

std::vector<std::byte> write_nifti(const Volume& volume, NiftiDatatype datatype, bool big_endian) {
  ByteWriter w(big_endian ? ByteOrder::Big : ByteOrder::Little);
  w.put<std::int32_t>(static_cast<std::int32_t>(kHeaderSize));
  w.pad_to(kDimOffset);
  const Dims& d = volume.dims();
  const std::int16_t dim[8] = {3, static_cast<std::int16_t>(d.nx), static_cast<std::int16_t>(d.ny),
                               static_cast<std::int16_t>(d.nz), 1, 1, 1, 1};
  for (auto v : dim) w.put(v);
  w.pad_to(kDatatypeOffset);
  w.put(static_cast<std::int16_t>(datatype));
  w.put(static_cast<std::int16_t>(element_size(datatype) * 8));
  w.pad_to(kPixdimOffset);
  for (int i = 0; i < 8; ++i) w.put(1.0f);
  w.pad_to(kVoxOffsetOffset);
  w.put(static_cast<float>(kSingleFileOffset));
  w.pad_to(kSclSlopeOffset);
  w.put(1.0f);
  w.put(0.0f);
  w.pad_to(kMagicOffset);
  w.put_bytes(std::string_view("n+1\0", 4));
  w.pad_to(kSingleFileOffset);
  for (double v : volume.voxels()) {
    switch (datatype) {
      case NiftiDatatype::UInt8: w.put(static_cast<std::uint8_t>(v)); break;
      case NiftiDatatype::Int16: w.put(static_cast<std::int16_t>(v)); break;
      case NiftiDatatype::Float32: w.put(static_cast<float>(v)); break;
    }
  }
  return w.take();
}

}  // namespace slicenet
