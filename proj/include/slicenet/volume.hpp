#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace slicenet {

/// Extents of a 3D grid; every component is at least 1.
struct Dims {
  std::size_t nx = 1;
  std::size_t ny = 1;
  std::size_t nz = 1;

  std::size_t count() const { return nx * ny * nz; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

/// A 3D scalar field stored x-fastest. Immutable after construction.
class Volume {
 public:
  /// Validates extents and voxel count; computes the value range.
  Volume(Dims dims, std::vector<double> voxels, std::string source_id = {});

  const Dims& dims() const { return dims_; }
  std::span<const double> voxels() const { return voxels_; }
  double vmin() const { return vmin_; }
  double vmax() const { return vmax_; }
  const std::string& source_id() const { return source_id_; }

  double at(std::size_t x, std::size_t y, std::size_t z) const {
    return voxels_[x + dims_.nx * (y + dims_.ny * z)];
  }

  /// Bit-exact comparison of dims and voxel data. source_id is not compared.
  friend bool operator==(const Volume& a, const Volume& b);

 private:
  Dims dims_;
  std::vector<double> voxels_;
  double vmin_ = 0.0;
  double vmax_ = 0.0;
  std::string source_id_;
};

// ---- NIfTI-1 -------------------------------------------------------------

enum class NiftiDatatype : std::int16_t { UInt8 = 2, Int16 = 4, Float32 = 16 };

/// Header fields the reader consumes. Orientation codes are carried, not applied.
struct NiftiHeader {
  bool big_endian = false;
  Dims dims;
  NiftiDatatype datatype = NiftiDatatype::Float32;
  std::int16_t bitpix = 32;
  float vox_offset = 352.0f;
  std::int16_t qform_code = 0;
  std::int16_t sform_code = 0;
};

NiftiHeader parse_nifti_header(std::span<const std::byte> bytes);

/// Single-file .nii reader limited to uint8, int16 and float32 3D images.
Volume parse_nifti(std::span<const std::byte> bytes, std::string source_id = {});

/// Fixture writer. Values are cast to the target datatype without rounding checks.
std::vector<std::byte> write_nifti(const Volume& volume, NiftiDatatype datatype,
                                   bool big_endian = false);

// ---- RAWVOL --------------------------------------------------------------

/// "RVOL" | u8 version | u8 endianness | u32 nx ny nz | f32 voxels, little-endian.
/// Voxels are narrowed to float32 on write.
std::vector<std::byte> write_raw_volume(const Volume& volume);
Volume parse_raw_volume(std::span<const std::byte> bytes, std::string source_id = {});

/// Dispatches on the leading magic bytes (RAWVOL or NIfTI-1).
Volume load_volume(const std::string& path);

// ---- Manifest ------------------------------------------------------------

enum class Label : int { HC = 0, AD = 1 };

std::string_view to_string(Label label);

struct SubjectRecord {
  std::string subject_id;
  double cdr = 0.0;
  Label label = Label::HC;
  std::string volume_path;
};

/// CDR 0 is a healthy control; anything above is AD. Domain is [0, 2].
Label label_from_cdr(double cdr);

/// JSON-lines manifest, one {subject_id, cdr, volume_path} object per line.
/// Blank lines are skipped; line numbers in errors are 1-based.
std::vector<SubjectRecord> parse_manifest(std::string_view text);

std::string write_manifest(std::span<const SubjectRecord> records);

}  // namespace slicenet
