#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "slicenet/bytes.hpp"
#include "slicenet/error.hpp"
#include "slicenet/volume.hpp"

namespace slicenet {

Volume::Volume(Dims dims, std::vector<double> voxels, std::string source_id)
    : dims_(dims), voxels_(std::move(voxels)), source_id_(std::move(source_id)) {
  if (dims_.nx < 1 || dims_.ny < 1 || dims_.nz < 1)
    throw Error(ErrorCode::BadParams, "volume extents must be positive");
  if (voxels_.size() != dims_.count())
    throw Error(ErrorCode::ShapeMismatch, "voxel count " + std::to_string(voxels_.size()) +
                                              " does not match extents product " +
                                              std::to_string(dims_.count()));
  for (double v : voxels_)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "volume contains a non-finite voxel");
  auto [lo, hi] = std::minmax_element(voxels_.begin(), voxels_.end());
  vmin_ = *lo;
  vmax_ = *hi;
}

bool operator==(const Volume& a, const Volume& b) {
  if (a.dims_ != b.dims_) return false;
  return std::memcmp(a.voxels_.data(), b.voxels_.data(), a.voxels_.size() * sizeof(double)) == 0;
}

Volume load_volume(const std::string& path) {
  auto bytes = read_file(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "RVOL", 4) == 0)
    return parse_raw_volume(bytes, path);
  return parse_nifti(bytes, path);
}

}  // namespace slicenet
