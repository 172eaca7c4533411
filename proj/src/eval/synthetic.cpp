#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "slicenet/eval.hpp"

namespace slicenet {

namespace {

constexpr double kBackground = 100.0;
constexpr double kAdCdr[] = {0.5, 1.0, 2.0};

std::string subject_name(std::uint64_t seed, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "syn%llu-%04zu", static_cast<unsigned long long>(seed), i);
  return buf;
}

}  // namespace

Cohort generate_synthetic_cohort(const CohortParams& p) {
  if (p.n_subjects < 2 || p.n_subjects % 2 != 0)
    throw Error(ErrorCode::BadParams, "n_subjects must be a positive even number");
  if (p.dims.nx < 1 || p.dims.ny < 1 || p.dims.nz < 1) throw Error(ErrorCode::BadParams, "extents must be positive");
  if (!(p.class_gap > 0.0)) throw Error(ErrorCode::BadParams, "class_gap must be positive");
  if (!(p.noise >= 0.0)) throw Error(ErrorCode::BadParams, "noise must be non-negative");
  if (p.texture_family != 0 && p.texture_family != 1) throw Error(ErrorCode::BadParams, "texture_family is 0 or 1");

  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Dims& d = p.dims;
  const double sigma_z = std::max(1.0, static_cast<double>(d.nz) / 8.0);

  Cohort cohort;
  for (std::size_t i = 0; i < p.n_subjects; ++i) {
    const bool ad = i % 2 == 1;
    SubjectRecord rec;
    rec.subject_id = subject_name(p.seed, i);
    rec.cdr = ad ? kAdCdr[(i / 2) % 3] : 0.0;
    rec.label = label_from_cdr(rec.cdr);
    rec.volume_path = rec.subject_id + ".rvol";

    // Cycles across the slice: low band for HC, high band for AD.
    const double freq = ad ? 4.0 + 2.0 * unit(rng) : 1.0 + 1.0 * unit(rng);
    const double phase_x = two_pi * unit(rng);
    const double phase_y = two_pi * unit(rng);
    const double theta = std::numbers::pi * unit(rng);
    const double z_center = (static_cast<double>(d.nz) - 1.0) / 2.0 + (2.0 * unit(rng) - 1.0);

    std::vector<double> voxels(d.count());
    for (std::size_t z = 0; z < d.nz; ++z) {
      const double dz = (static_cast<double>(z) - z_center) / sigma_z;
      const double envelope = std::exp(-0.5 * dz * dz);
      for (std::size_t y = 0; y < d.ny; ++y) {
        const double v = static_cast<double>(y) / static_cast<double>(d.ny);
        for (std::size_t x = 0; x < d.nx; ++x) {
          const double u = static_cast<double>(x) / static_cast<double>(d.nx);
          double texture = 0.0;
          if (p.texture_family == 0) {
            texture = std::sin(two_pi * freq * u + phase_x) * std::sin(two_pi * freq * v + phase_y);
          } else {
            texture = std::cos(two_pi * freq * (u * std::cos(theta) + v * std::sin(theta)) + phase_x);
          }
          const double value = kBackground + p.class_gap * envelope * texture + p.noise * gauss(rng);
          voxels[x + d.nx * (y + d.ny * z)] = static_cast<float>(value);
        }
      }
    }
    cohort.volumes.emplace_back(d, std::move(voxels), rec.subject_id);
    cohort.records.push_back(std::move(rec));
  }
  return cohort;
}

}  // namespace slicenet
