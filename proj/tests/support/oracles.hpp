// Reference implementations used by the unit and acceptance tests. They are
// written from the definitions directly and share no code with the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "slicenet/layers.hpp"
#include "slicenet/model.hpp"
#include "slicenet/volume.hpp"

namespace oracle {

using slicenet::Tensor;

// ---- entropy and ranking -------------------------------------------------

/// -sum p log p with p = c / total in long double. `log_fn` picks the base.
/// Counts are visited smallest first so equal multisets give equal sums.
inline long double entropy(std::vector<std::uint64_t> counts, bool natural_log = false) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) return 0.0L;
  std::sort(counts.begin(), counts.end());
  long double h = 0.0L;
  for (auto c : counts) {
    if (c == 0) continue;
    const long double p = static_cast<long double>(c) / static_cast<long double>(total);
    h -= p * (natural_log ? std::log(p) : std::log2(p));
  }
  return h < 0.0L ? 0.0L : h;
}

/// One pixel at a time: bin = floor((p - lo) / (hi - lo) * bins), clamped.
inline std::vector<std::uint64_t> histogram(const std::vector<double>& pixels, std::size_t bins, double lo,
                                            double hi) {
  std::vector<std::uint64_t> out(bins, 0);
  for (double p : pixels) {
    long long b = static_cast<long long>(std::floor((p - lo) * static_cast<double>(bins) / (hi - lo)));
    if (b < 0) b = 0;
    if (b >= static_cast<long long>(bins)) b = static_cast<long long>(bins) - 1;
    ++out[static_cast<std::size_t>(b)];
  }
  return out;
}

/// Pixels of the axial plane z, read voxel by voxel.
inline std::vector<double> axial_plane(const slicenet::Volume& v, std::size_t z) {
  std::vector<double> px;
  for (std::size_t y = 0; y < v.dims().ny; ++y)
    for (std::size_t x = 0; x < v.dims().nx; ++x) px.push_back(v.at(x, y, z));
  return px;
}

/// Exponent of every prime in prod(c^c), by trial division. Two histograms
/// with the same total have equal entropy exactly when these maps are equal.
inline std::map<std::uint64_t, std::uint64_t> count_power_factors(const std::vector<std::uint64_t>& counts) {
  std::map<std::uint64_t, std::uint64_t> f;
  for (std::uint64_t c : counts) {
    std::uint64_t r = c;
    for (std::uint64_t p = 2; p * p <= r; ++p)
      while (r % p == 0) {
        f[p] += c;
        r /= p;
      }
    if (r > 1) f[r] += c;
  }
  return f;
}

/// Score every axial slice over the volume-wide range, order by score
/// descending then index ascending, keep k. Exactly equal entropies are
/// recognised from the factor maps rather than from rounded scores.
inline std::vector<std::size_t> rank_axial(const slicenet::Volume& v, std::size_t k, std::size_t bins,
                                           bool natural_log = false) {
  double lo = v.voxels()[0], hi = v.voxels()[0];
  for (double x : v.voxels()) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const std::size_t nz = v.dims().nz;
  std::vector<double> score(nz, 0.0);
  std::vector<std::map<std::uint64_t, std::uint64_t>> key(nz);
  for (std::size_t z = 0; z < nz; ++z) {
    std::vector<std::uint64_t> counts{v.dims().nx * v.dims().ny};
    if (lo < hi) {
      counts = histogram(axial_plane(v, z), bins, lo, hi);
      score[z] = static_cast<double>(entropy(counts, natural_log));
    }
    key[z] = count_power_factors(counts);
  }
  auto before = [&](std::size_t a, std::size_t b) {
    if (key[a] == key[b] || score[a] == score[b]) return a < b;
    return score[a] > score[b];
  };
  std::vector<std::size_t> idx(nz);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < nz; ++i)  // selection sort, deliberately naive
    for (std::size_t j = i + 1; j < nz; ++j)
      if (before(idx[j], idx[i])) std::swap(idx[i], idx[j]);
  idx.resize(std::min(k, nz));
  return idx;
}

// ---- resize --------------------------------------------------------------

/// Half-pixel-center bilinear sample with clamped source coordinates.
inline std::vector<long double> resize(const std::vector<double>& in, std::size_t w, std::size_t h,
                                       std::size_t ow, std::size_t oh) {
  std::vector<long double> out(ow * oh);
  auto coord = [](std::size_t o, std::size_t n_in, std::size_t n_out) {
    long double s = (static_cast<long double>(o) + 0.5L) * static_cast<long double>(n_in) /
                        static_cast<long double>(n_out) - 0.5L;
    return std::clamp(s, 0.0L, static_cast<long double>(n_in - 1));
  };
  for (std::size_t r = 0; r < oh; ++r)
    for (std::size_t c = 0; c < ow; ++c) {
      const long double sy = coord(r, h, oh), sx = coord(c, w, ow);
      const auto y0 = static_cast<std::size_t>(std::floor(sy)), x0 = static_cast<std::size_t>(std::floor(sx));
      const std::size_t y1 = std::min(y0 + 1, h - 1), x1 = std::min(x0 + 1, w - 1);
      const long double fy = sy - y0, fx = sx - x0;
      auto px = [&](std::size_t y, std::size_t x) { return static_cast<long double>(in[y * w + x]); };
      out[r * ow + c] = (1 - fy) * ((1 - fx) * px(y0, x0) + fx * px(y0, x1)) + fy * ((1 - fx) * px(y1, x0) + fx * px(y1, x1));
    }
  return out;
}

// ---- layers --------------------------------------------------------------

/// Direct cross-correlation: out[o][i][j] = b[o] + sum_c sum_u sum_v w[o][c][u][v] * x[c][i*S+u-P][j*S+v-P].
template <typename T>
Tensor<T> conv(const Tensor<T>& x, const slicenet::Conv2D& L, const Tensor<T>& w, const Tensor<T>& b) {
  const long C = static_cast<long>(x.shape()[0]), H = static_cast<long>(x.shape()[1]), W = static_cast<long>(x.shape()[2]);
  const long O = static_cast<long>(L.out_channels), KH = static_cast<long>(L.kernel_h), KW = static_cast<long>(L.kernel_w);
  const long S = static_cast<long>(L.stride), P = static_cast<long>(L.padding);
  const long OH = (H + 2 * P - KH) / S + 1, OW = (W + 2 * P - KW) / S + 1;
  Tensor<T> y({static_cast<std::size_t>(O), static_cast<std::size_t>(OH), static_cast<std::size_t>(OW)});
  for (long o = 0; o < O; ++o)
    for (long i = 0; i < OH; ++i)
      for (long j = 0; j < OW; ++j) {
        long double acc = b[o];
        for (long c = 0; c < C; ++c)
          for (long u = 0; u < KH; ++u)
            for (long v = 0; v < KW; ++v) {
              const long r = i * S + u - P, q = j * S + v - P;
              if (r < 0 || r >= H || q < 0 || q >= W) continue;
              acc += static_cast<long double>(w[((o * C + c) * KH + u) * KW + v]) * x[(c * H + r) * W + q];
            }
        y[(o * OH + i) * OW + j] = static_cast<T>(acc);
      }
  return y;
}

template <typename T>
Tensor<T> maxpool(const Tensor<T>& x, const slicenet::MaxPool2D& L) {
  const std::size_t C = x.shape()[0], H = x.shape()[1], W = x.shape()[2];
  const std::size_t OH = (H - L.window) / L.stride + 1, OW = (W - L.window) / L.stride + 1;
  Tensor<T> y({C, OH, OW});
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < OH; ++i)
      for (std::size_t j = 0; j < OW; ++j) {
        T m = x[(c * H + i * L.stride) * W + j * L.stride];
        for (std::size_t u = 0; u < L.window; ++u)
          for (std::size_t v = 0; v < L.window; ++v) m = std::max(m, x[(c * H + i * L.stride + u) * W + j * L.stride + v]);
        y[(c * OH + i) * OW + j] = m;
      }
  return y;
}

template <typename T>
Tensor<T> dense(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  const std::size_t O = w.shape()[0], I = w.shape()[1];
  Tensor<T> y({O});
  for (std::size_t o = 0; o < O; ++o) {
    long double acc = b[o];
    for (std::size_t i = 0; i < I; ++i) acc += static_cast<long double>(w[o * I + i]) * x[i];
    y[o] = static_cast<T>(acc);
  }
  return y;
}

inline double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-8});
}

// ---- gradients -----------------------------------------------------------

inline double loss_of(const slicenet::Model<double>& m, const Tensor<double>& x, std::size_t label) {
  return slicenet::cross_entropy(slicenet::forward(m, x).probs(), label);
}

/// Largest relative error between backward() and central differences over
/// every parameter of the model.
inline double worst_gradient_error(slicenet::Model<double> model, const Tensor<double>& x, std::size_t label,
                                   double step = 1e-5) {
  const auto grads = slicenet::backward(model, x, label);
  double worst = 0.0;
  for (std::size_t layer : model.parametric_layers()) {
    for (int which = 0; which < 2; ++which) {
      auto& p = which == 0 ? model.params(layer).weight : model.params(layer).bias;
      const auto& g = which == 0 ? grads[layer].weight : grads[layer].bias;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double keep = p[i];
        p[i] = keep + step;
        const double up = loss_of(model, x, label);
        p[i] = keep - step;
        const double down = loss_of(model, x, label);
        p[i] = keep;
        worst = std::max(worst, rel_err(g[i], (up - down) / (2.0 * step)));
      }
    }
  }
  return worst;
}

// ---- softmax regression --------------------------------------------------

/// Multinomial logistic regression trained with mean mini-batch gradients in
/// a fixed sample order. Parameters: W [n x d] row-major, b [n].
struct SoftmaxRegression {
  std::size_t n = 0, d = 0;
  std::vector<double> W, b;
  std::vector<double> aW, ab;  // RMSProp accumulators

  std::vector<double> probs(const std::vector<double>& x) const {
    std::vector<double> z(n);
    for (std::size_t o = 0; o < n; ++o) {
      z[o] = b[o];
      for (std::size_t i = 0; i < d; ++i) z[o] += W[o * d + i] * x[i];
    }
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (auto& v : z) s += (v = std::exp(v - m));
    for (auto& v : z) v /= s;
    return z;
  }

  /// One update on samples [first, last). rmsprop selects the optimizer.
  void step(const std::vector<std::vector<double>>& xs, const std::vector<std::size_t>& ys, std::size_t first,
            std::size_t last, double lr, bool rmsprop, double rho = 0.9, double eps = 1e-8) {
    std::vector<double> gW(n * d, 0.0), gb(n, 0.0);
    for (std::size_t s = first; s < last; ++s) {
      const auto p = probs(xs[s]);
      for (std::size_t o = 0; o < n; ++o) {
        const double delta = p[o] - (o == ys[s] ? 1.0 : 0.0);
        gb[o] += delta;
        for (std::size_t i = 0; i < d; ++i) gW[o * d + i] += delta * xs[s][i];
      }
    }
    const double inv = 1.0 / static_cast<double>(last - first);
    auto apply = [&](std::vector<double>& w, std::vector<double>& g, std::vector<double>& a) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        g[i] *= inv;
        if (rmsprop) {
          a[i] = rho * a[i] + (1.0 - rho) * g[i] * g[i];
          w[i] -= lr * g[i] / (std::sqrt(a[i]) + eps);
        } else {
          w[i] -= lr * g[i];
        }
      }
    };
    if (aW.empty()) {
      aW.assign(n * d, 0.0);
      ab.assign(n, 0.0);
    }
    apply(W, gW, aW);
    apply(b, gb, ab);
  }
};

}  // namespace oracle
