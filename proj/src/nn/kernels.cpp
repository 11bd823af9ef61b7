// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridvid/nn/kernels.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gridvid/errors.hpp"

namespace gridvid::nn::kernels {

namespace {

using MatR = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapR = Eigen::Map<MatR>;
using CMapR = Eigen::Map<const MatR>;

// Calls fn(begin, count) on a contiguous share of [0, total) per thread.
template <class Fn>
void parallel_ranges(int total, Fn&& fn) {
#pragma omp parallel
  {
#ifdef _OPENMP
    const int tid = omp_get_thread_num();
    const int nt = omp_get_num_threads();
#else
    const int tid = 0;
    const int nt = 1;
#endif
    const int chunk = (total + nt - 1) / nt;
    const int begin = std::min(total, tid * chunk);
    const int end = std::min(total, begin + chunk);
    if (end > begin) fn(begin, end - begin);
  }
}

int out_extent(int in, int k, int stride, int pad) { return (in + 2 * pad - k) / stride + 1; }

// Rows: (ci, ky, kx); columns: (n, oy, ox).
std::vector<float> im2col(const Tensor& x, int k, int stride, int pad, int ho, int wo) {
  const int n_batch = x.n();
  const int cin = x.c();
  const std::size_t p = static_cast<std::size_t>(ho) * wo;
  const std::size_t cols = n_batch * p;
  std::vector<float> col(static_cast<std::size_t>(cin) * k * k * cols);
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < n_batch; ++n) {
    for (int ci = 0; ci < cin; ++ci) {
      const float* src = x.data() + x.index(n, ci, 0, 0);
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          float* dst = col.data() + ((static_cast<std::size_t>(ci) * k + ky) * k + kx) * cols + n * p;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * stride - pad + ky;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * stride - pad + kx;
              const bool inside = iy >= 0 && iy < x.h() && ix >= 0 && ix < x.w();
              dst[oy * wo + ox] = inside ? src[iy * x.w() + ix] : 0.0f;
            }
          }
        }
      }
    }
  }
  return col;
}

void col2im(const std::vector<float>& col, int k, int stride, int pad, int ho, int wo, Tensor& gx) {
  const int n_batch = gx.n();
  const int cin = gx.c();
  const std::size_t p = static_cast<std::size_t>(ho) * wo;
  const std::size_t cols = n_batch * p;
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < n_batch; ++n) {
    for (int ci = 0; ci < cin; ++ci) {
      float* dst = gx.data() + gx.index(n, ci, 0, 0);
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          const float* src = col.data() + ((static_cast<std::size_t>(ci) * k + ky) * k + kx) * cols + n * p;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * stride - pad + ky;
            if (iy < 0 || iy >= gx.h()) continue;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * stride - pad + kx;
              if (ix < 0 || ix >= gx.w()) continue;
              dst[iy * gx.w() + ix] += src[oy * wo + ox];
            }
          }
        }
      }
    }
  }
}

void check_conv(const Tensor& x, const Tensor& weight, int stride, int pad) {
  if (weight.c() != x.c()) {
    throw DimensionError("conv2d: input has " + std::to_string(x.c()) +
                         " channels, weight expects " + std::to_string(weight.c()));
  }
  if (weight.h() != weight.w() || stride < 1 || pad < 0) {
    throw DomainError("conv2d: unsupported kernel geometry");
  }
}

}  // namespace

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

Tensor conv2d_forward(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                      int pad) {
  check_conv(x, weight, stride, pad);
  const int k = weight.h();
  const int cout = weight.n();
  const int ho = out_extent(x.h(), k, stride, pad);
  const int wo = out_extent(x.w(), k, stride, pad);
  const int rows = x.c() * k * k;
  const std::size_t p = static_cast<std::size_t>(ho) * wo;
  const int cols = static_cast<int>(x.n() * p);

  const std::vector<float> col = im2col(x, k, stride, pad, ho, wo);
  std::vector<float> ymat(static_cast<std::size_t>(cout) * cols);
  CMapR w(weight.data(), cout, rows);
  CMapR c(col.data(), rows, cols);
  MapR y(ymat.data(), cout, cols);
  parallel_ranges(cols, [&](int begin, int count) {
    y.middleCols(begin, count).noalias() = w * c.middleCols(begin, count);
  });

  Tensor out(x.n(), cout, ho, wo);
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < x.n(); ++n) {
    for (int co = 0; co < cout; ++co) {
      const float* src = ymat.data() + static_cast<std::size_t>(co) * cols + n * p;
      float* dst = out.data() + out.index(n, co, 0, 0);
      const float b = bias[co];
      for (std::size_t i = 0; i < p; ++i) dst[i] = src[i] + b;
    }
  }
  return out;
}

void conv2d_backward(const Tensor& x, const Tensor& weight, const Tensor& grad_y, int stride,
                     int pad, Tensor* grad_x, Tensor& grad_weight, Tensor& grad_bias) {
  check_conv(x, weight, stride, pad);
  const int k = weight.h();
  const int cout = weight.n();
  const int ho = grad_y.h();
  const int wo = grad_y.w();
  const int rows = x.c() * k * k;
  const std::size_t p = static_cast<std::size_t>(ho) * wo;
  const int cols = static_cast<int>(x.n() * p);

  std::vector<float> gmat(static_cast<std::size_t>(cout) * cols);
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < x.n(); ++n) {
    for (int co = 0; co < cout; ++co) {
      std::copy_n(grad_y.data() + grad_y.index(n, co, 0, 0), p,
                  gmat.data() + static_cast<std::size_t>(co) * cols + n * p);
    }
  }

  const std::vector<float> col = im2col(x, k, stride, pad, ho, wo);
  CMapR g(gmat.data(), cout, cols);
  CMapR c(col.data(), rows, cols);
  MapR gw(grad_weight.data(), cout, rows);
  parallel_ranges(cout, [&](int begin, int count) {
    gw.middleRows(begin, count).noalias() += g.middleRows(begin, count) * c.transpose();
    for (int co = begin; co < begin + count; ++co) grad_bias[co] += g.row(co).sum();
  });

  if (grad_x != nullptr) {
    std::vector<float> gcol(static_cast<std::size_t>(rows) * cols);
    CMapR w(weight.data(), cout, rows);
    MapR gc(gcol.data(), rows, cols);
    parallel_ranges(cols, [&](int begin, int count) {
      gc.middleCols(begin, count).noalias() = w.transpose() * g.middleCols(begin, count);
    });
    *grad_x = Tensor(x.n(), x.c(), x.h(), x.w());
    col2im(gcol, k, stride, pad, ho, wo, *grad_x);
  }
}

Tensor group_norm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta, int groups,
                          float eps, GroupNormCache& cache) {
  if (groups < 1 || x.c() % groups != 0) throw DimensionError("group norm: channels not divisible by groups");
  const int cpg = x.c() / groups;
  const std::size_t m = cpg * x.plane();
  cache.mean.assign(static_cast<std::size_t>(x.n()) * groups, 0.0f);
  cache.rstd.assign(cache.mean.size(), 0.0f);
  Tensor y(x.n(), x.c(), x.h(), x.w());
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < x.n(); ++n) {
    for (int g = 0; g < groups; ++g) {
      const float* src = x.data() + x.index(n, g * cpg, 0, 0);
      double sum = 0.0;
      double sq = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        sum += src[i];
        sq += static_cast<double>(src[i]) * src[i];
      }
      const double mean = sum / m;
      const double var = std::max(0.0, sq / m - mean * mean);
      const float rstd = static_cast<float>(1.0 / std::sqrt(var + eps));
      cache.mean[n * groups + g] = static_cast<float>(mean);
      cache.rstd[n * groups + g] = rstd;
      float* dst = y.data() + y.index(n, g * cpg, 0, 0);
      for (int cc = 0; cc < cpg; ++cc) {
        const int ch = g * cpg + cc;
        const float a = gamma[ch] * rstd;
        const float b = beta[ch] - static_cast<float>(mean) * a;
        for (std::size_t i = 0; i < x.plane(); ++i) {
          dst[cc * x.plane() + i] = src[cc * x.plane() + i] * a + b;
        }
      }
    }
  }
  return y;
}

Tensor group_norm_backward(const Tensor& x, const Tensor& gamma, const Tensor& grad_y, int groups,
                           const GroupNormCache& cache, Tensor& grad_gamma, Tensor& grad_beta) {
  const int cpg = x.c() / groups;
  const std::size_t plane = x.plane();
  const std::size_t m = cpg * plane;

#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < x.c(); ++ch) {
    const int g = ch / cpg;
    double dg = 0.0;
    double db = 0.0;
    for (int n = 0; n < x.n(); ++n) {
      const float mean = cache.mean[n * groups + g];
      const float rstd = cache.rstd[n * groups + g];
      const float* xs = x.data() + x.index(n, ch, 0, 0);
      const float* gy = grad_y.data() + grad_y.index(n, ch, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) {
        dg += static_cast<double>(gy[i]) * (xs[i] - mean) * rstd;
        db += gy[i];
      }
    }
    grad_gamma[ch] += static_cast<float>(dg);
    grad_beta[ch] += static_cast<float>(db);
  }

  Tensor gx(x.n(), x.c(), x.h(), x.w());
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < x.n(); ++n) {
    for (int g = 0; g < groups; ++g) {
      const float mean = cache.mean[n * groups + g];
      const float rstd = cache.rstd[n * groups + g];
      double sum_dxhat = 0.0;
      double sum_dxhat_xhat = 0.0;
      for (int cc = 0; cc < cpg; ++cc) {
        const int ch = g * cpg + cc;
        const float* xs = x.data() + x.index(n, ch, 0, 0);
        const float* gy = grad_y.data() + grad_y.index(n, ch, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) {
          const double dxhat = static_cast<double>(gy[i]) * gamma[ch];
          sum_dxhat += dxhat;
          sum_dxhat_xhat += dxhat * (xs[i] - mean) * rstd;
        }
      }
      const double inv_m = 1.0 / static_cast<double>(m);
      for (int cc = 0; cc < cpg; ++cc) {
        const int ch = g * cpg + cc;
        const float* xs = x.data() + x.index(n, ch, 0, 0);
        const float* gy = grad_y.data() + grad_y.index(n, ch, 0, 0);
        float* dst = gx.data() + gx.index(n, ch, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) {
          const double xhat = (xs[i] - mean) * rstd;
          const double dxhat = static_cast<double>(gy[i]) * gamma[ch];
          dst[i] = static_cast<float>(rstd * (dxhat - inv_m * sum_dxhat - xhat * inv_m * sum_dxhat_xhat));
        }
      }
    }
  }
  return gx;
}

Tensor attention_forward(const Tensor& qkv, std::vector<float>& probs) {
  if (qkv.c() % 3 != 0) throw DimensionError("attention: qkv channels not divisible by 3");
  const int c = qkv.c() / 3;
  const int p = static_cast<int>(qkv.plane());
  const float scale = 1.0f / std::sqrt(static_cast<float>(c));
  probs.assign(static_cast<std::size_t>(qkv.n()) * p * p, 0.0f);
  Tensor out(qkv.n(), c, qkv.h(), qkv.w());
#pragma omp parallel for schedule(static)
  for (int n = 0; n < qkv.n(); ++n) {
    CMapR q(qkv.sample(n), c, p);
    CMapR k(qkv.sample(n) + static_cast<std::size_t>(c) * p, c, p);
    CMapR v(qkv.sample(n) + static_cast<std::size_t>(2 * c) * p, c, p);
    MapR a(probs.data() + static_cast<std::size_t>(n) * p * p, p, p);
    a.noalias() = scale * (q.transpose() * k);
    for (int i = 0; i < p; ++i) {
      const float mx = a.row(i).maxCoeff();
      a.row(i) = (a.row(i).array() - mx).exp().matrix();
      a.row(i) /= a.row(i).sum();
    }
    MapR o(out.sample(n), c, p);
    o.noalias() = v * a.transpose();
  }
  return out;
}

Tensor attention_backward(const Tensor& qkv, const std::vector<float>& probs,
                          const Tensor& grad_out) {
  const int c = qkv.c() / 3;
  const int p = static_cast<int>(qkv.plane());
  const float scale = 1.0f / std::sqrt(static_cast<float>(c));
  Tensor gqkv(qkv.n(), qkv.c(), qkv.h(), qkv.w());
#pragma omp parallel for schedule(static)
  for (int n = 0; n < qkv.n(); ++n) {
    CMapR q(qkv.sample(n), c, p);
    CMapR k(qkv.sample(n) + static_cast<std::size_t>(c) * p, c, p);
    CMapR v(qkv.sample(n) + static_cast<std::size_t>(2 * c) * p, c, p);
    CMapR a(probs.data() + static_cast<std::size_t>(n) * p * p, p, p);
    CMapR go(grad_out.sample(n), c, p);
    MapR gq(gqkv.sample(n), c, p);
    MapR gk(gqkv.sample(n) + static_cast<std::size_t>(c) * p, c, p);
    MapR gv(gqkv.sample(n) + static_cast<std::size_t>(2 * c) * p, c, p);
    gv.noalias() = go * a;
    MatR ga = go.transpose() * v;  // (p, p)
    MatR gs(p, p);
    for (int i = 0; i < p; ++i) {
      const float dot = (ga.row(i).array() * a.row(i).array()).sum();
      gs.row(i) = (a.row(i).array() * (ga.row(i).array() - dot)).matrix();
    }
    gs *= scale;
    gq.noalias() = k * gs.transpose();
    gk.noalias() = q * gs;
  }
  return gqkv;
}

Tensor silu_forward(const Tensor& x) {
  Tensor y(x.n(), x.c(), x.h(), x.w());
  const std::size_t size = x.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < size; ++i) {
    const float v = x[i];
    y[i] = v / (1.0f + std::exp(-v));
  }
  return y;
}

Tensor silu_backward(const Tensor& x, const Tensor& grad_y) {
  Tensor g(x.n(), x.c(), x.h(), x.w());
  const std::size_t size = x.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < size; ++i) {
    const float s = 1.0f / (1.0f + std::exp(-x[i]));
    g[i] = grad_y[i] * s * (1.0f + x[i] * (1.0f - s));
  }
  return g;
}

Tensor upsample2x_forward(const Tensor& x) {
  Tensor y(x.n(), x.c(), x.h() * 2, x.w() * 2);
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      for (int yy = 0; yy < y.h(); ++yy) {
        for (int xx = 0; xx < y.w(); ++xx) y.at(n, c, yy, xx) = x.at(n, c, yy / 2, xx / 2);
      }
    }
  }
  return y;
}

Tensor upsample2x_backward(const Tensor& grad_y) {
  Tensor g(grad_y.n(), grad_y.c(), grad_y.h() / 2, grad_y.w() / 2);
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < g.n(); ++n) {
    for (int c = 0; c < g.c(); ++c) {
      for (int yy = 0; yy < g.h(); ++yy) {
        for (int xx = 0; xx < g.w(); ++xx) {
          g.at(n, c, yy, xx) = grad_y.at(n, c, 2 * yy, 2 * xx) + grad_y.at(n, c, 2 * yy, 2 * xx + 1) +
                               grad_y.at(n, c, 2 * yy + 1, 2 * xx) +
                               grad_y.at(n, c, 2 * yy + 1, 2 * xx + 1);
        }
      }
    }
  }
  return g;
}

Tensor film_forward(const Tensor& x, const Tensor& film) {
  if (film.n() != x.n() || film.c() != 2 * x.c()) throw DimensionError("film: modulation shape mismatch");
  Tensor y(x.n(), x.c(), x.h(), x.w());
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      const float scale = 1.0f + film.at(n, c, 0, 0);
      const float shift = film.at(n, x.c() + c, 0, 0);
      const float* src = x.data() + x.index(n, c, 0, 0);
      float* dst = y.data() + y.index(n, c, 0, 0);
      for (std::size_t i = 0; i < x.plane(); ++i) dst[i] = src[i] * scale + shift;
    }
  }
  return y;
}

Tensor film_backward(const Tensor& x, const Tensor& film, const Tensor& grad_y, Tensor& grad_film) {
  Tensor gx(x.n(), x.c(), x.h(), x.w());
  grad_film = Tensor(film.n(), film.c(), 1, 1);
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      const float scale = 1.0f + film.at(n, c, 0, 0);
      const float* src = x.data() + x.index(n, c, 0, 0);
      const float* gy = grad_y.data() + grad_y.index(n, c, 0, 0);
      float* dst = gx.data() + gx.index(n, c, 0, 0);
      double gs = 0.0;
      double gb = 0.0;
      for (std::size_t i = 0; i < x.plane(); ++i) {
        dst[i] = gy[i] * scale;
        gs += static_cast<double>(gy[i]) * src[i];
        gb += gy[i];
      }
      grad_film.at(n, c, 0, 0) = static_cast<float>(gs);
      grad_film.at(n, x.c() + c, 0, 0) = static_cast<float>(gb);
    }
  }
  return gx;
}

Tensor linear_forward(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.c() * x.h() * x.w() != weight.c()) throw DimensionError("linear: input width mismatch");
  const int in = weight.c();
  const int out_dim = weight.n();
  Tensor y(x.n(), out_dim, 1, 1);
  CMapR xm(x.data(), x.n(), in);
  CMapR w(weight.data(), out_dim, in);
  MapR ym(y.data(), x.n(), out_dim);
  ym.noalias() = xm * w.transpose();
  for (int n = 0; n < x.n(); ++n) {
    for (int o = 0; o < out_dim; ++o) ym(n, o) += bias[o];
  }
  return y;
}

Tensor linear_backward(const Tensor& x, const Tensor& weight, const Tensor& grad_y,
                       Tensor& grad_weight, Tensor& grad_bias) {
  const int in = weight.c();
  const int out_dim = weight.n();
  CMapR xm(x.data(), x.n(), in);
  CMapR w(weight.data(), out_dim, in);
  CMapR gy(grad_y.data(), x.n(), out_dim);
  MapR gw(grad_weight.data(), out_dim, in);
  gw.noalias() += gy.transpose() * xm;
  for (int o = 0; o < out_dim; ++o) grad_bias[o] += gy.col(o).sum();
  Tensor gx(x.n(), x.c(), x.h(), x.w());
  MapR gxm(gx.data(), x.n(), in);
  gxm.noalias() = gy * w;
  return gx;
}

}  // namespace gridvid::nn::kernels
