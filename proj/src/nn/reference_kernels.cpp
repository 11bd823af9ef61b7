// Copyright (c) 2026 The gridvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "gridvid/nn/reference_kernels.hpp"

#include <algorithm>
#include <cmath>

namespace gridvid::nn::reference {

Tensor conv2d_forward(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                      int pad) {
  const int k = weight.h();
  const int ho = (x.h() + 2 * pad - k) / stride + 1;
  const int wo = (x.w() + 2 * pad - k) / stride + 1;
  Tensor y(x.n(), weight.n(), ho, wo);
  for (int n = 0; n < x.n(); ++n) {
    for (int co = 0; co < weight.n(); ++co) {
      for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
          double acc = bias[co];
          for (int ci = 0; ci < x.c(); ++ci) {
            for (int ky = 0; ky < k; ++ky) {
              for (int kx = 0; kx < k; ++kx) {
                const int iy = oy * stride - pad + ky;
                const int ix = ox * stride - pad + kx;
                if (iy < 0 || iy >= x.h() || ix < 0 || ix >= x.w()) continue;
                acc += static_cast<double>(weight.at(co, ci, ky, kx)) * x.at(n, ci, iy, ix);
              }
            }
          }
          y.at(n, co, oy, ox) = static_cast<float>(acc);
        }
      }
    }
  }
  return y;
}

void conv2d_backward(const Tensor& x, const Tensor& weight, const Tensor& grad_y, int stride,
                     int pad, Tensor* grad_x, Tensor& grad_weight, Tensor& grad_bias) {
  const int k = weight.h();
  if (grad_x != nullptr) *grad_x = Tensor(x.n(), x.c(), x.h(), x.w());
  for (int n = 0; n < x.n(); ++n) {
    for (int co = 0; co < weight.n(); ++co) {
      for (int oy = 0; oy < grad_y.h(); ++oy) {
        for (int ox = 0; ox < grad_y.w(); ++ox) {
          const float g = grad_y.at(n, co, oy, ox);
          grad_bias[co] += g;
          for (int ci = 0; ci < x.c(); ++ci) {
            for (int ky = 0; ky < k; ++ky) {
              for (int kx = 0; kx < k; ++kx) {
                const int iy = oy * stride - pad + ky;
                const int ix = ox * stride - pad + kx;
                if (iy < 0 || iy >= x.h() || ix < 0 || ix >= x.w()) continue;
                grad_weight.at(co, ci, ky, kx) += g * x.at(n, ci, iy, ix);
                if (grad_x != nullptr) grad_x->at(n, ci, iy, ix) += g * weight.at(co, ci, ky, kx);
              }
            }
          }
        }
      }
    }
  }
}

Tensor group_norm_forward(const Tensor& x, const Tensor& gamma, const Tensor& beta, int groups,
                          float eps) {
  const int cpg = x.c() / groups;
  Tensor y(x.n(), x.c(), x.h(), x.w());
  for (int n = 0; n < x.n(); ++n) {
    for (int g = 0; g < groups; ++g) {
      double mean = 0.0;
      int count = 0;
      for (int c = g * cpg; c < (g + 1) * cpg; ++c) {
        for (int i = 0; i < x.h(); ++i) {
          for (int j = 0; j < x.w(); ++j) {
            mean += x.at(n, c, i, j);
            ++count;
          }
        }
      }
      mean /= count;
      double var = 0.0;
      for (int c = g * cpg; c < (g + 1) * cpg; ++c) {
        for (int i = 0; i < x.h(); ++i) {
          for (int j = 0; j < x.w(); ++j) var += (x.at(n, c, i, j) - mean) * (x.at(n, c, i, j) - mean);
        }
      }
      var /= count;
      for (int c = g * cpg; c < (g + 1) * cpg; ++c) {
        for (int i = 0; i < x.h(); ++i) {
          for (int j = 0; j < x.w(); ++j) {
            y.at(n, c, i, j) = static_cast<float>((x.at(n, c, i, j) - mean) / std::sqrt(var + eps) *
                                                      gamma[c] + beta[c]);
          }
        }
      }
    }
  }
  return y;
}

// Backward by explicit Jacobian-vector products over each group.
Tensor group_norm_backward(const Tensor& x, const Tensor& gamma, const Tensor& grad_y, int groups,
                           float eps, Tensor& grad_gamma, Tensor& grad_beta) {
  const int cpg = x.c() / groups;
  const int plane = x.h() * x.w();
  const int m = cpg * plane;
  Tensor gx(x.n(), x.c(), x.h(), x.w());
  for (int n = 0; n < x.n(); ++n) {
    for (int g = 0; g < groups; ++g) {
      std::vector<double> v(m), dy(m), gam(m);
      for (int cc = 0; cc < cpg; ++cc) {
        for (int i = 0; i < plane; ++i) {
          const int c = g * cpg + cc;
          v[cc * plane + i] = x.at(n, c, i / x.w(), i % x.w());
          dy[cc * plane + i] = grad_y.at(n, c, i / x.w(), i % x.w());
          gam[cc * plane + i] = gamma[c];
        }
      }
      double mean = 0.0;
      for (double a : v) mean += a;
      mean /= m;
      double var = 0.0;
      for (double a : v) var += (a - mean) * (a - mean);
      var /= m;
      const double sd = std::sqrt(var + eps);
      for (int cc = 0; cc < cpg; ++cc) {
        for (int i = 0; i < plane; ++i) {
          const int idx = cc * plane + i;
          const int c = g * cpg + cc;
          grad_gamma[c] += static_cast<float>(dy[idx] * (v[idx] - mean) / sd);
          grad_beta[c] += static_cast<float>(dy[idx]);
        }
      }
      // d y_j / d x_i = gamma_j * ((i==j) - 1/m - xhat_i xhat_j / m) / sd
      for (int i = 0; i < m; ++i) {
        const double xi = (v[i] - mean) / sd;
        double acc = 0.0;
        for (int j = 0; j < m; ++j) {
          const double xj = (v[j] - mean) / sd;
          const double jac = ((i == j ? 1.0 : 0.0) - 1.0 / m - xi * xj / m) / sd;
          acc += dy[j] * gam[j] * jac;
        }
        const int cc = i / plane;
        const int p = i % plane;
        gx.at(n, g * cpg + cc, p / x.w(), p % x.w()) = static_cast<float>(acc);
      }
    }
  }
  return gx;
}

namespace {

// Softmax attention weights for sample n as a dense (P x P) table.
std::vector<double> attention_probs(const Tensor& qkv, int n) {
  const int c = qkv.c() / 3;
  const int p = qkv.h() * qkv.w();
  const double scale = 1.0 / std::sqrt(static_cast<double>(c));
  std::vector<double> a(static_cast<std::size_t>(p) * p);
  for (int i = 0; i < p; ++i) {
    double mx = -1e300;
    for (int j = 0; j < p; ++j) {
      double s = 0.0;
      for (int ch = 0; ch < c; ++ch) {
        s += static_cast<double>(qkv.sample(n)[ch * p + i]) * qkv.sample(n)[(c + ch) * p + j];
      }
      a[i * p + j] = s * scale;
      mx = std::max(mx, a[i * p + j]);
    }
    double z = 0.0;
    for (int j = 0; j < p; ++j) {
      a[i * p + j] = std::exp(a[i * p + j] - mx);
      z += a[i * p + j];
    }
    for (int j = 0; j < p; ++j) a[i * p + j] /= z;
  }
  return a;
}

}  // namespace

Tensor attention_forward(const Tensor& qkv) {
  const int c = qkv.c() / 3;
  const int p = qkv.h() * qkv.w();
  Tensor out(qkv.n(), c, qkv.h(), qkv.w());
  for (int n = 0; n < qkv.n(); ++n) {
    const std::vector<double> a = attention_probs(qkv, n);
    for (int ch = 0; ch < c; ++ch) {
      for (int i = 0; i < p; ++i) {
        double acc = 0.0;
        for (int j = 0; j < p; ++j) acc += a[i * p + j] * qkv.sample(n)[(2 * c + ch) * p + j];
        out.sample(n)[ch * p + i] = static_cast<float>(acc);
      }
    }
  }
  return out;
}

Tensor attention_backward(const Tensor& qkv, const Tensor& grad_out) {
  const int c = qkv.c() / 3;
  const int p = qkv.h() * qkv.w();
  const double scale = 1.0 / std::sqrt(static_cast<double>(c));
  Tensor g(qkv.n(), qkv.c(), qkv.h(), qkv.w());
  for (int n = 0; n < qkv.n(); ++n) {
    const float* s = qkv.sample(n);
    const float* go = grad_out.sample(n);
    float* gs = g.sample(n);
    const std::vector<double> a = attention_probs(qkv, n);
    for (int i = 0; i < p; ++i) {
      std::vector<double> da(p, 0.0);
      for (int j = 0; j < p; ++j) {
        for (int ch = 0; ch < c; ++ch) {
          da[j] += static_cast<double>(go[ch * p + i]) * s[(2 * c + ch) * p + j];
          gs[(2 * c + ch) * p + j] += static_cast<float>(a[i * p + j] * go[ch * p + i]);
        }
      }
      for (int j = 0; j < p; ++j) {
        // softmax Jacobian: d a_ij / d s_ik = a_ij (delta_jk - a_ik)
        double dsj = 0.0;
        for (int l = 0; l < p; ++l) {
          dsj += da[l] * a[i * p + l] * ((l == j ? 1.0 : 0.0) - a[i * p + j]);
        }
        for (int ch = 0; ch < c; ++ch) {
          gs[ch * p + i] += static_cast<float>(dsj * scale * s[(c + ch) * p + j]);
          gs[(c + ch) * p + j] += static_cast<float>(dsj * scale * s[ch * p + i]);
        }
      }
    }
  }
  return g;
}

}  // namespace gridvid::nn::reference
