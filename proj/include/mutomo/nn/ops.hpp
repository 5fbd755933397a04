#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mutomo/nn/tensor.hpp"

// Layer primitives with hand-derived backward passes. Every backward takes
// the upstream gradient and accumulates (+=) into parameter gradients, so a
// batch can share the same Param instances.
namespace mutomo::nn {

// ---------- pointwise (1x1x1) convolution: W is (out, in), b is (out) ----------

template <typename T>
Tensor4<T> pointwise_forward(const Tensor4<T>& x, const Param<T>& W, const Param<T>& b) {
    const int co = W.shape[0], ci = W.shape[1];
    if (ci != x.c) throw std::invalid_argument("pointwise: channel mismatch");
    Tensor4<T> y(x.nx, x.ny, x.nz, co);
    MapConstMatrix<T> Wm(W.w.data(), co, ci);
    MapConstMatrix<T> bm(b.w.data(), 1, co);
    y.mat().noalias() = x.mat() * Wm.transpose();
    y.mat().rowwise() += bm.row(0);
    return y;
}

template <typename T>
Tensor4<T> pointwise_backward(const Tensor4<T>& x, Param<T>& W, Param<T>& b,
                              const Tensor4<T>& gy) {
    const int co = W.shape[0], ci = W.shape[1];
    Tensor4<T> gx(x.nx, x.ny, x.nz, ci);
    MapConstMatrix<T> Wm(W.w.data(), co, ci);
    MapMatrix<T> gWm(W.g.data(), co, ci);
    MapMatrix<T> gbm(b.g.data(), 1, co);
    gx.mat().noalias() = gy.mat() * Wm;
    gWm.noalias() += gy.mat().transpose() * x.mat();
    gbm.row(0) += gy.mat().colwise().sum();
    return gx;
}

// ---------- depthwise 3D convolution, odd kernel, same padding ----------
// W is (c, k, k, k) indexed [((ch*k + dz)*k + dy)*k + dx], b is (c).

template <typename T>
Tensor4<T> depthwise_forward(const Tensor4<T>& x, const Param<T>& W, const Param<T>& b) {
    const int c = W.shape[0], k = W.shape[1], r = k / 2;
    if (c != x.c) throw std::invalid_argument("depthwise: channel mismatch");
    Tensor4<T> y(x.nx, x.ny, x.nz, c);
    for (int z = 0; z < x.nz; ++z)
        for (int yy = 0; yy < x.ny; ++yy)
            for (int xx = 0; xx < x.nx; ++xx)
                for (int ch = 0; ch < c; ++ch) {
                    T acc = b.w[ch];
                    for (int dz = -r; dz <= r; ++dz) {
                        const int sz = z + dz;
                        if (sz < 0 || sz >= x.nz) continue;
                        for (int dy = -r; dy <= r; ++dy) {
                            const int sy = yy + dy;
                            if (sy < 0 || sy >= x.ny) continue;
                            for (int dx = -r; dx <= r; ++dx) {
                                const int sx = xx + dx;
                                if (sx < 0 || sx >= x.nx) continue;
                                acc += W.w[((static_cast<std::size_t>(ch) * k + (dz + r)) * k +
                                            (dy + r)) * k + (dx + r)] * x.at(sx, sy, sz, ch);
                            }
                        }
                    }
                    y.at(xx, yy, z, ch) = acc;
                }
    return y;
}

template <typename T>
Tensor4<T> depthwise_backward(const Tensor4<T>& x, Param<T>& W, Param<T>& b,
                              const Tensor4<T>& gy) {
    const int c = W.shape[0], k = W.shape[1], r = k / 2;
    Tensor4<T> gx(x.nx, x.ny, x.nz, c);
    for (int z = 0; z < x.nz; ++z)
        for (int yy = 0; yy < x.ny; ++yy)
            for (int xx = 0; xx < x.nx; ++xx)
                for (int ch = 0; ch < c; ++ch) {
                    const T g = gy.at(xx, yy, z, ch);
                    b.g[ch] += g;
                    for (int dz = -r; dz <= r; ++dz) {
                        const int sz = z + dz;
                        if (sz < 0 || sz >= x.nz) continue;
                        for (int dy = -r; dy <= r; ++dy) {
                            const int sy = yy + dy;
                            if (sy < 0 || sy >= x.ny) continue;
                            for (int dx = -r; dx <= r; ++dx) {
                                const int sx = xx + dx;
                                if (sx < 0 || sx >= x.nx) continue;
                                const std::size_t wi =
                                    ((static_cast<std::size_t>(ch) * k + (dz + r)) * k +
                                     (dy + r)) * k + (dx + r);
                                W.g[wi] += g * x.at(sx, sy, sz, ch);
                                gx.at(sx, sy, sz, ch) += g * W.w[wi];
                            }
                        }
                    }
                }
    return gx;
}

// ---------- dense strided convolution, kernel 2, stride 2 ----------
// W is (out, in, 2, 2, 2) indexed [(((co*ci_n + ci)*2 + dz)*2 + dy)*2 + dx].

template <typename T>
Tensor4<T> downconv_forward(const Tensor4<T>& x, const Param<T>& W, const Param<T>& b) {
    const int co = W.shape[0], ci = W.shape[1];
    if (ci != x.c || x.nx % 2 || x.ny % 2 || x.nz % 2)
        throw std::invalid_argument("downconv: bad shape");
    Tensor4<T> y(x.nx / 2, x.ny / 2, x.nz / 2, co);
    for (int z = 0; z < y.nz; ++z)
        for (int yy = 0; yy < y.ny; ++yy)
            for (int xx = 0; xx < y.nx; ++xx)
                for (int o = 0; o < co; ++o) {
                    T acc = b.w[o];
                    for (int i = 0; i < ci; ++i)
                        for (int dz = 0; dz < 2; ++dz)
                            for (int dy = 0; dy < 2; ++dy)
                                for (int dx = 0; dx < 2; ++dx)
                                    acc += W.w[(((static_cast<std::size_t>(o) * ci + i) * 2 + dz) *
                                                2 + dy) * 2 + dx] *
                                           x.at(2 * xx + dx, 2 * yy + dy, 2 * z + dz, i);
                    y.at(xx, yy, z, o) = acc;
                }
    return y;
}

template <typename T>
Tensor4<T> downconv_backward(const Tensor4<T>& x, Param<T>& W, Param<T>& b,
                             const Tensor4<T>& gy) {
    const int co = W.shape[0], ci = W.shape[1];
    Tensor4<T> gx(x.nx, x.ny, x.nz, ci);
    for (int z = 0; z < gy.nz; ++z)
        for (int yy = 0; yy < gy.ny; ++yy)
            for (int xx = 0; xx < gy.nx; ++xx)
                for (int o = 0; o < co; ++o) {
                    const T g = gy.at(xx, yy, z, o);
                    b.g[o] += g;
                    for (int i = 0; i < ci; ++i)
                        for (int dz = 0; dz < 2; ++dz)
                            for (int dy = 0; dy < 2; ++dy)
                                for (int dx = 0; dx < 2; ++dx) {
                                    const std::size_t wi =
                                        (((static_cast<std::size_t>(o) * ci + i) * 2 + dz) * 2 +
                                         dy) * 2 + dx;
                                    W.g[wi] += g * x.at(2 * xx + dx, 2 * yy + dy, 2 * z + dz, i);
                                    gx.at(2 * xx + dx, 2 * yy + dy, 2 * z + dz, i) +=
                                        g * W.w[wi];
                                }
                }
    return gx;
}

// ---------- layer norm over channels, per voxel ----------

template <typename T>
struct LayerNormCache {
    Tensor4<T> xhat;
    std::vector<T> rstd;
};

template <typename T>
Tensor4<T> layernorm_forward(const Tensor4<T>& x, const Param<T>& gamma, const Param<T>& beta,
                             LayerNormCache<T>& cache, T eps = T(1e-6)) {
    const int c = x.c;
    Tensor4<T> y(x.nx, x.ny, x.nz, c);
    cache.xhat = Tensor4<T>(x.nx, x.ny, x.nz, c);
    cache.rstd.assign(x.voxels(), T(0));
    const std::size_t nv = x.voxels();
    for (std::size_t v = 0; v < nv; ++v) {
        const T* xv = x.v.data() + v * c;
        T mean = 0;
        for (int ch = 0; ch < c; ++ch) mean += xv[ch];
        mean /= T(c);
        T var = 0;
        for (int ch = 0; ch < c; ++ch) {
            const T d = xv[ch] - mean;
            var += d * d;
        }
        var /= T(c);
        const T rstd = T(1) / std::sqrt(var + eps);
        cache.rstd[v] = rstd;
        T* hv = cache.xhat.v.data() + v * c;
        T* yv = y.v.data() + v * c;
        for (int ch = 0; ch < c; ++ch) {
            hv[ch] = (xv[ch] - mean) * rstd;
            yv[ch] = gamma.w[ch] * hv[ch] + beta.w[ch];
        }
    }
    return y;
}

template <typename T>
Tensor4<T> layernorm_backward(Param<T>& gamma, Param<T>& beta, const LayerNormCache<T>& cache,
                              const Tensor4<T>& gy) {
    const int c = gy.c;
    Tensor4<T> gx(gy.nx, gy.ny, gy.nz, c);
    const std::size_t nv = gy.voxels();
    for (std::size_t v = 0; v < nv; ++v) {
        const T* gv = gy.v.data() + v * c;
        const T* hv = cache.xhat.v.data() + v * c;
        T sum_g = 0, sum_gh = 0;
        for (int ch = 0; ch < c; ++ch) {
            const T gg = gv[ch] * gamma.w[ch];
            sum_g += gg;
            sum_gh += gg * hv[ch];
            gamma.g[ch] += gv[ch] * hv[ch];
            beta.g[ch] += gv[ch];
        }
        const T inv_c = T(1) / T(c);
        T* gxv = gx.v.data() + v * c;
        for (int ch = 0; ch < c; ++ch) {
            const T gg = gv[ch] * gamma.w[ch];
            gxv[ch] = (gg - sum_g * inv_c - hv[ch] * sum_gh * inv_c) * cache.rstd[v];
        }
    }
    return gx;
}

// ---------- exact GELU ----------

template <typename T>
T gelu_scalar(T x) {
    return T(0.5) * x * (T(1) + T(std::erf(static_cast<double>(x) / std::numbers::sqrt2)));
}

template <typename T>
T gelu_grad_scalar(T x) {
    const double xd = static_cast<double>(x);
    const double phi = std::exp(-0.5 * xd * xd) / std::sqrt(2.0 * std::numbers::pi);
    const double Phi = 0.5 * (1.0 + std::erf(xd / std::numbers::sqrt2));
    return T(Phi + xd * phi);
}

template <typename T>
Tensor4<T> gelu_forward(const Tensor4<T>& x) {
    Tensor4<T> y(x.nx, x.ny, x.nz, x.c);
    for (std::size_t i = 0; i < x.size(); ++i) y.v[i] = gelu_scalar(x.v[i]);
    return y;
}

template <typename T>
Tensor4<T> gelu_backward(const Tensor4<T>& x, const Tensor4<T>& gy) {
    Tensor4<T> gx(x.nx, x.ny, x.nz, x.c);
    for (std::size_t i = 0; i < x.size(); ++i) gx.v[i] = gy.v[i] * gelu_grad_scalar(x.v[i]);
    return gx;
}

// ---------- per-channel layer scale ----------

template <typename T>
Tensor4<T> layer_scale_forward(const Tensor4<T>& x, const Param<T>& s) {
    Tensor4<T> y(x.nx, x.ny, x.nz, x.c);
    const std::size_t nv = x.voxels();
    for (std::size_t v = 0; v < nv; ++v)
        for (int ch = 0; ch < x.c; ++ch) y.v[v * x.c + ch] = s.w[ch] * x.v[v * x.c + ch];
    return y;
}

template <typename T>
Tensor4<T> layer_scale_backward(const Tensor4<T>& x, Param<T>& s, const Tensor4<T>& gy) {
    Tensor4<T> gx(x.nx, x.ny, x.nz, x.c);
    const std::size_t nv = x.voxels();
    for (std::size_t v = 0; v < nv; ++v)
        for (int ch = 0; ch < x.c; ++ch) {
            gx.v[v * x.c + ch] = s.w[ch] * gy.v[v * x.c + ch];
            s.g[ch] += gy.v[v * x.c + ch] * x.v[v * x.c + ch];
        }
    return gx;
}

// ---------- nearest-neighbor 2x upsample ----------

template <typename T>
Tensor4<T> upsample_forward(const Tensor4<T>& x) {
    Tensor4<T> y(2 * x.nx, 2 * x.ny, 2 * x.nz, x.c);
    for (int z = 0; z < y.nz; ++z)
        for (int yy = 0; yy < y.ny; ++yy)
            for (int xx = 0; xx < y.nx; ++xx)
                for (int ch = 0; ch < x.c; ++ch)
                    y.at(xx, yy, z, ch) = x.at(xx / 2, yy / 2, z / 2, ch);
    return y;
}

template <typename T>
Tensor4<T> upsample_backward(const Tensor4<T>& x, const Tensor4<T>& gy) {
    Tensor4<T> gx(x.nx, x.ny, x.nz, x.c);
    for (int z = 0; z < gy.nz; ++z)
        for (int yy = 0; yy < gy.ny; ++yy)
            for (int xx = 0; xx < gy.nx; ++xx)
                for (int ch = 0; ch < x.c; ++ch)
                    gx.at(xx / 2, yy / 2, z / 2, ch) += gy.at(xx, yy, z, ch);
    return gx;
}

// ---------- channel concatenation ----------

template <typename T>
Tensor4<T> concat_channels(const Tensor4<T>& a, const Tensor4<T>& b) {
    if (a.nx != b.nx || a.ny != b.ny || a.nz != b.nz)
        throw std::invalid_argument("concat: spatial mismatch");
    Tensor4<T> y(a.nx, a.ny, a.nz, a.c + b.c);
    const std::size_t nv = a.voxels();
    for (std::size_t v = 0; v < nv; ++v) {
        T* yv = y.v.data() + v * static_cast<std::size_t>(y.c);
        const T* av = a.v.data() + v * static_cast<std::size_t>(a.c);
        const T* bv = b.v.data() + v * static_cast<std::size_t>(b.c);
        for (int ch = 0; ch < a.c; ++ch) yv[ch] = av[ch];
        for (int ch = 0; ch < b.c; ++ch) yv[a.c + ch] = bv[ch];
    }
    return y;
}

template <typename T>
void split_channels(const Tensor4<T>& gy, Tensor4<T>& ga, Tensor4<T>& gb) {
    const std::size_t nv = gy.voxels();
    for (std::size_t v = 0; v < nv; ++v) {
        const T* yv = gy.v.data() + v * static_cast<std::size_t>(gy.c);
        T* av = ga.v.data() + v * static_cast<std::size_t>(ga.c);
        T* bv = gb.v.data() + v * static_cast<std::size_t>(gb.c);
        for (int ch = 0; ch < ga.c; ++ch) av[ch] = yv[ch];
        for (int ch = 0; ch < gb.c; ++ch) bv[ch] = yv[ga.c + ch];
    }
}

// ---------- non-negativity clamp ----------

template <typename T>
Tensor4<T> clamp_forward(const Tensor4<T>& x) {
    Tensor4<T> y(x.nx, x.ny, x.nz, x.c);
    for (std::size_t i = 0; i < x.size(); ++i) y.v[i] = x.v[i] > T(0) ? x.v[i] : T(0);
    return y;
}

template <typename T>
Tensor4<T> clamp_backward(const Tensor4<T>& x, const Tensor4<T>& gy) {
    Tensor4<T> gx(x.nx, x.ny, x.nz, x.c);
    for (std::size_t i = 0; i < x.size(); ++i) gx.v[i] = x.v[i] > T(0) ? gy.v[i] : T(0);
    return gx;
}

// ---------- voxelwise mean squared error ----------

template <typename T>
T mse_loss(const Tensor4<T>& pred, const Tensor4<T>& target, Tensor4<T>& grad) {
    if (!pred.same_shape(target)) throw std::invalid_argument("mse: shape mismatch");
    grad = Tensor4<T>(pred.nx, pred.ny, pred.nz, pred.c);
    const T scale = T(1) / T(pred.size());
    T loss = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const T d = pred.v[i] - target.v[i];
        loss += d * d * scale;
        grad.v[i] = T(2) * d * scale;
    }
    return loss;
}

}  // namespace mutomo::nn
