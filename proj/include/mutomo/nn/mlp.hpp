#pragma once

#include <string>
#include <vector>

#include "mutomo/nn/init.hpp"
#include "mutomo/nn/ops.hpp"

namespace mutomo::nn {

// Dense MLP applied rowwise (rows = events or voxels), GELU between layers,
// linear output. A two-entry width list degenerates to one linear layer.
template <typename T>
struct Mlp {
    std::vector<int> widths;
    std::vector<Param<T>> W;
    std::vector<Param<T>> b;

    struct Cache {
        std::vector<MatrixR<T>> inputs;  // input to each layer
        std::vector<MatrixR<T>> pre;     // pre-activation of each hidden layer
    };

    void build(const std::string& prefix, const std::vector<int>& widths_in) {
        if (widths_in.size() < 2) throw std::invalid_argument("mlp: need at least two widths");
        widths = widths_in;
        const std::size_t layers = widths.size() - 1;
        W.resize(layers);
        b.resize(layers);
        for (std::size_t l = 0; l < layers; ++l) {
            W[l].resize(prefix + ".w" + std::to_string(l), {widths[l + 1], widths[l]});
            b[l].resize(prefix + ".b" + std::to_string(l), {widths[l + 1]});
        }
    }

    void init(std::uint64_t seed) {
        for (auto& p : W) init_weight(p, seed);
        for (auto& p : b) init_constant(p, 0.0);
    }

    int in_width() const { return widths.front(); }
    int out_width() const { return widths.back(); }

    MatrixR<T> forward(const MatrixR<T>& x, Cache* cache = nullptr) const {
        MatrixR<T> cur = x;
        if (cache) {
            cache->inputs.clear();
            cache->pre.clear();
        }
        for (std::size_t l = 0; l < W.size(); ++l) {
            if (cache) cache->inputs.push_back(cur);
            MapConstMatrix<T> Wm(W[l].w.data(), widths[l + 1], widths[l]);
            MapConstMatrix<T> bm(b[l].w.data(), 1, widths[l + 1]);
            MatrixR<T> z = cur * Wm.transpose();
            z.rowwise() += bm.row(0);
            if (l + 1 < W.size()) {
                if (cache) cache->pre.push_back(z);
                cur = z.unaryExpr([](T v) { return gelu_scalar(v); });
            } else {
                cur = std::move(z);
            }
        }
        return cur;
    }

    // Accumulates parameter gradients and returns the input gradient.
    MatrixR<T> backward(const Cache& cache, const MatrixR<T>& gout) {
        MatrixR<T> g = gout;
        for (std::size_t li = W.size(); li-- > 0;) {
            if (li + 1 < W.size()) {
                const MatrixR<T>& z = cache.pre[li];
                g = g.cwiseProduct(z.unaryExpr([](T v) { return gelu_grad_scalar(v); }));
            }
            MapConstMatrix<T> Wm(W[li].w.data(), widths[li + 1], widths[li]);
            MapMatrix<T> gWm(W[li].g.data(), widths[li + 1], widths[li]);
            MapMatrix<T> gbm(b[li].g.data(), 1, widths[li + 1]);
            gWm.noalias() += g.transpose() * cache.inputs[li];
            gbm.row(0) += g.colwise().sum();
            g = g * Wm;
        }
        return g;
    }

    std::vector<Param<T>*> params() {
        std::vector<Param<T>*> out;
        for (std::size_t l = 0; l < W.size(); ++l) {
            out.push_back(&W[l]);
            out.push_back(&b[l]);
        }
        return out;
    }
};

}  // namespace mutomo::nn
