#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

namespace mutomo::nn {

template <typename T>
using MatrixR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMatrix = Eigen::Map<MatrixR<T>>;
template <typename T>
using MapConstMatrix = Eigen::Map<const MatrixR<T>>;

// Dense 4D tensor, channels fastest, then x, y, z. Viewing the storage as a
// (voxels x channels) row-major matrix makes pointwise layers plain matmuls.
template <typename T>
struct Tensor4 {
    int nx = 0, ny = 0, nz = 0, c = 0;
    std::vector<T> v;

    Tensor4() = default;
    Tensor4(int nx_, int ny_, int nz_, int c_)
        : nx(nx_), ny(ny_), nz(nz_), c(c_),
          v(static_cast<std::size_t>(nx_) * ny_ * nz_ * c_, T(0)) {}

    std::size_t idx(int x, int y, int z, int ch) const {
        return static_cast<std::size_t>(ch) +
               static_cast<std::size_t>(c) *
                   (static_cast<std::size_t>(x) +
                    static_cast<std::size_t>(nx) *
                        (static_cast<std::size_t>(y) + static_cast<std::size_t>(ny) * z));
    }
    T& at(int x, int y, int z, int ch) { return v[idx(x, y, z, ch)]; }
    T at(int x, int y, int z, int ch) const { return v[idx(x, y, z, ch)]; }

    std::size_t size() const { return v.size(); }
    std::size_t voxels() const { return static_cast<std::size_t>(nx) * ny * nz; }
    bool same_shape(const Tensor4& o) const {
        return nx == o.nx && ny == o.ny && nz == o.nz && c == o.c;
    }
    void zero() { std::fill(v.begin(), v.end(), T(0)); }

    MapMatrix<T> mat() { return MapMatrix<T>(v.data(), static_cast<Eigen::Index>(voxels()), c); }
    MapConstMatrix<T> mat() const {
        return MapConstMatrix<T>(v.data(), static_cast<Eigen::Index>(voxels()), c);
    }
};

// One trainable array plus its gradient accumulator, registered by name so
// the optimizer and checkpoints traverse parameters in a fixed order.
template <typename T>
struct Param {
    std::string name;
    std::vector<int> shape;
    std::vector<T> w;
    std::vector<T> g;

    void resize(std::string n, std::vector<int> s) {
        name = std::move(n);
        shape = std::move(s);
        std::size_t total = 1;
        for (int d : shape) total *= static_cast<std::size_t>(d);
        w.assign(total, T(0));
        g.assign(total, T(0));
    }
    std::size_t size() const { return w.size(); }
    void zero_grad() { std::fill(g.begin(), g.end(), T(0)); }
};

}  // namespace mutomo::nn
