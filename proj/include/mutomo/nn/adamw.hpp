#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mutomo/nn/tensor.hpp"

namespace mutomo::nn {

// Decoupled weight decay Adam (Loshchilov & Hutter).  Moments are kept in
// double regardless of the parameter scalar so long runs do not drift.
template <typename T>
class AdamW {
  public:
    struct Options {
        double lr = 2e-3;
        double weight_decay = 4e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
    };

    AdamW() = default;
    explicit AdamW(Options opt) : opt_(opt) {}

    const Options& options() const { return opt_; }
    Options& options() { return opt_; }
    std::uint64_t step_count() const { return step_; }

    void attach(const std::vector<Param<T>*>& params) {
        params_ = params;
        m_.assign(params_.size(), {});
        v_.assign(params_.size(), {});
        for (std::size_t i = 0; i < params_.size(); ++i) {
            m_[i].assign(params_[i]->w.size(), 0.0);
            v_[i].assign(params_[i]->w.size(), 0.0);
        }
        step_ = 0;
    }

    // One update from the accumulated gradients.  A non-finite gradient is a
    // training bug, not a recoverable state: abort loudly, naming the tensor.
    void step() {
        ++step_;
        const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(step_));
        const double decay = 1.0 - opt_.lr * opt_.weight_decay;
        for (std::size_t i = 0; i < params_.size(); ++i) {
            Param<T>& p = *params_[i];
            for (std::size_t k = 0; k < p.w.size(); ++k) {
                const double g = static_cast<double>(p.g[k]);
                if (!std::isfinite(g))
                    throw std::runtime_error("adamw: non-finite gradient in " + p.name +
                                             " at element " + std::to_string(k));
                double& m = m_[i][k];
                double& v = v_[i][k];
                m = opt_.beta1 * m + (1.0 - opt_.beta1) * g;
                v = opt_.beta2 * v + (1.0 - opt_.beta2) * g * g;
                const double mhat = m / bc1;
                const double vhat = v / bc2;
                const double w = static_cast<double>(p.w[k]) * decay -
                                 opt_.lr * mhat / (std::sqrt(vhat) + opt_.eps);
                p.w[k] = static_cast<T>(w);
            }
        }
    }

    // Moment access for checkpointing; order matches the attached registry.
    std::vector<std::vector<double>>& first_moments() { return m_; }
    std::vector<std::vector<double>>& second_moments() { return v_; }
    const std::vector<std::vector<double>>& first_moments() const { return m_; }
    const std::vector<std::vector<double>>& second_moments() const { return v_; }
    void set_step_count(std::uint64_t s) { step_ = s; }

  private:
    Options opt_;
    std::vector<Param<T>*> params_;
    std::vector<std::vector<double>> m_, v_;
    std::uint64_t step_ = 0;
};

}  // namespace mutomo::nn
