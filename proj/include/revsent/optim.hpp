#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "revsent/tensor.hpp"

namespace revsent {

// Bias-corrected Adam with optional decoupled weight decay (weight_decay > 0
// gives the AdamW-style update) and an off-by-default global clip norm.
struct AdamConfig {
    real lr = real(1e-4);
    real beta1 = real(0.9);
    real beta2 = real(0.999);
    real eps = real(1e-8);
    real weight_decay = real(0);
    real clip_norm = real(0);  // 0 disables clipping
};

class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    void attach(const std::vector<Tensor>& params) {
        params_ = params;
        m_.clear();
        v_.clear();
        for (const auto& p : params_) {
            m_.emplace_back(p.size(), real(0));
            v_.emplace_back(p.size(), real(0));
        }
        t_ = 0;
    }

    int step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

    void zero_grad() {
        for (auto& p : params_) p.zero_grad();
    }

    void step() {
        for (std::size_t k = 0; k < params_.size(); ++k) {
            const auto& g = params_[k].grad();
            for (real gv : g)
                if (!std::isfinite(gv))
                    throw RevsentError("adam: non-finite gradient in parameter " + std::to_string(k) +
                                       " at step " + std::to_string(t_ + 1) + "; aborting update");
        }
        if (cfg_.clip_norm > 0) {
            double sq = 0;
            for (auto& p : params_)
                for (real gv : p.grad()) sq += double(gv) * double(gv);
            double norm = std::sqrt(sq);
            if (norm > double(cfg_.clip_norm)) {
                real s = real(double(cfg_.clip_norm) / norm);
                for (auto& p : params_)
                    for (auto& gv : p.grad()) gv *= s;
            }
        }
        ++t_;
        const real bc1 = real(1) - std::pow(cfg_.beta1, real(t_));
        const real bc2 = real(1) - std::pow(cfg_.beta2, real(t_));
        for (std::size_t k = 0; k < params_.size(); ++k) {
            auto& p = params_[k].data();
            const auto& g = params_[k].grad();
            auto& m = m_[k];
            auto& v = v_[k];
            for (std::size_t i = 0; i < p.size(); ++i) {
                m[i] = cfg_.beta1 * m[i] + (real(1) - cfg_.beta1) * g[i];
                v[i] = cfg_.beta2 * v[i] + (real(1) - cfg_.beta2) * g[i] * g[i];
                const real mhat = m[i] / bc1;
                const real vhat = v[i] / bc2;
                p[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
                if (cfg_.weight_decay > 0) p[i] -= cfg_.lr * cfg_.weight_decay * p[i];
            }
        }
    }

private:
    AdamConfig cfg_;
    std::vector<Tensor> params_;
    std::vector<std::vector<real>> m_, v_;
    int t_ = 0;
};

}  // namespace revsent
