#pragma once

#include <string>
#include <vector>

#include "mutomo/core.hpp"
#include "mutomo/nn/init.hpp"
#include "mutomo/nn/ops.hpp"

namespace mutomo::nn {

struct UNetConfig {
    std::vector<int> blocks{1, 1, 1};
    std::vector<int> channels{8, 16, 32};
    int in_channels = 8;
    int kernel = 3;  // depthwise kernel, odd
    std::string variant = "nano";

    int stages() const { return static_cast<int>(channels.size()); }

    void validate() const {
        if (blocks.size() != channels.size() || blocks.empty())
            throw ConfigError("unet: blocks/channels mismatch");
        for (std::size_t i = 0; i < blocks.size(); ++i)
            if (blocks[i] < 1 || channels[i] < 1) throw ConfigError("unet: entries must be >= 1");
        if (kernel < 1 || kernel % 2 == 0) throw ConfigError("unet: kernel must be odd");
        if (in_channels < 1) throw ConfigError("unet: in_channels must be >= 1");
    }

    // Input resolution must be divisible by 2^(stages-1).
    int resolution_divisor() const { return 1 << (stages() - 1); }

    std::string fingerprint() const {
        std::string s = "unet|" + variant + "|k" + std::to_string(kernel) + "|cin" +
                        std::to_string(in_channels) + "|B";
        for (int b : blocks) s += std::to_string(b) + ",";
        s += "|C";
        for (int ch : channels) s += std::to_string(ch) + ",";
        return s;
    }

    static UNetConfig named(const std::string& name, int in_channels = 0) {
        UNetConfig cfg;
        cfg.variant = name;
        if (name == "nano") {
            cfg.blocks = {1, 1, 1};
            cfg.channels = {8, 16, 32};
        } else if (name == "tiny") {
            cfg.blocks = {1, 2, 3, 4, 5};
            cfg.channels = {8, 16, 32, 64, 128};
        } else if (name == "base") {
            cfg.blocks = {1, 2, 4, 4, 6};
            cfg.channels = {16, 32, 64, 128, 256};
        } else if (name == "large") {
            cfg.blocks = {1, 2, 4, 6, 8};
            cfg.channels = {24, 48, 96, 192, 384};
        } else {
            throw ConfigError("unet: unknown variant '" + name + "'");
        }
        cfg.in_channels = in_channels > 0 ? in_channels : cfg.channels.front();
        return cfg;
    }
};

// y = x + scale * pw2(GELU(pw1(LN(dw(x)))))
template <typename T>
struct ConvNeXtBlock {
    int c = 0, k = 0;
    Param<T> dw_w, dw_b, ln_g, ln_b, pw1_w, pw1_b, pw2_w, pw2_b, scale;

    struct Cache {
        Tensor4<T> x, t2, t3, t4, t5;
        LayerNormCache<T> ln;
    };

    void build(const std::string& prefix, int channels, int kernel) {
        c = channels;
        k = kernel;
        dw_w.resize(prefix + ".dw.w", {c, k, k, k});
        dw_b.resize(prefix + ".dw.b", {c});
        ln_g.resize(prefix + ".ln.g", {c});
        ln_b.resize(prefix + ".ln.b", {c});
        pw1_w.resize(prefix + ".pw1.w", {4 * c, c});
        pw1_b.resize(prefix + ".pw1.b", {4 * c});
        pw2_w.resize(prefix + ".pw2.w", {c, 4 * c});
        pw2_b.resize(prefix + ".pw2.b", {c});
        scale.resize(prefix + ".scale", {c});
    }

    void init(std::uint64_t seed) {
        init_weight(dw_w, seed);
        init_constant(dw_b, 0.0);
        init_constant(ln_g, 1.0);
        init_constant(ln_b, 0.0);
        init_weight(pw1_w, seed);
        init_constant(pw1_b, 0.0);
        init_weight(pw2_w, seed);
        init_constant(pw2_b, 0.0);
        init_constant(scale, 1e-6);
    }

    Tensor4<T> forward(const Tensor4<T>& x, Cache* cache) {
        if (x.c != c) throw ConfigError("convnext block: channel mismatch");
        Cache local;
        Cache& cc = cache ? *cache : local;
        cc.x = x;
        const Tensor4<T> t1 = depthwise_forward(x, dw_w, dw_b);
        cc.t2 = layernorm_forward(t1, ln_g, ln_b, cc.ln);
        cc.t3 = pointwise_forward(cc.t2, pw1_w, pw1_b);
        cc.t4 = gelu_forward(cc.t3);
        cc.t5 = pointwise_forward(cc.t4, pw2_w, pw2_b);
        Tensor4<T> y = layer_scale_forward(cc.t5, scale);
        for (std::size_t i = 0; i < y.size(); ++i) y.v[i] += x.v[i];
        return y;
    }

    Tensor4<T> backward(const Cache& cc, const Tensor4<T>& gy) {
        const Tensor4<T> g5 = layer_scale_backward(cc.t5, scale, gy);
        const Tensor4<T> g4 = pointwise_backward(cc.t4, pw2_w, pw2_b, g5);
        const Tensor4<T> g3 = gelu_backward(cc.t3, g4);
        const Tensor4<T> g2 = pointwise_backward(cc.t2, pw1_w, pw1_b, g3);
        const Tensor4<T> g1 = layernorm_backward(ln_g, ln_b, cc.ln, g2);
        Tensor4<T> gx = depthwise_backward(cc.x, dw_w, dw_b, g1);
        for (std::size_t i = 0; i < gx.size(); ++i) gx.v[i] += gy.v[i];
        return gx;
    }

    void collect(std::vector<Param<T>*>& out) {
        for (Param<T>* p : {&dw_w, &dw_b, &ln_g, &ln_b, &pw1_w, &pw1_b, &pw2_w, &pw2_b, &scale})
            out.push_back(p);
    }
};

// Encoder/decoder with stride-2 downsampling, nearest-neighbor upsampling,
// concatenated skips, and a clamped single-channel head.
template <typename T>
struct UNet {
    UNetConfig cfg;
    Param<T> stem_w, stem_b;
    std::vector<std::vector<ConvNeXtBlock<T>>> enc;      // per stage
    std::vector<Param<T>> down_ln_g, down_ln_b, down_w, down_b;  // stage s -> s+1
    std::vector<Param<T>> up_w, up_b, up_ln_g, up_ln_b, merge_w, merge_b;  // decoder stage s
    std::vector<std::vector<ConvNeXtBlock<T>>> dec;
    Param<T> head_w, head_b;

    struct Cache {
        Tensor4<T> input;
        std::vector<std::vector<typename ConvNeXtBlock<T>::Cache>> enc_blocks;
        std::vector<Tensor4<T>> skip;           // encoder stage outputs
        std::vector<LayerNormCache<T>> down_ln;
        std::vector<Tensor4<T>> down_in;        // LN output feeding the strided conv
        std::vector<Tensor4<T>> up_in;          // decoder pointwise inputs
        std::vector<LayerNormCache<T>> up_ln;
        std::vector<Tensor4<T>> up_pre;         // LN output feeding the upsample
        std::vector<Tensor4<T>> merge_in;       // concatenated tensors
        std::vector<std::vector<typename ConvNeXtBlock<T>::Cache>> dec_blocks;
        Tensor4<T> head_in, head_pre;
    };

    void build(const UNetConfig& config) {
        config.validate();
        cfg = config;
        const int S = cfg.stages();
        stem_w.resize("unet.stem.w", {cfg.channels[0], cfg.in_channels});
        stem_b.resize("unet.stem.b", {cfg.channels[0]});
        enc.resize(S);
        for (int s = 0; s < S; ++s) {
            enc[s].resize(cfg.blocks[s]);
            for (int bi = 0; bi < cfg.blocks[s]; ++bi)
                enc[s][bi].build("unet.enc" + std::to_string(s) + ".block" + std::to_string(bi),
                                 cfg.channels[s], cfg.kernel);
        }
        down_ln_g.resize(S - 1);
        down_ln_b.resize(S - 1);
        down_w.resize(S - 1);
        down_b.resize(S - 1);
        for (int s = 0; s + 1 < S; ++s) {
            const std::string p = "unet.down" + std::to_string(s);
            down_ln_g[s].resize(p + ".ln.g", {cfg.channels[s]});
            down_ln_b[s].resize(p + ".ln.b", {cfg.channels[s]});
            down_w[s].resize(p + ".w", {cfg.channels[s + 1], cfg.channels[s], 2, 2, 2});
            down_b[s].resize(p + ".b", {cfg.channels[s + 1]});
        }
        up_w.resize(S - 1);
        up_b.resize(S - 1);
        up_ln_g.resize(S - 1);
        up_ln_b.resize(S - 1);
        merge_w.resize(S - 1);
        merge_b.resize(S - 1);
        dec.resize(S - 1);
        for (int s = 0; s + 1 < S; ++s) {
            const std::string p = "unet.dec" + std::to_string(s);
            up_w[s].resize(p + ".up.w", {cfg.channels[s], cfg.channels[s + 1]});
            up_b[s].resize(p + ".up.b", {cfg.channels[s]});
            up_ln_g[s].resize(p + ".ln.g", {cfg.channels[s]});
            up_ln_b[s].resize(p + ".ln.b", {cfg.channels[s]});
            merge_w[s].resize(p + ".merge.w", {cfg.channels[s], 2 * cfg.channels[s]});
            merge_b[s].resize(p + ".merge.b", {cfg.channels[s]});
            dec[s].resize(cfg.blocks[s]);
            for (int bi = 0; bi < cfg.blocks[s]; ++bi)
                dec[s][bi].build(p + ".block" + std::to_string(bi), cfg.channels[s], cfg.kernel);
        }
        head_w.resize("unet.head.w", {1, cfg.channels[0]});
        head_b.resize("unet.head.b", {1});
    }

    void init(std::uint64_t seed) {
        init_weight(stem_w, seed);
        init_constant(stem_b, 0.0);
        for (auto& stage : enc)
            for (auto& blk : stage) blk.init(seed);
        for (std::size_t s = 0; s < down_w.size(); ++s) {
            init_constant(down_ln_g[s], 1.0);
            init_constant(down_ln_b[s], 0.0);
            init_weight(down_w[s], seed);
            init_constant(down_b[s], 0.0);
        }
        for (std::size_t s = 0; s < up_w.size(); ++s) {
            init_weight(up_w[s], seed);
            init_constant(up_b[s], 0.0);
            init_constant(up_ln_g[s], 1.0);
            init_constant(up_ln_b[s], 0.0);
            init_weight(merge_w[s], seed);
            init_constant(merge_b[s], 0.0);
        }
        for (auto& stage : dec)
            for (auto& blk : stage) blk.init(seed);
        init_weight(head_w, seed);
        init_constant(head_b, 0.0);
    }

    Tensor4<T> forward(const Tensor4<T>& x, Cache* cache) {
        if (x.c != cfg.in_channels) throw ConfigError("unet: input channel mismatch");
        const int S = cfg.stages();
        const int div = cfg.resolution_divisor();
        if (x.nx % div || x.ny % div || x.nz % div)
            throw ConfigError("unet: resolution not divisible by stage count");

        Cache local;
        Cache& cc = cache ? *cache : local;
        cc.input = x;
        cc.enc_blocks.assign(S, {});
        cc.skip.assign(S - 1, {});
        cc.down_ln.assign(S - 1, {});
        cc.down_in.assign(S - 1, {});

        Tensor4<T> a = pointwise_forward(x, stem_w, stem_b);
        for (int s = 0; s < S; ++s) {
            cc.enc_blocks[s].resize(cfg.blocks[s]);
            for (int bi = 0; bi < cfg.blocks[s]; ++bi)
                a = enc[s][bi].forward(a, &cc.enc_blocks[s][bi]);
            if (s + 1 < S) {
                cc.skip[s] = a;
                const Tensor4<T> ln = layernorm_forward(a, down_ln_g[s], down_ln_b[s],
                                                        cc.down_ln[s]);
                cc.down_in[s] = ln;
                a = downconv_forward(ln, down_w[s], down_b[s]);
            }
        }

        cc.up_in.assign(S - 1, {});
        cc.up_ln.assign(S - 1, {});
        cc.up_pre.assign(S - 1, {});
        cc.merge_in.assign(S - 1, {});
        cc.dec_blocks.assign(S - 1, {});
        for (int s = S - 2; s >= 0; --s) {
            cc.up_in[s] = a;
            Tensor4<T> bup = pointwise_forward(a, up_w[s], up_b[s]);
            bup = layernorm_forward(bup, up_ln_g[s], up_ln_b[s], cc.up_ln[s]);
            cc.up_pre[s] = bup;
            bup = upsample_forward(bup);
            const Tensor4<T> m = concat_channels(bup, cc.skip[s]);
            cc.merge_in[s] = m;
            a = pointwise_forward(m, merge_w[s], merge_b[s]);
            cc.dec_blocks[s].resize(cfg.blocks[s]);
            for (int bi = 0; bi < cfg.blocks[s]; ++bi)
                a = dec[s][bi].forward(a, &cc.dec_blocks[s][bi]);
        }

        cc.head_in = a;
        cc.head_pre = pointwise_forward(a, head_w, head_b);
        return clamp_forward(cc.head_pre);
    }

    // Returns the gradient with respect to the input volume.
    Tensor4<T> backward(const Cache& cc, const Tensor4<T>& g_out) {
        const int S = cfg.stages();
        Tensor4<T> g = clamp_backward(cc.head_pre, g_out);
        g = pointwise_backward(cc.head_in, head_w, head_b, g);

        std::vector<Tensor4<T>> g_skip(S - 1);
        for (int s = 0; s + 1 < S; ++s) {
            for (int bi = cfg.blocks[s] - 1; bi >= 0; --bi)
                g = dec[s][bi].backward(cc.dec_blocks[s][bi], g);
            const Tensor4<T>& m = cc.merge_in[s];
            const Tensor4<T> gm = pointwise_backward(m, merge_w[s], merge_b[s], g);
            Tensor4<T> gb(m.nx, m.ny, m.nz, m.c / 2);
            g_skip[s] = Tensor4<T>(m.nx, m.ny, m.nz, m.c / 2);
            split_channels(gm, gb, g_skip[s]);
            gb = upsample_backward(cc.up_pre[s], gb);
            gb = layernorm_backward(up_ln_g[s], up_ln_b[s], cc.up_ln[s], gb);
            g = pointwise_backward(cc.up_in[s], up_w[s], up_b[s], gb);
        }

        for (int s = S - 1; s >= 0; --s) {
            if (s + 1 < S) {
                g = downconv_backward(cc.down_in[s], down_w[s], down_b[s], g);
                g = layernorm_backward(down_ln_g[s], down_ln_b[s], cc.down_ln[s], g);
                for (std::size_t i = 0; i < g.size(); ++i) g.v[i] += g_skip[s].v[i];
            }
            for (int bi = cfg.blocks[s] - 1; bi >= 0; --bi)
                g = enc[s][bi].backward(cc.enc_blocks[s][bi], g);
        }
        return pointwise_backward(cc.input, stem_w, stem_b, g);
    }

    std::vector<Param<T>*> params() {
        std::vector<Param<T>*> out{&stem_w, &stem_b};
        const int S = cfg.stages();
        for (int s = 0; s < S; ++s)
            for (auto& blk : enc[s]) blk.collect(out);
        for (int s = 0; s + 1 < S; ++s)
            for (Param<T>* p :
                 {&down_ln_g[s], &down_ln_b[s], &down_w[s], &down_b[s]})
                out.push_back(p);
        for (int s = 0; s + 1 < S; ++s) {
            for (Param<T>* p : {&up_w[s], &up_b[s], &up_ln_g[s], &up_ln_b[s], &merge_w[s],
                                &merge_b[s]})
                out.push_back(p);
            for (auto& blk : dec[s]) blk.collect(out);
        }
        out.push_back(&head_w);
        out.push_back(&head_b);
        return out;
    }

    std::size_t param_count() {
        std::size_t n = 0;
        for (Param<T>* p : params()) n += p->size();
        return n;
    }
};

}  // namespace mutomo::nn
