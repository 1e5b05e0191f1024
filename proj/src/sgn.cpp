#include "tsplab/sgn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include "tsplab/rng.hpp"

namespace tsplab {

namespace {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;
constexpr double kLossClamp = 1e-12;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd gather_cols(const MatrixXd& m, const std::vector<int>& idx) {
    MatrixXd out(m.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out.col(i) = m.col(idx[i]);
    return out;
}

// Per-channel softmax over consecutive groups of `group` columns.
MatrixXd group_softmax(const MatrixXd& logits, int group) {
    MatrixXd out(logits.rows(), logits.cols());
    const Eigen::Index groups = logits.cols() / group;
    for (Eigen::Index g = 0; g < groups; ++g) {
        auto block = logits.middleCols(g * group, group);
        VectorXd mx = block.rowwise().maxCoeff();
        MatrixXd ex = (block.colwise() - mx).array().exp();
        VectorXd denom = ex.rowwise().sum();
        out.middleCols(g * group, group) = ex.array().colwise() / denom.array();
    }
    return out;
}

// d(softmax)/d(logits) applied to an upstream gradient, same grouping.
MatrixXd group_softmax_backward(const MatrixXd& attn, const MatrixXd& dattn, int group) {
    MatrixXd out(attn.rows(), attn.cols());
    const Eigen::Index groups = attn.cols() / group;
    for (Eigen::Index g = 0; g < groups; ++g) {
        auto a = attn.middleCols(g * group, group);
        auto d = dattn.middleCols(g * group, group);
        VectorXd dot = (a.array() * d.array()).rowwise().sum();
        out.middleCols(g * group, group) = a.array() * (d.colwise() - dot).array();
    }
    return out;
}

// Scalar softmax over consecutive groups of a row vector of logits.
VectorXd scalar_group_softmax(const VectorXd& logits, int group) {
    VectorXd out(logits.size());
    const Eigen::Index groups = logits.size() / group;
    for (Eigen::Index g = 0; g < groups; ++g) {
        auto seg = logits.segment(g * group, group);
        double mx = seg.maxCoeff();
        VectorXd ex = (seg.array() - mx).exp();
        out.segment(g * group, group) = ex / ex.sum();
    }
    return out;
}

VectorXd scalar_group_softmax_backward(const VectorXd& beta, const VectorXd& dbeta, int group) {
    VectorXd out(beta.size());
    const Eigen::Index groups = beta.size() / group;
    for (Eigen::Index g = 0; g < groups; ++g) {
        auto b = beta.segment(g * group, group);
        auto d = dbeta.segment(g * group, group);
        double dot = b.dot(d);
        out.segment(g * group, group) = b.array() * (d.array() - dot);
    }
    return out;
}

struct BnParamsRef {
    const MatrixXd& scale;
    const MatrixXd& shift;
};

MatrixXd bn_forward(const MatrixXd& x, BnParamsRef p, SgnMode mode, MatrixXd& run_mean,
                    MatrixXd& run_var, SgnBnCache* cache) {
    const double m = static_cast<double>(x.cols());
    VectorXd mean, var;
    if (mode == SgnMode::train) {
        mean = x.rowwise().mean();
        MatrixXd centered = x.colwise() - mean;
        var = centered.array().square().rowwise().mean();
        run_mean.col(0) = (1.0 - kBnMomentum) * run_mean.col(0) + kBnMomentum * mean;
        run_var.col(0) = (1.0 - kBnMomentum) * run_var.col(0) + kBnMomentum * var;
        (void)m;
    } else {
        mean = run_mean.col(0);
        var = run_var.col(0);
    }
    VectorXd inv_std = (var.array() + kBnEps).rsqrt();
    MatrixXd xhat = (x.colwise() - mean).array().colwise() * inv_std.array();
    MatrixXd y = (xhat.array().colwise() * p.scale.col(0).array()).colwise() + p.shift.col(0).array();
    if (cache) {
        cache->xhat = std::move(xhat);
        cache->inv_std = std::move(inv_std);
        return y;
    }
    return y;
}

// Backward through train-mode batch statistics.
MatrixXd bn_backward(const MatrixXd& dy, const SgnBnCache& c, const MatrixXd& scale,
                     MatrixXd& gscale, MatrixXd& gshift) {
    const double m = static_cast<double>(dy.cols());
    gscale.col(0) += (dy.array() * c.xhat.array()).rowwise().sum().matrix();
    gshift.col(0) += dy.rowwise().sum();
    MatrixXd dxhat = dy.array().colwise() * scale.col(0).array();
    VectorXd s1 = dxhat.rowwise().sum();
    VectorXd s2 = (dxhat.array() * c.xhat.array()).rowwise().sum();
    MatrixXd dx = m * dxhat;
    dx.colwise() -= s1;
    dx -= (c.xhat.array().colwise() * s2.array()).matrix();
    dx = dx.array().colwise() * (c.inv_std.array() / m);
    return dx;
}

MatrixXd relu(const MatrixXd& x) { return x.cwiseMax(0.0); }
MatrixXd relu_mask(const MatrixXd& post) { return (post.array() > 0.0).cast<double>(); }

} // namespace

// ---------------------------------------------------------------------------
// Parameter plumbing
// ---------------------------------------------------------------------------

void visit_params(SgnParams& p, const std::function<void(const char*, MatrixXd&)>& fn) {
    fn("node_in.w", p.node_in_w);
    fn("node_in.b", p.node_in_b);
    fn("edge_in.w", p.edge_in_w);
    fn("edge_in.b", p.edge_in_b);
    for (auto& l : p.layers) {
        fn("layer.wa", l.wa);
        fn("layer.ws", l.ws);
        fn("layer.wn", l.wn);
        fn("layer.wr", l.wr);
        fn("layer.wf", l.wf);
        fn("layer.wt", l.wt);
        fn("layer.wo", l.wo);
        fn("layer.p", l.p);
        fn("layer.bn_node.scale", l.bn_node_scale);
        fn("layer.bn_node.shift", l.bn_node_shift);
        fn("layer.bn_edge.scale", l.bn_edge_scale);
        fn("layer.bn_edge.shift", l.bn_edge_shift);
    }
    for (SgnDecoderParams* d : {&p.edge_dec, &p.node_dec}) {
        fn("dec.w1", d->w1);
        fn("dec.b1", d->b1);
        fn("dec.w2", d->w2);
        fn("dec.b2", d->b2);
        fn("dec.head", d->head);
    }
}

std::vector<MatrixXd*> param_tensors(SgnParams& p) {
    std::vector<MatrixXd*> out;
    visit_params(p, [&](const char*, MatrixXd& m) { out.push_back(&m); });
    return out;
}

std::vector<const MatrixXd*> param_tensors(const SgnParams& p) {
    auto mut = param_tensors(const_cast<SgnParams&>(p));
    return {mut.begin(), mut.end()};
}

SgnModel init_model(int dim, int layers, int gamma, std::uint64_t seed, double penalty_clamp) {
    require(dim >= 2, ErrorKind::invalid_argument, "init_model: dim < 2");
    require(layers >= 1, ErrorKind::invalid_argument, "init_model: layers < 1");
    require(gamma >= 1, ErrorKind::invalid_argument, "init_model: gamma < 1");
    require(penalty_clamp > 0.0, ErrorKind::invalid_argument, "init_model: penalty_clamp <= 0");

    SgnModel model;
    model.dim = dim;
    model.num_layers = layers;
    model.gamma = gamma;
    model.penalty_clamp = penalty_clamp;

    auto& p = model.params;
    const int d = dim;
    p.node_in_w.resize(d, 2);
    p.node_in_b.resize(d, 1);
    p.edge_in_w.resize(d, 1);
    p.edge_in_b.resize(d, 1);
    p.layers.resize(layers);
    for (auto& l : p.layers) {
        for (MatrixXd* w : {&l.wa, &l.ws, &l.wn, &l.wr, &l.wf, &l.wt, &l.wo}) w->resize(d, d);
        l.p.resize(d, 1);
        l.bn_node_scale.resize(d, 1);
        l.bn_node_shift.resize(d, 1);
        l.bn_edge_scale.resize(d, 1);
        l.bn_edge_shift.resize(d, 1);
    }
    for (SgnDecoderParams* dec : {&p.edge_dec, &p.node_dec}) {
        dec->w1.resize(d, d);
        dec->b1.resize(d, 1);
        dec->w2.resize(d, d);
        dec->b2.resize(d, 1);
        dec->head.resize(1, d);
    }

    Rng rng(seed);
    visit_params(p, [&](const char* name, MatrixXd& m) {
        std::string_view n(name);
        bool is_bias = n.ends_with(".b") || n.ends_with(".b1") || n.ends_with(".b2") ||
                       n.ends_with(".shift");
        bool is_scale = n.ends_with(".scale");
        if (is_scale) {
            m.setOnes();
        } else if (is_bias) {
            m.setZero();
        } else {
            // Glorot uniform over (fan_in = cols, fan_out = rows).
            double a = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
            double* data = m.data();
            for (Eigen::Index i = 0; i < m.size(); ++i) data[i] = rng.uniform_in(-a, a);
        }
    });

    model.stats.resize(layers);
    for (auto& s : model.stats) {
        s.node_mean = MatrixXd::Zero(d, 1);
        s.node_var = MatrixXd::Ones(d, 1);
        s.edge_mean = MatrixXd::Zero(d, 1);
        s.edge_var = MatrixXd::Ones(d, 1);
    }
    return model;
}

long param_count(const SgnModel& model) {
    long total = 0;
    for (const auto* t : param_tensors(model.params)) total += static_cast<long>(t->size());
    return total;
}

SgnParams zeros_like(const SgnParams& p) {
    SgnParams out = p;
    visit_params(out, [](const char*, MatrixXd& m) { m.setZero(); });
    return out;
}

// ---------------------------------------------------------------------------
// Batch assembly
// ---------------------------------------------------------------------------

SgnBatch make_batch(const std::vector<const TspInstance*>& insts,
                    const std::vector<const SparseGraph*>& graphs) {
    require(!insts.empty() && insts.size() == graphs.size(), ErrorKind::invalid_argument,
            "make_batch: empty or mismatched inputs");
    SgnBatch b;
    b.num_graphs = static_cast<int>(insts.size());
    b.n = insts[0]->n;
    b.gamma = graphs[0]->gamma;
    for (std::size_t g = 0; g < insts.size(); ++g) {
        require(insts[g]->n == b.n && graphs[g]->n == b.n && graphs[g]->gamma == b.gamma,
                ErrorKind::invalid_argument, "make_batch: graphs must share n and gamma");
    }
    const int N = b.nodes();
    const int E = b.edges();
    b.node_x.resize(2, N);
    b.edge_x.resize(1, E);
    b.src.resize(E);
    b.dst.resize(E);
    b.rev.resize(E);
    for (int g = 0; g < b.num_graphs; ++g) {
        const TspInstance& inst = *insts[g];
        const SparseGraph& graph = *graphs[g];
        const int node_off = g * b.n;
        const int edge_off = node_off * b.gamma;
        for (int i = 0; i < b.n; ++i) {
            b.node_x(0, node_off + i) = inst.coords[i].x;
            b.node_x(1, node_off + i) = inst.coords[i].y;
        }
        for (int s = 0; s < graph.edge_count(); ++s) {
            b.edge_x(0, edge_off + s) = graph.dist[s];
            b.src[edge_off + s] = node_off + s / b.gamma;
            b.dst[edge_off + s] = node_off + graph.neighbors[s];
            b.rev[edge_off + s] = graph.reverse_slot[s] < 0 ? -1 : edge_off + graph.reverse_slot[s];
        }
    }
    return b;
}

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

SgnOutput sgn_forward(SgnModel& model, const SgnBatch& batch, SgnMode mode, SgnCache* cache) {
    require(batch.gamma == model.gamma, ErrorKind::invalid_argument,
            "sgn_forward: batch gamma != model gamma");
    require(mode == SgnMode::train ? cache != nullptr : true, ErrorKind::invalid_argument,
            "sgn_forward: train mode needs a cache");
    const auto& p = model.params;
    const int L = model.num_layers;
    const int E = batch.edges();
    const int N = batch.nodes();

    const bool full_cache = cache && !cache->decoder_only;
    if (cache) {
        cache->train_mode = mode == SgnMode::train;
        cache->v.assign(full_cache ? L + 1 : 1, MatrixXd());
        cache->e.assign(full_cache ? L + 1 : 0, MatrixXd());
        cache->layers.assign(full_cache ? L : 0, SgnLayerCache());
    }

    MatrixXd v = (p.node_in_w * batch.node_x).colwise() + p.node_in_b.col(0);
    MatrixXd e = (p.edge_in_w * batch.edge_x).colwise() + p.edge_in_b.col(0);
    if (full_cache) {
        cache->v[0] = v;
        cache->e[0] = e;
    }

    for (int l = 0; l < L; ++l) {
        const auto& lp = p.layers[l];
        auto& st = model.stats[l];
        SgnLayerCache* lc = full_cache ? &cache->layers[l] : nullptr;

        // Node update: elementwise attention over each node's out-edges.
        MatrixXd attn = group_softmax(lp.wa * e, batch.gamma);
        MatrixXd nv = lp.wn * v;
        MatrixXd agg = MatrixXd::Zero(model.dim, N);
        for (int c = 0; c < E; ++c)
            agg.col(batch.src[c]) += attn.col(c).cwiseProduct(nv.col(batch.dst[c]));
        MatrixXd node_pre = lp.ws * v + agg;
        MatrixXd node_bn = bn_forward(node_pre, {lp.bn_node_scale, lp.bn_node_shift}, mode,
                                      st.node_mean, st.node_var, lc ? &lc->bn_node : nullptr);
        MatrixXd node_act = relu(node_bn);

        // Edge update: both endpoints, own embedding, and the reverse edge
        // (or the placeholder when the reverse direction is not in E*).
        MatrixXd rin(model.dim, E);
        for (int c = 0; c < E; ++c) {
            if (batch.rev[c] >= 0)
                rin.col(c) = e.col(batch.rev[c]);
            else
                rin.col(c) = lp.p.col(0);
        }
        MatrixXd vf = lp.wf * v;
        MatrixXd vt = lp.wt * v;
        MatrixXd edge_pre = lp.wo * e + lp.wr * rin;
        for (int c = 0; c < E; ++c) edge_pre.col(c) += vf.col(batch.src[c]) + vt.col(batch.dst[c]);
        MatrixXd edge_bn = bn_forward(edge_pre, {lp.bn_edge_scale, lp.bn_edge_shift}, mode,
                                      st.edge_mean, st.edge_var, lc ? &lc->bn_edge : nullptr);
        MatrixXd edge_act = relu(edge_bn);

        v += node_act;
        e += edge_act;
        if (lc) {
            lc->attn = std::move(attn);
            lc->nv = std::move(nv);
            lc->node_relu = std::move(node_act);
            lc->edge_relu = std::move(edge_act);
        }
        if (full_cache) {
            cache->v[l + 1] = v;
            cache->e[l + 1] = e;
        }
        if (!v.allFinite() || !e.allFinite())
            fail(ErrorKind::numeric_failure, "sgn_forward: non-finite activation at layer " +
                                                 std::to_string(l));
    }

    // Edge decoder -> per-node softmax scores.
    MatrixXd ed_h1 = relu((p.edge_dec.w1 * e).colwise() + p.edge_dec.b1.col(0));
    MatrixXd ed_h2 = relu((p.edge_dec.w2 * ed_h1).colwise() + p.edge_dec.b2.col(0));
    VectorXd beta_logit = (p.edge_dec.head * ed_h2).transpose();
    VectorXd beta = scalar_group_softmax(beta_logit, batch.gamma);

    // Node decoder -> clamped penalties.
    MatrixXd nd_h1 = relu((p.node_dec.w1 * v).colwise() + p.node_dec.b1.col(0));
    MatrixXd nd_h2 = relu((p.node_dec.w2 * nd_h1).colwise() + p.node_dec.b2.col(0));
    VectorXd pi_raw = (p.node_dec.head * nd_h2).transpose();
    VectorXd pi = model.penalty_clamp * pi_raw.array().tanh();

    SgnOutput out{std::move(beta), std::move(pi)};
    if (cache) {
        if (!full_cache) cache->v[0] = std::move(v);
        cache->ed_h1 = std::move(ed_h1);
        cache->ed_h2 = std::move(ed_h2);
        cache->nd_h1 = std::move(nd_h1);
        cache->nd_h2 = std::move(nd_h2);
        cache->pi_raw = std::move(pi_raw);
        cache->out = out;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Backward
// ---------------------------------------------------------------------------

namespace {

// Shared by the full backward and the decoder-only fine-tuning path.
// Propagates dL/dpi into the node decoder; adds dL/dvL into `dv` when given.
void node_decoder_backward(const SgnModel& model, const SgnCache& cache, const MatrixXd& vL,
                           const VectorXd& dpi, SgnParams& g, MatrixXd* dv) {
    const auto& dec = model.params.node_dec;
    VectorXd dpi_raw =
        dpi.array() * model.penalty_clamp * (1.0 - cache.pi_raw.array().tanh().square());
    g.node_dec.head += dpi_raw.transpose() * cache.nd_h2.transpose();
    MatrixXd dh2 = (dec.head.transpose() * dpi_raw.transpose()).cwiseProduct(relu_mask(cache.nd_h2));
    g.node_dec.w2 += dh2 * cache.nd_h1.transpose();
    g.node_dec.b2.col(0) += dh2.rowwise().sum();
    MatrixXd dh1 = (dec.w2.transpose() * dh2).cwiseProduct(relu_mask(cache.nd_h1));
    g.node_dec.w1 += dh1 * vL.transpose();
    g.node_dec.b1.col(0) += dh1.rowwise().sum();
    if (dv) *dv += dec.w1.transpose() * dh1;
}

} // namespace

SgnParams sgn_backward(const SgnModel& model, const SgnBatch& batch, const SgnCache& cache,
                       const VectorXd& dL_dbeta, const VectorXd& dL_dpi) {
    require(cache.train_mode, ErrorKind::invalid_state, "sgn_backward: cache not from train mode");
    require(dL_dbeta.size() == batch.edges() && dL_dpi.size() == batch.nodes(),
            ErrorKind::invalid_argument, "sgn_backward: gradient size mismatch");
    const auto& p = model.params;
    const int L = model.num_layers;
    const int E = batch.edges();

    SgnParams g = zeros_like(p);
    MatrixXd dv = MatrixXd::Zero(model.dim, batch.nodes());
    MatrixXd de = MatrixXd::Zero(model.dim, E);

    // Node decoder.
    node_decoder_backward(model, cache, cache.v[L], dL_dpi, g, &dv);

    // Edge decoder, through the per-node softmax first.
    VectorXd dlogit = scalar_group_softmax_backward(cache.out.beta, dL_dbeta, batch.gamma);
    g.edge_dec.head += dlogit.transpose() * cache.ed_h2.transpose();
    MatrixXd dh2 =
        (p.edge_dec.head.transpose() * dlogit.transpose()).cwiseProduct(relu_mask(cache.ed_h2));
    g.edge_dec.w2 += dh2 * cache.ed_h1.transpose();
    g.edge_dec.b2.col(0) += dh2.rowwise().sum();
    MatrixXd dh1 = (p.edge_dec.w2.transpose() * dh2).cwiseProduct(relu_mask(cache.ed_h1));
    g.edge_dec.w1 += dh1 * cache.e[L].transpose();
    g.edge_dec.b1.col(0) += dh1.rowwise().sum();
    de += p.edge_dec.w1.transpose() * dh1;

    for (int l = L - 1; l >= 0; --l) {
        const auto& lp = p.layers[l];
        auto& lg = g.layers[l];
        const auto& lc = cache.layers[l];
        const MatrixXd& v_prev = cache.v[l];
        const MatrixXd& e_prev = cache.e[l];

        // Edge path: e_out = e_prev + ReLU(BN(z)).
        MatrixXd dz_post = de.cwiseProduct(relu_mask(lc.edge_relu));
        MatrixXd dz = bn_backward(dz_post, lc.bn_edge, lp.bn_edge_scale, lg.bn_edge_scale,
                                  lg.bn_edge_shift);
        MatrixXd de_prev = de; // skip connection
        lg.wo += dz * e_prev.transpose();
        de_prev += lp.wo.transpose() * dz;

        lg.wf += dz * gather_cols(v_prev, batch.src).transpose();
        lg.wt += dz * gather_cols(v_prev, batch.dst).transpose();
        MatrixXd dv_prev = dv; // skip connection
        MatrixXd dvf = lp.wf.transpose() * dz;
        MatrixXd dvt = lp.wt.transpose() * dz;
        for (int c = 0; c < E; ++c) {
            dv_prev.col(batch.src[c]) += dvf.col(c);
            dv_prev.col(batch.dst[c]) += dvt.col(c);
        }

        MatrixXd rin(model.dim, E);
        for (int c = 0; c < E; ++c) {
            if (batch.rev[c] >= 0)
                rin.col(c) = e_prev.col(batch.rev[c]);
            else
                rin.col(c) = lp.p.col(0);
        }
        lg.wr += dz * rin.transpose();
        MatrixXd drin = lp.wr.transpose() * dz;
        for (int c = 0; c < E; ++c) {
            if (batch.rev[c] >= 0)
                de_prev.col(batch.rev[c]) += drin.col(c);
            else
                lg.p.col(0) += drin.col(c);
        }

        // Node path: v_out = v_prev + ReLU(BN(ws v + agg)).
        MatrixXd du_post = dv.cwiseProduct(relu_mask(lc.node_relu));
        MatrixXd du = bn_backward(du_post, lc.bn_node, lp.bn_node_scale, lg.bn_node_scale,
                                  lg.bn_node_shift);
        lg.ws += du * v_prev.transpose();
        dv_prev += lp.ws.transpose() * du;

        MatrixXd dattn(model.dim, E);
        MatrixXd dnv = MatrixXd::Zero(model.dim, batch.nodes());
        for (int c = 0; c < E; ++c) {
            dattn.col(c) = du.col(batch.src[c]).cwiseProduct(lc.nv.col(batch.dst[c]));
            dnv.col(batch.dst[c]) += lc.attn.col(c).cwiseProduct(du.col(batch.src[c]));
        }
        lg.wn += dnv * v_prev.transpose();
        dv_prev += lp.wn.transpose() * dnv;

        MatrixXd dattn_logits = group_softmax_backward(lc.attn, dattn, batch.gamma);
        lg.wa += dattn_logits * e_prev.transpose();
        de_prev += lp.wa.transpose() * dattn_logits;

        dv = std::move(dv_prev);
        de = std::move(de_prev);
    }

    g.node_in_w += dv * batch.node_x.transpose();
    g.node_in_b.col(0) += dv.rowwise().sum();
    g.edge_in_w += de * batch.edge_x.transpose();
    g.edge_in_b.col(0) += de.rowwise().sum();
    return g;
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

double edge_loss(const SgnOutput& out, const SgnBatch& batch, const std::vector<std::uint8_t>& labels) {
    require(static_cast<int>(labels.size()) == batch.edges(), ErrorKind::invalid_argument,
            "edge_loss: label size mismatch");
    const double per_graph = 1.0 / (static_cast<double>(batch.gamma) * batch.n);
    double total = 0.0;
    for (int c = 0; c < batch.edges(); ++c) {
        double b = std::clamp(out.beta[c], kLossClamp, 1.0 - kLossClamp);
        total += labels[c] ? -std::log(b) : -std::log1p(-b);
    }
    return total * per_graph / batch.num_graphs;
}

Eigen::VectorXd edge_loss_grad(const SgnOutput& out, const SgnBatch& batch,
                               const std::vector<std::uint8_t>& labels) {
    require(static_cast<int>(labels.size()) == batch.edges(), ErrorKind::invalid_argument,
            "edge_loss_grad: label size mismatch");
    const double norm = 1.0 / (static_cast<double>(batch.gamma) * batch.n * batch.num_graphs);
    VectorXd grad(batch.edges());
    for (int c = 0; c < batch.edges(); ++c) {
        double b = out.beta[c];
        if (b <= kLossClamp || b >= 1.0 - kLossClamp) {
            grad[c] = 0.0; // clamped region is flat
            continue;
        }
        grad[c] = labels[c] ? -norm / b : norm / (1.0 - b);
    }
    return grad;
}

NodeLossResult node_loss(const TspInstance& inst, const PiVector& pi) {
    OneTree tree = minimum_one_tree(inst, pi);
    NodeLossResult res;
    res.degrees = tree.degrees;
    double total = 0.0;
    for (int i = 0; i < inst.n; ++i) total += (tree.degrees[i] - 2) * pi[i];
    res.loss = -total / inst.n;
    return res;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

AdamState make_adam_state(const SgnModel& model) {
    AdamState st;
    st.m = zeros_like(model.params);
    st.v = zeros_like(model.params);
    st.step = 0;
    return st;
}

void adam_step(SgnModel& model, const SgnParams& grads, AdamState& state, double lr) {
    auto params = param_tensors(model.params);
    auto gs = param_tensors(grads);
    auto ms = param_tensors(state.m);
    auto vs = param_tensors(state.v);
    require(params.size() == gs.size() && params.size() == ms.size() && params.size() == vs.size(),
            ErrorKind::invalid_argument, "adam_step: state shape mismatch");
    ++state.step;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        require(params[i]->rows() == gs[i]->rows() && params[i]->cols() == gs[i]->cols(),
                ErrorKind::invalid_argument, "adam_step: gradient shape mismatch");
        MatrixXd& m = *ms[i];
        MatrixXd& v = *vs[i];
        m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * *gs[i];
        v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * gs[i]->cwiseProduct(*gs[i]);
        *params[i] -= (lr * (m / bc1).array() / ((v / bc2).array().sqrt() + kAdamEps)).matrix();
    }
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

std::vector<EpochLog> sgn_train(SgnModel& model, const std::vector<LabeledInstance>& data,
                                const TrainConfig& cfg) {
    require(!data.empty(), ErrorKind::invalid_argument, "sgn_train: empty dataset");
    require(cfg.lr > 0.0, ErrorKind::invalid_argument, "sgn_train: lr <= 0");
    require(cfg.eta_pi >= 0.0, ErrorKind::invalid_argument, "sgn_train: eta_pi < 0");
    require(cfg.epochs >= 1 && cfg.batch_graphs >= 1, ErrorKind::invalid_argument,
            "sgn_train: bad epochs/batch");
    for (const auto& d : data)
        require(d.graph.gamma == model.gamma && static_cast<int>(d.labels.size()) == d.graph.edge_count(),
                ErrorKind::invalid_argument, "sgn_train: instance not labeled for model gamma");

    AdamState adam = make_adam_state(model);
    Rng root(cfg.seed);
    std::vector<EpochLog> log;

    // Same-size batches only: group by n, then chunk.
    std::vector<int> sizes;
    for (const auto& d : data)
        if (std::find(sizes.begin(), sizes.end(), d.inst.n) == sizes.end()) sizes.push_back(d.inst.n);
    std::sort(sizes.begin(), sizes.end());

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng erng = root.fork(static_cast<std::uint64_t>(epoch));
        std::vector<std::vector<int>> batches;
        for (int n : sizes) {
            std::vector<int> idx;
            for (std::size_t i = 0; i < data.size(); ++i)
                if (data[i].inst.n == n) idx.push_back(static_cast<int>(i));
            erng.shuffle(idx);
            for (std::size_t s = 0; s < idx.size(); s += cfg.batch_graphs) {
                std::size_t e = std::min(idx.size(), s + cfg.batch_graphs);
                batches.emplace_back(idx.begin() + s, idx.begin() + e);
            }
        }
        erng.shuffle(batches);

        double sum_edge = 0.0, sum_node = 0.0;
        long batch_count = 0;
        for (const auto& batch_ids : batches) {
            std::vector<const TspInstance*> insts;
            std::vector<const SparseGraph*> graphs;
            std::vector<std::uint8_t> labels;
            for (int id : batch_ids) {
                insts.push_back(&data[id].inst);
                graphs.push_back(&data[id].graph);
                labels.insert(labels.end(), data[id].labels.begin(), data[id].labels.end());
            }
            SgnBatch batch = make_batch(insts, graphs);
            SgnCache cache;
            SgnOutput out = sgn_forward(model, batch, SgnMode::train, &cache);

            double lb = edge_loss(out, batch, labels);
            VectorXd dbeta = edge_loss_grad(out, batch, labels);

            VectorXd dpi = VectorXd::Zero(batch.nodes());
            double ln = 0.0;
            for (std::size_t gi = 0; gi < batch_ids.size(); ++gi) {
                const TspInstance& inst = data[batch_ids[gi]].inst;
                PiVector pig(inst.n);
                for (int i = 0; i < inst.n; ++i) pig[i] = out.pi[gi * batch.n + i];
                NodeLossResult nl = node_loss(inst, pig);
                ln += nl.loss / batch.num_graphs;
                const double scale = cfg.eta_pi / (static_cast<double>(inst.n) * batch.num_graphs);
                for (int i = 0; i < inst.n; ++i)
                    dpi[gi * batch.n + i] = -(nl.degrees[i] - 2) * scale;
            }

            SgnParams grads = sgn_backward(model, batch, cache, dbeta, dpi);
            adam_step(model, grads, adam, cfg.lr);
            sum_edge += lb;
            sum_node += ln;
            ++batch_count;
        }
        log.push_back({epoch, sum_edge / batch_count, sum_node / batch_count});
    }
    return log;
}

void finetune_node_decoder(SgnModel& model, int inst_size, int iterations, int batch_graphs,
                           std::uint64_t seed, double lr) {
    require(inst_size > model.gamma, ErrorKind::invalid_argument,
            "finetune: inst_size must exceed model gamma");
    require(iterations >= 0, ErrorKind::invalid_argument, "finetune: negative iterations");
    if (batch_graphs <= 0) batch_graphs = std::max(1, 5000 / inst_size);

    // Decoder-only Adam state; encoder tensors never receive a gradient and
    // their zero-initialized moments leave them bit-identical.
    AdamState adam = make_adam_state(model);
    Rng root(seed);

    for (int it = 0; it < iterations; ++it) {
        Rng irng = root.fork(static_cast<std::uint64_t>(it));
        std::vector<TspInstance> insts;
        std::vector<SparseGraph> graphs;
        insts.reserve(batch_graphs);
        graphs.reserve(batch_graphs);
        for (int g = 0; g < batch_graphs; ++g) {
            insts.push_back(generate_uniform(inst_size, irng.next_u64()));
            graphs.push_back(build_sparse_graph(insts.back(), model.gamma));
        }
        std::vector<const TspInstance*> ip;
        std::vector<const SparseGraph*> gp;
        for (int g = 0; g < batch_graphs; ++g) {
            ip.push_back(&insts[g]);
            gp.push_back(&graphs[g]);
        }
        SgnBatch batch = make_batch(ip, gp);
        SgnCache cache;
        cache.decoder_only = true;
        sgn_forward(model, batch, SgnMode::infer, &cache);

        VectorXd dpi = VectorXd::Zero(batch.nodes());
        for (int g = 0; g < batch_graphs; ++g) {
            PiVector pig(inst_size);
            for (int i = 0; i < inst_size; ++i) pig[i] = cache.out.pi[g * inst_size + i];
            NodeLossResult nl = node_loss(insts[g], pig);
            const double scale = 1.0 / (static_cast<double>(inst_size) * batch_graphs);
            for (int i = 0; i < inst_size; ++i) dpi[g * inst_size + i] = -(nl.degrees[i] - 2) * scale;
        }

        SgnParams grads = zeros_like(model.params);
        node_decoder_backward(model, cache, cache.v.back(), dpi, grads, nullptr);
        adam_step(model, grads, adam, lr);
    }
}

// ---------------------------------------------------------------------------
// Inference
// ---------------------------------------------------------------------------

SgnInference sgn_infer(const SgnModel& model, const TspInstance& inst, const SparseGraph& graph) {
    SgnBatch batch = make_batch({&inst}, {&graph});
    SgnOutput out = sgn_forward(const_cast<SgnModel&>(model), batch, SgnMode::infer, nullptr);
    SgnInference res;
    res.beta.assign(out.beta.data(), out.beta.data() + out.beta.size());
    res.pi.assign(out.pi.data(), out.pi.data() + out.pi.size());
    return res;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

void append_block(std::string& out, const MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        float f = static_cast<float>(m.data()[i]);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        out.push_back(static_cast<char>(bits & 0xff));
        out.push_back(static_cast<char>((bits >> 8) & 0xff));
        out.push_back(static_cast<char>((bits >> 16) & 0xff));
        out.push_back(static_cast<char>((bits >> 24) & 0xff));
    }
}

void read_block(const std::string& doc, std::size_t& pos, MatrixXd& m) {
    const std::size_t need = static_cast<std::size_t>(m.size()) * 4;
    if (pos + need > doc.size()) fail(ErrorKind::corrupt_file, "model: truncated parameter block");
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        std::uint32_t bits = static_cast<std::uint8_t>(doc[pos]) |
                             (static_cast<std::uint8_t>(doc[pos + 1]) << 8) |
                             (static_cast<std::uint8_t>(doc[pos + 2]) << 16) |
                             (static_cast<std::uint8_t>(doc[pos + 3]) << 24);
        float f;
        std::memcpy(&f, &bits, 4);
        m.data()[i] = static_cast<double>(f);
        pos += 4;
    }
}

template <class Fn>
void visit_stats(std::vector<SgnLayerStats>& stats, Fn&& fn) {
    for (auto& s : stats) {
        fn(s.node_mean);
        fn(s.node_var);
        fn(s.edge_mean);
        fn(s.edge_var);
    }
}

} // namespace

std::string save_model(const SgnModel& model, const AdamState* adam) {
    char header[128];
    std::snprintf(header, sizeof(header), "SGN1 %d %d %d %.17g\n", model.dim, model.num_layers,
                  model.gamma, model.penalty_clamp);
    std::string out = header;
    for (const auto* t : param_tensors(model.params)) append_block(out, *t);
    visit_stats(const_cast<std::vector<SgnLayerStats>&>(model.stats),
                [&](MatrixXd& m) { append_block(out, m); });
    if (adam) {
        out += "ADAM " + std::to_string(adam->step) + "\n";
        for (const auto* t : param_tensors(adam->m)) append_block(out, *t);
        for (const auto* t : param_tensors(adam->v)) append_block(out, *t);
    }
    return out;
}

SgnModel load_model(const std::string& doc, AdamState* adam_out) {
    std::size_t nl = doc.find('\n');
    if (nl == std::string::npos) fail(ErrorKind::unsupported_format, "model: missing header");
    std::istringstream hdr(doc.substr(0, nl));
    std::string magic;
    int dim = 0, layers = 0, gamma = 0;
    double clamp = 0.0;
    if (!(hdr >> magic >> dim >> layers >> gamma >> clamp) || magic != "SGN1")
        fail(ErrorKind::unsupported_format, "model: bad magic/header");

    SgnModel model = init_model(dim, layers, gamma, 0, clamp);
    std::size_t pos = nl + 1;
    for (auto* t : param_tensors(model.params)) read_block(doc, pos, *t);
    visit_stats(model.stats, [&](MatrixXd& m) { read_block(doc, pos, m); });

    if (pos < doc.size()) {
        std::size_t nl2 = doc.find('\n', pos);
        if (nl2 == std::string::npos) fail(ErrorKind::corrupt_file, "model: garbled trailer");
        std::istringstream trailer(doc.substr(pos, nl2 - pos));
        std::string tag;
        long step = 0;
        if (!(trailer >> tag >> step) || tag != "ADAM")
            fail(ErrorKind::corrupt_file, "model: unexpected trailing data");
        AdamState adam = make_adam_state(model);
        adam.step = step;
        pos = nl2 + 1;
        for (auto* t : param_tensors(adam.m)) read_block(doc, pos, *t);
        for (auto* t : param_tensors(adam.v)) read_block(doc, pos, *t);
        if (pos != doc.size()) fail(ErrorKind::corrupt_file, "model: trailing bytes");
        if (adam_out) *adam_out = std::move(adam);
    } else if (pos != doc.size()) {
        fail(ErrorKind::corrupt_file, "model: trailing bytes");
    }
    return model;
}

} // namespace tsplab
