#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tsplab/instance.hpp"
#include "tsplab/onetree.hpp"

namespace tsplab {

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

/// One sparse graph convolutional layer: element-wise attention over each
/// node's out-edges, node/edge updates with skip connections and batch norm,
/// and a reverse-edge term (w_r applied to the opposite-direction embedding,
/// or to the placeholder p when that edge is absent).
struct SgnLayerParams {
    Eigen::MatrixXd wa, ws, wn, wr, wf, wt, wo; // D x D
    Eigen::MatrixXd p;                          // D x 1 placeholder feature
    Eigen::MatrixXd bn_node_scale, bn_node_shift; // D x 1
    Eigen::MatrixXd bn_edge_scale, bn_edge_shift; // D x 1
};

/// Two projection+ReLU layers followed by a scalar head.
struct SgnDecoderParams {
    Eigen::MatrixXd w1, b1, w2, b2; // D x D, D x 1
    Eigen::MatrixXd head;           // 1 x D
};

struct SgnParams {
    Eigen::MatrixXd node_in_w, node_in_b; // D x 2, D x 1
    Eigen::MatrixXd edge_in_w, edge_in_b; // D x 1, D x 1
    std::vector<SgnLayerParams> layers;
    SgnDecoderParams edge_dec, node_dec;
};

/// Batch-norm running statistics, updated in train mode (momentum 0.1) and
/// consumed in inference mode.
struct SgnLayerStats {
    Eigen::MatrixXd node_mean, node_var, edge_mean, edge_var; // D x 1
};

struct SgnModel {
    int dim = 0;
    int num_layers = 0;
    int gamma = 0;             // sparse out-degree the model was trained for
    double penalty_clamp = 10; // C in pi = C * tanh(.)
    SgnParams params;
    std::vector<SgnLayerStats> stats;
};

/// Trainable tensors in declared (= serialized) order.
std::vector<Eigen::MatrixXd*> param_tensors(SgnParams& p);
std::vector<const Eigen::MatrixXd*> param_tensors(const SgnParams& p);
/// fn(name, tensor); name prefixes select the init rule.
void visit_params(SgnParams& p, const std::function<void(const char*, Eigen::MatrixXd&)>& fn);

/// Glorot-uniform weights, zero biases, BN scale 1 / shift 0, unit running
/// variance. Total trainable parameter count is
///   L*(7 D^2 + 5 D) + 4 D^2 + 11 D
/// (input projections 5D, seven DxD blocks plus p plus four BN vectors per
/// layer, and two decoders of 2 D^2 + 3 D each).
SgnModel init_model(int dim, int layers, int gamma, std::uint64_t seed, double penalty_clamp = 10.0);

long param_count(const SgnModel& model);
SgnParams zeros_like(const SgnParams& p);

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

/// A batch of same-size graphs, node/edge features concatenated column-wise.
/// Edge slot e = node_col * gamma + s, so src[e] == e / gamma always.
struct SgnBatch {
    int num_graphs = 0;
    int n = 0;
    int gamma = 0;
    Eigen::MatrixXd node_x; // 2 x N, N = num_graphs * n
    Eigen::MatrixXd edge_x; // 1 x E, E = N * gamma
    std::vector<int> src, dst; // size E, global node columns
    std::vector<int> rev;      // size E, global edge column of (j,i) or -1

    int nodes() const { return num_graphs * n; }
    int edges() const { return nodes() * gamma; }
};

SgnBatch make_batch(const std::vector<const TspInstance*>& insts,
                    const std::vector<const SparseGraph*>& graphs);

struct SgnOutput {
    Eigen::VectorXd beta; // per directed edge, rows of each node sum to 1
    Eigen::VectorXd pi;   // per node, in [-C, C]
};

enum class SgnMode { train, infer };

struct SgnBnCache {
    Eigen::MatrixXd xhat;
    Eigen::VectorXd inv_std;
};

struct SgnLayerCache {
    Eigen::MatrixXd attn;      // D x E, post softmax
    Eigen::MatrixXd nv;        // D x N, wn * v_prev
    SgnBnCache bn_node;
    Eigen::MatrixXd node_relu; // D x N
    SgnBnCache bn_edge;
    Eigen::MatrixXd edge_relu; // D x E
};

struct SgnCache {
    bool train_mode = false;
    bool decoder_only = false;      // set before forward: keep only v.back() = v^L
    std::vector<Eigen::MatrixXd> v; // L+1 entries, D x N (1 entry when decoder_only)
    std::vector<Eigen::MatrixXd> e; // L+1 entries, D x E (empty when decoder_only)
    std::vector<SgnLayerCache> layers;
    Eigen::MatrixXd ed_h1, ed_h2; // edge decoder activations
    Eigen::MatrixXd nd_h1, nd_h2; // node decoder activations
    Eigen::VectorXd pi_raw;       // pre-tanh head output
    SgnOutput out;
};

/// Runs the encoder and both decoders. In train mode batch statistics are
/// used for BN (and running stats updated); in infer mode running statistics
/// are used and the model is untouched. `cache` may be null in infer mode.
SgnOutput sgn_forward(SgnModel& model, const SgnBatch& batch, SgnMode mode, SgnCache* cache);

/// Exact reverse-mode gradients for dL/dbeta and dL/dpi produced by the loss
/// functions below. Requires a train-mode cache.
SgnParams sgn_backward(const SgnModel& model, const SgnBatch& batch, const SgnCache& cache,
                       const Eigen::VectorXd& dL_dbeta, const Eigen::VectorXd& dL_dpi);

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

/// Mean over graphs of -(1/(gamma n)) sum over E* of the binary cross
/// entropy between beta and the optimal-edge indicator.
double edge_loss(const SgnOutput& out, const SgnBatch& batch, const std::vector<std::uint8_t>& labels);
Eigen::VectorXd edge_loss_grad(const SgnOutput& out, const SgnBatch& batch,
                               const std::vector<std::uint8_t>& labels);

/// L_pi = -(1/n) sum_i (d_i(pi) - 2) pi_i with degrees from the minimum
/// 1-tree under pi. Degrees are treated as constants by the gradient.
struct NodeLossResult {
    double loss = 0.0;
    std::vector<int> degrees;
};
NodeLossResult node_loss(const TspInstance& inst, const PiVector& pi);

// ---------------------------------------------------------------------------
// Optimization
// ---------------------------------------------------------------------------

struct AdamState {
    SgnParams m, v;
    long step = 0;
};
AdamState make_adam_state(const SgnModel& model);

/// Standard Adam: beta1 0.9, beta2 0.999, eps 1e-8, bias correction.
void adam_step(SgnModel& model, const SgnParams& grads, AdamState& state, double lr);

struct LabeledInstance {
    TspInstance inst;
    SparseGraph graph;
    std::vector<std::uint8_t> labels; // optimal-edge indicator per slot
};

struct TrainConfig {
    double lr = 1e-4;
    int epochs = 16;
    int batch_graphs = 8;
    double eta_pi = 1.0;
    std::uint64_t seed = 1;
};

struct EpochLog {
    int epoch = 0;
    double mean_edge_loss = 0.0;
    double mean_node_loss = 0.0;
};

/// Mini-batch training of the combined loss L_beta + eta_pi * L_pi. Batches
/// hold same-size graphs only; shuffling and batch order are seeded.
std::vector<EpochLog> sgn_train(SgnModel& model, const std::vector<LabeledInstance>& data,
                                const TrainConfig& cfg);

/// Updates only the node decoder (two projections + head) with L_pi on
/// freshly generated uniform instances of size inst_size; everything else,
/// BN running statistics included, stays bit-identical. batch_graphs == 0
/// selects max(1, 5000 / inst_size).
void finetune_node_decoder(SgnModel& model, int inst_size, int iterations, int batch_graphs,
                           std::uint64_t seed, double lr = 1e-4);

// ---------------------------------------------------------------------------
// Inference / serialization
// ---------------------------------------------------------------------------

struct SgnInference {
    std::vector<double> beta; // aligned with graph slots
    std::vector<double> pi;   // per node
};
SgnInference sgn_infer(const SgnModel& model, const TspInstance& inst, const SparseGraph& graph);

/// Text header "SGN1 <D> <L> <gamma> <C>" followed by little-endian float32
/// blocks in declared field order (column-major within each block), running
/// statistics after the trainable blocks, then an optional Adam section.
std::string save_model(const SgnModel& model, const AdamState* adam = nullptr);
SgnModel load_model(const std::string& doc, AdamState* adam_out = nullptr);

} // namespace tsplab
