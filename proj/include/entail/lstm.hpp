#pragma once

#include <string>
#include <vector>

#include "entail/param.hpp"
#include "entail/rng.hpp"
#include "entail/tensor.hpp"

namespace entail {

/// One gate's weights. w maps the input (e x d orientation, applied as
/// w^T x), u maps the previous hidden state (d x d, applied as u^T h),
/// b is the bias (d x 1).
struct GateParams {
  Parameter* w = nullptr;
  Parameter* u = nullptr;
  Parameter* b = nullptr;
};

/// Standard LSTM cell (forget gate, no peepholes):
///   i,f,o = sigmoid(w^T x + u^T h + b),  g = tanh(...)
///   c_t = f.c_{t-1} + i.g,  h_t = o.tanh(c_t)
struct LstmParams {
  GateParams input, forget, output, candidate;
  std::size_t embed_dim = 0;
  std::size_t hidden_dim = 0;
};

/// Registers the twelve tensors of one cell under `prefix`. Weights are drawn
/// uniform in (-0.08, 0.08); the forget-gate bias starts at 1, other biases
/// at 0.
LstmParams make_lstm_params(ParameterStore& store, const std::string& prefix,
                            std::size_t embed_dim, std::size_t hidden_dim,
                            Rng& rng);

/// Everything one time step must remember for the backward pass. Columns are
/// batch lanes.
struct LstmStepCache {
  Tensor2D x;                  // e x B
  Tensor2D h_prev, c_prev;     // d x B
  Tensor2D i, f, o, g;         // gate activations, d x B
  Tensor2D c, tanh_c, h;       // d x B
};

/// One batched cell step. Shapes: x (e x B), h_prev/c_prev (d x B).
void lstm_cell_forward(const LstmParams& p, const Tensor2D& x,
                       const Tensor2D& h_prev, const Tensor2D& c_prev,
                       LstmStepCache& cache);

/// Backward of one step. dh/dc are the gradients flowing into h_t and c_t.
/// Parameter gradients are accumulated into p's grad tensors; dx, dh_prev and
/// dc_prev are written (not accumulated). dx may be null when input gradients
/// are not needed.
void lstm_cell_backward(const LstmParams& p, const LstmStepCache& cache,
                        const Tensor2D& dh, const Tensor2D& dc, Tensor2D* dx,
                        Tensor2D& dh_prev, Tensor2D& dc_prev);

/// Per-step outputs of a bidirectional pass.
struct BiLstmCache {
  std::vector<LstmStepCache> fwd;  // indexed by time step
  std::vector<LstmStepCache> bwd;
  std::vector<Tensor2D> y;         // L tensors of (2d x B); pads are zero
};

/// Runs the forward cell left-to-right and the backward cell right-to-left
/// over a padded batch. x_steps holds L tensors of (e x B); step_mask is
/// (L x B) with 1 at real tokens and 0 at padding. Padding must be a suffix
/// of each lane. Output column t of lane b is [h_fwd(t) ; h_bwd(t)], zero at
/// padded positions.
void bilstm_forward(const LstmParams& fwd, const LstmParams& bwd,
                    const std::vector<Tensor2D>& x_steps,
                    const Tensor2D& step_mask, BiLstmCache& cache);

/// Backpropagates dy (L tensors of 2d x B) through both directions,
/// accumulating parameter gradients. When dx_steps is non-null it receives
/// input gradients (resized to match x_steps).
void bilstm_backward(const LstmParams& fwd, const LstmParams& bwd,
                     const BiLstmCache& cache, const Tensor2D& step_mask,
                     const std::vector<Tensor2D>& dy,
                     std::vector<Tensor2D>* dx_steps);

}  // namespace entail
