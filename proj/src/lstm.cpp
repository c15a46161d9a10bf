#include "entail/lstm.hpp"

namespace entail {

namespace {

GateParams make_gate(ParameterStore& store, const std::string& prefix,
                     std::size_t e, std::size_t d, Rng& rng, real bias_init) {
  GateParams g;
  g.w = &store.add(prefix + ".w", e, d);
  g.u = &store.add(prefix + ".u", d, d);
  g.b = &store.add(prefix + ".b", d, 1);
  rng.fill_uniform(g.w->value, real(-0.08), real(0.08));
  rng.fill_uniform(g.u->value, real(-0.08), real(0.08));
  g.b->value.fill(bias_init);
  return g;
}

// pre = w^T x + u^T h_prev + b
Tensor2D gate_preact(const GateParams& g, const Tensor2D& x,
                     const Tensor2D& h_prev) {
  Tensor2D pre = matmul_tn(g.w->value, x);
  add_inplace(pre, matmul_tn(g.u->value, h_prev));
  add_col_broadcast(pre, g.b->value);
  return pre;
}

// Accumulates the three gradients of one gate and adds its contribution to
// dx / dh_prev. dpre is the gradient at the pre-activation.
void gate_backward(const GateParams& g, const Tensor2D& x,
                   const Tensor2D& h_prev, const Tensor2D& dpre, Tensor2D* dx,
                   Tensor2D& dh_prev) {
  add_matmul_nt(g.w->grad, x, dpre);       // (e x B)(d x B)^T -> e x d
  add_matmul_nt(g.u->grad, h_prev, dpre);  // d x d
  add_inplace(g.b->grad, row_sum(dpre));
  if (dx) add_matmul(*dx, g.w->value, dpre);     // (e x d)(d x B)
  add_matmul(dh_prev, g.u->value, dpre);         // (d x d)(d x B)
}

Tensor2D sigmoid_backward(const Tensor2D& act, const Tensor2D& dact) {
  Tensor2D d = hadamard(act, dact);
  const real* a = act.data();
  real* p = d.data();
  for (std::size_t i = 0; i < d.size(); ++i) p[i] *= (real(1) - a[i]);
  return d;
}

Tensor2D tanh_backward(const Tensor2D& act, const Tensor2D& dact) {
  Tensor2D d(act.rows(), act.cols());
  const real* a = act.data();
  const real* da = dact.data();
  real* p = d.data();
  for (std::size_t i = 0; i < d.size(); ++i)
    p[i] = da[i] * (real(1) - a[i] * a[i]);
  return d;
}

Tensor2D mask_row_of(const Tensor2D& step_mask, std::size_t t) {
  Tensor2D row(1, step_mask.cols());
  for (std::size_t b = 0; b < step_mask.cols(); ++b) row(0, b) = step_mask(t, b);
  return row;
}

}  // namespace

LstmParams make_lstm_params(ParameterStore& store, const std::string& prefix,
                            std::size_t embed_dim, std::size_t hidden_dim,
                            Rng& rng) {
  if (embed_dim == 0 || hidden_dim == 0) {
    throw ArgumentError("make_lstm_params: dimensions must be positive");
  }
  LstmParams p;
  p.embed_dim = embed_dim;
  p.hidden_dim = hidden_dim;
  p.input = make_gate(store, prefix + ".input", embed_dim, hidden_dim, rng, 0);
  p.forget =
      make_gate(store, prefix + ".forget", embed_dim, hidden_dim, rng, 1);
  p.output =
      make_gate(store, prefix + ".output", embed_dim, hidden_dim, rng, 0);
  p.candidate =
      make_gate(store, prefix + ".candidate", embed_dim, hidden_dim, rng, 0);
  return p;
}

void lstm_cell_forward(const LstmParams& p, const Tensor2D& x,
                       const Tensor2D& h_prev, const Tensor2D& c_prev,
                       LstmStepCache& cache) {
  if (x.rows() != p.embed_dim) {
    throw DimensionError("lstm_cell_forward: input rows " +
                         std::to_string(x.rows()) + " != embed_dim " +
                         std::to_string(p.embed_dim));
  }
  if (h_prev.rows() != p.hidden_dim || c_prev.rows() != p.hidden_dim ||
      h_prev.cols() != x.cols() || c_prev.cols() != x.cols()) {
    throw DimensionError("lstm_cell_forward: state shape mismatch, h " +
                         h_prev.shape_str() + ", c " + c_prev.shape_str() +
                         ", x " + x.shape_str());
  }
  cache.x = x;
  cache.h_prev = h_prev;
  cache.c_prev = c_prev;
  cache.i = sigmoid_map(gate_preact(p.input, x, h_prev));
  cache.f = sigmoid_map(gate_preact(p.forget, x, h_prev));
  cache.o = sigmoid_map(gate_preact(p.output, x, h_prev));
  cache.g = tanh_map(gate_preact(p.candidate, x, h_prev));
  cache.c = add(hadamard(cache.f, c_prev), hadamard(cache.i, cache.g));
  cache.tanh_c = tanh_map(cache.c);
  cache.h = hadamard(cache.o, cache.tanh_c);
}

void lstm_cell_backward(const LstmParams& p, const LstmStepCache& cache,
                        const Tensor2D& dh, const Tensor2D& dc, Tensor2D* dx,
                        Tensor2D& dh_prev, Tensor2D& dc_prev) {
  // c_t = f.c_prev + i.g ; h_t = o.tanh(c_t)
  Tensor2D d_o = hadamard(dh, cache.tanh_c);
  Tensor2D dc_total = tanh_backward(cache.tanh_c, hadamard(dh, cache.o));
  add_inplace(dc_total, dc);

  Tensor2D d_i = hadamard(dc_total, cache.g);
  Tensor2D d_f = hadamard(dc_total, cache.c_prev);
  Tensor2D d_g = hadamard(dc_total, cache.i);
  dc_prev = hadamard(dc_total, cache.f);

  dh_prev = Tensor2D(cache.h_prev.rows(), cache.h_prev.cols());
  if (dx) *dx = Tensor2D(cache.x.rows(), cache.x.cols());

  gate_backward(p.input, cache.x, cache.h_prev, sigmoid_backward(cache.i, d_i),
                dx, dh_prev);
  gate_backward(p.forget, cache.x, cache.h_prev,
                sigmoid_backward(cache.f, d_f), dx, dh_prev);
  gate_backward(p.output, cache.x, cache.h_prev,
                sigmoid_backward(cache.o, d_o), dx, dh_prev);
  gate_backward(p.candidate, cache.x, cache.h_prev,
                tanh_backward(cache.g, d_g), dx, dh_prev);
}

void bilstm_forward(const LstmParams& fwd, const LstmParams& bwd,
                    const std::vector<Tensor2D>& x_steps,
                    const Tensor2D& step_mask, BiLstmCache& cache) {
  const std::size_t steps = x_steps.size();
  if (steps == 0) throw ArgumentError("bilstm_forward: empty sentence");
  if (step_mask.rows() != steps || step_mask.cols() != x_steps[0].cols()) {
    throw DimensionError("bilstm_forward: mask " + step_mask.shape_str() +
                         " does not match " + std::to_string(steps) +
                         " steps of " + x_steps[0].shape_str());
  }
  const std::size_t batch = x_steps[0].cols();
  const std::size_t d = fwd.hidden_dim;
  if (bwd.hidden_dim != d) {
    throw DimensionError("bilstm_forward: direction hidden sizes differ");
  }

  cache.fwd.assign(steps, LstmStepCache{});
  cache.bwd.assign(steps, LstmStepCache{});
  cache.y.assign(steps, Tensor2D(2 * d, batch));

  Tensor2D h(d, batch), c(d, batch);
  for (std::size_t t = 0; t < steps; ++t) {
    lstm_cell_forward(fwd, x_steps[t], h, c, cache.fwd[t]);
    const Tensor2D mask = mask_row_of(step_mask, t);
    mul_row_broadcast(cache.fwd[t].h, mask);
    mul_row_broadcast(cache.fwd[t].c, mask);
    h = cache.fwd[t].h;
    c = cache.fwd[t].c;
  }

  h.zero();
  c.zero();
  for (std::size_t ti = steps; ti-- > 0;) {
    lstm_cell_forward(bwd, x_steps[ti], h, c, cache.bwd[ti]);
    const Tensor2D mask = mask_row_of(step_mask, ti);
    mul_row_broadcast(cache.bwd[ti].h, mask);
    mul_row_broadcast(cache.bwd[ti].c, mask);
    h = cache.bwd[ti].h;
    c = cache.bwd[ti].c;
  }

  for (std::size_t t = 0; t < steps; ++t) {
    Tensor2D& y = cache.y[t];
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t b = 0; b < batch; ++b) {
        y(r, b) = cache.fwd[t].h(r, b);
        y(r + d, b) = cache.bwd[t].h(r, b);
      }
    }
  }
}

void bilstm_backward(const LstmParams& fwd, const LstmParams& bwd,
                     const BiLstmCache& cache, const Tensor2D& step_mask,
                     const std::vector<Tensor2D>& dy,
                     std::vector<Tensor2D>* dx_steps) {
  const std::size_t steps = cache.y.size();
  if (dy.size() != steps) {
    throw DimensionError("bilstm_backward: dy has " +
                         std::to_string(dy.size()) + " steps, cache has " +
                         std::to_string(steps));
  }
  const std::size_t batch = cache.y[0].cols();
  const std::size_t d = fwd.hidden_dim;

  if (dx_steps) {
    dx_steps->assign(steps, Tensor2D(fwd.embed_dim, batch));
  }

  // Forward direction runs its backward pass from the last step down.
  Tensor2D dh_next(d, batch), dc_next(d, batch);
  Tensor2D dx_local;
  for (std::size_t t = steps; t-- > 0;) {
    const Tensor2D mask = mask_row_of(step_mask, t);
    Tensor2D dh = dh_next;
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t b = 0; b < batch; ++b) dh(r, b) += dy[t](r, b);
    // The forward pass multiplied h_t and c_t by the mask; mirror it here.
    mul_row_broadcast(dh, mask);
    mul_row_broadcast(dc_next, mask);
    lstm_cell_backward(fwd, cache.fwd[t], dh, dc_next,
                       dx_steps ? &dx_local : nullptr, dh_next, dc_next);
    if (dx_steps) add_inplace((*dx_steps)[t], dx_local);
  }

  // Backward direction: its "previous" step is t+1, so unroll upward.
  dh_next.zero();
  dc_next.zero();
  for (std::size_t t = 0; t < steps; ++t) {
    const Tensor2D mask = mask_row_of(step_mask, t);
    Tensor2D dh = dh_next;
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t b = 0; b < batch; ++b) dh(r, b) += dy[t](r + d, b);
    mul_row_broadcast(dh, mask);
    mul_row_broadcast(dc_next, mask);
    lstm_cell_backward(bwd, cache.bwd[t], dh, dc_next,
                       dx_steps ? &dx_local : nullptr, dh_next, dc_next);
    if (dx_steps) add_inplace((*dx_steps)[t], dx_local);
  }
}

}  // namespace entail
