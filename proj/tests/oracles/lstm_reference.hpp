#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

// Straight-line LSTM evaluation on plain arrays. Weights are given per gate
// as row-major (hidden x (hidden + input)) blocks acting on [h_prev, x].
namespace oracle {

struct Gate {
  std::vector<double> w;  // hidden x (hidden + input)
  std::vector<double> b;  // hidden
};

struct CellWeights {
  std::size_t input = 0, hidden = 0;
  Gate f, i, c, o;
};

struct CellState {
  std::vector<double> h, c;
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double affine(const Gate& g, std::size_t row, std::size_t width, const std::vector<double>& h,
                     const std::vector<double>& x) {
  double s = g.b[row];
  for (std::size_t k = 0; k < h.size(); ++k) s += g.w[row * width + k] * h[k];
  for (std::size_t k = 0; k < x.size(); ++k) s += g.w[row * width + h.size() + k] * x[k];
  return s;
}

inline CellState cell(const CellWeights& p, const std::vector<double>& x, const CellState& prev) {
  const std::size_t width = p.hidden + p.input;
  CellState next{std::vector<double>(p.hidden), std::vector<double>(p.hidden)};
  for (std::size_t r = 0; r < p.hidden; ++r) {
    const double f = sigmoid(affine(p.f, r, width, prev.h, x));
    const double i = sigmoid(affine(p.i, r, width, prev.h, x));
    const double cand = std::tanh(affine(p.c, r, width, prev.h, x));
    const double o = sigmoid(affine(p.o, r, width, prev.h, x));
    next.c[r] = f * prev.c[r] + i * cand;
    next.h[r] = o * std::tanh(next.c[r]);
  }
  return next;
}

// Two layers, optional inverted-dropout multipliers on the layer-1 outputs
// (N x hidden1, row-major), FC over the concatenated layer-2 outputs.
inline double stacked_forward(const CellWeights& l1, const CellWeights& l2, const std::vector<double>& fc_w,
                              double fc_b, const std::vector<double>& seq, std::size_t n, std::size_t m,
                              const std::vector<double>* mask = nullptr) {
  CellState s1{std::vector<double>(l1.hidden, 0.0), std::vector<double>(l1.hidden, 0.0)};
  CellState s2{std::vector<double>(l2.hidden, 0.0), std::vector<double>(l2.hidden, 0.0)};
  double out = fc_b;
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<double> x(seq.begin() + static_cast<long>(t * m), seq.begin() + static_cast<long>((t + 1) * m));
    s1 = cell(l1, x, s1);
    std::vector<double> mid = s1.h;
    if (mask)
      for (std::size_t k = 0; k < mid.size(); ++k) mid[k] *= (*mask)[t * l1.hidden + k];
    s2 = cell(l2, mid, s2);
    for (std::size_t k = 0; k < l2.hidden; ++k) out += fc_w[t * l2.hidden + k] * s2.h[k];
  }
  return out;
}

}  // namespace oracle
