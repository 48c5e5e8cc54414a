#include "eegclip/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <cblas.h>

#include "eegclip/error.hpp"

namespace eegclip::ad {

namespace {

[[noreturn]] void shape_error(const char* op, const std::string& what) {
  throw Error(ErrorCode::kShapeMismatch, std::string(op) + ": " + what);
}

/// Number of repetitions of b inside a when b's shape is a suffix of a's.
std::size_t suffix_outer(const char* op, const Shape& a, const Shape& b) {
  if (b.size() > a.size() || !std::equal(b.rbegin(), b.rend(), a.rbegin())) {
    shape_error(op, "cannot broadcast " + to_string(b) + " onto " + to_string(a));
  }
  const std::size_t nb = numel(b);
  return nb == 0 ? 0 : numel(a) / nb;
}

std::size_t last_dim(const char* op, const Tensor& x) {
  if (x.rank() == 0) shape_error(op, "needs at least one axis");
  return x.shape().back();
}

Node* in(Node& self, std::size_t i) { return self.inputs[i].get(); }

/// Row-major C = alpha * op(A) op(B) + beta * C with op(A): M x K, op(B): K x N.
void gemm(bool trans_a, bool trans_b, std::size_t M, std::size_t N, std::size_t K, const double* A,
          const double* B, double beta, double* C) {
  if (M == 0 || N == 0) return;
  if (K == 0) {
    for (std::size_t i = 0; i < M * N; ++i) C[i] *= beta;
    return;
  }
  const auto m = static_cast<blasint>(M), n = static_cast<blasint>(N), k = static_cast<blasint>(K);
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans, trans_b ? CblasTrans : CblasNoTrans, m, n, k,
              1.0, A, trans_a ? m : k, B, trans_b ? k : n, beta, C, n);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  if (b.rank() > a.rank()) return add(b, a);
  const std::size_t outer = suffix_outer("add", a.shape(), b.shape());
  const std::size_t inner = b.numel();
  std::vector<double> out(a.values().begin(), a.values().end());
  const auto bv = b.values();
  for (std::size_t o = 0; o < outer; ++o) {
    double* row = out.data() + o * inner;
    for (std::size_t j = 0; j < inner; ++j) row[j] += bv[j];
  }
  return make_result("add", a.shape(), std::move(out), {a, b}, [outer, inner](Node& self) {
    if (in(self, 0)->requires_grad) {
      auto& g = in(self, 0)->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (in(self, 1)->requires_grad) {
      auto& g = in(self, 1)->grad_buffer();
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t j = 0; j < inner; ++j) g[j] += self.grad[o * inner + j];
      }
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  const std::size_t outer = suffix_outer("sub", a.shape(), b.shape());
  const std::size_t inner = b.numel();
  std::vector<double> out(a.values().begin(), a.values().end());
  const auto bv = b.values();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t j = 0; j < inner; ++j) out[o * inner + j] -= bv[j];
  }
  return make_result("sub", a.shape(), std::move(out), {a, b}, [outer, inner](Node& self) {
    if (in(self, 0)->requires_grad) {
      auto& g = in(self, 0)->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (in(self, 1)->requires_grad) {
      auto& g = in(self, 1)->grad_buffer();
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t j = 0; j < inner; ++j) g[j] -= self.grad[o * inner + j];
      }
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (b.rank() > a.rank()) return mul(b, a);
  const std::size_t outer = suffix_outer("mul", a.shape(), b.shape());
  const std::size_t inner = b.numel();
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t j = 0; j < inner; ++j) out[o * inner + j] = av[o * inner + j] * bv[j];
  }
  return make_result("mul", a.shape(), std::move(out), {a, b}, [outer, inner](Node& self) {
    Node* A = in(self, 0);
    Node* B = in(self, 1);
    if (A->requires_grad) {
      auto& g = A->grad_buffer();
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t j = 0; j < inner; ++j) g[o * inner + j] += self.grad[o * inner + j] * B->value[j];
      }
    }
    if (B->requires_grad) {
      auto& g = B->grad_buffer();
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t j = 0; j < inner; ++j) g[j] += self.grad[o * inner + j] * A->value[o * inner + j];
      }
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (auto& v : out) v *= factor;
  return make_result("scale", a.shape(), std::move(out), {a}, [factor](Node& self) {
    auto& g = in(self, 0)->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor;
  });
}

Tensor mul_scalar(const Tensor& a, const Tensor& s) {
  if (s.numel() != 1) shape_error("mul_scalar", "scalar operand has shape " + to_string(s.shape()));
  const double k = s.values()[0];
  std::vector<double> out(a.values().begin(), a.values().end());
  for (auto& v : out) v *= k;
  return make_result("mul_scalar", a.shape(), std::move(out), {a, s}, [](Node& self) {
    Node* A = in(self, 0);
    Node* S = in(self, 1);
    if (A->requires_grad) {
      auto& g = A->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * S->value[0];
    }
    if (S->requires_grad) {
      double acc = 0.0;
      for (std::size_t i = 0; i < self.grad.size(); ++i) acc += self.grad[i] * A->value[i];
      S->grad_buffer()[0] += acc;
    }
  });
}

Tensor exp(const Tensor& a) {
  std::vector<double> out(a.numel());
  const auto av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(av[i]);
  return make_result("exp", a.shape(), std::move(out), {a}, [](Node& self) {
    auto& g = in(self, 0)->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * self.value[i];
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() < 2 || b.rank() < 2) shape_error("matmul", "operands need rank >= 2");
  const std::size_t M = a.dim(a.rank() - 2);
  const std::size_t K = a.dim(a.rank() - 1);
  const std::size_t Kb = b.dim(b.rank() - 2);
  const std::size_t N = b.dim(b.rank() - 1);
  if (K != Kb) shape_error("matmul", to_string(a.shape()) + " x " + to_string(b.shape()));
  const bool shared = b.rank() == 2;
  if (!shared && (b.rank() != a.rank() || !std::equal(a.shape().begin(), a.shape().end() - 2, b.shape().begin()))) {
    shape_error("matmul", "batch dims differ: " + to_string(a.shape()) + " x " + to_string(b.shape()));
  }
  const std::size_t batch = a.numel() / (M * K);
  Shape out_shape = a.shape();
  out_shape.back() = N;
  std::vector<double> out(batch * M * N, 0.0);
  const double* av = a.values().data();
  const double* bv = b.values().data();
  if (shared) {
    gemm(false, false, batch * M, N, K, av, bv, 0.0, out.data());
  } else {
    for (std::size_t bt = 0; bt < batch; ++bt) {
      gemm(false, false, M, N, K, av + bt * M * K, bv + bt * K * N, 0.0, out.data() + bt * M * N);
    }
  }
  return make_result("matmul", std::move(out_shape), std::move(out), {a, b}, [=](Node& self) {
    Node* An = in(self, 0);
    Node* Bn = in(self, 1);
    const double* g = self.grad.data();
    if (An->requires_grad) {
      double* ga = An->grad_buffer().data();
      if (shared) {
        gemm(false, true, batch * M, K, N, g, Bn->value.data(), 1.0, ga);
      } else {
        for (std::size_t bt = 0; bt < batch; ++bt) {
          gemm(false, true, M, K, N, g + bt * M * N, Bn->value.data() + bt * K * N, 1.0, ga + bt * M * K);
        }
      }
    }
    if (Bn->requires_grad) {
      double* gb = Bn->grad_buffer().data();
      if (shared) {
        gemm(true, false, K, N, batch * M, An->value.data(), g, 1.0, gb);
      } else {
        for (std::size_t bt = 0; bt < batch; ++bt) {
          gemm(true, false, K, N, M, An->value.data() + bt * M * K, g + bt * M * N, 1.0, gb + bt * K * N);
        }
      }
    }
  });
}

Tensor conv2d(const Tensor& x, const Tensor& kernel, const Tensor& bias, Conv2dOptions opts) {
  const bool batched = x.rank() == 4;
  if (!batched && x.rank() != 3) shape_error("conv2d", "input must be [N,C,H,W] or [C,H,W]");
  if (kernel.rank() != 4 || kernel.dim(2) != kernel.dim(3)) shape_error("conv2d", "kernel must be [Co,Ci,k,k]");
  const std::size_t N = batched ? x.dim(0) : 1;
  const std::size_t C = x.dim(batched ? 1 : 0);
  const std::size_t H = x.dim(batched ? 2 : 1);
  const std::size_t W = x.dim(batched ? 3 : 2);
  const std::size_t Co = kernel.dim(0);
  const std::size_t k = kernel.dim(2);
  const std::size_t s = opts.stride;
  const std::size_t p = opts.padding;
  if (kernel.dim(1) != C) {
    shape_error("conv2d", "kernel expects " + std::to_string(kernel.dim(1)) + " input channels, got " + std::to_string(C));
  }
  if (s == 0) shape_error("conv2d", "stride must be positive");
  if (H + 2 * p < k || W + 2 * p < k) shape_error("conv2d", "kernel larger than padded input");
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != Co)) shape_error("conv2d", "bias must be [Co]");
  const std::size_t Ho = (H + 2 * p - k) / s + 1;
  const std::size_t Wo = (W + 2 * p - k) / s + 1;
  const std::size_t P = N * Ho * Wo;  // output positions
  const std::size_t J = C * k * k;    // receptive field size

  // Flat input index of each receptive-field entry of output position r, or
  // -1 where it falls in the zero padding.
  const auto gather_index = [=](std::size_t r, std::ptrdiff_t* row) {
    const std::size_t n = r / (Ho * Wo), oh = (r / Wo) % Ho, ow = r % Wo;
    for (std::size_t ci = 0; ci < C; ++ci) {
      for (std::size_t kh = 0; kh < k; ++kh) {
        const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * s + kh) - static_cast<std::ptrdiff_t>(p);
        for (std::size_t kw = 0; kw < k; ++kw) {
          const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * s + kw) - static_cast<std::ptrdiff_t>(p);
          const bool inside =
              ih >= 0 && iw >= 0 && ih < static_cast<std::ptrdiff_t>(H) && iw < static_cast<std::ptrdiff_t>(W);
          *row++ = inside ? ((static_cast<std::ptrdiff_t>(n * C + ci) * static_cast<std::ptrdiff_t>(H) + ih) *
                                 static_cast<std::ptrdiff_t>(W) +
                             iw)
                          : -1;
        }
      }
    }
  };
  auto cols = std::make_shared<std::vector<double>>(P * J);
  {
    const double* xv = x.values().data();
    std::vector<std::ptrdiff_t> idx(J);
    for (std::size_t r = 0; r < P; ++r) {
      gather_index(r, idx.data());
      double* c = cols->data() + r * J;
      for (std::size_t j = 0; j < J; ++j) c[j] = idx[j] < 0 ? 0.0 : xv[idx[j]];
    }
  }

  const std::size_t HW = Ho * Wo;
  std::vector<double> rows(P * Co);
  gemm(false, true, P, Co, J, cols->data(), kernel.values().data(), 0.0, rows.data());
  std::vector<double> out(N * Co * HW);
  for (std::size_t r = 0; r < P; ++r) {
    const std::size_t n = r / HW, pos = r % HW;
    for (std::size_t co = 0; co < Co; ++co) {
      out[(n * Co + co) * HW + pos] = rows[r * Co + co] + (bias.defined() ? bias.values()[co] : 0.0);
    }
  }

  Shape out_shape = batched ? Shape{N, Co, Ho, Wo} : Shape{Co, Ho, Wo};
  std::vector<Tensor> inputs = {x, kernel};
  if (bias.defined()) inputs.push_back(bias);
  return make_result("conv2d", std::move(out_shape), std::move(out), std::move(inputs),
                     [=](Node& self) {
    Node* X = in(self, 0);
    Node* K = in(self, 1);
    const double* g = self.grad.data();
    if (self.inputs.size() > 2 && in(self, 2)->requires_grad) {
      auto& gb = in(self, 2)->grad_buffer();
      for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t co = 0; co < Co; ++co) {
          const double* plane = g + (n * Co + co) * HW;
          double acc = 0.0;
          for (std::size_t i = 0; i < HW; ++i) acc += plane[i];
          gb[co] += acc;
        }
      }
    }
    double* gw = K->requires_grad ? K->grad_buffer().data() : nullptr;
    double* gx = X->requires_grad ? X->grad_buffer().data() : nullptr;
    if (!gw && !gx) return;
    std::vector<double> grows(P * Co);
    for (std::size_t r = 0; r < P; ++r) {
      const std::size_t n = r / HW, pos = r % HW;
      for (std::size_t co = 0; co < Co; ++co) grows[r * Co + co] = g[(n * Co + co) * HW + pos];
    }
    if (gw) gemm(true, false, Co, J, P, grows.data(), cols->data(), 1.0, gw);
    if (gx) {
      std::vector<double> dcols(P * J);
      gemm(false, false, P, J, Co, grows.data(), K->value.data(), 0.0, dcols.data());
      std::vector<std::ptrdiff_t> idx(J);
      for (std::size_t r = 0; r < P; ++r) {
        gather_index(r, idx.data());
        const double* d = dcols.data() + r * J;
        for (std::size_t j = 0; j < J; ++j) {
          if (idx[j] >= 0) gx[idx[j]] += d[j];
        }
      }
    }
  });
}

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.values().begin(), x.values().end());
  for (auto& v : out) v = v > 0.0 ? v : 0.0;
  return make_result("relu", x.shape(), std::move(out), {x}, [](Node& self) {
    Node* X = in(self, 0);
    auto& g = X->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (X->value[i] > 0.0) g[i] += self.grad[i];
    }
  });
}

Tensor gelu(const Tensor& x) {
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 0.5 * xv[i] * (1.0 + std::erf(xv[i] * std::numbers::sqrt2 / 2.0));
  }
  return make_result("gelu", x.shape(), std::move(out), {x}, [](Node& self) {
    Node* X = in(self, 0);
    auto& g = X->grad_buffer();
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = X->value[i];
      const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
      const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
      g[i] += self.grad[i] * (cdf + v * pdf);
    }
  });
}

Tensor softmax(const Tensor& x) {
  const std::size_t D = last_dim("softmax", x);
  const std::size_t rows = D ? x.numel() / D : 0;
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = xv.data() + r * D;
    double* dst = out.data() + r * D;
    const double mx = *std::max_element(src, src + D);
    double total = 0.0;
    for (std::size_t j = 0; j < D; ++j) total += dst[j] = std::exp(src[j] - mx);
    for (std::size_t j = 0; j < D; ++j) dst[j] /= total;
  }
  return make_result("softmax", x.shape(), std::move(out), {x}, [D, rows](Node& self) {
    auto& g = in(self, 0)->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = self.value.data() + r * D;
      const double* gy = self.grad.data() + r * D;
      double dot = 0.0;
      for (std::size_t j = 0; j < D; ++j) dot += gy[j] * y[j];
      for (std::size_t j = 0; j < D; ++j) g[r * D + j] += y[j] * (gy[j] - dot);
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  const std::size_t D = last_dim("layer_norm", x);
  if (gamma.numel() != D || beta.numel() != D) shape_error("layer_norm", "affine parameters must have the last dim");
  const std::size_t rows = x.numel() / D;
  const auto xv = x.values();
  const auto gv = gamma.values();
  const auto bv = beta.values();
  auto xhat = std::make_shared<std::vector<double>>(xv.size());
  auto inv = std::make_shared<std::vector<double>>(rows);
  std::vector<double> out(xv.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = xv.data() + r * D;
    double mu = 0.0;
    for (std::size_t j = 0; j < D; ++j) mu += src[j];
    mu /= static_cast<double>(D);
    double var = 0.0;
    for (std::size_t j = 0; j < D; ++j) var += (src[j] - mu) * (src[j] - mu);
    var /= static_cast<double>(D);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv)[r] = is;
    for (std::size_t j = 0; j < D; ++j) {
      const double h = (src[j] - mu) * is;
      (*xhat)[r * D + j] = h;
      out[r * D + j] = h * gv[j] + bv[j];
    }
  }
  return make_result("layer_norm", x.shape(), std::move(out), {x, gamma, beta},
                     [D, rows, xhat, inv](Node& self) {
    Node* X = in(self, 0);
    Node* G = in(self, 1);
    Node* B = in(self, 2);
    const double* g = self.grad.data();
    if (G->requires_grad) {
      auto& gg = G->grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < D; ++j) gg[j] += g[r * D + j] * (*xhat)[r * D + j];
      }
    }
    if (B->requires_grad) {
      auto& gb = B->grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < D; ++j) gb[j] += g[r * D + j];
      }
    }
    if (X->requires_grad) {
      auto& gx = X->grad_buffer();
      const double d = static_cast<double>(D);
      for (std::size_t r = 0; r < rows; ++r) {
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t j = 0; j < D; ++j) {
          const double dh = g[r * D + j] * G->value[j];
          s1 += dh;
          s2 += dh * (*xhat)[r * D + j];
        }
        for (std::size_t j = 0; j < D; ++j) {
          const double dh = g[r * D + j] * G->value[j];
          gx[r * D + j] += (*inv)[r] / d * (d * dh - s1 - (*xhat)[r * D + j] * s2);
        }
      }
    }
  });
}

Tensor mean(const Tensor& x, std::size_t axis) {
  if (axis >= x.rank()) shape_error("mean", "axis out of range");
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= x.dim(i);
  for (std::size_t i = axis + 1; i < x.rank(); ++i) inner *= x.dim(i);
  const std::size_t n = x.dim(axis);
  Shape out_shape = x.shape();
  out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
  if (out_shape.empty()) out_shape = {1};
  const auto xv = x.values();
  std::vector<double> out(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t k = 0; k < n; ++k) {
      const double* src = xv.data() + (o * n + k) * inner;
      for (std::size_t i = 0; i < inner; ++i) out[o * inner + i] += src[i];
    }
  }
  const double invn = 1.0 / static_cast<double>(n);
  for (auto& v : out) v *= invn;
  return make_result("mean", std::move(out_shape), std::move(out), {x}, [=](Node& self) {
    auto& g = in(self, 0)->grad_buffer();
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < inner; ++i) g[(o * n + k) * inner + i] += self.grad[o * inner + i] * invn;
      }
    }
  });
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  return make_result("sum", {1}, {total}, {x}, [](Node& self) {
    auto& g = in(self, 0)->grad_buffer();
    for (auto& v : g) v += self.grad[0];
  });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) shape_error("concat", "no inputs");
  const Shape& ref = parts[0].shape();
  if (axis >= ref.size()) shape_error("concat", "axis out of range");
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= ref[i];
  for (std::size_t i = axis + 1; i < ref.size(); ++i) inner *= ref[i];
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rank() != ref.size()) shape_error("concat", "rank mismatch");
    for (std::size_t i = 0; i < ref.size(); ++i) {
      if (i != axis && p.dim(i) != ref[i]) shape_error("concat", "shape mismatch off the concat axis");
    }
    widths.push_back(p.dim(axis) * inner);
    total += p.dim(axis);
  }
  Shape out_shape = ref;
  out_shape[axis] = total;
  const std::size_t row = total * inner;
  std::vector<double> out(outer * row);
  std::size_t offset = 0;
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    const auto pv = parts[pi].values();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(pv.data() + o * widths[pi], widths[pi], out.data() + o * row + offset);
    }
    offset += widths[pi];
  }
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return make_result("concat", std::move(out_shape), std::move(out), std::move(inputs),
                     [outer, row, widths](Node& self) {
    std::size_t off = 0;
    for (std::size_t pi = 0; pi < widths.size(); ++pi) {
      Node* P = in(self, pi);
      if (P->requires_grad) {
        auto& g = P->grad_buffer();
        for (std::size_t o = 0; o < outer; ++o) {
          const double* src = self.grad.data() + o * row + off;
          for (std::size_t j = 0; j < widths[pi]; ++j) g[o * widths[pi] + j] += src[j];
        }
      }
      off += widths[pi];
    }
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.numel()) {
    shape_error("reshape", "cannot reshape " + to_string(x.shape()) + " to " + to_string(shape));
  }
  std::vector<double> out(x.values().begin(), x.values().end());
  return make_result("reshape", std::move(shape), std::move(out), {x}, [](Node& self) {
    auto& g = in(self, 0)->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

namespace {

/// For each output linear index, the matching input linear index.
std::vector<std::size_t> permutation_map(const Shape& shape, std::span<const std::size_t> perm) {
  const std::size_t r = shape.size();
  std::vector<std::size_t> in_stride(r, 1);
  for (std::size_t i = r; i-- > 1;) in_stride[i - 1] = in_stride[i] * shape[i];
  std::vector<std::size_t> out_dims(r), step(r);
  for (std::size_t d = 0; d < r; ++d) {
    out_dims[d] = shape[perm[d]];
    step[d] = in_stride[perm[d]];
  }
  const std::size_t n = numel(shape);
  std::vector<std::size_t> map(n);
  std::vector<std::size_t> idx(r, 0);
  std::size_t src = 0;
  for (std::size_t o = 0; o < n; ++o) {
    map[o] = src;
    for (std::size_t d = r; d-- > 0;) {
      if (++idx[d] < out_dims[d]) {
        src += step[d];
        break;
      }
      src -= step[d] * (out_dims[d] - 1);
      idx[d] = 0;
    }
  }
  return map;
}

}  // namespace

Tensor permute(const Tensor& x, std::span<const std::size_t> perm) {
  const std::size_t r = x.rank();
  if (perm.size() != r) shape_error("permute", "permutation rank mismatch");
  std::vector<bool> seen(r, false);
  for (auto p : perm) {
    if (p >= r || seen[p]) shape_error("permute", "invalid permutation");
    seen[p] = true;
  }
  Shape out_shape(r);
  for (std::size_t d = 0; d < r; ++d) out_shape[d] = x.dim(perm[d]);
  auto map = std::make_shared<std::vector<std::size_t>>(permutation_map(x.shape(), perm));
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t o = 0; o < out.size(); ++o) out[o] = xv[(*map)[o]];
  return make_result("permute", std::move(out_shape), std::move(out), {x}, [map](Node& self) {
    auto& g = in(self, 0)->grad_buffer();
    for (std::size_t o = 0; o < self.grad.size(); ++o) g[(*map)[o]] += self.grad[o];
  });
}

Tensor transpose(const Tensor& x) {
  if (x.rank() < 2) shape_error("transpose", "needs rank >= 2");
  std::vector<std::size_t> perm(x.rank());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::swap(perm[perm.size() - 1], perm[perm.size() - 2]);
  return permute(x, perm);
}

Tensor l2_normalize(const Tensor& x, double eps) {
  const std::size_t D = last_dim("l2_normalize", x);
  const std::size_t rows = x.numel() / D;
  const auto xv = x.values();
  auto norms = std::make_shared<std::vector<double>>(rows);
  std::vector<double> out(xv.size());
  for (std::size_t r = 0; r < rows; ++r) {
    double ss = 0.0;
    for (std::size_t j = 0; j < D; ++j) ss += xv[r * D + j] * xv[r * D + j];
    const double n = std::max(std::sqrt(ss), eps);
    (*norms)[r] = n;
    for (std::size_t j = 0; j < D; ++j) out[r * D + j] = xv[r * D + j] / n;
  }
  return make_result("l2_normalize", x.shape(), std::move(out), {x}, [D, rows, norms, eps](Node& self) {
    auto& g = in(self, 0)->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      const double n = (*norms)[r];
      const double* y = self.value.data() + r * D;
      const double* gy = self.grad.data() + r * D;
      if (n > eps) {
        double dot = 0.0;
        for (std::size_t j = 0; j < D; ++j) dot += gy[j] * y[j];
        for (std::size_t j = 0; j < D; ++j) g[r * D + j] += (gy[j] - y[j] * dot) / n;
      } else {
        for (std::size_t j = 0; j < D; ++j) g[r * D + j] += gy[j] / eps;
      }
    }
  });
}

Tensor add_position(const Tensor& x, const Tensor& table) {
  if (x.rank() < 2 || table.rank() != 2) shape_error("add_position", "x must be [..., T, D] and table [T_max, D]");
  const std::size_t T = x.dim(x.rank() - 2);
  const std::size_t D = x.dim(x.rank() - 1);
  if (table.dim(1) != D || T > table.dim(0)) {
    shape_error("add_position", "table " + to_string(table.shape()) + " cannot cover " + to_string(x.shape()));
  }
  const std::size_t inner = T * D;
  const std::size_t outer = x.numel() / inner;
  std::vector<double> out(x.values().begin(), x.values().end());
  const auto tv = table.values();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t j = 0; j < inner; ++j) out[o * inner + j] += tv[j];
  }
  return make_result("add_position", x.shape(), std::move(out), {x, table}, [outer, inner](Node& self) {
    if (in(self, 0)->requires_grad) {
      auto& g = in(self, 0)->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (in(self, 1)->requires_grad) {
      auto& g = in(self, 1)->grad_buffer();
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t j = 0; j < inner; ++j) g[j] += self.grad[o * inner + j];
      }
    }
  });
}

Tensor dropout(const Tensor& x, double p, std::mt19937_64& rng, bool training) {
  if (!training || p <= 0.0) return x;
  if (p >= 1.0) throw Error(ErrorCode::kInvalidArgument, "dropout: p must be < 1");
  auto mask = std::make_shared<std::vector<double>>(x.numel());
  std::bernoulli_distribution keep(1.0 - p);
  const double k = 1.0 / (1.0 - p);
  for (auto& m : *mask) m = keep(rng) ? k : 0.0;
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * (*mask)[i];
  return make_result("dropout", x.shape(), std::move(out), {x}, [mask](Node& self) {
    auto& g = in(self, 0)->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * (*mask)[i];
  });
}

Tensor cross_entropy(const Tensor& logits, std::span<const std::size_t> targets) {
  if (logits.rank() != 2) shape_error("cross_entropy", "logits must be [B, K]");
  const std::size_t B = logits.dim(0);
  const std::size_t K = logits.dim(1);
  if (targets.size() != B) shape_error("cross_entropy", "one target per row required");
  for (auto t : targets) {
    if (t >= K) throw Error(ErrorCode::kInvalidArgument, "cross_entropy: invalid target index " + std::to_string(t));
  }
  const auto lv = logits.values();
  auto probs = std::make_shared<std::vector<double>>(B * K);
  double loss = 0.0;
  for (std::size_t i = 0; i < B; ++i) {
    const double* row = lv.data() + i * K;
    const double mx = *std::max_element(row, row + K);
    double total = 0.0;
    for (std::size_t j = 0; j < K; ++j) total += std::exp(row[j] - mx);
    const double lse = mx + std::log(total);
    loss += lse - row[targets[i]];
    for (std::size_t j = 0; j < K; ++j) (*probs)[i * K + j] = std::exp(row[j] - lse);
  }
  loss /= static_cast<double>(B);
  std::vector<std::size_t> tgt(targets.begin(), targets.end());
  return make_result("cross_entropy", {1}, {loss}, {logits}, [B, K, probs, tgt](Node& self) {
    auto& g = in(self, 0)->grad_buffer();
    const double scale = self.grad[0] / static_cast<double>(B);
    for (std::size_t i = 0; i < B; ++i) {
      for (std::size_t j = 0; j < K; ++j) {
        g[i * K + j] += scale * ((*probs)[i * K + j] - (j == tgt[i] ? 1.0 : 0.0));
      }
    }
  });
}

}  // namespace eegclip::ad
