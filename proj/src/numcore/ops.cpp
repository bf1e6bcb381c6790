/* Copyright 2026 The PSRN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "psrn/numcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "psrn/numcore/error.hpp"

namespace psrn::numcore {

namespace {

Tape& tape_of(Var v) {
  if (!v.valid()) throw ConsistencyError("operation on an unbound variable");
  return *v.tape;
}

void require_same_tape(Var a, Var b) {
  if (a.tape != b.tape) {
    throw ConsistencyError("operands belong to different tapes");
  }
}

void require_same_shape(const char* op, const TensorBuffer& a,
                        const TensorBuffer& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch between " +
                         shape_string(a.shape()) + " and " +
                         shape_string(b.shape()));
  }
}

std::size_t last_extent(const TensorBuffer& t) { return t.shape().back(); }

std::size_t leading_rows(const TensorBuffer& t) {
  return t.rank() == 1 ? 1 : t.size() / t.shape().back();
}

}  // namespace

Activation parse_activation(const std::string& name) {
  if (name == "identity" || name == "linear") return Activation::kIdentity;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw ConfigError("unknown activation '" + name + "'");
}

std::string activation_name(Activation kind) {
  switch (kind) {
    case Activation::kIdentity: return "identity";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
  }
  return "identity";
}

Var affine(Var input, Var weights, std::optional<Var> bias) {
  Tape& tape = tape_of(input);
  require_same_tape(input, weights);
  if (bias) require_same_tape(input, *bias);
  const TensorBuffer& x = tape.value(input);
  const TensorBuffer& w = tape.value(weights);
  if (w.rank() != 2 || x.rank() < 1 || x.rank() > 2 ||
      last_extent(x) != w.dim(1)) {
    throw DimensionError("affine: input " + shape_string(x.shape()) +
                         " does not conform to weights " +
                         shape_string(w.shape()));
  }
  const std::size_t n_out = w.dim(0);
  const std::size_t n_in = w.dim(1);
  if (bias) {
    const TensorBuffer& b = tape.value(*bias);
    if (b.rank() != 1 || b.dim(0) != n_out) {
      throw DimensionError("affine: bias " + shape_string(b.shape()) +
                           " does not conform to weights " +
                           shape_string(w.shape()));
    }
  }
  const std::size_t m = leading_rows(x);
  Shape out_shape = x.rank() == 1 ? Shape{n_out} : Shape{m, n_out};
  TensorBuffer y(out_shape);
  const double* wp = w.values().data();
  const double* xp = x.values().data();
  double* yp = y.values().data();
  const double* bp = bias ? tape.value(*bias).values().data() : nullptr;
  for (std::size_t r = 0; r < m; ++r) {
    const double* xr = xp + r * n_in;
    for (std::size_t o = 0; o < n_out; ++o) {
      const double* wr = wp + o * n_in;
      double acc = bp ? bp[o] : 0.0;
      for (std::size_t i = 0; i < n_in; ++i) acc += wr[i] * xr[i];
      yp[r * n_out + o] = acc;
    }
  }
  std::vector<Var> parents{input, weights};
  if (bias) parents.push_back(*bias);
  return tape.record(
      std::move(y), parents,
      [input, weights, bias, m, n_in, n_out](Tape& t, Var self) {
        std::span<const double> gy = t.grad(self);
        const double* xp = t.value(input).values().data();
        const double* wp = t.value(weights).values().data();
        std::span<double> gx = t.grad_if(input);
        std::span<double> gw = t.grad_if(weights);
        std::span<double> gb = bias ? t.grad_if(*bias) : std::span<double>{};
        for (std::size_t r = 0; r < m; ++r) {
          const double* xr = xp + r * n_in;
          for (std::size_t o = 0; o < n_out; ++o) {
            const double g = gy[r * n_out + o];
            if (g == 0.0) continue;
            if (!gx.empty()) {
              const double* wr = wp + o * n_in;
              double* gxr = gx.data() + r * n_in;
              for (std::size_t i = 0; i < n_in; ++i) gxr[i] += g * wr[i];
            }
            if (!gw.empty()) {
              double* gwr = gw.data() + o * n_in;
              for (std::size_t i = 0; i < n_in; ++i) gwr[i] += g * xr[i];
            }
            if (!gb.empty()) gb[o] += g;
          }
        }
      });
}

Var activate(Var input, Activation kind) {
  Tape& tape = tape_of(input);
  const TensorBuffer& x = tape.value(input);
  TensorBuffer y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i];
    switch (kind) {
      case Activation::kIdentity: y[i] = v; break;
      case Activation::kSigmoid: y[i] = 1.0 / (1.0 + std::exp(-v)); break;
      case Activation::kTanh: y[i] = std::tanh(v); break;
      case Activation::kRelu: y[i] = v > 0.0 ? v : 0.0; break;
    }
  }
  return tape.record(std::move(y), {input}, [input, kind](Tape& t, Var self) {
    std::span<double> gx = t.grad(input);
    std::span<const double> gy = t.grad(self);
    const TensorBuffer& y = t.value(self);
    const TensorBuffer& x = t.value(input);
    for (std::size_t i = 0; i < gx.size(); ++i) {
      double d = 1.0;
      switch (kind) {
        case Activation::kIdentity: d = 1.0; break;
        case Activation::kSigmoid: d = y[i] * (1.0 - y[i]); break;
        case Activation::kTanh: d = 1.0 - y[i] * y[i]; break;
        case Activation::kRelu: d = x[i] > 0.0 ? 1.0 : 0.0; break;
      }
      gx[i] += gy[i] * d;
    }
  });
}

namespace {

enum class Binary { kAdd, kSub, kMul };

Var binary(Var a, Var b, Binary op, const char* name) {
  Tape& tape = tape_of(a);
  require_same_tape(a, b);
  const TensorBuffer& x = tape.value(a);
  const TensorBuffer& y = tape.value(b);
  require_same_shape(name, x, y);
  TensorBuffer out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    switch (op) {
      case Binary::kAdd: out[i] = x[i] + y[i]; break;
      case Binary::kSub: out[i] = x[i] - y[i]; break;
      case Binary::kMul: out[i] = x[i] * y[i]; break;
    }
  }
  return tape.record(std::move(out), {a, b}, [a, b, op](Tape& t, Var self) {
    std::span<const double> g = t.grad(self);
    std::span<double> ga = t.grad_if(a);
    std::span<double> gb = t.grad_if(b);
    const TensorBuffer& x = t.value(a);
    const TensorBuffer& y = t.value(b);
    for (std::size_t i = 0; i < g.size(); ++i) {
      switch (op) {
        case Binary::kAdd:
          if (!ga.empty()) ga[i] += g[i];
          if (!gb.empty()) gb[i] += g[i];
          break;
        case Binary::kSub:
          if (!ga.empty()) ga[i] += g[i];
          if (!gb.empty()) gb[i] -= g[i];
          break;
        case Binary::kMul:
          if (!ga.empty()) ga[i] += g[i] * y[i];
          if (!gb.empty()) gb[i] += g[i] * x[i];
          break;
      }
    }
  });
}

}  // namespace

Var add(Var a, Var b) { return binary(a, b, Binary::kAdd, "add"); }
Var sub(Var a, Var b) { return binary(a, b, Binary::kSub, "sub"); }
Var mul(Var a, Var b) { return binary(a, b, Binary::kMul, "mul"); }

Var scale(Var a, double factor) {
  Tape& tape = tape_of(a);
  const TensorBuffer& x = tape.value(a);
  TensorBuffer out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * factor;
  return tape.record(std::move(out), {a}, [a, factor](Tape& t, Var self) {
    std::span<const double> g = t.grad(self);
    std::span<double> ga = t.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor;
  });
}

Var add_rowwise(Var m, Var v) {
  Tape& tape = tape_of(m);
  require_same_tape(m, v);
  const TensorBuffer& x = tape.value(m);
  const TensorBuffer& b = tape.value(v);
  if (x.rank() != 2 || b.rank() != 1 || b.dim(0) != x.dim(1)) {
    throw DimensionError("add_rowwise: " + shape_string(x.shape()) + " and " +
                         shape_string(b.shape()) + " do not conform");
  }
  const std::size_t cols = x.dim(1);
  TensorBuffer out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + b[i % cols];
  return tape.record(std::move(out), {m, v}, [m, v, cols](Tape& t, Var self) {
    std::span<const double> g = t.grad(self);
    std::span<double> gm = t.grad_if(m);
    std::span<double> gv = t.grad_if(v);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!gm.empty()) gm[i] += g[i];
      if (!gv.empty()) gv[i % cols] += g[i];
    }
  });
}

Var sum(std::span<const Var> terms) {
  if (terms.empty()) throw DimensionError("sum: no terms");
  Tape& tape = tape_of(terms.front());
  const TensorBuffer& first = tape.value(terms.front());
  TensorBuffer out(first.shape());
  for (Var term : terms) {
    require_same_tape(terms.front(), term);
    const TensorBuffer& x = tape.value(term);
    require_same_shape("sum", first, x);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += x[i];
  }
  std::vector<Var> parents(terms.begin(), terms.end());
  return tape.record(std::move(out), parents,
                     [parents](Tape& t, Var self) {
                       std::span<const double> g = t.grad(self);
                       for (Var p : parents) {
                         std::span<double> gp = t.grad_if(p);
                         for (std::size_t i = 0; i < gp.size(); ++i) {
                           gp[i] += g[i];
                         }
                       }
                     });
}

Var mean(std::span<const Var> terms) {
  if (terms.empty()) throw DimensionError("mean: no terms");
  return scale(sum(terms), 1.0 / static_cast<double>(terms.size()));
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat: no parts");
  Tape& tape = tape_of(parts.front());
  const TensorBuffer& first = tape.value(parts.front());
  const std::size_t rank = first.rank();
  if (rank < 1 || rank > 2) {
    throw DimensionError("concat: only vectors and matrices are supported");
  }
  const std::size_t rows_n = leading_rows(first);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (Var p : parts) {
    require_same_tape(parts.front(), p);
    const TensorBuffer& x = tape.value(p);
    if (x.rank() != rank || leading_rows(x) != rows_n) {
      throw DimensionError("concat: part " + shape_string(x.shape()) +
                           " does not conform to " +
                           shape_string(first.shape()));
    }
    widths.push_back(last_extent(x));
    total += widths.back();
  }
  TensorBuffer out(rank == 1 ? Shape{total} : Shape{rows_n, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const TensorBuffer& x = tape.value(parts[k]);
    for (std::size_t r = 0; r < rows_n; ++r) {
      std::copy_n(x.values().data() + r * widths[k], widths[k],
                  out.values().data() + r * total + offset);
    }
    offset += widths[k];
  }
  std::vector<Var> parents(parts.begin(), parts.end());
  return tape.record(
      std::move(out), parents,
      [parents, widths, rows_n, total](Tape& t, Var self) {
        std::span<const double> g = t.grad(self);
        std::size_t offset = 0;
        for (std::size_t k = 0; k < parents.size(); ++k) {
          std::span<double> gp = t.grad_if(parents[k]);
          if (!gp.empty()) {
            for (std::size_t r = 0; r < rows_n; ++r) {
              for (std::size_t i = 0; i < widths[k]; ++i) {
                gp[r * widths[k] + i] += g[r * total + offset + i];
              }
            }
          }
          offset += widths[k];
        }
      });
}

Var slice(Var v, std::size_t begin, std::size_t length) {
  Tape& tape = tape_of(v);
  const TensorBuffer& x = tape.value(v);
  if (x.rank() != 1 || begin + length > x.size() || length == 0) {
    throw DimensionError("slice [" + std::to_string(begin) + ", +" +
                         std::to_string(length) + ") out of range for " +
                         shape_string(x.shape()));
  }
  TensorBuffer out({length});
  std::copy_n(x.values().data() + begin, length, out.values().data());
  return tape.record(std::move(out), {v}, [v, begin](Tape& t, Var self) {
    std::span<const double> g = t.grad(self);
    std::span<double> gv = t.grad(v);
    for (std::size_t i = 0; i < g.size(); ++i) gv[begin + i] += g[i];
  });
}

Var rows(Var m, std::size_t begin, std::size_t count) {
  Tape& tape = tape_of(m);
  const TensorBuffer& x = tape.value(m);
  if (x.rank() != 2 || count == 0 || begin + count > x.dim(0)) {
    throw DimensionError("rows [" + std::to_string(begin) + ", +" +
                         std::to_string(count) + ") out of range for " +
                         shape_string(x.shape()));
  }
  const std::size_t cols = x.dim(1);
  TensorBuffer out({count, cols});
  std::copy_n(x.values().data() + begin * cols, count * cols,
              out.values().data());
  return tape.record(std::move(out), {m}, [m, begin, cols](Tape& t, Var self) {
    std::span<const double> g = t.grad(self);
    std::span<double> gm = t.grad(m);
    for (std::size_t i = 0; i < g.size(); ++i) gm[begin * cols + i] += g[i];
  });
}

Var row(Var m, std::size_t index) {
  Tape& tape = tape_of(m);
  const TensorBuffer& x = tape.value(m);
  if (x.rank() != 2 || index >= x.dim(0)) {
    throw IndexError("row " + std::to_string(index) + " out of range for " +
                     shape_string(x.shape()));
  }
  const std::size_t cols = x.dim(1);
  return reshape(rows(m, index, 1), Shape{cols});
}

Var stack_rows(std::span<const Var> vectors) {
  if (vectors.empty()) throw DimensionError("stack_rows: no rows");
  Tape& tape = tape_of(vectors.front());
  const std::size_t cols = tape.value(vectors.front()).size();
  TensorBuffer out({vectors.size(), cols});
  for (std::size_t r = 0; r < vectors.size(); ++r) {
    require_same_tape(vectors.front(), vectors[r]);
    const TensorBuffer& x = tape.value(vectors[r]);
    if (x.rank() != 1 || x.size() != cols) {
      throw DimensionError("stack_rows: row " + shape_string(x.shape()) +
                           " differs from width " + std::to_string(cols));
    }
    std::copy_n(x.values().data(), cols, out.values().data() + r * cols);
  }
  std::vector<Var> parents(vectors.begin(), vectors.end());
  return tape.record(std::move(out), parents,
                     [parents, cols](Tape& t, Var self) {
                       std::span<const double> g = t.grad(self);
                       for (std::size_t r = 0; r < parents.size(); ++r) {
                         std::span<double> gp = t.grad_if(parents[r]);
                         for (std::size_t i = 0; i < gp.size(); ++i) {
                           gp[i] += g[r * cols + i];
                         }
                       }
                     });
}

Var tile_rows(Var v, std::size_t count) {
  Tape& tape = tape_of(v);
  const TensorBuffer& x = tape.value(v);
  if (x.rank() != 1 || count == 0) {
    throw DimensionError("tile_rows: expected a vector and a positive count");
  }
  const std::size_t cols = x.size();
  TensorBuffer out({count, cols});
  for (std::size_t r = 0; r < count; ++r) {
    std::copy_n(x.values().data(), cols, out.values().data() + r * cols);
  }
  return tape.record(std::move(out), {v}, [v, cols](Tape& t, Var self) {
    std::span<const double> g = t.grad(self);
    std::span<double> gv = t.grad(v);
    for (std::size_t i = 0; i < g.size(); ++i) gv[i % cols] += g[i];
  });
}

Var sum_rows(Var m) {
  Tape& tape = tape_of(m);
  const TensorBuffer& x = tape.value(m);
  if (x.rank() != 2) throw DimensionError("sum_rows: expected a matrix");
  const std::size_t cols = x.dim(1);
  TensorBuffer out({cols});
  // Fixed row-major summation order keeps the reduction bit-reproducible.
  for (std::size_t r = 0; r < x.dim(0); ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[c] += x.at(r, c);
  }
  return tape.record(std::move(out), {m}, [m, cols](Tape& t, Var self) {
    std::span<const double> g = t.grad(self);
    std::span<double> gm = t.grad(m);
    for (std::size_t i = 0; i < gm.size(); ++i) gm[i] += g[i % cols];
  });
}

Var reshape(Var v, Shape shape) {
  Tape& tape = tape_of(v);
  const TensorBuffer& x = tape.value(v);
  if (shape_size(shape) != x.size()) {
    throw DimensionError("reshape: cannot view " + shape_string(x.shape()) +
                         " as " + shape_string(shape));
  }
  TensorBuffer out(std::move(shape), x.storage());
  return tape.record(std::move(out), {v}, [v](Tape& t, Var self) {
    std::span<const double> g = t.grad(self);
    std::span<double> gv = t.grad(v);
    for (std::size_t i = 0; i < g.size(); ++i) gv[i] += g[i];
  });
}

std::vector<double> softmax_values(std::span<const double> logits) {
  if (logits.empty()) throw DimensionError("softmax: empty input");
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw DimensionError("argmax: empty input");
  return static_cast<std::size_t>(
      std::max_element(values.begin(), values.end()) - values.begin());
}

Var softmax(Var logits) {
  Tape& tape = tape_of(logits);
  const TensorBuffer& z = tape.value(logits);
  if (z.rank() != 1) throw DimensionError("softmax: expected a vector");
  TensorBuffer out(z.shape(), softmax_values(z.values()));
  return tape.record(std::move(out), {logits}, [logits](Tape& t, Var self) {
    std::span<const double> g = t.grad(self);
    const TensorBuffer& y = t.value(self);
    double dot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y[i];
    std::span<double> gz = t.grad(logits);
    for (std::size_t i = 0; i < g.size(); ++i) gz[i] += y[i] * (g[i] - dot);
  });
}

Var weighted_sum_rows(Var weights, Var m) {
  Tape& tape = tape_of(weights);
  require_same_tape(weights, m);
  const TensorBuffer& a = tape.value(weights);
  const TensorBuffer& x = tape.value(m);
  if (a.rank() != 1 || x.rank() != 2 || a.dim(0) != x.dim(0)) {
    throw DimensionError("weighted_sum_rows: weights " +
                         shape_string(a.shape()) + " and rows " +
                         shape_string(x.shape()) + " do not conform");
  }
  const std::size_t n = x.dim(0);
  const std::size_t cols = x.dim(1);
  TensorBuffer out({cols});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[c] += a[r] * x.at(r, c);
  }
  return tape.record(
      std::move(out), {weights, m}, [weights, m, n, cols](Tape& t, Var self) {
        std::span<const double> g = t.grad(self);
        const TensorBuffer& a = t.value(weights);
        const TensorBuffer& x = t.value(m);
        std::span<double> ga = t.grad_if(weights);
        std::span<double> gm = t.grad_if(m);
        for (std::size_t r = 0; r < n; ++r) {
          double dot = 0.0;
          for (std::size_t c = 0; c < cols; ++c) {
            dot += g[c] * x.at(r, c);
            if (!gm.empty()) gm[r * cols + c] += a[r] * g[c];
          }
          if (!ga.empty()) ga[r] += dot;
        }
      });
}

Var cross_entropy(Var logits, std::size_t label) {
  Tape& tape = tape_of(logits);
  const TensorBuffer& z = tape.value(logits);
  if (z.rank() != 1) throw DimensionError("cross_entropy: expected a vector");
  if (label >= z.size()) {
    throw IndexError("cross_entropy: label " + std::to_string(label) +
                     " out of range for " + std::to_string(z.size()) +
                     " classes");
  }
  const double top = *std::max_element(z.values().begin(), z.values().end());
  double total = 0.0;
  for (double v : z.values()) total += std::exp(v - top);
  const double loss = top + std::log(total) - z[label];
  return tape.record(
      TensorBuffer({1}, {loss}), {logits}, [logits, label](Tape& t, Var self) {
        const double g = t.grad(self)[0];
        std::vector<double> p = softmax_values(t.value(logits).values());
        std::span<double> gz = t.grad(logits);
        for (std::size_t i = 0; i < p.size(); ++i) {
          gz[i] += g * (p[i] - (i == label ? 1.0 : 0.0));
        }
      });
}

Var conv2d(Var image, Var kernel, Var bias) {
  Tape& tape = tape_of(image);
  require_same_tape(image, kernel);
  require_same_tape(image, bias);
  const TensorBuffer& x = tape.value(image);
  const TensorBuffer& k = tape.value(kernel);
  const TensorBuffer& b = tape.value(bias);
  if (x.rank() != 3 || k.rank() != 4 || k.dim(1) != k.dim(2) ||
      k.dim(1) % 2 == 0 || k.dim(3) != x.dim(2) || b.rank() != 1 ||
      b.dim(0) != k.dim(0)) {
    throw DimensionError("conv2d: image " + shape_string(x.shape()) +
                         ", kernel " + shape_string(k.shape()) + ", bias " +
                         shape_string(b.shape()) + " do not conform");
  }
  const std::size_t height = x.dim(0), width = x.dim(1), c_in = x.dim(2);
  const std::size_t c_out = k.dim(0), ks = k.dim(1);
  const long pad = static_cast<long>(ks / 2);
  TensorBuffer out({height, width, c_out});
  auto kidx = [=](std::size_t o, std::size_t u, std::size_t v, std::size_t c) {
    return ((o * ks + u) * ks + v) * c_in + c;
  };
  for (std::size_t i = 0; i < height; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      for (std::size_t o = 0; o < c_out; ++o) {
        double acc = b[o];
        for (std::size_t u = 0; u < ks; ++u) {
          const long si = static_cast<long>(i + u) - pad;
          if (si < 0 || si >= static_cast<long>(height)) continue;
          for (std::size_t v = 0; v < ks; ++v) {
            const long sj = static_cast<long>(j + v) - pad;
            if (sj < 0 || sj >= static_cast<long>(width)) continue;
            const double* px = x.values().data() +
                               (static_cast<std::size_t>(si) * width +
                                static_cast<std::size_t>(sj)) * c_in;
            const double* pk = k.values().data() + kidx(o, u, v, 0);
            for (std::size_t c = 0; c < c_in; ++c) acc += pk[c] * px[c];
          }
        }
        out[(i * width + j) * c_out + o] = acc;
      }
    }
  }
  return tape.record(
      std::move(out), {image, kernel, bias},
      [=](Tape& t, Var self) {
        std::span<const double> g = t.grad(self);
        const TensorBuffer& x = t.value(image);
        const TensorBuffer& k = t.value(kernel);
        std::span<double> gx = t.grad_if(image);
        std::span<double> gk = t.grad_if(kernel);
        std::span<double> gb = t.grad_if(bias);
        for (std::size_t i = 0; i < height; ++i) {
          for (std::size_t j = 0; j < width; ++j) {
            for (std::size_t o = 0; o < c_out; ++o) {
              const double go = g[(i * width + j) * c_out + o];
              if (go == 0.0) continue;
              if (!gb.empty()) gb[o] += go;
              for (std::size_t u = 0; u < ks; ++u) {
                const long si = static_cast<long>(i + u) - pad;
                if (si < 0 || si >= static_cast<long>(height)) continue;
                for (std::size_t v = 0; v < ks; ++v) {
                  const long sj = static_cast<long>(j + v) - pad;
                  if (sj < 0 || sj >= static_cast<long>(width)) continue;
                  const std::size_t base =
                      (static_cast<std::size_t>(si) * width +
                       static_cast<std::size_t>(sj)) * c_in;
                  const std::size_t kb = kidx(o, u, v, 0);
                  for (std::size_t c = 0; c < c_in; ++c) {
                    if (!gx.empty()) gx[base + c] += go * k[kb + c];
                    if (!gk.empty()) gk[kb + c] += go * x[base + c];
                  }
                }
              }
            }
          }
        }
      });
}

Var max_pool(Var image, std::size_t window) {
  Tape& tape = tape_of(image);
  const TensorBuffer& x = tape.value(image);
  if (x.rank() != 3 || window == 0 || x.dim(0) % window != 0 ||
      x.dim(1) % window != 0) {
    throw DimensionError("max_pool: image " + shape_string(x.shape()) +
                         " is not divisible by window " +
                         std::to_string(window));
  }
  const std::size_t height = x.dim(0) / window, width = x.dim(1) / window;
  const std::size_t channels = x.dim(2);
  const std::size_t in_width = x.dim(1);
  TensorBuffer out({height, width, channels});
  std::vector<std::size_t> source(out.size());
  for (std::size_t i = 0; i < height; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      for (std::size_t c = 0; c < channels; ++c) {
        std::size_t best = ((window * i) * in_width + window * j) * channels + c;
        for (std::size_t du = 0; du < window; ++du) {
          for (std::size_t dv = 0; dv < window; ++dv) {
            const std::size_t idx =
                ((window * i + du) * in_width + window * j + dv) * channels + c;
            if (x[idx] > x[best]) best = idx;
          }
        }
        const std::size_t o = (i * width + j) * channels + c;
        out[o] = x[best];
        source[o] = best;
      }
    }
  }
  return tape.record(std::move(out), {image},
                     [image, source = std::move(source)](Tape& t, Var self) {
                       std::span<const double> g = t.grad(self);
                       std::span<double> gx = t.grad(image);
                       for (std::size_t o = 0; o < g.size(); ++o) {
                         gx[source[o]] += g[o];
                       }
                     });
}

}  // namespace psrn::numcore
