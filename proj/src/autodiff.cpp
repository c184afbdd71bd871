#include "mfgan/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfgan/errors.hpp"

namespace mfgan {

Tape::Tape(Mode mode, std::uint64_t dropout_seed, bool record)
    : mode_(mode), record_(record), rng_(dropout_seed) {}

Var Tape::constant(Tensor value) {
  if (consumed_) throw ContractError("constant: tape already consumed by backward");
  if (!value.all_finite()) throw NumericError("constant: non-finite value");
  nodes_.push_back(Node{std::move(value), {}, false, nullptr, 0});
  return Var{this, nodes_.size() - 1};
}

Var Tape::param(const ParameterSet& set, std::size_t index) {
  if (consumed_) throw ContractError("param: tape already consumed by backward");
  const auto key = std::make_pair(&set, index);
  if (auto it = param_cache_.find(key); it != param_cache_.end()) return Var{this, it->second};
  nodes_.push_back(Node{set.value(index), {}, record_, &set, index});
  param_cache_.emplace(key, nodes_.size() - 1);
  return Var{this, nodes_.size() - 1};
}

Var Tape::push(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
  return push(op, std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(fn));
}

Var Tape::push(const char* op, Tensor value, std::span<const Var> inputs, BackwardFn fn) {
  if (consumed_) throw ContractError(std::string(op) + ": tape already consumed by backward");
  if (!value.all_finite()) throw NumericError(std::string(op) + ": produced a non-finite value");
  bool needs = false;
  for (const Var& v : inputs) {
    if (v.tape != this) throw ContractError(std::string(op) + ": input from another tape");
    needs = needs || nodes_[v.id].requires_grad;
  }
  needs = needs && record_;
  nodes_.push_back(Node{std::move(value), needs ? std::move(fn) : BackwardFn{}, needs, nullptr, 0});
  return Var{this, nodes_.size() - 1};
}

void Tape::accumulate(std::size_t id, const Tensor& g) {
  if (!nodes_[id].requires_grad) return;
  if (!has_grad_[id]) {
    grads_[id] = g;
    has_grad_[id] = 1;
  } else {
    grads_[id].add_inplace(g);
  }
}

void Tape::accumulate(std::size_t id, Tensor&& g) {
  if (!nodes_[id].requires_grad) return;
  if (!has_grad_[id]) {
    grads_[id] = std::move(g);
    has_grad_[id] = 1;
  } else {
    grads_[id].add_inplace(g);
  }
}

GradientSet Tape::backward(Var loss, const ParameterSet& wrt) {
  if (consumed_) throw ContractError("backward: tape already consumed");
  if (loss.tape != this) throw ContractError("backward: loss belongs to another tape");
  if (value(loss).size() != 1) {
    throw ContractError("backward: loss must be a scalar, got shape " + shape_string(value(loss).shape()));
  }
  consumed_ = true;
  GradientSet out(wrt);
  if (!nodes_[loss.id].requires_grad) return out;

  grads_.assign(nodes_.size(), Tensor{});
  has_grad_.assign(nodes_.size(), 0);
  grads_[loss.id] = Tensor::filled(value(loss).shape(), Real{1});
  has_grad_[loss.id] = 1;

  for (std::size_t i = loss.id + 1; i-- > 0;) {
    if (!has_grad_[i]) continue;
    Node& node = nodes_[i];
    if (node.backward) {
      node.backward(*this, grads_[i], node.value);
      grads_[i] = Tensor{};  // interior gradients are not kept
      node.backward = {};
    } else if (node.owner == &wrt) {
      out[node.param_index].add_inplace(grads_[i]);
    }
  }
  grads_.clear();
  has_grad_.clear();
  return out;
}

// ---- ops ----------------------------------------------------------------

namespace {

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw ShapeError(std::string(op) + ": expected a matrix, got " + shape_string(t.shape()));
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

Real stable_sigmoid(Real z) {
  if (z >= 0) return Real{1} / (Real{1} + std::exp(-z));
  const Real e = std::exp(z);
  return e / (Real{1} + e);
}

}  // namespace

Var matmul(Var a, Var b) {
  require_rank2(a.value(), "matmul");
  require_rank2(b.value(), "matmul");
  Tensor out = kernels::matmul(a.value(), b.value());
  return a.tape->push("matmul", std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g, const Tensor&) {
    // C = A B: dA = G B^T, dB = A^T G
    if (t.requires_grad(a)) t.accumulate(a.id, kernels::matmul_bt(g, t.value(b)));
    if (t.requires_grad(b)) t.accumulate(b.id, kernels::matmul_at(t.value(a), g));
  });
}

Var matmul_bt(Var a, Var b) {
  require_rank2(a.value(), "matmul_bt");
  require_rank2(b.value(), "matmul_bt");
  Tensor out = kernels::matmul_bt(a.value(), b.value());
  return a.tape->push("matmul_bt", std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g, const Tensor&) {
    // C = A B^T: dA = G B, dB = G^T A
    if (t.requires_grad(a)) t.accumulate(a.id, kernels::matmul(g, t.value(b)));
    if (t.requires_grad(b)) t.accumulate(b.id, kernels::matmul_at(g, t.value(a)));
  });
}

Var add(Var a, Var b) {
  require_same(a.value(), b.value(), "add");
  Tensor out = a.value();
  out.add_inplace(b.value());
  return a.tape->push("add", std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g, const Tensor&) {
    t.accumulate(a.id, g);
    t.accumulate(b.id, g);
  });
}

Var add_bias(Var x, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (bv.size() != xv.cols()) {
    throw ShapeError("add_bias: bias " + shape_string(bv.shape()) + " does not match " + shape_string(xv.shape()));
  }
  Tensor out = xv;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bv[c];
  }
  return x.tape->push("add_bias", std::move(out), {x, bias}, [x, bias](Tape& t, const Tensor& g, const Tensor&) {
    t.accumulate(x.id, g);
    if (t.requires_grad(bias)) {
      Tensor gb(t.value(bias).shape());
      for (std::size_t r = 0; r < g.rows(); ++r) {
        auto row = g.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) gb[c] += row[c];
      }
      t.accumulate(bias.id, std::move(gb));
    }
  });
}

Var scale(Var x, Real factor) {
  Tensor out = x.value();
  for (auto& v : out.data()) v *= factor;
  return x.tape->push("scale", std::move(out), {x}, [x, factor](Tape& t, const Tensor& g, const Tensor&) {
    Tensor gx = g;
    for (auto& v : gx.data()) v *= factor;
    t.accumulate(x.id, std::move(gx));
  });
}

Var mul_const(Var x, const Tensor& weights) {
  require_same(x.value(), weights, "mul_const");
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= weights[i];
  return x.tape->push("mul_const", std::move(out), {x}, [x, weights](Tape& t, const Tensor& g, const Tensor&) {
    Tensor gx = g;
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= weights[i];
    t.accumulate(x.id, std::move(gx));
  });
}

Var relu(Var x) {
  Tensor out = x.value();
  for (auto& v : out.data()) v = v > Real{0} ? v : Real{0};
  return x.tape->push("relu", std::move(out), {x}, [x](Tape& t, const Tensor& g, const Tensor& y) {
    Tensor gx = g;
    for (std::size_t i = 0; i < gx.size(); ++i)
      if (!(y[i] > Real{0})) gx[i] = 0;
    t.accumulate(x.id, std::move(gx));
  });
}

Var dropout(Var x, Real p) {
  if (!(p >= Real{0} && p < Real{1})) throw ContractError("dropout: p must lie in [0, 1)");
  Tape& tape = *x.tape;
  if (!tape.training() || p == Real{0}) return x;
  const Real keep_scale = Real{1} / (Real{1} - p);
  Tensor mask(x.value().shape());
  for (auto& m : mask.data()) m = tape.rng().uniform() < static_cast<double>(p) ? Real{0} : keep_scale;
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return tape.push("dropout", std::move(out), {x},
                   [x, mask = std::move(mask)](Tape& t, const Tensor& g, const Tensor&) {
                     Tensor gx = g;
                     for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= mask[i];
                     t.accumulate(x.id, std::move(gx));
                   });
}

Var sigmoid(Var x) {
  Tensor out = x.value();
  for (auto& v : out.data()) v = stable_sigmoid(v);
  return x.tape->push("sigmoid", std::move(out), {x}, [x](Tape& t, const Tensor& g, const Tensor& y) {
    Tensor gx = g;
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= y[i] * (Real{1} - y[i]);
    t.accumulate(x.id, std::move(gx));
  });
}

Var log_sigmoid(Var x) {
  Tensor out = x.value();
  // log σ(z) = min(z, 0) − log1p(exp(−|z|))
  for (auto& v : out.data()) v = std::min(v, Real{0}) - std::log1p(std::exp(-std::abs(v)));
  return x.tape->push("log_sigmoid", std::move(out), {x}, [x](Tape& t, const Tensor& g, const Tensor&) {
    const Tensor& z = t.value(x);
    Tensor gx = g;
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= Real{1} - stable_sigmoid(z[i]);
    t.accumulate(x.id, std::move(gx));
  });
}

Var softmax_rows(Var x) {
  require_rank2(x.value(), "softmax_rows");
  Tensor out = kernels::softmax_rows(x.value());
  return x.tape->push("softmax_rows", std::move(out), {x}, [x](Tape& t, const Tensor& g, const Tensor& y) {
    // dX = Y ⊙ (dY − rowsum(dY ⊙ Y))
    Tensor gx(y.shape());
    for (std::size_t r = 0; r < y.rows(); ++r) {
      auto yr = y.row(r);
      auto gr = g.row(r);
      Real dot = 0;
      for (std::size_t c = 0; c < yr.size(); ++c) dot += gr[c] * yr[c];
      auto out = gx.row(r);
      for (std::size_t c = 0; c < yr.size(); ++c) out[c] = yr[c] * (gr[c] - dot);
    }
    t.accumulate(x.id, std::move(gx));
  });
}

Var log_softmax_rows(Var x) {
  require_rank2(x.value(), "log_softmax_rows");
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    auto in = xv.row(r);
    auto o = out.row(r);
    const Real mx = *std::max_element(in.begin(), in.end());
    Real total = 0;
    for (auto v : in) total += std::exp(v - mx);
    const Real lse = mx + std::log(total);
    for (std::size_t c = 0; c < in.size(); ++c) o[c] = in[c] - lse;
  }
  return x.tape->push("log_softmax_rows", std::move(out), {x}, [x](Tape& t, const Tensor& g, const Tensor& y) {
    // dX = dY − softmax · rowsum(dY)
    Tensor gx(y.shape());
    for (std::size_t r = 0; r < y.rows(); ++r) {
      auto yr = y.row(r);
      auto gr = g.row(r);
      Real total = 0;
      for (auto v : gr) total += v;
      auto o = gx.row(r);
      for (std::size_t c = 0; c < yr.size(); ++c) o[c] = gr[c] - std::exp(yr[c]) * total;
    }
    t.accumulate(x.id, std::move(gx));
  });
}

Var masked_fill(Var x, const std::vector<char>& mask) {
  if (mask.size() != x.value().size()) {
    throw ShapeError("masked_fill: mask has " + std::to_string(mask.size()) + " entries for " +
                     shape_string(x.value().shape()));
  }
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i)
    if (mask[i]) out[i] = kMaskValue;
  return x.tape->push("masked_fill", std::move(out), {x}, [x, mask](Tape& t, const Tensor& g, const Tensor&) {
    Tensor gx = g;
    for (std::size_t i = 0; i < gx.size(); ++i)
      if (mask[i]) gx[i] = 0;
    t.accumulate(x.id, std::move(gx));
  });
}

Var embedding_lookup(Var table, std::span<const std::int32_t> ids) {
  const Tensor& tv = table.value();
  require_rank2(tv, "embedding_lookup");
  if (ids.empty()) throw ShapeError("embedding_lookup: empty id list");
  const std::size_t width = tv.cols();
  Tensor out({ids.size(), width});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= tv.rows()) {
      throw IndexError("embedding_lookup: id " + std::to_string(ids[i]) + " outside [0, " +
                       std::to_string(tv.rows()) + ")");
    }
    auto src = tv.row(static_cast<std::size_t>(ids[i]));
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  std::vector<std::int32_t> idv(ids.begin(), ids.end());
  return table.tape->push("embedding_lookup", std::move(out), {table},
                          [table, idv = std::move(idv)](Tape& t, const Tensor& g, const Tensor&) {
                            Tensor gt(t.value(table).shape());
                            for (std::size_t i = 0; i < idv.size(); ++i) {
                              auto dst = gt.row(static_cast<std::size_t>(idv[i]));
                              auto src = g.row(i);
                              for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
                            }
                            t.accumulate(table.id, std::move(gt));
                          });
}

Var slice_cols(Var x, std::size_t begin, std::size_t end) {
  const Tensor& xv = x.value();
  require_rank2(xv, "slice_cols");
  if (begin >= end || end > xv.cols()) throw ShapeError("slice_cols: bad column range");
  const std::size_t w = end - begin;
  Tensor out({xv.rows(), w});
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    auto src = xv.row(r);
    std::copy(src.begin() + begin, src.begin() + end, out.row(r).begin());
  }
  return x.tape->push("slice_cols", std::move(out), {x}, [x, begin, end](Tape& t, const Tensor& g, const Tensor&) {
    Tensor gx(t.value(x).shape());
    for (std::size_t r = 0; r < g.rows(); ++r) {
      auto src = g.row(r);
      std::copy(src.begin(), src.end(), gx.row(r).begin() + begin);
    }
    (void)end;
    t.accumulate(x.id, std::move(gx));
  });
}

Var slice_rows(Var x, std::size_t begin, std::size_t end) {
  const Tensor& xv = x.value();
  require_rank2(xv, "slice_rows");
  if (begin >= end || end > xv.rows()) throw ShapeError("slice_rows: bad row range");
  const std::size_t w = xv.cols();
  std::vector<Real> data(xv.data().begin() + begin * w, xv.data().begin() + end * w);
  Tensor out({end - begin, w}, std::move(data));
  return x.tape->push("slice_rows", std::move(out), {x}, [x, begin](Tape& t, const Tensor& g, const Tensor&) {
    Tensor gx(t.value(x).shape());
    std::copy(g.data().begin(), g.data().end(), gx.data().begin() + begin * gx.cols());
    t.accumulate(x.id, std::move(gx));
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: nothing to concatenate");
  const std::size_t rows = parts[0].value().rows();
  std::size_t width = 0;
  std::vector<std::size_t> offsets;
  for (const Var& p : parts) {
    require_rank2(p.value(), "concat_cols");
    if (p.value().rows() != rows) throw ShapeError("concat_cols: row counts differ");
    offsets.push_back(width);
    width += p.value().cols();
  }
  Tensor out({rows, width});
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& pv = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r) {
      auto src = pv.row(r);
      std::copy(src.begin(), src.end(), out.row(r).begin() + offsets[k]);
    }
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape->push(
      "concat_cols", std::move(out), parts, [inputs, offsets](Tape& t, const Tensor& g, const Tensor&) {
        for (std::size_t k = 0; k < inputs.size(); ++k) {
          if (!t.requires_grad(inputs[k])) continue;
          Tensor gp(t.value(inputs[k]).shape());
          const std::size_t w = gp.cols();
          for (std::size_t r = 0; r < g.rows(); ++r) {
            auto src = g.row(r).subspan(offsets[k], w);
            std::copy(src.begin(), src.end(), gp.row(r).begin());
          }
          t.accumulate(inputs[k].id, std::move(gp));
        }
      });
}

Var layer_norm(Var x, Var gamma, Var beta, Real eps) {
  const Tensor& xv = x.value();
  require_rank2(xv, "layer_norm");
  const std::size_t n = xv.rows(), d = xv.cols();
  if (gamma.value().size() != d || beta.value().size() != d) throw ShapeError("layer_norm: scale/shift width");
  Tensor xhat({n, d});
  std::vector<Real> rstd(n);
  for (std::size_t r = 0; r < n; ++r) {
    auto in = xv.row(r);
    Real mu = 0;
    for (auto v : in) mu += v;
    mu /= static_cast<Real>(d);
    Real var = 0;
    for (auto v : in) var += (v - mu) * (v - mu);
    var /= static_cast<Real>(d);
    rstd[r] = Real{1} / std::sqrt(var + eps);
    auto o = xhat.row(r);
    for (std::size_t c = 0; c < d; ++c) o[c] = (in[c] - mu) * rstd[r];
  }
  const Tensor& gv = gamma.value();
  const Tensor& bv = beta.value();
  Tensor out({n, d});
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) out(r, c) = gv[c] * xhat(r, c) + bv[c];
  return x.tape->push(
      "layer_norm", std::move(out), {x, gamma, beta},
      [x, gamma, beta, xhat = std::move(xhat), rstd = std::move(rstd)](Tape& t, const Tensor& g, const Tensor&) {
        const std::size_t n = g.rows(), d = g.cols();
        const Tensor& gv = t.value(gamma);
        if (t.requires_grad(gamma) || t.requires_grad(beta)) {
          Tensor gg(gv.shape()), gb(gv.shape());
          for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) {
              gg[c] += g(r, c) * xhat(r, c);
              gb[c] += g(r, c);
            }
          t.accumulate(gamma.id, std::move(gg));
          t.accumulate(beta.id, std::move(gb));
        }
        if (t.requires_grad(x)) {
          // dx = rstd · (dxhat − mean(dxhat) − xhat · mean(dxhat ⊙ xhat))
          Tensor gx({n, d});
          for (std::size_t r = 0; r < n; ++r) {
            Real m1 = 0, m2 = 0;
            for (std::size_t c = 0; c < d; ++c) {
              const Real dxh = g(r, c) * gv[c];
              m1 += dxh;
              m2 += dxh * xhat(r, c);
            }
            m1 /= static_cast<Real>(d);
            m2 /= static_cast<Real>(d);
            for (std::size_t c = 0; c < d; ++c) gx(r, c) = rstd[r] * (g(r, c) * gv[c] - m1 - xhat(r, c) * m2);
          }
          t.accumulate(x.id, std::move(gx));
        }
      });
}

Var sum(Var x) {
  Real total = 0;
  for (auto v : x.value().data()) total += v;
  return x.tape->push("sum", Tensor::scalar(total), {x}, [x](Tape& t, const Tensor& g, const Tensor&) {
    t.accumulate(x.id, Tensor::filled(t.value(x).shape(), g[0]));
  });
}

Var mean(Var x) { return scale(sum(x), Real{1} / static_cast<Real>(x.value().size())); }

Var pick(Var x, std::span<const std::size_t> rows, std::span<const std::size_t> cols) {
  const Tensor& xv = x.value();
  if (rows.size() != cols.size() || rows.empty()) throw ShapeError("pick: index lists differ or are empty");
  Tensor out({rows.size()});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= xv.rows() || cols[i] >= xv.cols()) throw IndexError("pick: index outside tensor");
    out[i] = xv(rows[i], cols[i]);
  }
  std::vector<std::size_t> rv(rows.begin(), rows.end()), cv(cols.begin(), cols.end());
  return x.tape->push("pick", std::move(out), {x}, [x, rv, cv](Tape& t, const Tensor& g, const Tensor&) {
    Tensor gx(t.value(x).shape());
    for (std::size_t i = 0; i < rv.size(); ++i) gx(rv[i], cv[i]) += g[i];
    t.accumulate(x.id, std::move(gx));
  });
}

// ---- finite differences -------------------------------------------------

GradientSet finite_diff_grad(const ScalarObjective& f, const ParameterSet& theta, double eps) {
  ParameterSet work = theta;
  GradientSet out(theta);
  for (std::size_t p = 0; p < work.size(); ++p) {
    Tensor& value = work.value(p);
    for (std::size_t i = 0; i < value.size(); ++i) {
      const Real orig = value[i];
      const Real plus = static_cast<Real>(static_cast<double>(orig) + eps);
      const Real minus = static_cast<Real>(static_cast<double>(orig) - eps);
      value[i] = plus;
      const double f_plus = f(work);
      value[i] = minus;
      const double f_minus = f(work);
      value[i] = orig;
      out[p][i] = static_cast<Real>((f_plus - f_minus) / (static_cast<double>(plus) - static_cast<double>(minus)));
    }
  }
  return out;
}

double gradient_relative_error(const GradientSet& a, const GradientSet& b, double floor) {
  if (a.size() != b.size()) throw ShapeError("gradient_relative_error: set sizes differ");
  double worst = 0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    if (a[p].shape() != b[p].shape()) throw ShapeError("gradient_relative_error: tensor shapes differ");
    double na = 0, nb = 0, diff = 0;
    for (std::size_t i = 0; i < a[p].size(); ++i) {
      na = std::max(na, std::abs(static_cast<double>(a[p][i])));
      nb = std::max(nb, std::abs(static_cast<double>(b[p][i])));
      diff = std::max(diff, std::abs(static_cast<double>(a[p][i]) - static_cast<double>(b[p][i])));
    }
    const double scale_ = std::max(na, nb);
    if (scale_ < floor) continue;
    worst = std::max(worst, diff / scale_);
  }
  return worst;
}

}  // namespace mfgan
