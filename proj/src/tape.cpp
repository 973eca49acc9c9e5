#include "ckt/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace ckt {

namespace {

[[noreturn]] void shape_error(const char* op, const Array& a, const Array& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_string() +
                              " vs " + b.shape_string());
}

void require_nonempty(const char* op, const Array& a) {
  if (a.empty()) throw std::domain_error(std::string(op) + ": empty array");
}

void require_2d(const char* op, const Array& a) {
  require_nonempty(op, a);
  if (a.ndim() != 2) {
    throw std::invalid_argument(std::string(op) + ": expected rank-2 array, got shape " +
                                a.shape_string());
  }
}

}  // namespace

double sigmoid_value(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

NodeRef Tape::push(Array value, std::function<void(Tape&)> backprop) {
  slots_.push_back(Slot{std::move(value), Array{}, std::move(backprop)});
  return NodeRef{slots_.size() - 1};
}

NodeRef Tape::leaf(Array value) { return push(std::move(value), {}); }

Array& Tape::grad_buf(std::size_t id) {
  Slot& s = slots_[id];
  if (s.grad.empty()) s.grad = Array(s.value.shape());
  return s.grad;
}

Array Tape::gradient(NodeRef n) const {
  const Slot& s = slots_[n.id];
  if (s.grad.empty()) return Array(s.value.shape());
  return s.grad;
}

void Tape::backward(NodeRef loss) {
  if (swept_) throw std::logic_error("Tape::backward: tape already swept; build a fresh tape");
  const Array& lv = val(loss);
  if (lv.numel() != 1) {
    throw std::invalid_argument("Tape::backward: loss must be scalar-shaped, got " +
                                lv.shape_string());
  }
  swept_ = true;
  grad_buf(loss.id)[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Slot& s = slots_[i];
    if (s.backprop && !s.grad.empty()) s.backprop(*this);
  }
}

// ---------------------------------------------------------------------------
// elementwise
// ---------------------------------------------------------------------------

NodeRef Tape::add(NodeRef a, NodeRef b) {
  const Array& av = val(a);
  const Array& bv = val(b);
  if (!av.same_shape(bv)) shape_error("add", av, bv);
  Array out = av;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += bv[i];
  std::size_t self = slots_.size();
  return push(std::move(out), [self, ai = a.id, bi = b.id](Tape& t) {
    const Array& g = t.slots_[self].grad;
    Array& ga = t.grad_buf(ai);
    Array& gb = t.grad_buf(bi);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      ga[i] += g[i];
      gb[i] += g[i];
    }
  });
}

NodeRef Tape::sub(NodeRef a, NodeRef b) {
  const Array& av = val(a);
  const Array& bv = val(b);
  if (!av.same_shape(bv)) shape_error("sub", av, bv);
  Array out = av;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= bv[i];
  std::size_t self = slots_.size();
  return push(std::move(out), [self, ai = a.id, bi = b.id](Tape& t) {
    const Array& g = t.slots_[self].grad;
    Array& ga = t.grad_buf(ai);
    Array& gb = t.grad_buf(bi);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      ga[i] += g[i];
      gb[i] -= g[i];
    }
  });
}

NodeRef Tape::mul(NodeRef a, NodeRef b) {
  const Array& av = val(a);
  const Array& bv = val(b);
  if (!av.same_shape(bv)) shape_error("mul", av, bv);
  Array out = av;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= bv[i];
  std::size_t self = slots_.size();
  return push(std::move(out), [self, ai = a.id, bi = b.id](Tape& t) {
    const Array& g = t.slots_[self].grad;
    const Array& av2 = t.slots_[ai].value;
    const Array& bv2 = t.slots_[bi].value;
    Array& ga = t.grad_buf(ai);
    Array& gb = t.grad_buf(bi);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      ga[i] += g[i] * bv2[i];
      gb[i] += g[i] * av2[i];
    }
  });
}

NodeRef Tape::neg(NodeRef a) {
  Array out = val(a);
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = -out[i];
  std::size_t self = slots_.size();
  return push(std::move(out), [self, ai = a.id](Tape& t) {
    const Array& g = t.slots_[self].grad;
    Array& ga = t.grad_buf(ai);
    for (std::size_t i = 0; i < g.numel(); ++i) ga[i] -= g[i];
  });
}

NodeRef Tape::scale(NodeRef a, double c) {
  Array out = val(a);
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= c;
  std::size_t self = slots_.size();
  return push(std::move(out), [self, ai = a.id, c](Tape& t) {
    const Array& g = t.slots_[self].grad;
    Array& ga = t.grad_buf(ai);
    for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += c * g[i];
  });
}

NodeRef Tape::sigmoid(NodeRef a) {
  Array out = val(a);
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = sigmoid_value(out[i]);
  std::size_t self = slots_.size();
  return push(std::move(out), [self, ai = a.id](Tape& t) {
    const Array& g = t.slots_[self].grad;
    const Array& y = t.slots_[self].value;
    Array& ga = t.grad_buf(ai);
    for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

NodeRef Tape::tanh(NodeRef a) {
  Array out = val(a);
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::tanh(out[i]);
  std::size_t self = slots_.size();
  return push(std::move(out), [self, ai = a.id](Tape& t) {
    const Array& g = t.slots_[self].grad;
    const Array& y = t.slots_[self].value;
    Array& ga = t.grad_buf(ai);
    for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

NodeRef Tape::exp(NodeRef a) {
  Array out = val(a);
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::exp(out[i]);
  std::size_t self = slots_.size();
  return push(std::move(out), [self, ai = a.id](Tape& t) {
    const Array& g = t.slots_[self].grad;
    const Array& y = t.slots_[self].value;
    Array& ga = t.grad_buf(ai);
    for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * y[i];
  });
}

NodeRef Tape::log(NodeRef a) {
  Array out = val(a);
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::log(out[i]);
  std::size_t self = slots_.size();
  return push(std::move(out), [self, ai = a.id](Tape& t) {
    const Array& g = t.slots_[self].grad;
    const Array& x = t.slots_[ai].value;
    Array& ga = t.grad_buf(ai);
    for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] / x[i];
  });
}

// ---------------------------------------------------------------------------
// linear algebra
// ---------------------------------------------------------------------------

NodeRef Tape::matmul(NodeRef a, NodeRef b) {
  const Array& av = val(a);
  const Array& bv = val(b);
  require_2d("matmul", av);
  require_2d("matmul", bv);
  if (av.cols() != bv.rows()) shape_error("matmul: inner dimensions disagree", av, bv);
  std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  Array out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double aip = av.at(i, p);
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out.at(i, j) += aip * bv.at(p, j);
    }
  }
  std::size_t self = slots_.size();
  return push(std::move(out), [self, ai = a.id, bi = b.id, m, k, n](Tape& t) {
    const Array& g = t.slots_[self].grad;
    const Array& av2 = t.slots_[ai].value;
    const Array& bv2 = t.slots_[bi].value;
    Array& ga = t.grad_buf(ai);
    Array& gb = t.grad_buf(bi);
    // dA += g . B^T ; dB += A^T . g
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += g.at(i, j) * bv2.at(p, j);
        ga.at(i, p) += acc;
      }
    }
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) acc += av2.at(i, p) * g.at(i, j);
        gb.at(p, j) += acc;
      }
    }
  });
}

NodeRef Tape::matvec(NodeRef w, NodeRef x) {
  const Array& wv = val(w);
  const Array& xv = val(x);
  require_2d("matvec", wv);
  require_nonempty("matvec", xv);
  if (xv.ndim() != 1 || wv.cols() != xv.length()) shape_error("matvec", wv, xv);
  std::size_t m = wv.rows(), n = wv.cols();
  Array out({m});
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += wv.at(i, j) * xv[j];
    out[i] = acc;
  }
  std::size_t self = slots_.size();
  return push(std::move(out), [self, wi = w.id, xi = x.id, m, n](Tape& t) {
    const Array& g = t.slots_[self].grad;
    const Array& wv2 = t.slots_[wi].value;
    const Array& xv2 = t.slots_[xi].value;
    Array& gw = t.grad_buf(wi);
    Array& gx = t.grad_buf(xi);
    for (std::size_t i = 0; i < m; ++i) {
      double gi = g[i];
      if (gi == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        gw.at(i, j) += gi * xv2[j];
        gx[j] += gi * wv2.at(i, j);
      }
    }
  });
}

NodeRef Tape::transpose(NodeRef a) {
  const Array& av = val(a);
  require_2d("transpose", av);
  std::size_t m = av.rows(), n = av.cols();
  Array out({n, m});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.at(j, i) = av.at(i, j);
  }
  std::size_t self = slots_.size();
  return push(std::move(out), [self, ai = a.id, m, n](Tape& t) {
    const Array& g = t.slots_[self].grad;
    Array& ga = t.grad_buf(ai);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) ga.at(i, j) += g.at(j, i);
    }
  });
}

// ---------------------------------------------------------------------------
// reductions
// ---------------------------------------------------------------------------

NodeRef Tape::sum_all(NodeRef a) {
  const Array& av = val(a);
  require_nonempty("sum_all", av);
  double acc = 0.0;
  for (std::size_t i = 0; i < av.numel(); ++i) acc += av[i];
  std::size_t self = slots_.size();
  return push(Array::scalar(acc), [self, ai = a.id](Tape& t) {
    double g = t.slots_[self].grad[0];
    Array& ga = t.grad_buf(ai);
    for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] += g;
  });
}

NodeRef Tape::row_sum(NodeRef a) {
  const Array& av = val(a);
  require_2d("row_sum", av);
  std::size_t m = av.rows(), n = av.cols();
  Array out({m});
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += av.at(i, j);
    out[i] = acc;
  }
  std::size_t self = slots_.size();
  return push(std::move(out), [self, ai = a.id, m, n](Tape& t) {
    const Array& g = t.slots_[self].grad;
    Array& ga = t.grad_buf(ai);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) ga.at(i, j) += g[i];
    }
  });
}

NodeRef Tape::col_sum(NodeRef a) {
  const Array& av = val(a);
  require_2d("col_sum", av);
  std::size_t m = av.rows(), n = av.cols();
  Array out({n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j] += av.at(i, j);
  }
  std::size_t self = slots_.size();
  return push(std::move(out), [self, ai = a.id, m, n](Tape& t) {
    const Array& g = t.slots_[self].grad;
    Array& ga = t.grad_buf(ai);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) ga.at(i, j) += g[j];
    }
  });
}

NodeRef Tape::row_max(NodeRef a) {
  const Array& av = val(a);
  require_2d("row_max", av);
  std::size_t m = av.rows(), n = av.cols();
  Array out({m});
  std::vector<std::size_t> arg(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    double best = av.at(i, 0);
    for (std::size_t j = 1; j < n; ++j) {
      if (av.at(i, j) > best) {
        best = av.at(i, j);
        arg[i] = j;
      }
    }
    out[i] = best;
  }
  std::size_t self = slots_.size();
  return push(std::move(out), [self, ai = a.id, arg = std::move(arg)](Tape& t) {
    const Array& g = t.slots_[self].grad;
    Array& ga = t.grad_buf(ai);
    for (std::size_t i = 0; i < arg.size(); ++i) ga.at(i, arg[i]) += g[i];
  });
}

NodeRef Tape::global_max(NodeRef a) {
  const Array& av = val(a);
  require_nonempty("global_max", av);
  std::size_t arg = 0;
  double best = av[0];
  for (std::size_t i = 1; i < av.numel(); ++i) {
    if (av[i] > best) {
      best = av[i];
      arg = i;
    }
  }
  std::size_t self = slots_.size();
  return push(Array::scalar(best), [self, ai = a.id, arg](Tape& t) {
    t.grad_buf(ai)[arg] += t.slots_[self].grad[0];
  });
}

// ---------------------------------------------------------------------------
// broadcasting forms
// ---------------------------------------------------------------------------

NodeRef Tape::sub_scalar(NodeRef a, NodeRef s) {
  const Array& av = val(a);
  const Array& sv = val(s);
  if (sv.numel() != 1) shape_error("sub_scalar: subtrahend must be scalar-shaped", av, sv);
  Array out = av;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= sv[0];
  std::size_t self = slots_.size();
  return push(std::move(out), [self, ai = a.id, si = s.id](Tape& t) {
    const Array& g = t.slots_[self].grad;
    Array& ga = t.grad_buf(ai);
    Array& gs = t.grad_buf(si);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.numel(); ++i) {
      ga[i] += g[i];
      acc += g[i];
    }
    gs[0] -= acc;
  });
}

NodeRef Tape::div_rows(NodeRef a, NodeRef r) {
  const Array& av = val(a);
  const Array& rv = val(r);
  require_2d("div_rows", av);
  if (rv.ndim() != 1 || rv.length() != av.rows()) shape_error("div_rows", av, rv);
  std::size_t m = av.rows(), n = av.cols();
  Array out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) = av.at(i, j) / rv[i];
  }
  std::size_t self = slots_.size();
  return push(std::move(out), [self, ai = a.id, ri = r.id, m, n](Tape& t) {
    const Array& g = t.slots_[self].grad;
    const Array& y = t.slots_[self].value;
    const Array& rv2 = t.slots_[ri].value;
    Array& ga = t.grad_buf(ai);
    Array& gr = t.grad_buf(ri);
    for (std::size_t i = 0; i < m; ++i) {
      double inv = 1.0 / rv2[i];
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        ga.at(i, j) += g.at(i, j) * inv;
        acc += g.at(i, j) * y.at(i, j);
      }
      gr[i] -= acc * inv;
    }
  });
}

NodeRef Tape::div_cols(NodeRef a, NodeRef c) {
  const Array& av = val(a);
  const Array& cv = val(c);
  require_2d("div_cols", av);
  if (cv.ndim() != 1 || cv.length() != av.cols()) shape_error("div_cols", av, cv);
  std::size_t m = av.rows(), n = av.cols();
  Array out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) = av.at(i, j) / cv[j];
  }
  std::size_t self = slots_.size();
  return push(std::move(out), [self, ai = a.id, ci = c.id, m, n](Tape& t) {
    const Array& g = t.slots_[self].grad;
    const Array& y = t.slots_[self].value;
    const Array& cv2 = t.slots_[ci].value;
    Array& ga = t.grad_buf(ai);
    Array& gc = t.grad_buf(ci);
    for (std::size_t j = 0; j < n; ++j) {
      double inv = 1.0 / cv2[j];
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        ga.at(i, j) += g.at(i, j) * inv;
        acc += g.at(i, j) * y.at(i, j);
      }
      gc[j] -= acc * inv;
    }
  });
}

// ---------------------------------------------------------------------------
// structure
// ---------------------------------------------------------------------------

NodeRef Tape::concat(NodeRef a, NodeRef b) {
  const Array& av = val(a);
  const Array& bv = val(b);
  if (av.ndim() != 1 || bv.ndim() != 1) shape_error("concat: rank-1 inputs required", av, bv);
  std::size_t m = av.length(), n = bv.length();
  Array out({m + n});
  for (std::size_t i = 0; i < m; ++i) out[i] = av[i];
  for (std::size_t i = 0; i < n; ++i) out[m + i] = bv[i];
  std::size_t self = slots_.size();
  return push(std::move(out), [self, ai = a.id, bi = b.id, m, n](Tape& t) {
    const Array& g = t.slots_[self].grad;
    Array& ga = t.grad_buf(ai);
    Array& gb = t.grad_buf(bi);
    for (std::size_t i = 0; i < m; ++i) ga[i] += g[i];
    for (std::size_t i = 0; i < n; ++i) gb[i] += g[m + i];
  });
}

NodeRef Tape::column(NodeRef mref, std::size_t j) {
  const Array& mv = val(mref);
  require_2d("column", mv);
  if (j >= mv.cols()) {
    throw std::out_of_range("column: index " + std::to_string(j) + " out of range for shape " +
                            mv.shape_string());
  }
  std::size_t m = mv.rows();
  Array out({m});
  for (std::size_t i = 0; i < m; ++i) out[i] = mv.at(i, j);
  std::size_t self = slots_.size();
  return push(std::move(out), [self, mi = mref.id, j, m](Tape& t) {
    const Array& g = t.slots_[self].grad;
    Array& gm = t.grad_buf(mi);
    for (std::size_t i = 0; i < m; ++i) gm.at(i, j) += g[i];
  });
}

}  // namespace ckt
