#include "sppl/expr_program.hpp"

#include <bit>
#include <cmath>

#include "sppl/distributions.hpp"

namespace sppl {

int ExprProgram::push(ExprNode n) {
  nodes_.push_back(n);
  return static_cast<int>(nodes_.size()) - 1;
}

int ExprProgram::add_const(double value) {
  const auto key = std::bit_cast<std::uint64_t>(value);
  if (auto it = const_cache_.find(key); it != const_cache_.end()) return it->second;
  const int id = push({OpCode::kConst, -1, -1, -1, value});
  const_cache_.emplace(key, id);
  return id;
}

int ExprProgram::add_input(int slot) {
  if (auto it = input_cache_.find(slot); it != input_cache_.end()) return it->second;
  if (slot >= num_slots_) num_slots_ = slot + 1;
  const int id = push({OpCode::kInput, slot, -1, -1, 0.0});
  input_cache_.emplace(slot, id);
  return id;
}

int ExprProgram::add_select(int pred_index, int on_neg, int on_nonneg) {
  return push({OpCode::kSelect, on_neg, on_nonneg, pred_index, 0.0});
}

int ExprProgram::add_unary(OpCode op, int a) { return push({op, a, -1, -1, 0.0}); }

int ExprProgram::add_binary(OpCode op, int a, int b) {
  return push({op, a, b, -1, 0.0});
}

int ExprProgram::add_pow_const(int base, double exponent) {
  return push({OpCode::kPowConst, base, -1, -1, exponent});
}

int ExprProgram::add_ternary(OpCode op, int a, int b, int c) {
  return push({op, a, b, c, 0.0});
}

void ExprProgram::set_root(int node) { root_ = node; }

double ExprProgram::eval(std::span<const double> inputs,
                         std::span<const std::uint8_t> bits,
                         std::vector<double>& scratch) const {
  scratch.resize(nodes_.size());
  double* s = scratch.data();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const ExprNode& n = nodes_[i];
    switch (n.op) {
      case OpCode::kConst: s[i] = n.k; break;
      case OpCode::kInput: s[i] = inputs[n.a]; break;
      case OpCode::kSelect: s[i] = bits[n.c] ? s[n.a] : s[n.b]; break;
      case OpCode::kAdd: s[i] = s[n.a] + s[n.b]; break;
      case OpCode::kSub: s[i] = s[n.a] - s[n.b]; break;
      case OpCode::kMul: s[i] = s[n.a] * s[n.b]; break;
      case OpCode::kDiv: s[i] = s[n.a] / s[n.b]; break;
      case OpCode::kNeg: s[i] = -s[n.a]; break;
      case OpCode::kExp: s[i] = std::exp(s[n.a]); break;
      case OpCode::kLog: s[i] = std::log(s[n.a]); break;
      case OpCode::kPowConst: s[i] = std::pow(s[n.a], n.k); break;
      case OpCode::kLogNormalPdf:
        s[i] = logpdf_normal(s[n.a], s[n.b], s[n.c]);
        break;
      case OpCode::kLogUniformPdf:
        s[i] = logpdf_uniform(s[n.a], s[n.b], s[n.c]);
        break;
    }
  }
  return s[root_];
}

double ExprProgram::eval_grad(std::span<const double> inputs,
                              std::span<const std::uint8_t> bits,
                              std::vector<double>& scratch,
                              std::vector<double>& adjoint,
                              std::span<double> grad_out) const {
  const double value = eval(inputs, bits, scratch);
  for (auto& g : grad_out) g = 0.0;
  adjoint.assign(nodes_.size(), 0.0);
  if (root_ < 0) return value;
  adjoint[root_] = 1.0;

  const double* s = scratch.data();
  double* adj = adjoint.data();
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    const double a = adj[i];
    if (a == 0.0) continue;
    const ExprNode& n = nodes_[i];
    switch (n.op) {
      case OpCode::kConst:
        break;
      case OpCode::kInput:
        grad_out[n.a] += a;
        break;
      case OpCode::kSelect:
        adj[bits[n.c] ? n.a : n.b] += a;
        break;
      case OpCode::kAdd:
        adj[n.a] += a;
        adj[n.b] += a;
        break;
      case OpCode::kSub:
        adj[n.a] += a;
        adj[n.b] -= a;
        break;
      case OpCode::kMul:
        adj[n.a] += a * s[n.b];
        adj[n.b] += a * s[n.a];
        break;
      case OpCode::kDiv:
        adj[n.a] += a / s[n.b];
        adj[n.b] -= a * s[n.a] / (s[n.b] * s[n.b]);
        break;
      case OpCode::kNeg:
        adj[n.a] -= a;
        break;
      case OpCode::kExp:
        adj[n.a] += a * s[i];
        break;
      case OpCode::kLog:
        adj[n.a] += a / s[n.a];
        break;
      case OpCode::kPowConst:
        adj[n.a] += a * n.k * std::pow(s[n.a], n.k - 1.0);
        break;
      case OpCode::kLogNormalPdf: {
        // d/dx, d/dmu, d/dsigma of the normal log density; zero outside the
        // valid-parameter set, where the value is -inf anyway.
        const double x = s[n.a], mu = s[n.b], sg = s[n.c];
        if (std::isfinite(s[i])) {
          const double z = (x - mu) / (sg * sg);
          adj[n.a] -= a * z;
          adj[n.b] += a * z;
          adj[n.c] += a * (-1.0 / sg + (x - mu) * (x - mu) / (sg * sg * sg));
        }
        break;
      }
      case OpCode::kLogUniformPdf: {
        const double lo = s[n.b], hi = s[n.c];
        if (std::isfinite(s[i])) {
          adj[n.b] += a / (hi - lo);
          adj[n.c] -= a / (hi - lo);
        }
        break;
      }
    }
  }
  return value;
}

}  // namespace sppl
