#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace sppl {

// A flat, topologically ordered scalar DAG with reverse-mode differentiation.
// One program evaluates one smooth function of the latent state; predicate
// decisions enter only through select nodes fed by precomputed bits, so a
// single program is differentiable everywhere it is evaluated.
enum class OpCode : std::uint8_t {
  kConst,          // k
  kInput,          // inputs[a]
  kSelect,         // bits[c] ? node a : node b   (bit set = guard < 0)
  kAdd,            // a + b
  kSub,            // a - b
  kMul,            // a * b
  kDiv,            // a / b
  kNeg,            // -a
  kExp,            // exp(a)
  kLog,            // log(a)
  kPowConst,       // pow(a, k)
  kLogNormalPdf,   // logpdf_normal(a, b, c)
  kLogUniformPdf,  // logpdf_uniform(a, b, c)
};

struct ExprNode {
  OpCode op = OpCode::kConst;
  std::int32_t a = -1;
  std::int32_t b = -1;
  std::int32_t c = -1;  // third operand, input slot, or predicate index
  double k = 0.0;       // kConst value / kPowConst exponent
};

class ExprProgram {
 public:
  // --- builder interface (dedups constants and input loads) ---
  int add_const(double value);
  int add_input(int slot);
  int add_select(int pred_index, int on_neg, int on_nonneg);
  int add_unary(OpCode op, int a);
  int add_binary(OpCode op, int a, int b);
  int add_pow_const(int base, double exponent);
  int add_ternary(OpCode op, int a, int b, int c);
  void set_root(int node);

  int root() const { return root_; }
  std::size_t size() const { return nodes_.size(); }
  int num_slots() const { return num_slots_; }

  // Forward evaluation.  `inputs` is indexed by slot, `bits` by predicate
  // index (only consulted by select nodes).  `scratch` is resized as needed
  // and may be reused across calls.
  double eval(std::span<const double> inputs, std::span<const std::uint8_t> bits,
              std::vector<double>& scratch) const;

  // Forward + reverse sweep.  Writes d(root)/d(inputs[slot]) into `grad_out`
  // (zeroed first; must have num_slots() entries) and returns the value.
  double eval_grad(std::span<const double> inputs,
                   std::span<const std::uint8_t> bits,
                   std::vector<double>& scratch, std::vector<double>& adjoint,
                   std::span<double> grad_out) const;

 private:
  int push(ExprNode n);

  std::vector<ExprNode> nodes_;
  int root_ = -1;
  int num_slots_ = 0;
  std::map<std::uint64_t, int> const_cache_;
  std::map<int, int> input_cache_;
};

}  // namespace sppl
