// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Minimal reverse-mode differentiation over dense float64 arrays.
//
// A Tensor is a shared handle to a graph node. Operations build new nodes
// that remember their inputs and a backward rule; Backward() orders the
// nodes reachable from a scalar loss into a tape (inputs before outputs)
// and runs the rules in reverse. Leaf gradients accumulate across calls,
// so training code zeroes them between steps.

#ifndef UNISEP_AUTOGRAD_TENSOR_H_
#define UNISEP_AUTOGRAD_TENSOR_H_

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace unisep::ag {

using Shape = std::vector<std::size_t>;

std::size_t NumElements(const Shape& shape);
std::string ShapeString(const Shape& shape);

struct Node {
  std::vector<double> value;
  Shape shape;
  std::vector<double> grad;
  bool requires_grad = false;
  std::string op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads `self.grad` and accumulates into the inputs' grads.
  std::function<void(const Node& self)> backward;

  bool is_leaf() const { return inputs.empty(); }
  // Allocates a zero gradient on first use and returns its data.
  double* GradBuffer();
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor Constant(Shape shape, std::vector<double> values);
  static Tensor Zeros(Shape shape);
  static Tensor Parameter(Shape shape, std::vector<double> values);
  static Tensor Scalar(double v) { return Constant({1}, {v}); }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t size() const { return node_->value.size(); }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t rank() const { return node_->shape.size(); }
  const std::vector<double>& value() const { return node_->value; }
  std::vector<double>& mutable_value() { return node_->value; }
  const std::vector<double>& grad() const { return node_->grad; }
  std::vector<double>& mutable_grad() { return node_->grad; }
  bool has_grad() const { return node_->grad.size() == node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }
  const std::string& op() const { return node_->op; }
  // Value of a single-element tensor.
  double item() const;

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& ptr() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

// Builds an op node. `backward` is skipped (and not stored) when no input
// requires a gradient.
Tensor MakeOp(std::string op, Shape shape, std::vector<double> value,
              const std::vector<Tensor>& inputs,
              std::function<void(const Node& self)> backward);

// Nodes reachable from a root through gradient-carrying edges, in
// topological order (every node after all of its inputs).
struct Tape {
  std::vector<Node*> order;
};

Tape RecordTape(const Tensor& root);

// Throws unless `loss` has exactly one element.
void Backward(const Tensor& loss);

// Gives every parameter an all-zero gradient buffer.
void ZeroGrad(const std::vector<Tensor>& params);

// When enabled, every op checks its output for NaN/Inf and throws
// kNonFinite naming the op.
void SetCheckFinite(bool enabled);
bool CheckFiniteEnabled();

// While alive, relu/prelu append their pre-activations to `log` (in
// evaluation order). Used by the gradient checker to skip probes that
// cross a kink.
class KinkRecorder {
 public:
  explicit KinkRecorder(std::vector<double>* log);
  ~KinkRecorder();
  KinkRecorder(const KinkRecorder&) = delete;
  KinkRecorder& operator=(const KinkRecorder&) = delete;

  static void Record(const std::vector<double>& pre_activations);

 private:
  std::vector<double>* previous_;
};

}  // namespace unisep::ag

#endif  // UNISEP_AUTOGRAD_TENSOR_H_
