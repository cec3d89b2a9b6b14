// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "unisep/autograd/tensor.h"

#include <cmath>
#include <numeric>
#include <unordered_set>
#include <utility>

#include "unisep/error.h"

namespace unisep::ag {
namespace {

bool g_check_finite = false;
thread_local std::vector<double>* g_kink_log = nullptr;

}  // namespace

std::size_t NumElements(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string ShapeString(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

double* Node::GradBuffer() {
  if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  return grad.data();
}

Tensor Tensor::Constant(Shape shape, std::vector<double> values) {
  UNISEP_CHECK(NumElements(shape) == values.size(), ErrorCode::kShapeMismatch,
               "constant: " + std::to_string(values.size()) + " values for shape " +
                   ShapeString(shape));
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  return Tensor(std::move(node));
}

Tensor Tensor::Zeros(Shape shape) {
  const std::size_t n = NumElements(shape);
  return Constant(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::Parameter(Shape shape, std::vector<double> values) {
  Tensor t = Constant(std::move(shape), std::move(values));
  t.node()->requires_grad = true;
  t.node()->op = "param";
  return t;
}

double Tensor::item() const {
  UNISEP_CHECK(size() == 1, ErrorCode::kShapeMismatch,
               "item() on tensor of shape " + ShapeString(shape()));
  return node_->value[0];
}

Tensor MakeOp(std::string op, Shape shape, std::vector<double> value,
              const std::vector<Tensor>& inputs,
              std::function<void(const Node& self)> backward) {
  auto node = std::make_shared<Node>();
  if (g_check_finite) {
    for (double v : value) {
      UNISEP_CHECK(std::isfinite(v), ErrorCode::kNonFinite,
                   "op '" + op + "' produced a non-finite value");
    }
  }
  node->op = std::move(op);
  node->shape = std::move(shape);
  node->value = std::move(value);
  for (const Tensor& t : inputs) {
    node->requires_grad = node->requires_grad || t.requires_grad();
  }
  if (node->requires_grad) {
    node->inputs.reserve(inputs.size());
    for (const Tensor& t : inputs) node->inputs.push_back(t.ptr());
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

Tape RecordTape(const Tensor& root) {
  Tape tape;
  if (!root.requires_grad()) return tape;
  std::unordered_set<Node*> visited;
  // Iterative post-order DFS; the second pair member marks "inputs done".
  std::vector<std::pair<Node*, bool>> stack{{root.node(), false}};
  while (!stack.empty()) {
    auto [node, expanded] = stack.back();
    stack.pop_back();
    if (expanded) {
      tape.order.push_back(node);
      continue;
    }
    if (!visited.insert(node).second) continue;
    stack.emplace_back(node, true);
    for (auto it = node->inputs.rbegin(); it != node->inputs.rend(); ++it) {
      if ((*it)->requires_grad && !visited.count(it->get())) {
        stack.emplace_back(it->get(), false);
      }
    }
  }
  return tape;
}

void Backward(const Tensor& loss) {
  UNISEP_CHECK(loss.defined() && loss.size() == 1, ErrorCode::kShapeMismatch,
               "backward needs a scalar loss");
  Tape tape = RecordTape(loss);
  UNISEP_CHECK(!tape.order.empty(), ErrorCode::kInvalidArgument,
               "loss does not depend on any parameter");
  for (Node* n : tape.order) {
    if (n->is_leaf()) {
      n->GradBuffer();
    } else {
      n->grad.assign(n->value.size(), 0.0);
    }
  }
  loss.node()->grad[0] += 1.0;
  for (auto it = tape.order.rbegin(); it != tape.order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

void ZeroGrad(const std::vector<Tensor>& params) {
  for (const Tensor& p : params) p.node()->grad.assign(p.size(), 0.0);
}

void SetCheckFinite(bool enabled) { g_check_finite = enabled; }
bool CheckFiniteEnabled() { return g_check_finite; }

KinkRecorder::KinkRecorder(std::vector<double>* log) : previous_(g_kink_log) {
  g_kink_log = log;
}

KinkRecorder::~KinkRecorder() { g_kink_log = previous_; }

void KinkRecorder::Record(const std::vector<double>& pre) {
  if (g_kink_log) g_kink_log->insert(g_kink_log->end(), pre.begin(), pre.end());
}

}  // namespace unisep::ag
