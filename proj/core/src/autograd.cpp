/*
 * Copyright 2026 The MixANT Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mixant/autograd.hpp"

namespace mixant {

Parameter& ParameterStore::add(std::string name, Tensor init) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter " + name);
  index_.emplace(name, params_.size());
  Tensor grad(init.shape());
  params_.push_back(Parameter{std::move(name), std::move(init), std::move(grad)});
  return params_.back();
}

Parameter& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter " + name);
  return params_[it->second];
}

const Parameter& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter " + name);
  return params_[it->second];
}

std::size_t ParameterStore::total_elements() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

const Tensor& Var::value() const { return graph_->value(*this); }

Var Graph::constant(Tensor value) {
  require_finite(value, "constant");
  nodes_.push_back(Node{std::move(value), {}, {}, false, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Graph::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) {
    return Var(this, it->second);
  }
  require_finite(p.value, p.name.c_str());
  nodes_.push_back(Node{p.value, {}, {}, grad_enabled_, &p});
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward,
                  const char* op_name) {
  require_finite(value, op_name);
  bool needs = false;
  if (grad_enabled_) {
    for (const Var& in : inputs) needs = needs || nodes_[in.id()].requires_grad;
  }
  nodes_.push_back(
      Node{std::move(value), {}, needs ? std::move(backward) : BackwardFn{}, needs, nullptr});
  return Var(this, nodes_.size() - 1);
}

Tensor& Graph::grad_buffer(Var v) {
  Node& n = nodes_[v.id()];
  if (n.grad.shape() != n.value.shape() || n.grad.size() != n.value.size()) {
    n.grad = Tensor(n.value.shape());
  }
  return n.grad;
}

Tensor Graph::grad(Var v) const {
  const Node& n = nodes_[v.id()];
  if (n.grad.size() == n.value.size() && n.grad.shape() == n.value.shape()) return n.grad;
  return Tensor(n.value.shape());
}

void Graph::backward(Var loss) {
  if (!loss.valid() || &loss.graph() != this) {
    throw std::invalid_argument("backward(): loss belongs to a different graph");
  }
  Node& root = nodes_[loss.id()];
  if (root.value.size() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " +
                     shape_string(root.value.shape()));
  }
  if (!root.requires_grad) return;
  grad_buffer(loss).fill(1.0);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.size() != n.value.size()) continue;
    if (n.backward) n.backward(n.value, n.grad);
    if (n.param) {
      auto& dst = n.param->grad.storage();
      const auto& src = n.grad.storage();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
}

}  // namespace mixant
