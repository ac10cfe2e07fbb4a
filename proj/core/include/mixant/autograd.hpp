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

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "mixant/tensor.hpp"

namespace mixant {

/// A named learnable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

/// Owns every parameter of a model. Addresses are stable for the store's
/// lifetime, so layers may hold `Parameter*`.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  Parameter& add(std::string name, Tensor init);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const noexcept { return params_.size(); }
  std::size_t total_elements() const;
  void zero_grad();

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::deque<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

class Graph;

/// Handle to a node on a Graph tape.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Graph& graph() const { return *graph_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return graph_ != nullptr; }

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so the tape
/// order is a topological order and cycles cannot be expressed.
///
/// A Graph with gradients disabled records values only; it is used for
/// sampling, where no backward pass follows.
class Graph {
 public:
  /// Receives the node's forward value and the upstream gradient.
  using BackwardFn = std::function<void(const Tensor& value, const Tensor& grad)>;

  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  /// Leaf bound to `p`; repeated calls return the same node.
  Var param(Parameter& p);

  /// Appends an op result. `backward` is kept only when some input needs a
  /// gradient. Throws NumericError if `value` is not finite.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward,
             const char* op_name);

  bool grad_enabled() const noexcept { return grad_enabled_; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  const Tensor& value(Var v) const { return nodes_[v.id()].value; }

  /// Gradient buffer of `v`, zero-allocated on first use. Only valid for
  /// nodes that require gradients.
  Tensor& grad_buffer(Var v);
  /// Gradient of `v` after backward(); zeros if nothing flowed into it.
  Tensor grad(Var v) const;

  /// Propagates d(loss)/d(node) to every node and adds parameter gradients
  /// into Parameter::grad. Throws ShapeError if `loss` is not a scalar.
  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    bool requires_grad = false;
    Parameter* param = nullptr;
  };

  bool grad_enabled_;
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
};

}  // namespace mixant
