#include "dispref/autodiff/tensor.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace dispref::ad {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw std::domain_error("tensor shape has a non-positive extent: " + shape_string(shape));
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

std::string shape_string(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

std::span<double> Node::grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
}

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
    if (values.size() != shape_numel(shape))
        throw std::domain_error("Tensor::constant: value count does not match shape " + shape_string(shape));
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->value = std::move(values);
    return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape) {
    const std::size_t n = shape_numel(shape);
    return constant(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::scalar(double value) { return constant({1}, {value}); }

Tensor Tensor::parameter(Shape shape, std::vector<double> values) {
    Tensor t = constant(std::move(shape), std::move(values));
    t.node_->requires_grad = true;
    return t;
}

Tensor Tensor::from_op(Shape shape, std::vector<double> values, const std::vector<Tensor>& inputs,
                       std::function<void(std::span<const double>)> backward) {
    Tensor t = constant(std::move(shape), std::move(values));
    if (!g_grad_enabled) return t;
    for (const Tensor& in : inputs) {
        if (in.defined() && in.requires_grad()) t.node_->parents.push_back(in.node_);
    }
    if (!t.node_->parents.empty()) {
        t.node_->requires_grad = true;
        t.node_->backward = std::move(backward);
    }
    return t;
}

std::span<double> Tensor::mutable_values() {
    if (node_->backward) throw std::logic_error("Tensor::mutable_values: tensor is an operation result");
    return node_->value;
}

double Tensor::item() const {
    if (numel() != 1) throw std::domain_error("Tensor::item: tensor has " + std::to_string(numel()) + " elements");
    return node_->value[0];
}

void Tensor::zero_grad() {
    std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return constant(node_->shape, node_->value); }

void backward(const Tensor& loss) {
    if (!loss.defined() || loss.numel() != 1)
        throw std::domain_error("backward: root must be a scalar tensor");
    if (!loss.requires_grad()) return;

    // Iterative post-order DFS gives a topological order (parents first).
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack{{loss.node(), 0}};
    seen.insert(loss.node());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* parent = node->parents[next++].get();
            if (seen.insert(parent).second) stack.emplace_back(parent, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    loss.node()->grad_buffer()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        if (node->backward && !node->grad.empty()) node->backward(node->grad);
    }
}

}  // namespace dispref::ad
