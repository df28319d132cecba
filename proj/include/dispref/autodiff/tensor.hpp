#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dispref::ad {

using Shape = std::vector<int>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Graph node. Interior nodes own their parents, so a graph lives exactly as
/// long as some tensor still refers to its output.
struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // allocated on first accumulation
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    /// Receives d(loss)/d(this) and accumulates into the parents.
    std::function<void(std::span<const double>)> backward;

    /// Zero-initialized gradient buffer of the node's size.
    std::span<double> grad_buffer();
};

/// Handle to a node in a define-by-run reverse-mode graph.
class Tensor {
public:
    Tensor() = default;

    static Tensor constant(Shape shape, std::vector<double> values);
    static Tensor zeros(Shape shape);
    static Tensor scalar(double value);
    /// Trainable leaf.
    static Tensor parameter(Shape shape, std::vector<double> values);

    /// Result of an operation; parents that do not require gradients are dropped.
    static Tensor from_op(Shape shape, std::vector<double> values, const std::vector<Tensor>& inputs,
                          std::function<void(std::span<const double>)> backward);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    std::size_t rank() const { return node_->shape.size(); }
    int dim(std::size_t i) const { return node_->shape.at(i); }
    std::size_t numel() const { return node_->value.size(); }

    std::span<const double> values() const { return node_->value; }
    /// Leaves only; tensors produced by operations are immutable.
    std::span<double> mutable_values();
    double item() const;

    bool requires_grad() const { return node_->requires_grad; }
    /// Gradient after backward(); empty span when nothing reached this tensor.
    std::span<const double> grad() const { return node_->grad; }
    void zero_grad();

    /// Accumulates into this tensor's gradient (used by operation closures).
    std::span<double> grad_buffer() const { return node_->grad_buffer(); }
    /// Same storage viewed as a non-differentiable constant.
    Tensor detach() const;

    Node* node() const { return node_.get(); }

private:
    explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
    std::shared_ptr<Node> node_;
};

/// While alive on a thread, operations on that thread record no graph
/// (inference mode). Guards nest.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

bool grad_enabled();

/// Reverse sweep from a scalar root. Gradients accumulate into every
/// reachable tensor that requires them; callers zero parameter gradients
/// between steps. A graph should be swept once.
void backward(const Tensor& loss);

}  // namespace dispref::ad
