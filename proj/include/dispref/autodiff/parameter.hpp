#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dispref/autodiff/tensor.hpp"

namespace dispref::ad {

struct Parameter {
    std::string name;  // dotted path, e.g. "enc_img.level0.conv1.weight"
    Tensor tensor;
};

/// Ordered collection of trainable tensors with unique names.
class ParameterSet {
public:
    /// Creates and registers a trainable leaf; duplicate names throw std::domain_error.
    Tensor add(std::string name, Shape shape, std::vector<double> values);

    const Parameter* find(const std::string& name) const;
    const Parameter& at(const std::string& name) const;

    std::size_t size() const { return params_.size(); }
    std::size_t scalar_count() const;

    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }
    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }

    /// Sets every parameter gradient to zero (allocating it if needed).
    void zero_grad();

    /// Deep copy of values into fresh leaves (for snapshots).
    ParameterSet clone() const;

private:
    std::vector<Parameter> params_;
};

}  // namespace dispref::ad
