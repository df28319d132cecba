#include "dispref/autodiff/parameter.hpp"

#include <algorithm>
#include <stdexcept>

namespace dispref::ad {

Tensor ParameterSet::add(std::string name, Shape shape, std::vector<double> values) {
    if (find(name)) throw std::domain_error("ParameterSet: duplicate parameter name '" + name + "'");
    Tensor t = Tensor::parameter(std::move(shape), std::move(values));
    params_.push_back({std::move(name), t});
    return t;
}

const Parameter* ParameterSet::find(const std::string& name) const {
    auto it = std::find_if(params_.begin(), params_.end(), [&](const Parameter& p) { return p.name == name; });
    return it == params_.end() ? nullptr : &*it;
}

const Parameter& ParameterSet::at(const std::string& name) const {
    if (const Parameter* p = find(name)) return *p;
    throw std::out_of_range("ParameterSet: no parameter named '" + name + "'");
}

std::size_t ParameterSet::scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.tensor.numel();
    return n;
}

void ParameterSet::zero_grad() {
    for (auto& p : params_) {
        p.tensor.grad_buffer();
        p.tensor.zero_grad();
    }
}

ParameterSet ParameterSet::clone() const {
    ParameterSet out;
    for (const auto& p : params_)
        out.add(p.name, p.tensor.shape(), std::vector<double>(p.tensor.values().begin(), p.tensor.values().end()));
    return out;
}

}  // namespace dispref::ad
