#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lsrl/tensor.hpp"

namespace lsrl {

// Named, ordered collection of tensors forming one network. Iteration order
// is insertion order and is the serialization order. Trainable entries carry
// gradients and are touched by the optimizer; buffers (spectral-norm power
// iteration vectors) are persisted but never trained.
class ParamStore {
public:
    struct Entry {
        std::string name;
        Tensor tensor;
        bool trainable;
    };

    Tensor& add(std::string name, Tensor t);         // trainable
    Tensor& add_buffer(std::string name, Tensor t);  // persisted, not trained

    bool has(std::string_view name) const;
    Tensor& at(std::string_view name);
    const Tensor& at(std::string_view name) const;

    const std::vector<Entry>& entries() const { return entries_; }
    std::vector<Entry>& entries() { return entries_; }
    std::size_t size() const { return entries_.size(); }
    std::vector<std::string> names() const;

    void zero_grads();
    std::size_t total_trainable_values() const;

    // FNV-1a 64 over the raw bits of trainable values, in insertion order.
    std::uint64_t value_hash() const;

private:
    Tensor& insert(std::string name, Tensor t, bool trainable);
    std::vector<Entry> entries_;
};

// target <- tau * live + (1 - tau) * target, elementwise over congruent
// stores (same names, shapes, and order).
void soft_update(const ParamStore& live, ParamStore& target, double tau);

// target <- live. Shorthand for soft_update with tau = 1.
void copy_values(const ParamStore& live, ParamStore& target);

}  // namespace lsrl
