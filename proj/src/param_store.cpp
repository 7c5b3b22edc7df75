#include "lsrl/param_store.hpp"

#include "lsrl/errors.hpp"
#include "lsrl/rng.hpp"

namespace lsrl {

Tensor& ParamStore::insert(std::string name, Tensor t, bool trainable) {
    if (has(name)) throw StateError("duplicate parameter name: " + name);
    t.impl()->requires_grad = trainable;
    entries_.push_back({std::move(name), std::move(t), trainable});
    return entries_.back().tensor;
}

Tensor& ParamStore::add(std::string name, Tensor t) {
    return insert(std::move(name), std::move(t), true);
}

Tensor& ParamStore::add_buffer(std::string name, Tensor t) {
    return insert(std::move(name), std::move(t), false);
}

bool ParamStore::has(std::string_view name) const {
    for (const auto& e : entries_)
        if (e.name == name) return true;
    return false;
}

Tensor& ParamStore::at(std::string_view name) {
    for (auto& e : entries_)
        if (e.name == name) return e.tensor;
    throw StateError("no parameter named '" + std::string(name) + "'");
}

const Tensor& ParamStore::at(std::string_view name) const {
    for (const auto& e : entries_)
        if (e.name == name) return e.tensor;
    throw StateError("no parameter named '" + std::string(name) + "'");
}

std::vector<std::string> ParamStore::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.name);
    return out;
}

void ParamStore::zero_grads() {
    for (auto& e : entries_)
        if (e.trainable) e.tensor.zero_grad();
}

std::size_t ParamStore::total_trainable_values() const {
    std::size_t n = 0;
    for (const auto& e : entries_)
        if (e.trainable) n += e.tensor.size();
    return n;
}

std::uint64_t ParamStore::value_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& e : entries_) {
        if (!e.trainable) continue;
        h = fnv1a64(e.name.data(), e.name.size(), h);
        h = fnv1a64(e.tensor.data().data(), e.tensor.size() * sizeof(double), h);
    }
    return h;
}

namespace {
void check_congruent(const ParamStore& a, const ParamStore& b) {
    bool ok = a.size() == b.size();
    if (ok) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto& ea = a.entries()[i];
            const auto& eb = b.entries()[i];
            if (ea.name != eb.name || ea.tensor.shape() != eb.tensor.shape() ||
                ea.trainable != eb.trainable) {
                ok = false;
                break;
            }
        }
    }
    if (!ok) throw StateError("incongruent parameter stores");
}
}  // namespace

void soft_update(const ParamStore& live, ParamStore& target, double tau) {
    check_congruent(live, target);
    for (std::size_t i = 0; i < live.size(); ++i) {
        const auto& src = live.entries()[i].tensor.data();
        auto& dst = target.at(live.entries()[i].name).mutable_data();
        for (std::size_t j = 0; j < src.size(); ++j) {
            dst[j] = tau * src[j] + (1.0 - tau) * dst[j];
        }
    }
}

void copy_values(const ParamStore& live, ParamStore& target) { soft_update(live, target, 1.0); }

}  // namespace lsrl
