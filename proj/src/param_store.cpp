#include "vrseq/param_store.hpp"

#include <cmath>
#include <stdexcept>

namespace vrseq {

ParamStore::Entry& ParamStore::create(const std::string& name, std::vector<int> shape) {
    if (has(name)) throw std::invalid_argument("duplicate parameter: " + name);
    auto e = std::make_unique<Entry>();
    e->name = name;
    e->value = Tensor(shape);
    e->grad = Tensor(std::move(shape));
    entries_.push_back(std::move(e));
    index_[name] = static_cast<int>(entries_.size()) - 1;
    return *entries_.back();
}

ParamStore::Entry& ParamStore::entry(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
    return *entries_[it->second];
}

const ParamStore::Entry& ParamStore::entry(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
    return *entries_[it->second];
}

void ParamStore::zero_grads() {
    for (auto& e : entries_) e->grad.fill(0.0);
}

std::int64_t ParamStore::param_count() const {
    std::int64_t n = 0;
    for (const auto& e : entries_) n += e->value.size();
    return n;
}

std::vector<std::string> ParamStore::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e->name);
    return out;
}

void ParamStore::for_each(const std::function<void(Entry&)>& fn) {
    for (auto& e : entries_) fn(*e);
}

void ParamStore::for_each(const std::function<void(const Entry&)>& fn) const {
    for (const auto& e : entries_) fn(*e);
}

std::string ParamStore::group_of(const std::string& name) {
    const auto pos = name.find('/');
    return pos == std::string::npos ? name : name.substr(0, pos);
}

bool ParamStore::grads_finite(std::string* offender) const {
    for (const auto& e : entries_) {
        if (!e->grad.all_finite()) {
            if (offender) *offender = e->name;
            return false;
        }
    }
    return true;
}

std::map<std::string, std::vector<double>> ParamStore::snapshot_values() const {
    std::map<std::string, std::vector<double>> snap;
    for (const auto& e : entries_) snap[e->name] = e->value.values();
    return snap;
}

void ParamStore::restore_values(const std::map<std::string, std::vector<double>>& snap) {
    for (auto& e : entries_) {
        auto it = snap.find(e->name);
        if (it == snap.end()) throw std::out_of_range("snapshot missing parameter: " + e->name);
        if (it->second.size() != e->value.values().size())
            throw std::invalid_argument("snapshot shape mismatch for " + e->name);
        e->value.values() = it->second;
    }
}

}  // namespace vrseq
