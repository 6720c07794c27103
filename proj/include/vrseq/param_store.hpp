#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "vrseq/tensor.hpp"

namespace vrseq {

// Named trainable tensors with parallel gradient buffers. Entries live on
// the heap so pointers handed out to model structs stay valid for the
// lifetime of the store (including after moves of the store itself).
// Single-writer: the training loop owns mutation.
class ParamStore {
public:
    struct Entry {
        std::string name;
        Tensor value;
        Tensor grad;
    };

    ParamStore() = default;
    ParamStore(ParamStore&&) = default;
    ParamStore& operator=(ParamStore&&) = default;
    ParamStore(const ParamStore&) = delete;
    ParamStore& operator=(const ParamStore&) = delete;

    // Registers a zero-initialised parameter; duplicate names are an error.
    Entry& create(const std::string& name, std::vector<int> shape);

    bool has(const std::string& name) const { return index_.count(name) > 0; }
    Entry& entry(const std::string& name);
    const Entry& entry(const std::string& name) const;
    Tensor& value(const std::string& name) { return entry(name).value; }
    Tensor& grad(const std::string& name) { return entry(name).grad; }

    void zero_grads();
    std::int64_t param_count() const;
    int entry_count() const { return static_cast<int>(entries_.size()); }

    // Registration order.
    std::vector<std::string> names() const;

    void for_each(const std::function<void(Entry&)>& fn);
    void for_each(const std::function<void(const Entry&)>& fn) const;

    // First path segment of the name ("encoder/phi_x/W1" -> "encoder").
    static std::string group_of(const std::string& name);

    // Returns false and sets offender on the first non-finite gradient value.
    bool grads_finite(std::string* offender = nullptr) const;

    std::map<std::string, std::vector<double>> snapshot_values() const;
    void restore_values(const std::map<std::string, std::vector<double>>& snap);

private:
    std::vector<std::unique_ptr<Entry>> entries_;
    std::unordered_map<std::string, int> index_;
};

}  // namespace vrseq
