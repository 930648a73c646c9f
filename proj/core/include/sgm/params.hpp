#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgm/tensor.hpp"

namespace sgm {

enum class Init { xavier, zeros, ones };

struct ParamEntry {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor m;  // first moment
    Tensor v;  // second moment
};

/// Named learnable tensors with paired gradient accumulators and optimizer
/// slots. Iteration order is creation order, which makes updates and
/// checkpoints deterministic.
class ParamStore {
public:
    /// Xavier weights are uniform(-a, a) with a = sqrt(6/(fan_in+fan_out)),
    /// drawn deterministically from (name, seed). Throws on duplicate names.
    Tensor& create(const std::string& name, std::vector<std::size_t> shape, Init init,
                   std::uint64_t seed);

    bool has(const std::string& name) const { return index_.count(name) != 0; }
    ParamEntry& at(const std::string& name);
    const ParamEntry& at(const std::string& name) const;
    ParamEntry& entry(std::size_t i) { return entries_[i]; }
    const ParamEntry& entry(std::size_t i) const { return entries_[i]; }
    std::size_t size() const { return entries_.size(); }
    std::size_t value_count() const;

    void zero_grads();

    std::vector<Tensor> snapshot_values() const;
    void restore_values(const std::vector<Tensor>& snap);

    /// Text checkpoint: per parameter a `P <name> <d0> <d1> ...` header, then
    /// values as hexadecimal floats, one row per line. Round-trips bit-exact.
    void save(std::ostream& out) const;
    void load(std::istream& in);  // replaces all entries

private:
    std::vector<ParamEntry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace sgm
