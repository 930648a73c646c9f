#include "sgm/params.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "sgm/rng.hpp"

namespace sgm {

Tensor& ParamStore::create(const std::string& name, std::vector<std::size_t> shape, Init init,
                           std::uint64_t seed) {
    if (has(name)) throw std::invalid_argument("duplicate parameter name: " + name);
    if (name.find_first_of(" \t\n") != std::string::npos)
        throw std::invalid_argument("parameter name may not contain whitespace: " + name);
    Tensor t(shape);
    if (init == Init::ones) {
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = 1.0;
    } else if (init == Init::xavier) {
        // fan_in/fan_out from the trailing two dims; rank-1 tensors use size.
        std::size_t fan_in = shape.size() >= 2 ? shape[shape.size() - 2] : shape[0];
        std::size_t fan_out = shape.size() >= 2 ? shape[shape.size() - 1] : shape[0];
        double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Rng rng(Rng::mix(seed, Rng::hash_str(name)));
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = (2.0 * rng.next_double() - 1.0) * a;
    }
    entries_.push_back(ParamEntry{name, std::move(t), Tensor(shape), Tensor(shape), Tensor(shape)});
    index_[name] = entries_.size() - 1;
    return entries_.back().value;
}

ParamEntry& ParamStore::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
    return entries_[it->second];
}

const ParamEntry& ParamStore::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
    return entries_[it->second];
}

std::size_t ParamStore::value_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
}

void ParamStore::zero_grads() {
    for (auto& e : entries_)
        for (std::size_t i = 0; i < e.grad.size(); ++i) e.grad[i] = 0.0;
}

std::vector<Tensor> ParamStore::snapshot_values() const {
    std::vector<Tensor> snap;
    snap.reserve(entries_.size());
    for (const auto& e : entries_) snap.push_back(e.value);
    return snap;
}

void ParamStore::restore_values(const std::vector<Tensor>& snap) {
    if (snap.size() != entries_.size())
        throw std::invalid_argument("snapshot size does not match parameter store");
    for (std::size_t i = 0; i < snap.size(); ++i) {
        if (!snap[i].same_shape(entries_[i].value))
            throw std::invalid_argument("snapshot shape mismatch at " + entries_[i].name);
        entries_[i].value = snap[i];
    }
}

void ParamStore::save(std::ostream& out) const {
    char buf[64];
    for (const auto& e : entries_) {
        out << "P " << e.name;
        for (std::size_t d : e.value.shape()) out << ' ' << d;
        out << '\n';
        std::size_t row_len = e.value.shape().back();
        std::size_t rows = e.value.size() / row_len;
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < row_len; ++c) {
                std::snprintf(buf, sizeof buf, "%a", e.value[r * row_len + c]);
                out << (c ? " " : "") << buf;
            }
            out << '\n';
        }
    }
}

void ParamStore::load(std::istream& in) {
    entries_.clear();
    index_.clear();
    std::string line;
    std::string pending;
    bool have_pending = false;
    auto next_line = [&](std::string& dst) {
        if (have_pending) {
            dst = pending;
            have_pending = false;
            return true;
        }
        return static_cast<bool>(std::getline(in, dst));
    };

    while (next_line(line)) {
        if (line.empty()) continue;
        std::istringstream hs(line);
        std::string tag, name;
        hs >> tag >> name;
        if (tag != "P") throw std::runtime_error("checkpoint: expected P header, got: " + line);
        std::vector<std::size_t> shape;
        std::size_t d;
        while (hs >> d) shape.push_back(d);
        if (shape.empty()) throw std::runtime_error("checkpoint: missing shape for " + name);

        Tensor t(shape);
        std::size_t row_len = shape.back();
        std::size_t rows = t.size() / row_len;
        for (std::size_t r = 0; r < rows; ++r) {
            std::string row;
            if (!std::getline(in, row))
                throw std::runtime_error("checkpoint: truncated values for " + name);
            const char* p = row.c_str();
            char* endp = nullptr;
            for (std::size_t c = 0; c < row_len; ++c) {
                double v = std::strtod(p, &endp);
                if (endp == p) throw std::runtime_error("checkpoint: bad value in " + name);
                t[r * row_len + c] = v;
                p = endp;
            }
        }
        if (has(name)) throw std::runtime_error("checkpoint: duplicate parameter " + name);
        entries_.push_back(ParamEntry{name, t, Tensor(shape), Tensor(shape), Tensor(shape)});
        index_[name] = entries_.size() - 1;
    }
}

}  // namespace sgm
