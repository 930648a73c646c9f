#include "sgm/tensor.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace sgm {

bool Tensor::bitwise_equal(const Tensor& o) const {
    if (shape_ != o.shape_) return false;
    return std::memcmp(data_.data(), o.data_.data(), data_.size() * sizeof(double)) == 0;
}

void Tensor::check_finite(const char* what) const {
    for (double v : data_)
        if (!std::isfinite(v))
            throw std::runtime_error(std::string("non-finite value produced by ") + what);
}

}  // namespace sgm
