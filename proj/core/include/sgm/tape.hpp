#pragma once

#include <cstdint>
#include <vector>

#include "sgm/params.hpp"
#include "sgm/tensor.hpp"

namespace sgm {

using ValueId = std::uint32_t;

enum class Reduce { sum, mean, max };

/// Reverse-mode tape over dense double tensors. Records ops in topological
/// order; backward walks them once in reverse and accumulates parameter
/// gradients into the owning ParamStore (callers zero grads first).
/// Every op validates shapes and rejects non-finite outputs.
class Tape {
public:
    /// Leaf without gradient.
    ValueId constant(Tensor v);
    /// Leaf tied to a named parameter; its gradient accumulates on backward.
    ValueId param(ParamStore& store, const std::string& name);

    ValueId matmul(ValueId a, ValueId b);
    ValueId add(ValueId a, ValueId b);
    ValueId add_rowvec(ValueId a, ValueId b);  // [m,n] + [1,n]
    ValueId sub(ValueId a, ValueId b);
    ValueId mul(ValueId a, ValueId b);
    ValueId mul_colvec(ValueId a, ValueId s);  // [m,n] * [m,1] per-row scalar
    ValueId scale(ValueId a, double c);
    ValueId concat_cols(ValueId a, ValueId b);
    ValueId gather_rows(ValueId a, std::vector<std::uint32_t> idx);
    /// With canonical=true each output cell sums its contributions in
    /// value-sorted order, making the result independent of the row order of
    /// `a` (used where permutation equivariance must hold bitwise).
    ValueId scatter_add_rows(ValueId a, std::vector<std::uint32_t> idx, std::size_t out_rows,
                             bool canonical = false);
    ValueId scale_rows(ValueId a, std::vector<double> factors);  // constants
    ValueId row_sums(ValueId a);                                 // [m,n] -> [m,1]
    ValueId reduce_rows(ValueId a, Reduce kind);                 // [m,n] -> [1,n]
    ValueId emax(ValueId a, ValueId b);                          // elementwise max
    ValueId repeat_row(ValueId a, std::size_t m);                // [1,n] -> [m,n]
    ValueId elu(ValueId a);
    ValueId leaky_relu(ValueId a);
    ValueId sigmoid(ValueId a);
    ValueId relu(ValueId a);
    ValueId log(ValueId a);
    ValueId clamp(ValueId a, double lo, double hi);
    /// Softmax over an arbitrary partition: entries sharing a segment id are
    /// normalized together. Input [n,1].
    ValueId segment_softmax(ValueId a, std::vector<std::uint32_t> seg);
    /// Row-wise normalization to zero mean / unit variance, then gamma/beta.
    ValueId layer_norm(ValueId x, ValueId gamma, ValueId beta, double eps = 1e-5);
    /// out[v,f] = u W^[f] v_row, u [1,D], W [F,D,D], rows [n,D] -> [n,F].
    ValueId bilinear(ValueId u, ValueId w, ValueId rows);
    ValueId sum_all(ValueId a);  // -> [1,1]

    const Tensor& value(ValueId id) const { return nodes_[id].val; }
    std::size_t size() const { return nodes_.size(); }

    /// Accumulates d loss / d p into every reachable parameter's grad buffer.
    /// Throws if loss is not scalar or the tape was already consumed.
    void backward(ValueId loss);

    /// Clears all nodes (keeps capacity); the tape is reusable afterwards.
    void reset();

private:
    enum class Op : std::uint8_t {
        constant, param, matmul, add, add_rowvec, sub, mul, mul_colvec, scale, concat_cols,
        gather_rows, scatter_add_rows, scale_rows, row_sums, reduce_rows, emax, repeat_row,
        elu, leaky_relu, sigmoid, relu, log_, clamp, segment_softmax, layer_norm, bilinear,
        sum_all
    };

    struct Node {
        Op op;
        ValueId a = 0, b = 0, c = 0;
        Tensor val;
        std::vector<std::uint32_t> idx;
        std::vector<double> factors;
        double x = 0, y = 0;
        std::size_t n = 0;
        Reduce reduce = Reduce::sum;
        ParamEntry* param = nullptr;
        Tensor aux1, aux2;
    };

    ValueId push(Node n, const char* what);
    const Tensor& val(ValueId id) const { return nodes_[id].val; }

    std::vector<Node> nodes_;
    bool consumed_ = false;
};

}  // namespace sgm
