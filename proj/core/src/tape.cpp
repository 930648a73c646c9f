#include "sgm/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgm {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

bool is_mat(const Tensor& t) { return t.rank() == 2; }

}  // namespace

ValueId Tape::push(Node n, const char* what) {
    n.val.check_finite(what);
    nodes_.push_back(std::move(n));
    return static_cast<ValueId>(nodes_.size() - 1);
}

ValueId Tape::constant(Tensor v) {
    Node n{};
    n.op = Op::constant;
    n.val = std::move(v);
    return push(std::move(n), "constant");
}

ValueId Tape::param(ParamStore& store, const std::string& name) {
    Node n{};
    n.op = Op::param;
    n.param = &store.at(name);
    n.val = n.param->value;
    return push(std::move(n), "param");
}

ValueId Tape::matmul(ValueId a, ValueId b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    require(is_mat(A) && is_mat(B) && A.dim(1) == B.dim(0), "matmul shape mismatch");
    Tensor out({A.dim(0), B.dim(1)});
    for (std::size_t i = 0; i < A.dim(0); ++i)
        for (std::size_t k = 0; k < A.dim(1); ++k) {
            double aik = A.at(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < B.dim(1); ++j) out.at(i, j) += aik * B.at(k, j);
        }
    Node n{};
    n.op = Op::matmul;
    n.a = a;
    n.b = b;
    n.val = std::move(out);
    return push(std::move(n), "matmul");
}

ValueId Tape::add(ValueId a, ValueId b) {
    require(val(a).same_shape(val(b)), "add shape mismatch");
    Tensor out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += val(b)[i];
    Node n{};
    n.op = Op::add;
    n.a = a;
    n.b = b;
    n.val = std::move(out);
    return push(std::move(n), "add");
}

ValueId Tape::add_rowvec(ValueId a, ValueId b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    require(is_mat(A) && is_mat(B) && B.dim(0) == 1 && B.dim(1) == A.dim(1),
            "add_rowvec shape mismatch");
    Tensor out = A;
    for (std::size_t i = 0; i < A.dim(0); ++i)
        for (std::size_t j = 0; j < A.dim(1); ++j) out.at(i, j) += B.at(0, j);
    Node n{};
    n.op = Op::add_rowvec;
    n.a = a;
    n.b = b;
    n.val = std::move(out);
    return push(std::move(n), "add_rowvec");
}

ValueId Tape::sub(ValueId a, ValueId b) {
    require(val(a).same_shape(val(b)), "sub shape mismatch");
    Tensor out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= val(b)[i];
    Node n{};
    n.op = Op::sub;
    n.a = a;
    n.b = b;
    n.val = std::move(out);
    return push(std::move(n), "sub");
}

ValueId Tape::mul(ValueId a, ValueId b) {
    require(val(a).same_shape(val(b)), "mul shape mismatch");
    Tensor out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= val(b)[i];
    Node n{};
    n.op = Op::mul;
    n.a = a;
    n.b = b;
    n.val = std::move(out);
    return push(std::move(n), "mul");
}

ValueId Tape::mul_colvec(ValueId a, ValueId s) {
    const Tensor& A = val(a);
    const Tensor& S = val(s);
    require(is_mat(A) && is_mat(S) && S.dim(0) == A.dim(0) && S.dim(1) == 1,
            "mul_colvec shape mismatch");
    Tensor out = A;
    for (std::size_t i = 0; i < A.dim(0); ++i)
        for (std::size_t j = 0; j < A.dim(1); ++j) out.at(i, j) *= S.at(i, 0);
    Node n{};
    n.op = Op::mul_colvec;
    n.a = a;
    n.b = s;
    n.val = std::move(out);
    return push(std::move(n), "mul_colvec");
}

ValueId Tape::scale(ValueId a, double c) {
    Tensor out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
    Node n{};
    n.op = Op::scale;
    n.a = a;
    n.x = c;
    n.val = std::move(out);
    return push(std::move(n), "scale");
}

ValueId Tape::concat_cols(ValueId a, ValueId b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    require(is_mat(A) && is_mat(B) && A.dim(0) == B.dim(0), "concat_cols shape mismatch");
    Tensor out({A.dim(0), A.dim(1) + B.dim(1)});
    for (std::size_t i = 0; i < A.dim(0); ++i) {
        for (std::size_t j = 0; j < A.dim(1); ++j) out.at(i, j) = A.at(i, j);
        for (std::size_t j = 0; j < B.dim(1); ++j) out.at(i, A.dim(1) + j) = B.at(i, j);
    }
    Node n{};
    n.op = Op::concat_cols;
    n.a = a;
    n.b = b;
    n.n = A.dim(1);
    n.val = std::move(out);
    return push(std::move(n), "concat_cols");
}

ValueId Tape::gather_rows(ValueId a, std::vector<std::uint32_t> idx) {
    const Tensor& A = val(a);
    require(is_mat(A), "gather_rows needs a matrix");
    for (auto i : idx) require(i < A.dim(0), "gather_rows index out of range");
    Tensor out({idx.size(), A.dim(1)});
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t j = 0; j < A.dim(1); ++j) out.at(r, j) = A.at(idx[r], j);
    Node n{};
    n.op = Op::gather_rows;
    n.a = a;
    n.idx = std::move(idx);
    n.val = std::move(out);
    return push(std::move(n), "gather_rows");
}

ValueId Tape::scatter_add_rows(ValueId a, std::vector<std::uint32_t> idx, std::size_t out_rows,
                               bool canonical) {
    const Tensor& A = val(a);
    require(is_mat(A) && idx.size() == A.dim(0), "scatter_add_rows index count mismatch");
    for (auto i : idx) require(i < out_rows, "scatter_add_rows index out of range");
    Tensor out({out_rows, A.dim(1)});
    if (canonical) {
        std::vector<std::vector<std::uint32_t>> rows_of(out_rows);
        for (std::size_t r = 0; r < idx.size(); ++r) rows_of[idx[r]].push_back(r);
        std::vector<double> cell;
        for (std::size_t o = 0; o < out_rows; ++o)
            for (std::size_t j = 0; j < A.dim(1); ++j) {
                cell.clear();
                for (std::uint32_t r : rows_of[o]) cell.push_back(A.at(r, j));
                std::sort(cell.begin(), cell.end());
                double s = 0;
                for (double v : cell) s += v;
                out.at(o, j) = s;
            }
    } else {
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t j = 0; j < A.dim(1); ++j) out.at(idx[r], j) += A.at(r, j);
    }
    Node n{};
    n.op = Op::scatter_add_rows;
    n.a = a;
    n.idx = std::move(idx);
    n.n = out_rows;
    n.val = std::move(out);
    return push(std::move(n), "scatter_add_rows");
}

ValueId Tape::scale_rows(ValueId a, std::vector<double> factors) {
    const Tensor& A = val(a);
    require(is_mat(A) && factors.size() == A.dim(0), "scale_rows factor count mismatch");
    Tensor out = A;
    for (std::size_t i = 0; i < A.dim(0); ++i)
        for (std::size_t j = 0; j < A.dim(1); ++j) out.at(i, j) *= factors[i];
    Node n{};
    n.op = Op::scale_rows;
    n.a = a;
    n.factors = std::move(factors);
    n.val = std::move(out);
    return push(std::move(n), "scale_rows");
}

ValueId Tape::row_sums(ValueId a) {
    const Tensor& A = val(a);
    require(is_mat(A), "row_sums needs a matrix");
    Tensor out({A.dim(0), 1});
    for (std::size_t i = 0; i < A.dim(0); ++i) {
        double s = 0;
        for (std::size_t j = 0; j < A.dim(1); ++j) s += A.at(i, j);
        out.at(i, 0) = s;
    }
    Node n{};
    n.op = Op::row_sums;
    n.a = a;
    n.val = std::move(out);
    return push(std::move(n), "row_sums");
}

ValueId Tape::reduce_rows(ValueId a, Reduce kind) {
    const Tensor& A = val(a);
    require(is_mat(A) && A.dim(0) > 0, "reduce_rows needs a nonempty matrix");
    Tensor out({1, A.dim(1)});
    Node n{};
    if (kind == Reduce::max) {
        n.idx.assign(A.dim(1), 0);
        for (std::size_t j = 0; j < A.dim(1); ++j) {
            double best = A.at(0, j);
            for (std::size_t i = 1; i < A.dim(0); ++i)
                if (A.at(i, j) > best) {
                    best = A.at(i, j);
                    n.idx[j] = static_cast<std::uint32_t>(i);
                }
            out.at(0, j) = best;
        }
    } else {
        for (std::size_t j = 0; j < A.dim(1); ++j) {
            double s = 0;
            for (std::size_t i = 0; i < A.dim(0); ++i) s += A.at(i, j);
            out.at(0, j) = kind == Reduce::mean ? s / static_cast<double>(A.dim(0)) : s;
        }
    }
    n.op = Op::reduce_rows;
    n.a = a;
    n.reduce = kind;
    n.val = std::move(out);
    return push(std::move(n), "reduce_rows");
}

ValueId Tape::emax(ValueId a, ValueId b) {
    require(val(a).same_shape(val(b)), "emax shape mismatch");
    Tensor out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], val(b)[i]);
    Node n{};
    n.op = Op::emax;
    n.a = a;
    n.b = b;
    n.val = std::move(out);
    return push(std::move(n), "emax");
}

ValueId Tape::repeat_row(ValueId a, std::size_t m) {
    const Tensor& A = val(a);
    require(is_mat(A) && A.dim(0) == 1, "repeat_row needs a [1,n] input");
    Tensor out({m, A.dim(1)});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < A.dim(1); ++j) out.at(i, j) = A.at(0, j);
    Node n{};
    n.op = Op::repeat_row;
    n.a = a;
    n.n = m;
    n.val = std::move(out);
    return push(std::move(n), "repeat_row");
}

ValueId Tape::elu(ValueId a) {
    Tensor out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = out[i] > 0 ? out[i] : std::expm1(out[i]);
    Node n{};
    n.op = Op::elu;
    n.a = a;
    n.val = std::move(out);
    return push(std::move(n), "elu");
}

ValueId Tape::leaky_relu(ValueId a) {
    Tensor out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] > 0 ? out[i] : 0.01 * out[i];
    Node n{};
    n.op = Op::leaky_relu;
    n.a = a;
    n.val = std::move(out);
    return push(std::move(n), "leaky_relu");
}

ValueId Tape::sigmoid(ValueId a) {
    Tensor out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double x = out[i];
        out[i] = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    }
    Node n{};
    n.op = Op::sigmoid;
    n.a = a;
    n.val = std::move(out);
    return push(std::move(n), "sigmoid");
}

ValueId Tape::relu(ValueId a) {
    Tensor out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(0.0, out[i]);
    Node n{};
    n.op = Op::relu;
    n.a = a;
    n.val = std::move(out);
    return push(std::move(n), "relu");
}

ValueId Tape::log(ValueId a) {
    Tensor out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(out[i]);
    Node n{};
    n.op = Op::log_;
    n.a = a;
    n.val = std::move(out);
    return push(std::move(n), "log");
}

ValueId Tape::clamp(ValueId a, double lo, double hi) {
    require(lo <= hi, "clamp bounds inverted");
    Tensor out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], lo, hi);
    Node n{};
    n.op = Op::clamp;
    n.a = a;
    n.x = lo;
    n.y = hi;
    n.val = std::move(out);
    return push(std::move(n), "clamp");
}

ValueId Tape::segment_softmax(ValueId a, std::vector<std::uint32_t> seg) {
    const Tensor& A = val(a);
    require(is_mat(A) && A.dim(1) == 1 && seg.size() == A.dim(0),
            "segment_softmax expects [n,1] input and one segment id per row");
    std::uint32_t nseg = 0;
    for (auto s : seg) nseg = std::max(nseg, s + 1);
    std::vector<double> mx(nseg, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < seg.size(); ++i) mx[seg[i]] = std::max(mx[seg[i]], A.at(i, 0));
    Tensor out({A.dim(0), 1});
    std::vector<double> denom(nseg, 0.0);
    for (std::size_t i = 0; i < seg.size(); ++i) {
        out.at(i, 0) = std::exp(A.at(i, 0) - mx[seg[i]]);
        denom[seg[i]] += out.at(i, 0);
    }
    for (std::size_t i = 0; i < seg.size(); ++i) out.at(i, 0) /= denom[seg[i]];
    Node n{};
    n.op = Op::segment_softmax;
    n.a = a;
    n.idx = std::move(seg);
    n.val = std::move(out);
    return push(std::move(n), "segment_softmax");
}

ValueId Tape::layer_norm(ValueId x, ValueId gamma, ValueId beta, double eps) {
    const Tensor& X = val(x);
    const Tensor& Gm = val(gamma);
    const Tensor& Bt = val(beta);
    require(is_mat(X) && X.dim(1) > 0, "layer_norm needs a matrix");
    require(Gm.rank() == 2 && Gm.dim(0) == 1 && Gm.dim(1) == X.dim(1), "layer_norm gamma shape");
    require(Bt.rank() == 2 && Bt.dim(0) == 1 && Bt.dim(1) == X.dim(1), "layer_norm beta shape");
    const std::size_t m = X.dim(0), d = X.dim(1);
    Tensor out({m, d}), xhat({m, d}), inv_std({m, 1});
    for (std::size_t i = 0; i < m; ++i) {
        double mean = 0;
        for (std::size_t j = 0; j < d; ++j) mean += X.at(i, j);
        mean /= static_cast<double>(d);
        double var = 0;
        for (std::size_t j = 0; j < d; ++j) {
            double c = X.at(i, j) - mean;
            var += c * c;
        }
        var /= static_cast<double>(d);
        double is = 1.0 / std::sqrt(var + eps);
        inv_std.at(i, 0) = is;
        for (std::size_t j = 0; j < d; ++j) {
            xhat.at(i, j) = (X.at(i, j) - mean) * is;
            out.at(i, j) = Gm.at(0, j) * xhat.at(i, j) + Bt.at(0, j);
        }
    }
    Node n{};
    n.op = Op::layer_norm;
    n.a = x;
    n.b = gamma;
    n.c = beta;
    n.x = eps;
    n.aux1 = std::move(xhat);
    n.aux2 = std::move(inv_std);
    n.val = std::move(out);
    return push(std::move(n), "layer_norm");
}

ValueId Tape::bilinear(ValueId u, ValueId w, ValueId rows) {
    const Tensor& U = val(u);
    const Tensor& W = val(w);
    const Tensor& V = val(rows);
    require(U.rank() == 2 && U.dim(0) == 1, "bilinear u must be [1,D]");
    require(W.rank() == 3, "bilinear W must be [F,D,D]");
    require(V.rank() == 2, "bilinear rows must be [n,D]");
    const std::size_t D = U.dim(1), F = W.dim(0), nr = V.dim(0);
    require(W.dim(1) == D && W.dim(2) == D && V.dim(1) == D, "bilinear dimension mismatch");

    Tensor z({F, D});  // z[f] = u^T W[f]
    for (std::size_t f = 0; f < F; ++f)
        for (std::size_t i = 0; i < D; ++i) {
            double ui = U.at(0, i);
            if (ui == 0.0) continue;
            for (std::size_t j = 0; j < D; ++j) z.at(f, j) += ui * W.at(f, i, j);
        }
    Tensor out({nr, F});
    for (std::size_t r = 0; r < nr; ++r)
        for (std::size_t f = 0; f < F; ++f) {
            double s = 0;
            for (std::size_t j = 0; j < D; ++j) s += z.at(f, j) * V.at(r, j);
            out.at(r, f) = s;
        }
    Node n{};
    n.op = Op::bilinear;
    n.a = u;
    n.b = w;
    n.c = rows;
    n.aux1 = std::move(z);
    n.val = std::move(out);
    return push(std::move(n), "bilinear");
}

ValueId Tape::sum_all(ValueId a) {
    double s = 0;
    for (std::size_t i = 0; i < val(a).size(); ++i) s += val(a)[i];
    Node n{};
    n.op = Op::sum_all;
    n.a = a;
    n.val = Tensor({1, 1}, {s});
    return push(std::move(n), "sum_all");
}

void Tape::backward(ValueId loss) {
    if (consumed_) throw std::runtime_error("tape already consumed by backward");
    if (val(loss).size() != 1) throw std::invalid_argument("backward requires a scalar loss");
    consumed_ = true;

    std::vector<Tensor> grads(nodes_.size());
    auto g = [&](ValueId id) -> Tensor& {
        if (grads[id].size() == 0) grads[id] = Tensor(nodes_[id].val.shape());
        return grads[id];
    };
    g(loss)[0] = 1.0;

    for (std::size_t ii = nodes_.size(); ii-- > 0;) {
        Node& n = nodes_[ii];
        if (grads[ii].size() == 0) continue;  // unreachable from loss
        const Tensor& go = grads[ii];
        switch (n.op) {
            case Op::constant:
                break;
            case Op::param:
                for (std::size_t i = 0; i < go.size(); ++i) n.param->grad[i] += go[i];
                break;
            case Op::matmul: {
                const Tensor& A = val(n.a);
                const Tensor& B = val(n.b);
                Tensor& ga = g(n.a);
                Tensor& gb = g(n.b);
                for (std::size_t i = 0; i < A.dim(0); ++i)
                    for (std::size_t j = 0; j < B.dim(1); ++j) {
                        double gij = go.at(i, j);
                        if (gij == 0.0) continue;
                        for (std::size_t k = 0; k < A.dim(1); ++k) {
                            ga.at(i, k) += gij * B.at(k, j);
                            gb.at(k, j) += gij * A.at(i, k);
                        }
                    }
                break;
            }
            case Op::add: {
                Tensor& ga = g(n.a);
                Tensor& gb = g(n.b);
                for (std::size_t i = 0; i < go.size(); ++i) {
                    ga[i] += go[i];
                    gb[i] += go[i];
                }
                break;
            }
            case Op::add_rowvec: {
                Tensor& ga = g(n.a);
                Tensor& gb = g(n.b);
                const Tensor& A = val(n.a);
                for (std::size_t i = 0; i < A.dim(0); ++i)
                    for (std::size_t j = 0; j < A.dim(1); ++j) {
                        ga.at(i, j) += go.at(i, j);
                        gb.at(0, j) += go.at(i, j);
                    }
                break;
            }
            case Op::sub: {
                Tensor& ga = g(n.a);
                Tensor& gb = g(n.b);
                for (std::size_t i = 0; i < go.size(); ++i) {
                    ga[i] += go[i];
                    gb[i] -= go[i];
                }
                break;
            }
            case Op::mul: {
                Tensor& ga = g(n.a);
                Tensor& gb = g(n.b);
                const Tensor& A = val(n.a);
                const Tensor& B = val(n.b);
                for (std::size_t i = 0; i < go.size(); ++i) {
                    ga[i] += go[i] * B[i];
                    gb[i] += go[i] * A[i];
                }
                break;
            }
            case Op::mul_colvec: {
                Tensor& ga = g(n.a);
                Tensor& gs = g(n.b);
                const Tensor& A = val(n.a);
                const Tensor& S = val(n.b);
                for (std::size_t i = 0; i < A.dim(0); ++i)
                    for (std::size_t j = 0; j < A.dim(1); ++j) {
                        ga.at(i, j) += go.at(i, j) * S.at(i, 0);
                        gs.at(i, 0) += go.at(i, j) * A.at(i, j);
                    }
                break;
            }
            case Op::scale: {
                Tensor& ga = g(n.a);
                for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * n.x;
                break;
            }
            case Op::concat_cols: {
                Tensor& ga = g(n.a);
                Tensor& gb = g(n.b);
                std::size_t p = n.n;
                for (std::size_t i = 0; i < ga.dim(0); ++i) {
                    for (std::size_t j = 0; j < p; ++j) ga.at(i, j) += go.at(i, j);
                    for (std::size_t j = 0; j < gb.dim(1); ++j) gb.at(i, j) += go.at(i, p + j);
                }
                break;
            }
            case Op::gather_rows: {
                Tensor& ga = g(n.a);
                for (std::size_t r = 0; r < n.idx.size(); ++r)
                    for (std::size_t j = 0; j < ga.dim(1); ++j)
                        ga.at(n.idx[r], j) += go.at(r, j);
                break;
            }
            case Op::scatter_add_rows: {
                Tensor& ga = g(n.a);
                for (std::size_t r = 0; r < n.idx.size(); ++r)
                    for (std::size_t j = 0; j < ga.dim(1); ++j)
                        ga.at(r, j) += go.at(n.idx[r], j);
                break;
            }
            case Op::scale_rows: {
                Tensor& ga = g(n.a);
                for (std::size_t i = 0; i < ga.dim(0); ++i)
                    for (std::size_t j = 0; j < ga.dim(1); ++j)
                        ga.at(i, j) += go.at(i, j) * n.factors[i];
                break;
            }
            case Op::row_sums: {
                Tensor& ga = g(n.a);
                for (std::size_t i = 0; i < ga.dim(0); ++i)
                    for (std::size_t j = 0; j < ga.dim(1); ++j) ga.at(i, j) += go.at(i, 0);
                break;
            }
            case Op::reduce_rows: {
                Tensor& ga = g(n.a);
                const std::size_t m = ga.dim(0);
                for (std::size_t j = 0; j < ga.dim(1); ++j) {
                    if (n.reduce == Reduce::max) {
                        ga.at(n.idx[j], j) += go.at(0, j);
                    } else {
                        double s = n.reduce == Reduce::mean ? go.at(0, j) / static_cast<double>(m)
                                                            : go.at(0, j);
                        for (std::size_t i = 0; i < m; ++i) ga.at(i, j) += s;
                    }
                }
                break;
            }
            case Op::emax: {
                Tensor& ga = g(n.a);
                Tensor& gb = g(n.b);
                const Tensor& A = val(n.a);
                const Tensor& B = val(n.b);
                for (std::size_t i = 0; i < go.size(); ++i) {
                    if (A[i] >= B[i])
                        ga[i] += go[i];
                    else
                        gb[i] += go[i];
                }
                break;
            }
            case Op::repeat_row: {
                Tensor& ga = g(n.a);
                for (std::size_t i = 0; i < n.n; ++i)
                    for (std::size_t j = 0; j < ga.dim(1); ++j) ga.at(0, j) += go.at(i, j);
                break;
            }
            case Op::elu: {
                Tensor& ga = g(n.a);
                const Tensor& X = val(n.a);
                const Tensor& Y = n.val;
                for (std::size_t i = 0; i < go.size(); ++i)
                    ga[i] += go[i] * (X[i] > 0 ? 1.0 : Y[i] + 1.0);
                break;
            }
            case Op::leaky_relu: {
                Tensor& ga = g(n.a);
                const Tensor& X = val(n.a);
                for (std::size_t i = 0; i < go.size(); ++i)
                    ga[i] += go[i] * (X[i] > 0 ? 1.0 : 0.01);
                break;
            }
            case Op::sigmoid: {
                Tensor& ga = g(n.a);
                const Tensor& Y = n.val;
                for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * Y[i] * (1.0 - Y[i]);
                break;
            }
            case Op::relu: {
                Tensor& ga = g(n.a);
                const Tensor& X = val(n.a);
                for (std::size_t i = 0; i < go.size(); ++i) ga[i] += X[i] > 0 ? go[i] : 0.0;
                break;
            }
            case Op::log_: {
                Tensor& ga = g(n.a);
                const Tensor& X = val(n.a);
                for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] / X[i];
                break;
            }
            case Op::clamp: {
                Tensor& ga = g(n.a);
                const Tensor& X = val(n.a);
                for (std::size_t i = 0; i < go.size(); ++i)
                    if (X[i] >= n.x && X[i] <= n.y) ga[i] += go[i];
                break;
            }
            case Op::segment_softmax: {
                Tensor& ga = g(n.a);
                const Tensor& Y = n.val;
                std::uint32_t nseg = 0;
                for (auto s : n.idx) nseg = std::max(nseg, s + 1);
                std::vector<double> dot(nseg, 0.0);
                for (std::size_t i = 0; i < n.idx.size(); ++i)
                    dot[n.idx[i]] += go.at(i, 0) * Y.at(i, 0);
                for (std::size_t i = 0; i < n.idx.size(); ++i)
                    ga.at(i, 0) += Y.at(i, 0) * (go.at(i, 0) - dot[n.idx[i]]);
                break;
            }
            case Op::layer_norm: {
                Tensor& gx = g(n.a);
                Tensor& gg = g(n.b);
                Tensor& gb = g(n.c);
                const Tensor& Gm = val(n.b);
                const Tensor& xhat = n.aux1;
                const Tensor& inv_std = n.aux2;
                const std::size_t m = gx.dim(0), d = gx.dim(1);
                for (std::size_t i = 0; i < m; ++i) {
                    double sum_dxhat = 0, sum_dxhat_xhat = 0;
                    for (std::size_t j = 0; j < d; ++j) {
                        double dxhat = go.at(i, j) * Gm.at(0, j);
                        sum_dxhat += dxhat;
                        sum_dxhat_xhat += dxhat * xhat.at(i, j);
                        gg.at(0, j) += go.at(i, j) * xhat.at(i, j);
                        gb.at(0, j) += go.at(i, j);
                    }
                    double is = inv_std.at(i, 0);
                    double dn = static_cast<double>(d);
                    for (std::size_t j = 0; j < d; ++j) {
                        double dxhat = go.at(i, j) * Gm.at(0, j);
                        gx.at(i, j) +=
                            is * (dxhat - sum_dxhat / dn - xhat.at(i, j) * sum_dxhat_xhat / dn);
                    }
                }
                break;
            }
            case Op::bilinear: {
                Tensor& gu = g(n.a);
                Tensor& gw = g(n.b);
                Tensor& gv = g(n.c);
                const Tensor& U = val(n.a);
                const Tensor& W = val(n.b);
                const Tensor& V = val(n.c);
                const Tensor& z = n.aux1;
                const std::size_t D = U.dim(1), F = W.dim(0), nr = V.dim(0);
                // s[f][j] = sum_r go[r,f] * V[r,j]
                Tensor s({F, D});
                for (std::size_t r = 0; r < nr; ++r)
                    for (std::size_t f = 0; f < F; ++f) {
                        double grf = go.at(r, f);
                        if (grf == 0.0) continue;
                        for (std::size_t j = 0; j < D; ++j) s.at(f, j) += grf * V.at(r, j);
                    }
                for (std::size_t f = 0; f < F; ++f)
                    for (std::size_t i = 0; i < D; ++i) {
                        double ui = U.at(0, i);
                        for (std::size_t j = 0; j < D; ++j) {
                            gw.at(f, i, j) += ui * s.at(f, j);
                            gu.at(0, i) += W.at(f, i, j) * s.at(f, j);
                        }
                    }
                for (std::size_t r = 0; r < nr; ++r)
                    for (std::size_t f = 0; f < F; ++f) {
                        double grf = go.at(r, f);
                        if (grf == 0.0) continue;
                        for (std::size_t j = 0; j < D; ++j) gv.at(r, j) += grf * z.at(f, j);
                    }
                break;
            }
            case Op::sum_all: {
                Tensor& ga = g(n.a);
                for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += go[0];
                break;
            }
        }
    }
}

void Tape::reset() {
    nodes_.clear();
    consumed_ = false;
}

}  // namespace sgm
