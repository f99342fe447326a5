#include "poisonlab/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace poisonlab {

namespace {

const char* op_name(Tape::Op op) {
    switch (op) {
        case Tape::Op::constant: return "constant";
        case Tape::Op::parameter: return "parameter";
        case Tape::Op::add: return "add";
        case Tape::Op::sub: return "sub";
        case Tape::Op::mul: return "mul";
        case Tape::Op::matmul: return "matmul";
        case Tape::Op::transpose: return "transpose";
        case Tape::Op::scale: return "scale";
        case Tape::Op::activation: return "activation";
        case Tape::Op::abs: return "abs";
        case Tape::Op::sum: return "sum";
        case Tape::Op::mean: return "mean";
        case Tape::Op::reshape: return "reshape";
        case Tape::Op::slice: return "slice";
        case Tape::Op::embed: return "embed";
        case Tape::Op::broadcast_add_row: return "broadcast_add_row";
        case Tape::Op::tile_cols: return "tile_cols";
    }
    return "?";
}

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

} // namespace

Matrix activation(const Matrix& x, Activation kind) {
    Matrix y(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = x.values()[i];
        switch (kind) {
            case Activation::softsign: y.values()[i] = v / (1.0 + std::abs(v)); break;
            case Activation::tanh: y.values()[i] = std::tanh(v); break;
            case Activation::relu: y.values()[i] = v > 0.0 ? v : 0.0; break;
            case Activation::exp: y.values()[i] = std::exp(v); break;
        }
    }
    check_finite(y, "activation");
    return y;
}

Expr Tape::constant(Matrix v) {
    Node n;
    n.op = Op::constant;
    n.value = std::move(v);
    return emit(std::move(n));
}

Expr Tape::parameter(Matrix v) {
    Node n;
    n.op = Op::parameter;
    n.value = std::move(v);
    return emit(std::move(n));
}

Expr Tape::emit(Node n) {
    if (!n.value.all_finite()) {
        throw NumericFailure(std::string("non-finite value produced by tape op '") +
                             op_name(n.op) + "'");
    }
    nodes_.push_back(std::move(n));
    return Expr{this, static_cast<int>(nodes_.size()) - 1};
}

const Matrix& Tape::grad(Expr e) const {
    const Node& n = node(e.id);
    require(!n.grad.empty() || ran_backward_, "grad requested before backward()");
    return n.grad;
}

void Tape::backward(Expr root) {
    require(root.tape == this && root.id >= 0, "backward: foreign or invalid root");
    require(!ran_backward_, "backward: tape already swept");
    const Node& r = node(root.id);
    if (r.value.rows() != 1 || r.value.cols() != 1) {
        throw ContractViolation("backward: root must be scalar (1x1), got " +
                                std::to_string(r.value.rows()) + "x" +
                                std::to_string(r.value.cols()));
    }
    ran_backward_ = true;

    auto buf = [this](int id) -> Matrix& {
        Node& n = mut_node(id);
        if (n.grad.empty()) n.grad = Matrix(n.value.rows(), n.value.cols(), 0.0);
        return n.grad;
    };

    buf(root.id)(0, 0) = 1.0;

    for (int id = root.id; id >= 0; --id) {
        Node& n = mut_node(id);
        if (n.grad.empty()) continue; // not reachable from the root
        const Matrix& g = n.grad;
        switch (n.op) {
            case Op::constant:
            case Op::parameter:
                break;
            case Op::add: {
                Matrix& ga = buf(n.a);
                Matrix& gb = buf(n.b);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    ga.values()[i] += g.values()[i];
                    gb.values()[i] += g.values()[i];
                }
                break;
            }
            case Op::sub: {
                Matrix& ga = buf(n.a);
                Matrix& gb = buf(n.b);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    ga.values()[i] += g.values()[i];
                    gb.values()[i] -= g.values()[i];
                }
                break;
            }
            case Op::mul: {
                const Matrix& va = node(n.a).value;
                const Matrix& vb = node(n.b).value;
                Matrix& ga = buf(n.a);
                Matrix& gb = buf(n.b);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    ga.values()[i] += g.values()[i] * vb.values()[i];
                    gb.values()[i] += g.values()[i] * va.values()[i];
                }
                break;
            }
            case Op::matmul: {
                const Matrix& va = node(n.a).value;
                const Matrix& vb = node(n.b).value;
                Matrix& ga = buf(n.a);
                Matrix& gb = buf(n.b);
                // ga += g * vb^T
                for (std::size_t i = 0; i < va.rows(); ++i)
                    for (std::size_t j = 0; j < vb.cols(); ++j) {
                        const double gij = g(i, j);
                        if (gij == 0.0) continue;
                        for (std::size_t k = 0; k < va.cols(); ++k)
                            ga(i, k) += gij * vb(k, j);
                    }
                // gb += va^T * g
                for (std::size_t i = 0; i < va.rows(); ++i)
                    for (std::size_t k = 0; k < va.cols(); ++k) {
                        const double aik = va(i, k);
                        if (aik == 0.0) continue;
                        for (std::size_t j = 0; j < vb.cols(); ++j)
                            gb(k, j) += aik * g(i, j);
                    }
                break;
            }
            case Op::transpose: {
                Matrix& ga = buf(n.a);
                for (std::size_t i = 0; i < g.rows(); ++i)
                    for (std::size_t j = 0; j < g.cols(); ++j) ga(j, i) += g(i, j);
                break;
            }
            case Op::scale: {
                Matrix& ga = buf(n.a);
                for (std::size_t i = 0; i < g.size(); ++i)
                    ga.values()[i] += n.scalar * g.values()[i];
                break;
            }
            case Op::activation: {
                const Matrix& x = node(n.a).value;
                Matrix& ga = buf(n.a);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    double d = 0.0;
                    const double xv = x.values()[i];
                    const double yv = n.value.values()[i];
                    switch (n.act) {
                        case Activation::softsign: {
                            const double t = 1.0 + std::abs(xv);
                            d = 1.0 / (t * t);
                            break;
                        }
                        case Activation::tanh: d = 1.0 - yv * yv; break;
                        case Activation::relu: d = xv > 0.0 ? 1.0 : 0.0; break;
                        case Activation::exp: d = yv; break;
                    }
                    ga.values()[i] += d * g.values()[i];
                }
                break;
            }
            case Op::abs: {
                const Matrix& x = node(n.a).value;
                Matrix& ga = buf(n.a);
                for (std::size_t i = 0; i < g.size(); ++i)
                    ga.values()[i] += sign_of(x.values()[i]) * g.values()[i];
                break;
            }
            case Op::sum: {
                Matrix& ga = buf(n.a);
                const double gs = g(0, 0);
                for (double& v : ga.values()) v += gs;
                break;
            }
            case Op::mean: {
                Matrix& ga = buf(n.a);
                const double gs = g(0, 0) / static_cast<double>(ga.size());
                for (double& v : ga.values()) v += gs;
                break;
            }
            case Op::reshape: {
                Matrix& ga = buf(n.a);
                for (std::size_t i = 0; i < g.size(); ++i) ga.values()[i] += g.values()[i];
                break;
            }
            case Op::slice: {
                Matrix& ga = buf(n.a);
                for (std::size_t i = n.i0; i < n.i1; ++i)
                    for (std::size_t j = n.j0; j < n.j1; ++j)
                        ga(i, j) += g(i - n.i0, j - n.j0);
                break;
            }
            case Op::embed: {
                Matrix& ga = buf(n.a);
                for (std::size_t i = 0; i < ga.rows(); ++i)
                    for (std::size_t j = 0; j < ga.cols(); ++j)
                        ga(i, j) += g(n.i0 + i, n.cols[j]);
                break;
            }
            case Op::broadcast_add_row: {
                Matrix& ga = buf(n.a);
                Matrix& gb = buf(n.b);
                for (std::size_t i = 0; i < g.rows(); ++i)
                    for (std::size_t j = 0; j < g.cols(); ++j) {
                        ga(i, j) += g(i, j);
                        gb(0, j) += g(i, j);
                    }
                break;
            }
            case Op::tile_cols: {
                Matrix& ga = buf(n.a);
                const std::size_t nblock = ga.cols();
                for (std::size_t j = 0; j < g.cols(); ++j)
                    ga(0, j % nblock) += g(0, j);
                break;
            }
        }
    }
}

namespace {

void require_same_tape(Expr a, Expr b, const char* op) {
    require(a.tape != nullptr && a.tape == b.tape,
            std::string(op) + ": operands on different tapes");
}

void require_shape(bool ok, const char* op) {
    if (!ok) throw ContractViolation(std::string(op) + ": shape mismatch");
}

} // namespace

Expr add(Expr a, Expr b) {
    require_same_tape(a, b, "add");
    Tape::Node n;
    n.op = Tape::Op::add;
    n.a = a.id;
    n.b = b.id;
    n.value = add(a.tape->value(a), b.tape->value(b));
    return a.tape->emit(std::move(n));
}

Expr sub(Expr a, Expr b) {
    require_same_tape(a, b, "sub");
    Tape::Node n;
    n.op = Tape::Op::sub;
    n.a = a.id;
    n.b = b.id;
    n.value = sub(a.tape->value(a), b.tape->value(b));
    return a.tape->emit(std::move(n));
}

Expr mul(Expr a, Expr b) {
    require_same_tape(a, b, "mul");
    Tape::Node n;
    n.op = Tape::Op::mul;
    n.a = a.id;
    n.b = b.id;
    n.value = mul(a.tape->value(a), b.tape->value(b));
    return a.tape->emit(std::move(n));
}

Expr matmul(Expr a, Expr b) {
    require_same_tape(a, b, "matmul");
    Tape::Node n;
    n.op = Tape::Op::matmul;
    n.a = a.id;
    n.b = b.id;
    n.value = matmul(a.tape->value(a), b.tape->value(b));
    return a.tape->emit(std::move(n));
}

Expr transpose(Expr a) {
    Tape::Node n;
    n.op = Tape::Op::transpose;
    n.a = a.id;
    n.value = transpose(a.tape->value(a));
    return a.tape->emit(std::move(n));
}

Expr scale(Expr a, double s) {
    Tape::Node n;
    n.op = Tape::Op::scale;
    n.a = a.id;
    n.scalar = s;
    n.value = scale(a.tape->value(a), s);
    return a.tape->emit(std::move(n));
}

Expr activate(Expr a, Activation kind) {
    Tape::Node n;
    n.op = Tape::Op::activation;
    n.a = a.id;
    n.act = kind;
    n.value = activation(a.tape->value(a), kind);
    return a.tape->emit(std::move(n));
}

Expr abs_val(Expr a) {
    Tape::Node n;
    n.op = Tape::Op::abs;
    n.a = a.id;
    const Matrix& x = a.tape->value(a);
    n.value = Matrix(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) n.value.values()[i] = std::abs(x.values()[i]);
    return a.tape->emit(std::move(n));
}

Expr sum_all(Expr a) {
    Tape::Node n;
    n.op = Tape::Op::sum;
    n.a = a.id;
    n.value = Matrix(1, 1, sum(a.tape->value(a)));
    return a.tape->emit(std::move(n));
}

Expr mean_all(Expr a) {
    Tape::Node n;
    n.op = Tape::Op::mean;
    n.a = a.id;
    n.value = Matrix(1, 1, mean(a.tape->value(a)));
    return a.tape->emit(std::move(n));
}

Expr reshape(Expr a, std::size_t rows, std::size_t cols) {
    Tape::Node n;
    n.op = Tape::Op::reshape;
    n.a = a.id;
    n.value = reshape(a.tape->value(a), rows, cols);
    return a.tape->emit(std::move(n));
}

Expr slice(Expr a, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) {
    Tape::Node n;
    n.op = Tape::Op::slice;
    n.a = a.id;
    n.i0 = r0;
    n.i1 = r1;
    n.j0 = c0;
    n.j1 = c1;
    n.value = slice(a.tape->value(a), r0, r1, c0, c1);
    return a.tape->emit(std::move(n));
}

Expr embed(Expr block, std::size_t rows, std::size_t cols, std::size_t row_offset,
           std::vector<std::size_t> col_map) {
    const Matrix& v = block.tape->value(block);
    require_shape(col_map.size() == v.cols(), "embed");
    require(row_offset + v.rows() <= rows, "embed: rows out of range");
    for (std::size_t c : col_map) require(c < cols, "embed: column out of range");
    Tape::Node n;
    n.op = Tape::Op::embed;
    n.a = block.id;
    n.i0 = row_offset;
    n.cols = std::move(col_map);
    n.value = Matrix(rows, cols, 0.0);
    for (std::size_t i = 0; i < v.rows(); ++i)
        for (std::size_t j = 0; j < v.cols(); ++j)
            n.value(row_offset + i, n.cols[j]) = v(i, j);
    return block.tape->emit(std::move(n));
}

Expr broadcast_add_row(Expr a, Expr row) {
    require_same_tape(a, row, "broadcast_add_row");
    const Matrix& va = a.tape->value(a);
    const Matrix& vr = row.tape->value(row);
    require_shape(vr.rows() == 1 && vr.cols() == va.cols(), "broadcast_add_row");
    Tape::Node n;
    n.op = Tape::Op::broadcast_add_row;
    n.a = a.id;
    n.b = row.id;
    n.value = Matrix(va.rows(), va.cols());
    for (std::size_t i = 0; i < va.rows(); ++i)
        for (std::size_t j = 0; j < va.cols(); ++j) n.value(i, j) = va(i, j) + vr(0, j);
    return a.tape->emit(std::move(n));
}

Expr tile_cols(Expr a, std::size_t k) {
    const Matrix& v = a.tape->value(a);
    require_shape(v.rows() == 1, "tile_cols");
    require(k > 0, "tile_cols: k must be positive");
    Tape::Node n;
    n.op = Tape::Op::tile_cols;
    n.a = a.id;
    n.value = Matrix(1, k * v.cols());
    for (std::size_t t = 0; t < k; ++t)
        for (std::size_t j = 0; j < v.cols(); ++j) n.value(0, t * v.cols() + j) = v(0, j);
    return a.tape->emit(std::move(n));
}

Expr square(Expr a) { return mul(a, a); }

Expr mse(Expr a, Expr b) { return mean_all(square(sub(a, b))); }

Expr masked_mse(Expr a, Expr b, const Matrix& mask, double count) {
    require(count > 0.0, "masked_mse: empty mask");
    Expr diff = sub(a, b);
    Expr masked = mul(diff, a.tape->constant(mask));
    return scale(sum_all(square(masked)), 1.0 / count);
}

std::vector<Matrix> eval_backward(Expr root, std::span<const Expr> params) {
    Tape& t = *root.tape;
    t.backward(root);
    std::vector<Matrix> grads;
    grads.reserve(params.size());
    for (const Expr& p : params) {
        const Tape::Node& n = t.node(p.id);
        grads.push_back(n.grad.empty() ? Matrix(n.value.rows(), n.value.cols(), 0.0) : n.grad);
    }
    return grads;
}

double fd_check(const ExprBuilder& build, const std::vector<Matrix>& params, double step) {
    require(step > 0.0, "fd_check: step must be positive");

    Tape tape;
    std::vector<Expr> pexprs;
    pexprs.reserve(params.size());
    for (const Matrix& p : params) pexprs.push_back(tape.parameter(p));
    Expr root = build(tape, pexprs);
    const std::vector<Matrix> analytic = eval_backward(root, pexprs);

    auto eval_at = [&build](const std::vector<Matrix>& pv) {
        Tape t;
        std::vector<Expr> pe;
        pe.reserve(pv.size());
        for (const Matrix& p : pv) pe.push_back(t.parameter(p));
        Expr r = build(t, pe);
        const Matrix& v = t.value(r);
        require(v.rows() == 1 && v.cols() == 1, "fd_check: builder must return a scalar");
        return v(0, 0);
    };

    std::vector<Matrix> work = params;
    double worst = 0.0;
    for (std::size_t pi = 0; pi < work.size(); ++pi) {
        for (std::size_t e = 0; e < work[pi].size(); ++e) {
            const double orig = work[pi].values()[e];
            work[pi].values()[e] = orig + step;
            const double fp = eval_at(work);
            work[pi].values()[e] = orig - step;
            const double fm = eval_at(work);
            work[pi].values()[e] = orig;
            const double numeric = (fp - fm) / (2.0 * step);
            const double ana = analytic[pi].values()[e];
            const double denom =
                std::max({std::abs(ana), std::abs(numeric), 1e-12});
            worst = std::max(worst, std::abs(ana - numeric) / denom);
        }
    }
    return worst;
}

} // namespace poisonlab
