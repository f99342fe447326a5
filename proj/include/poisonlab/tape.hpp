#pragma once

#include <functional>
#include <span>
#include <vector>

#include "poisonlab/matrix.hpp"

namespace poisonlab {

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid for the tape's lifetime.
struct Expr {
    Tape* tape = nullptr;
    int id = -1;
    bool valid() const { return tape != nullptr && id >= 0; }
};

enum class Activation { softsign, tanh, relu, exp };

// Elementwise activation on a plain matrix (non-differentiable path).
Matrix activation(const Matrix& x, Activation kind);

// Reverse-mode tape over dense matrices.
//
// Nodes are appended in topological order (an op can only reference nodes
// that already exist), so backward() is a single reverse sweep that visits
// each node exactly once. Every op checks its forward value for NaN/Inf and
// throws NumericFailure naming the op on failure. Roots must be 1x1.
//
// A tape is confined to one thread; matrices handed in are copied and never
// mutated.
class Tape {
public:
    enum class Op {
        constant,
        parameter,
        add,
        sub,
        mul,
        matmul,
        transpose,
        scale,
        activation,
        abs,
        sum,
        mean,
        reshape,
        slice,
        embed,
        broadcast_add_row,
        tile_cols,
    };

    struct Node {
        Op op;
        int a = -1;
        int b = -1;
        Matrix value;
        Matrix grad; // allocated during backward
        double scalar = 0.0;
        Activation act = Activation::softsign;
        std::size_t i0 = 0, i1 = 0, j0 = 0, j1 = 0; // slice bounds / embed row offset
        std::vector<std::size_t> cols;              // embed column map
    };

    Expr constant(Matrix v);
    Expr parameter(Matrix v);

    const Matrix& value(Expr e) const { return node(e.id).value; }
    const Matrix& grad(Expr e) const;

    // Propagates d(root)/d(node) into every reachable node.
    void backward(Expr root);

    std::size_t node_count() const { return nodes_.size(); }

    // Low-level node append used by the op functions; validates finiteness.
    Expr emit(Node n);
    const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

private:
    Node& mut_node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
    std::vector<Node> nodes_;
    bool ran_backward_ = false;
};

Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr mul(Expr a, Expr b); // elementwise
Expr matmul(Expr a, Expr b);
Expr transpose(Expr a);
Expr scale(Expr a, double s);
Expr activate(Expr a, Activation kind);
Expr abs_val(Expr a); // subgradient sign(x), sign(0)=0
Expr sum_all(Expr a);  // 1x1
Expr mean_all(Expr a); // 1x1
Expr reshape(Expr a, std::size_t rows, std::size_t cols);
Expr slice(Expr a, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1);

// Places `block` into an otherwise-zero rows x cols matrix: block row i goes
// to row row_offset + i, block column j to column col_map[j].
Expr embed(Expr block, std::size_t rows, std::size_t cols, std::size_t row_offset,
           std::vector<std::size_t> col_map);

// y[i,j] = a[i,j] + row[0,j]
Expr broadcast_add_row(Expr a, Expr row);

// Repeats a 1 x n row vector k times horizontally -> 1 x (k*n).
Expr tile_cols(Expr a, std::size_t k);

Expr square(Expr a);

// mean((a-b)^2) over all cells
Expr mse(Expr a, Expr b);

// sum(((a-b)*mask)^2) / count; mask entries must be 0/1 and count > 0
Expr masked_mse(Expr a, Expr b, const Matrix& mask, double count);

// Gradient of a scalar expression w.r.t. each parameter, in order.
std::vector<Matrix> eval_backward(Expr root, std::span<const Expr> params);

// Central-finite-difference check of the tape gradients.
//
// `build` is called with a fresh tape and one Expr per parameter and must
// return the scalar root. Returns the worst relative error over all
// parameter entries, with denominator max(|analytic|, |numeric|, 1e-12).
using ExprBuilder = std::function<Expr(Tape&, std::span<const Expr>)>;
double fd_check(const ExprBuilder& build, const std::vector<Matrix>& params, double step);

} // namespace poisonlab
