#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "poisonlab/errors.hpp"

namespace poisonlab {

// Dense row-major matrix of 64-bit reals. Storage type for every
// matrix-valued quantity in the project. Values are immutable by convention
// once a matrix has been handed to another component.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool all_finite() const;

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Throws NumericFailure naming `where` if any entry is NaN or infinite.
void check_finite(const Matrix& m, const char* where);

Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix mul(const Matrix& a, const Matrix& b); // elementwise
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix scale(const Matrix& a, double s);

double sum(const Matrix& a);
double mean(const Matrix& a);
double max_abs(const Matrix& a);

// Half-open [r0,r1) x [c0,c1) copy.
Matrix slice(const Matrix& a, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1);

// Row-major reshape; total size must match.
Matrix reshape(const Matrix& a, std::size_t rows, std::size_t cols);

} // namespace poisonlab
