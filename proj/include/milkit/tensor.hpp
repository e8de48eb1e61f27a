#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace milkit {

/// Raised when operand shapes do not agree. There is no broadcasting anywhere
/// in this library; a mismatch always means a wiring bug upstream.
class ShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for malformed or inconsistent input data (files, ids, labels).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a computation produces or receives a non-finite value.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major tensor of 64-bit floats with an explicit shape.
/// The single numeric currency of the library.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor vec(std::initializer_list<double> values);
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t i) const { return shape_[i]; }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    void fill(double v);
    bool all_finite() const;

    bool operator==(const Tensor& other) const = default;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

std::string shape_str(const std::vector<std::size_t>& shape);
std::string shape_str(const Tensor& t);

void require_matrix(const Tensor& t, const char* what);
void require_vector(const Tensor& t, const char* what);
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

/// c = a (m x k) times b (k x n). Parallel over output rows; each output
/// element is a serial k-ascending accumulation, so the result is bitwise
/// identical to ref::matmul for any thread count.
Tensor matmul(const Tensor& a, const Tensor& b);

/// out += m (r x c) times x (c). Serial; sized for the small per-gate
/// products inside the recurrent cells.
void matvec_acc(const Tensor& m, const Tensor& x, Tensor& out);

/// out += m^T (c-length result from r x c matrix) times y (r).
void matvec_transpose_acc(const Tensor& m, const Tensor& y, Tensor& out);

/// out(i,j) += a[i] * b[j]
void outer_acc(const Tensor& a, const Tensor& b, Tensor& out);

void add_scaled(Tensor& dst, const Tensor& src, double s);

double dot(const Tensor& a, const Tensor& b);

/// q^T W a for one tensor slice; W is p x r, q is p, a is r.
double bilinear_slice(const Tensor& q, const Tensor& w_slice, const Tensor& a);

enum class Activation { Tanh, Sigmoid };

double sigmoid(double x);

/// Elementwise tanh or sigmoid.
Tensor activation(const Tensor& x, Activation kind);

/// Elementwise derivative at pre-activation x: 1 - tanh(x)^2, or s(x)(1 - s(x)).
Tensor activation_grad(const Tensor& x, Activation kind);

struct MaxPoolResult {
    Tensor values;                    // one max per row
    std::vector<std::size_t> argmax;  // winning column per row, first occurrence on ties
};

/// Row-wise max over the columns of h (z x n), n >= 1. The argmax record is
/// what the backward pass routes gradient through: only the winning column
/// of each row receives any gradient.
MaxPoolResult maxpool_rows(const Tensor& h);

/// Column-wise mean of m (d x n), n >= 1. Backward distributes 1/n per column.
Tensor meanpool_cols(const Tensor& m);

/// Serial reference kernels. Kept as the independent route the parallel
/// kernels are tested against, and as the baseline for the benchmark target.
namespace ref {

Tensor matmul(const Tensor& a, const Tensor& b);
double bilinear_slice(const Tensor& q, const Tensor& w_slice, const Tensor& a);
MaxPoolResult maxpool_rows(const Tensor& h);
Tensor meanpool_cols(const Tensor& m);

}  // namespace ref

}  // namespace milkit
