#include "milkit/tensor.hpp"

#include <cmath>
#include <sstream>

namespace milkit {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {
    for (std::size_t d : shape_) {
        if (d == 0) throw ShapeError("Tensor dimensions must be positive, got " + shape_str(shape_));
    }
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_product(shape_) != data_.size()) {
        std::ostringstream os;
        os << "Tensor shape " << shape_str(shape_) << " needs " << shape_product(shape_)
           << " values, got " << data_.size();
        throw ShapeError(os.str());
    }
}

Tensor Tensor::vec(std::initializer_list<double> values) {
    return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
    std::size_t r = rows.size();
    std::size_t c = rows.begin()->size();
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw ShapeError("ragged matrix initializer");
        data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, std::move(data));
}

void Tensor::fill(double v) {
    for (double& x : data_) x = v;
}

bool Tensor::all_finite() const {
    for (double x : data_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

std::string shape_str(const Tensor& t) { return shape_str(t.shape()); }

void require_matrix(const Tensor& t, const char* what) {
    if (t.rank() != 2) throw ShapeError(std::string(what) + ": expected a matrix, got " + shape_str(t));
}

void require_vector(const Tensor& t, const char* what) {
    if (t.rank() != 1) throw ShapeError(std::string(what) + ": expected a vector, got " + shape_str(t));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(what) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
    }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_matrix(a, "matmul lhs");
    require_matrix(b, "matmul rhs");
    if (a.dim(1) != b.dim(0)) {
        throw ShapeError("matmul: inner dimensions disagree, " + shape_str(a) + " x " + shape_str(b));
    }
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor c({m, n});
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
#pragma omp parallel for schedule(static) if (m * n * k > 32768)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
        double* crow = pc + i * n;
        const double* arow = pa + i * k;
        for (std::size_t l = 0; l < k; ++l) {
            const double av = arow[l];
            const double* brow = pb + l * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

void matvec_acc(const Tensor& m, const Tensor& x, Tensor& out) {
    require_matrix(m, "matvec");
    require_vector(x, "matvec");
    require_vector(out, "matvec");
    if (m.dim(1) != x.size() || m.dim(0) != out.size()) {
        throw ShapeError("matvec: shape mismatch " + shape_str(m) + " x " + shape_str(x) +
                         " -> " + shape_str(out));
    }
    const std::size_t r = m.dim(0), c = m.dim(1);
    const double* pm = m.data();
    for (std::size_t i = 0; i < r; ++i) {
        double acc = 0.0;
        const double* row = pm + i * c;
        for (std::size_t j = 0; j < c; ++j) acc += row[j] * x[j];
        out[i] += acc;
    }
}

void matvec_transpose_acc(const Tensor& m, const Tensor& y, Tensor& out) {
    require_matrix(m, "matvec_t");
    require_vector(y, "matvec_t");
    require_vector(out, "matvec_t");
    if (m.dim(0) != y.size() || m.dim(1) != out.size()) {
        throw ShapeError("matvec_t: shape mismatch " + shape_str(m) + "^T x " + shape_str(y) +
                         " -> " + shape_str(out));
    }
    const std::size_t r = m.dim(0), c = m.dim(1);
    const double* pm = m.data();
    for (std::size_t i = 0; i < r; ++i) {
        const double yi = y[i];
        const double* row = pm + i * c;
        for (std::size_t j = 0; j < c; ++j) out[j] += row[j] * yi;
    }
}

void outer_acc(const Tensor& a, const Tensor& b, Tensor& out) {
    require_vector(a, "outer");
    require_vector(b, "outer");
    require_matrix(out, "outer");
    if (out.dim(0) != a.size() || out.dim(1) != b.size()) {
        throw ShapeError("outer: shape mismatch " + shape_str(a) + " x " + shape_str(b) +
                         " -> " + shape_str(out));
    }
    double* po = out.data();
    const std::size_t c = b.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double ai = a[i];
        double* row = po + i * c;
        for (std::size_t j = 0; j < c; ++j) row[j] += ai * b[j];
    }
}

void add_scaled(Tensor& dst, const Tensor& src, double s) {
    require_same_shape(dst, src, "add_scaled");
    double* pd = dst.data();
    const double* ps = src.data();
    for (std::size_t i = 0; i < dst.size(); ++i) pd[i] += s * ps[i];
}

double dot(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double bilinear_slice(const Tensor& q, const Tensor& w_slice, const Tensor& a) {
    require_vector(q, "bilinear_slice q");
    require_matrix(w_slice, "bilinear_slice W");
    require_vector(a, "bilinear_slice a");
    if (w_slice.dim(0) != q.size() || w_slice.dim(1) != a.size()) {
        throw ShapeError("bilinear_slice: shape mismatch " + shape_str(q) + "^T " +
                         shape_str(w_slice) + " " + shape_str(a));
    }
    const std::size_t p = q.size(), r = a.size();
    const double* pw = w_slice.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        double rowacc = 0.0;
        const double* row = pw + i * r;
        for (std::size_t j = 0; j < r; ++j) rowacc += row[j] * a[j];
        acc += q[i] * rowacc;
    }
    return acc;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Tensor activation(const Tensor& x, Activation kind) {
    Tensor out(x.shape());
    const double* px = x.data();
    double* po = out.data();
    if (kind == Activation::Tanh) {
        for (std::size_t i = 0; i < x.size(); ++i) po[i] = std::tanh(px[i]);
    } else {
        for (std::size_t i = 0; i < x.size(); ++i) po[i] = sigmoid(px[i]);
    }
    return out;
}

Tensor activation_grad(const Tensor& x, Activation kind) {
    Tensor out(x.shape());
    const double* px = x.data();
    double* po = out.data();
    if (kind == Activation::Tanh) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            double t = std::tanh(px[i]);
            po[i] = 1.0 - t * t;
        }
    } else {
        for (std::size_t i = 0; i < x.size(); ++i) {
            double s = sigmoid(px[i]);
            po[i] = s * (1.0 - s);
        }
    }
    return out;
}

MaxPoolResult maxpool_rows(const Tensor& h) {
    require_matrix(h, "maxpool_rows");
    const std::size_t z = h.dim(0), n = h.dim(1);
    MaxPoolResult res{Tensor({z}), std::vector<std::size_t>(z, 0)};
    for (std::size_t i = 0; i < z; ++i) {
        double best = h(i, 0);
        std::size_t best_j = 0;
        for (std::size_t j = 1; j < n; ++j) {
            if (h(i, j) > best) {  // strict: first occurrence wins ties
                best = h(i, j);
                best_j = j;
            }
        }
        res.values[i] = best;
        res.argmax[i] = best_j;
    }
    return res;
}

Tensor meanpool_cols(const Tensor& m) {
    require_matrix(m, "meanpool_cols");
    const std::size_t d = m.dim(0), n = m.dim(1);
    Tensor out({d});
    for (std::size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += m(i, j);
        out[i] = acc / static_cast<double>(n);
    }
    return out;
}

namespace ref {

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_matrix(a, "ref::matmul lhs");
    require_matrix(b, "ref::matmul rhs");
    if (a.dim(1) != b.dim(0)) {
        throw ShapeError("ref::matmul: inner dimensions disagree, " + shape_str(a) + " x " + shape_str(b));
    }
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor c({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t l = 0; l < k; ++l) acc += a(i, l) * b(l, j);
            c(i, j) = acc;
        }
    }
    return c;
}

double bilinear_slice(const Tensor& q, const Tensor& w_slice, const Tensor& a) {
    require_vector(q, "ref::bilinear_slice q");
    require_matrix(w_slice, "ref::bilinear_slice W");
    require_vector(a, "ref::bilinear_slice a");
    if (w_slice.dim(0) != q.size() || w_slice.dim(1) != a.size()) {
        throw ShapeError("ref::bilinear_slice: shape mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        double rowacc = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) rowacc += w_slice(i, j) * a[j];
        acc += q[i] * rowacc;
    }
    return acc;
}

MaxPoolResult maxpool_rows(const Tensor& h) {
    require_matrix(h, "ref::maxpool_rows");
    const std::size_t z = h.dim(0), n = h.dim(1);
    MaxPoolResult res{Tensor({z}), std::vector<std::size_t>(z, 0)};
    for (std::size_t i = 0; i < z; ++i) {
        double best = h(i, 0);
        std::size_t best_j = 0;
        for (std::size_t j = 1; j < n; ++j) {
            if (h(i, j) > best) {
                best = h(i, j);
                best_j = j;
            }
        }
        res.values[i] = best;
        res.argmax[i] = best_j;
    }
    return res;
}

Tensor meanpool_cols(const Tensor& m) {
    require_matrix(m, "ref::meanpool_cols");
    const std::size_t d = m.dim(0), n = m.dim(1);
    Tensor out({d});
    for (std::size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += m(i, j);
        out[i] = acc / static_cast<double>(n);
    }
    return out;
}

}  // namespace ref

}  // namespace milkit
