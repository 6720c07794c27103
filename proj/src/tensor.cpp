#include "vrseq/tensor.hpp"

#include <stdexcept>

namespace vrseq {

int Tensor::checked_size(const std::vector<int>& shape) {
    long long n = 1;
    for (int d : shape) {
        if (d <= 0) throw std::invalid_argument("tensor dimensions must be positive");
        n *= d;
        if (n > (1LL << 31)) throw std::invalid_argument("tensor too large");
    }
    return static_cast<int>(n);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != checked_size(shape_))
        throw std::invalid_argument("tensor value count does not match shape");
}

bool Tensor::all_finite() const { return vrseq::all_finite(values_); }

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

void matvec(const Tensor& w, std::span<const double> x, std::span<double> y) {
    std::fill(y.begin(), y.end(), 0.0);
    matvec_acc(w, x, y);
}

void matvec_acc(const Tensor& w, std::span<const double> x, std::span<double> y) {
    const int r = w.rows(), c = w.cols();
    if (static_cast<int>(x.size()) != c || static_cast<int>(y.size()) != r)
        throw std::invalid_argument("matvec dimension mismatch");
    const double* wd = w.data();
    for (int i = 0; i < r; ++i) {
        double acc = 0.0;
        const double* row = wd + static_cast<size_t>(i) * c;
        for (int j = 0; j < c; ++j) acc += row[j] * x[j];
        y[i] += acc;
    }
}

void matvec_t_acc(const Tensor& w, std::span<const double> g, std::span<double> y) {
    const int r = w.rows(), c = w.cols();
    if (static_cast<int>(g.size()) != r || static_cast<int>(y.size()) != c)
        throw std::invalid_argument("matvec_t dimension mismatch");
    const double* wd = w.data();
    for (int i = 0; i < r; ++i) {
        const double gi = g[i];
        const double* row = wd + static_cast<size_t>(i) * c;
        for (int j = 0; j < c; ++j) y[j] += row[j] * gi;
    }
}

void outer_acc(Tensor& dw, std::span<const double> g, std::span<const double> x) {
    const int r = dw.rows(), c = dw.cols();
    if (static_cast<int>(g.size()) != r || static_cast<int>(x.size()) != c)
        throw std::invalid_argument("outer dimension mismatch");
    double* wd = dw.data();
    for (int i = 0; i < r; ++i) {
        const double gi = g[i];
        double* row = wd + static_cast<size_t>(i) * c;
        for (int j = 0; j < c; ++j) row[j] += gi * x[j];
    }
}

void add_scaled(std::span<double> y, std::span<const double> x, double a) {
    if (y.size() != x.size()) throw std::invalid_argument("add_scaled size mismatch");
    for (size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot size mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace vrseq
