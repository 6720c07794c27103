#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vrseq {

// Dense row-major tensor of doubles. Rank 1 and 2 cover everything this
// library needs; the shape is kept generic so parameter stores and file
// formats do not special-case vectors vs matrices.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape)
        : shape_(std::move(shape)), values_(checked_size(shape_), 0.0) {}

    Tensor(std::vector<int> shape, std::vector<double> values);

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

    const std::vector<int>& shape() const { return shape_; }
    int size() const { return static_cast<int>(values_.size()); }
    int rows() const { return shape_.empty() ? 0 : shape_[0]; }
    int cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double& operator[](int i) { return values_[static_cast<size_t>(i)]; }
    double operator[](int i) const { return values_[static_cast<size_t>(i)]; }

    // 2-D access, row-major
    double& at(int r, int c) { return values_[static_cast<size_t>(r) * cols() + c]; }
    double at(int r, int c) const { return values_[static_cast<size_t>(r) * cols() + c]; }

    void fill(double v) { values_.assign(values_.size(), v); }
    bool all_finite() const;

private:
    static int checked_size(const std::vector<int>& shape);

    std::vector<int> shape_;
    std::vector<double> values_;
};

// y = W x  (W is rows x cols, x has cols entries, y gets rows entries)
void matvec(const Tensor& w, std::span<const double> x, std::span<double> y);
// y += W x
void matvec_acc(const Tensor& w, std::span<const double> x, std::span<double> y);
// y += W^T g
void matvec_t_acc(const Tensor& w, std::span<const double> g, std::span<double> y);
// dW += g x^T
void outer_acc(Tensor& dw, std::span<const double> g, std::span<const double> x);

void add_scaled(std::span<double> y, std::span<const double> x, double a);
double dot(std::span<const double> a, std::span<const double> b);

bool all_finite(std::span<const double> v);

}  // namespace vrseq
