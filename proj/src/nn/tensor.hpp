// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <algorithm>
#include <functional>
#include <new>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace deepclean::nn {

// 64-byte aligned storage. The GEMM kernels peel differently depending on
// buffer alignment, which changes rounding, so alignment must not depend on
// where malloc happens to land.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  AlignedAllocator() noexcept = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }
  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

/// Dense row-major tensor. No broadcasting, no views.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, T fill = T{}) : shape_(std::move(shape)) {
    data_.assign(count(shape_), fill);
  }
  Tensor(std::vector<int> shape, const std::vector<T>& data)
      : shape_(std::move(shape)), data_(data.begin(), data.end()) {
    if (data_.size() != count(shape_)) fail(ErrorCode::DimensionMismatch, "tensor data does not match shape");
  }

  const std::vector<int>& shape() const noexcept { return shape_; }
  int dim(std::size_t i) const noexcept { return shape_[i]; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }
  void reshape(std::vector<int> shape) {
    if (count(shape) != data_.size()) fail(ErrorCode::DimensionMismatch, "reshape changes element count");
    shape_ = std::move(shape);
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(shape_);
    std::copy(data_.begin(), data_.end(), out.data().begin());
    return out;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

  static std::size_t count(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
      if (d < 0) fail(ErrorCode::InvalidArgument, "negative tensor dimension");
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

 private:
  std::vector<int> shape_;
  AlignedVector<T> data_;
};

/// Trainable tensor with its gradient and Adam moments.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  Tensor<T> adam_m;
  Tensor<T> adam_v;

  Parameter() = default;
  Parameter(std::string n, Tensor<T> v)
      : name(std::move(n)),
        value(std::move(v)),
        grad(value.shape()),
        adam_m(value.shape()),
        adam_v(value.shape()) {}
};

}  // namespace deepclean::nn
