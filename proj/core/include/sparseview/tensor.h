#pragma once

#include <cstddef>
#include <initializer_list>
#include <map>
#include <new>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sparseview {

// Storage aligned to a cache line. Vectorized reductions peel a scalar
// prologue up to the first aligned element, so a fixed base alignment keeps
// the summation order, and the result bits, identical across runs.
template <typename T>
struct CacheAlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  CacheAlignedAllocator() = default;
  template <typename U>
  CacheAlignedAllocator(const CacheAlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

  friend bool operator==(const CacheAlignedAllocator&, const CacheAlignedAllocator&) { return true; }
};

// Dense row-major array of doubles. A rank-0 array (empty shape) is a scalar.
// No broadcasting: every operation states the shapes it accepts.
class NumericArray {
 public:
  NumericArray() = default;
  explicit NumericArray(std::vector<std::size_t> shape, double fill = 0.0);
  NumericArray(std::vector<std::size_t> shape, std::vector<double> values);

  static NumericArray scalar(double value);
  static NumericArray vector(std::initializer_list<double> values);
  static NumericArray matrix(std::size_t rows, std::size_t cols,
                             std::initializer_list<double> values);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept { return values_.size(); }

  // Matrix view: a rank-1 array is a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept {
    return values_[r * cols() + c];
  }

  void fill(double value) noexcept;
  bool all_finite() const noexcept;
  bool same_shape(const NumericArray& other) const noexcept { return shape_ == other.shape_; }
  std::string shape_string() const;

  friend bool operator==(const NumericArray&, const NumericArray&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double, CacheAlignedAllocator<double>> values_;
};

// Ordered collection of uniquely named arrays. Backs both the trainable
// parameters of a model and the gradients computed for them.
class NamedArrays {
 public:
  using Entry = std::pair<std::string, NumericArray>;

  void add(std::string name, NumericArray value);
  bool contains(std::string_view name) const;
  NumericArray& at(std::string_view name);
  const NumericArray& at(std::string_view name) const;

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t total_values() const noexcept;
  std::vector<std::string> names() const;

  auto begin() noexcept { return entries_.begin(); }
  auto end() noexcept { return entries_.end(); }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  // Same names in the same order with the same shapes.
  bool same_layout(const NamedArrays& other) const;
  NamedArrays zeros_like() const;
  // this += scale * other; layouts must match.
  void add_scaled(const NamedArrays& other, double scale);

  friend bool operator==(const NamedArrays& a, const NamedArrays& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

using ParameterStore = NamedArrays;
using GradientSet = NamedArrays;

}  // namespace sparseview
