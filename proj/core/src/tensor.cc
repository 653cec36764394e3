#include "sparseview/tensor.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sparseview {
namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

NumericArray::NumericArray(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), values_(product(shape_), fill) {}

NumericArray::NumericArray(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(values.begin(), values.end()) {
  if (product(shape_) != values_.size()) {
    throw std::invalid_argument("NumericArray: shape " + shape_string() + " holds " +
                                std::to_string(product(shape_)) + " values, got " +
                                std::to_string(values_.size()));
  }
}

NumericArray NumericArray::scalar(double value) { return NumericArray({}, {value}); }

NumericArray NumericArray::vector(std::initializer_list<double> values) {
  return NumericArray({values.size()}, std::vector<double>(values));
}

NumericArray NumericArray::matrix(std::size_t rows, std::size_t cols,
                                  std::initializer_list<double> values) {
  return NumericArray({rows, cols}, std::vector<double>(values));
}

std::size_t NumericArray::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw std::out_of_range("NumericArray::dim: axis " + std::to_string(axis) +
                            " out of range for shape " + shape_string());
  }
  return shape_[axis];
}

std::size_t NumericArray::rows() const {
  switch (shape_.size()) {
    case 0:
    case 1:
      return 1;
    case 2:
      return shape_[0];
    default:
      throw std::logic_error("NumericArray::rows: rank " + std::to_string(rank()) +
                             " has no matrix view");
  }
}

std::size_t NumericArray::cols() const {
  switch (shape_.size()) {
    case 0:
      return 1;
    case 1:
      return shape_[0];
    case 2:
      return shape_[1];
    default:
      throw std::logic_error("NumericArray::cols: rank " + std::to_string(rank()) +
                             " has no matrix view");
  }
}

void NumericArray::fill(double value) noexcept { std::fill(values_.begin(), values_.end(), value); }

bool NumericArray::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

std::string NumericArray::shape_string() const {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) out << ", ";
    out << shape_[i];
  }
  out << ']';
  return out.str();
}

void NamedArrays::add(std::string name, NumericArray value) {
  if (index_.contains(name)) {
    throw std::invalid_argument("duplicate array name '" + name + "'");
  }
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(value));
}

bool NamedArrays::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

NumericArray& NamedArrays::at(std::string_view name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no array named '" + std::string(name) + "'");
  return entries_[it->second].second;
}

const NumericArray& NamedArrays::at(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no array named '" + std::string(name) + "'");
  return entries_[it->second].second;
}

std::size_t NamedArrays::total_values() const noexcept {
  std::size_t n = 0;
  for (const auto& [name, array] : entries_) n += array.size();
  return n;
}

std::vector<std::string> NamedArrays::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, array] : entries_) out.push_back(name);
  return out;
}

bool NamedArrays::same_layout(const NamedArrays& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].first != other.entries_[i].first) return false;
    if (!entries_[i].second.same_shape(other.entries_[i].second)) return false;
  }
  return true;
}

NamedArrays NamedArrays::zeros_like() const {
  NamedArrays out;
  for (const auto& [name, array] : entries_) out.add(name, NumericArray(array.shape(), 0.0));
  return out;
}

void NamedArrays::add_scaled(const NamedArrays& other, double scale) {
  if (!same_layout(other)) throw std::invalid_argument("add_scaled: layout mismatch");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto dst = entries_[i].second.values();
    auto src = other.entries_[i].second.values();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += scale * src[k];
  }
}

}  // namespace sparseview
