#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace cmdp {

/// Dense row-major (h, s) table.
template <typename T>
class Grid2 {
 public:
  Grid2() = default;
  Grid2(int horizon, int states, T fill = T{})
      : horizon_(horizon), states_(states),
        data_(static_cast<std::size_t>(horizon) * states, fill) {
    if (horizon < 0 || states < 0) throw std::invalid_argument("Grid2: negative dimension");
  }

  T& operator()(int h, int s) { return data_[index(h, s)]; }
  const T& operator()(int h, int s) const { return data_[index(h, s)]; }

  int horizon() const { return horizon_; }
  int states() const { return states_; }
  bool empty() const { return data_.empty(); }

  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }

 private:
  std::size_t index(int h, int s) const {
    return static_cast<std::size_t>(h) * states_ + s;
  }

  int horizon_ = 0;
  int states_ = 0;
  std::vector<T> data_;
};

/// Dense row-major (h, s, a) table.
template <typename T>
class Grid3 {
 public:
  Grid3() = default;
  Grid3(int horizon, int states, int actions, T fill = T{})
      : horizon_(horizon), states_(states), actions_(actions),
        data_(static_cast<std::size_t>(horizon) * states * actions, fill) {
    if (horizon < 0 || states < 0 || actions < 0)
      throw std::invalid_argument("Grid3: negative dimension");
  }

  T& operator()(int h, int s, int a) { return data_[index(h, s, a)]; }
  const T& operator()(int h, int s, int a) const { return data_[index(h, s, a)]; }

  /// Contiguous action row at (h, s).
  std::span<T> row(int h, int s) {
    return std::span<T>(data_.data() + index(h, s, 0), actions_);
  }
  std::span<const T> row(int h, int s) const {
    return std::span<const T>(data_.data() + index(h, s, 0), actions_);
  }

  int horizon() const { return horizon_; }
  int states() const { return states_; }
  int actions() const { return actions_; }
  bool empty() const { return data_.empty(); }

  bool same_shape(const Grid3& other) const {
    return horizon_ == other.horizon_ && states_ == other.states_ && actions_ == other.actions_;
  }

  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }

 private:
  std::size_t index(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * states_ + s) * actions_ + a;
  }

  int horizon_ = 0;
  int states_ = 0;
  int actions_ = 0;
  std::vector<T> data_;
};

/// Dense row-major (h, s, a, s') table; the trailing axis is contiguous.
template <typename T>
class Grid4 {
 public:
  Grid4() = default;
  Grid4(int horizon, int states, int actions, T fill = T{})
      : horizon_(horizon), states_(states), actions_(actions),
        data_(static_cast<std::size_t>(horizon) * states * actions * states, fill) {
    if (horizon < 0 || states < 0 || actions < 0)
      throw std::invalid_argument("Grid4: negative dimension");
  }

  T& operator()(int h, int s, int a, int next) { return data_[index(h, s, a, next)]; }
  const T& operator()(int h, int s, int a, int next) const { return data_[index(h, s, a, next)]; }

  /// Successor-state distribution row at (h, s, a).
  std::span<T> row(int h, int s, int a) {
    return std::span<T>(data_.data() + index(h, s, a, 0), states_);
  }
  std::span<const T> row(int h, int s, int a) const {
    return std::span<const T>(data_.data() + index(h, s, a, 0), states_);
  }

  int horizon() const { return horizon_; }
  int states() const { return states_; }
  int actions() const { return actions_; }
  bool empty() const { return data_.empty(); }

  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }

 private:
  std::size_t index(int h, int s, int a, int next) const {
    return ((static_cast<std::size_t>(h) * states_ + s) * actions_ + a) * states_ + next;
  }

  int horizon_ = 0;
  int states_ = 0;
  int actions_ = 0;
  std::vector<T> data_;
};

using Table2 = Grid2<double>;
using Table3 = Grid3<double>;
using Table4 = Grid4<double>;
using Count3 = Grid3<std::int64_t>;
using Count4 = Grid4<std::int64_t>;

}  // namespace cmdp
