#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "qmarkov/errors.hpp"

namespace qmarkov {

// Ordered list of named tensor factors. The order fixes the row-major index
// convention of every composite-space matrix: the first factor is the most
// significant index digit.
class SpaceLayout {
 public:
  struct Factor {
    std::string label;
    std::size_t dim = 1;
  };

  SpaceLayout() = default;

  explicit SpaceLayout(std::vector<Factor> factors) : factors_(std::move(factors)) {
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (factors_[i].dim == 0)
        throw Error(Errc::InvalidArgument, "factor '" + factors_[i].label + "' has dim 0");
      for (std::size_t j = i + 1; j < factors_.size(); ++j)
        if (factors_[i].label == factors_[j].label)
          throw Error(Errc::InvalidArgument, "duplicate factor label '" + factors_[i].label + "'");
    }
  }

  SpaceLayout(std::initializer_list<Factor> factors)
      : SpaceLayout(std::vector<Factor>(factors)) {}

  const std::vector<Factor>& factors() const { return factors_; }
  std::size_t size() const { return factors_.size(); }
  const Factor& operator[](std::size_t i) const { return factors_[i]; }

  std::size_t total_dim() const {
    std::size_t d = 1;
    for (const auto& f : factors_) d *= f.dim;
    return d;
  }

  bool has(const std::string& label) const {
    return std::any_of(factors_.begin(), factors_.end(),
                       [&](const Factor& f) { return f.label == label; });
  }

  std::size_t index_of(const std::string& label) const {
    for (std::size_t i = 0; i < factors_.size(); ++i)
      if (factors_[i].label == label) return i;
    throw Error(Errc::LayoutMismatch, "label '" + label + "' not in layout");
  }

  std::size_t dim_of(const std::string& label) const { return factors_[index_of(label)].dim; }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    out.reserve(factors_.size());
    for (const auto& f : factors_) out.push_back(f.label);
    return out;
  }

  std::vector<std::size_t> dims() const {
    std::vector<std::size_t> out;
    out.reserve(factors_.size());
    for (const auto& f : factors_) out.push_back(f.dim);
    return out;
  }

  // Sub-layout of the given labels, kept in this layout's order.
  SpaceLayout sublayout(const std::vector<std::string>& labels) const {
    for (const auto& l : labels) index_of(l);
    std::vector<Factor> kept;
    for (const auto& f : factors_)
      if (std::find(labels.begin(), labels.end(), f.label) != labels.end()) kept.push_back(f);
    return SpaceLayout(std::move(kept));
  }

  SpaceLayout without(const std::vector<std::string>& labels) const {
    std::vector<Factor> kept;
    for (const auto& f : factors_)
      if (std::find(labels.begin(), labels.end(), f.label) == labels.end()) kept.push_back(f);
    return SpaceLayout(std::move(kept));
  }

  static SpaceLayout concat(const SpaceLayout& a, const SpaceLayout& b) {
    std::vector<Factor> fs = a.factors_;
    fs.insert(fs.end(), b.factors_.begin(), b.factors_.end());
    return SpaceLayout(std::move(fs));
  }

  // Reorders factors; `order` must be a permutation of the labels.
  SpaceLayout reordered(const std::vector<std::string>& order) const {
    if (order.size() != factors_.size())
      throw Error(Errc::LayoutMismatch, "reorder list is not a permutation of the layout");
    std::vector<Factor> fs;
    fs.reserve(order.size());
    for (const auto& l : order) fs.push_back(factors_[index_of(l)]);
    SpaceLayout out(std::move(fs));  // ctor re-checks uniqueness
    return out;
  }

  bool operator==(const SpaceLayout& o) const {
    if (factors_.size() != o.factors_.size()) return false;
    for (std::size_t i = 0; i < factors_.size(); ++i)
      if (factors_[i].label != o.factors_[i].label || factors_[i].dim != o.factors_[i].dim)
        return false;
    return true;
  }
  bool operator!=(const SpaceLayout& o) const { return !(*this == o); }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (i) s += ",";
      s += factors_[i].label + ":" + std::to_string(factors_[i].dim);
    }
    return s + ")";
  }

 private:
  std::vector<Factor> factors_;
};

inline SpaceLayout single_factor(const std::string& label, std::size_t dim) {
  return SpaceLayout({{label, dim}});
}

}  // namespace qmarkov
