#include "mipreg/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mipreg {

double SparseRow::dot(const Vec& x) const {
  double s = 0.0;
  for (std::size_t j = 0; j < index.size(); ++j) s += coef[j] * x[index[j]];
  return s;
}

double SparseRow::norm2() const {
  double s = 0.0;
  for (double c : coef) s += c * c;
  return s;
}

FeasibleRegion::FeasibleRegion(Vec lower, Vec upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    throw std::invalid_argument("FeasibleRegion: bound vectors differ in length");
  }
  for (Index i = 0; i < lower_.size(); ++i) {
    if (!(lower_[i] <= upper_[i])) {
      throw std::invalid_argument("FeasibleRegion: lower > upper at coordinate " +
                                  std::to_string(i));
    }
  }
}

void FeasibleRegion::check_row(const SparseRow& row) const {
  if (row.index.size() != row.coef.size()) {
    throw std::invalid_argument("SparseRow: index/coef length mismatch");
  }
  for (Index i : row.index) {
    if (i < 0 || i >= dim()) throw std::invalid_argument("SparseRow: index out of range");
  }
}

void FeasibleRegion::add_equality(SparseRow row) {
  check_row(row);
  equalities_.push_back(std::move(row));
  partitioned_ = false;
}

void FeasibleRegion::add_linear_inequality(SparseRow row) {
  check_row(row);
  linear_inequalities_.push_back(std::move(row));
}

void FeasibleRegion::add_inequality(ConvexInequality g) {
  if (!g.value || !g.gradient) throw std::invalid_argument("ConvexInequality: missing callback");
  inequalities_.push_back(std::move(g));
}

double FeasibleRegion::max_violation(const Vec& x) const {
  double v = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    v = std::max({v, lower_[i] - x[i], x[i] - upper_[i]});
  }
  for (const auto& r : equalities_) v = std::max(v, std::abs(r.dot(x) - r.rhs));
  for (const auto& r : linear_inequalities_) v = std::max(v, r.dot(x) - r.rhs);
  for (const auto& g : inequalities_) v = std::max(v, g.value(x));
  return v;
}

FeasibleRegion FeasibleRegion::slice(const std::vector<Index>& free, const Vec& point) const {
  const Index k = static_cast<Index>(free.size());
  std::vector<Index> position(static_cast<std::size_t>(dim()), -1);
  Vec lo(k), hi(k);
  for (Index j = 0; j < k; ++j) {
    position[static_cast<std::size_t>(free[j])] = j;
    lo[j] = lower_[free[j]];
    hi[j] = upper_[free[j]];
  }
  FeasibleRegion out(lo, hi);

  auto reduce = [&](const SparseRow& r) {
    SparseRow s;
    s.name = r.name;
    s.rhs = r.rhs;
    for (std::size_t j = 0; j < r.index.size(); ++j) {
      const Index p = position[static_cast<std::size_t>(r.index[j])];
      if (p >= 0) {
        s.index.push_back(p);
        s.coef.push_back(r.coef[j]);
      } else {
        s.rhs -= r.coef[j] * point[r.index[j]];
      }
    }
    return s;
  };
  for (const auto& r : equalities_) {
    SparseRow s = reduce(r);
    if (!s.index.empty()) out.add_equality(std::move(s));
  }
  for (const auto& r : linear_inequalities_) {
    SparseRow s = reduce(r);
    if (!s.index.empty()) out.add_linear_inequality(std::move(s));
  }
  for (const auto& g : inequalities_) {
    auto embed = [free, point](const Vec& z) {
      Vec full = point;
      for (std::size_t j = 0; j < free.size(); ++j) full[free[j]] = z[static_cast<Index>(j)];
      return full;
    };
    ConvexInequality h;
    h.name = g.name;
    h.value = [g, embed](const Vec& z) { return g.value(embed(z)); };
    h.gradient = [g, embed, free](const Vec& z) {
      const Vec full = g.gradient(embed(z));
      Vec out(static_cast<Index>(free.size()));
      for (std::size_t j = 0; j < free.size(); ++j) out[static_cast<Index>(j)] = full[free[j]];
      return out;
    };
    out.add_inequality(std::move(h));
  }
  return out;
}

double FeasibleRegion::diameter() const {
  const Vec span = upper_ - lower_;
  if (!span.allFinite()) return std::numeric_limits<double>::infinity();
  return span.norm();
}

void project_box_hyperplane(const SparseRow& row, const Vec& lower, const Vec& upper,
                            const Vec& p, Vec& x) {
  const std::size_t m = row.index.size();
  auto at = [&](double mu) {
    double g = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const Index i = row.index[j];
      g += row.coef[j] * std::clamp(p[i] - mu * row.coef[j], lower[i], upper[i]);
    }
    return g;
  };
  std::vector<double> breaks;
  breaks.reserve(2 * m);
  for (std::size_t j = 0; j < m; ++j) {
    const double a = row.coef[j];
    if (a == 0.0) continue;
    const Index i = row.index[j];
    breaks.push_back((p[i] - lower[i]) / a);
    breaks.push_back((p[i] - upper[i]) / a);
  }
  double mu = 0.0;
  if (!breaks.empty()) {
    std::sort(breaks.begin(), breaks.end());
    // at() is nonincreasing in mu and piecewise linear between breakpoints.
    if (at(breaks.front()) <= row.rhs) {
      mu = breaks.front();
    } else if (at(breaks.back()) >= row.rhs) {
      mu = breaks.back();
    } else {
      std::size_t lo = 0, hi = breaks.size() - 1;
      while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (at(breaks[mid]) >= row.rhs) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      const double glo = at(breaks[lo]), ghi = at(breaks[hi]);
      mu = glo > ghi ? breaks[lo] + (glo - row.rhs) / (glo - ghi) * (breaks[hi] - breaks[lo])
                     : breaks[lo];
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    const Index i = row.index[j];
    x[i] = std::clamp(p[i] - mu * row.coef[j], lower[i], upper[i]);
  }
}

void FeasibleRegion::partition_equalities() const {
  if (partitioned_) return;
  block_rows_.clear();
  hyperplane_rows_.clear();
  in_block_.assign(static_cast<std::size_t>(dim()), 0);
  for (std::size_t r = 0; r < equalities_.size(); ++r) {
    const auto& row = equalities_[r];
    bool disjoint = true;
    for (Index i : row.index) disjoint = disjoint && !in_block_[static_cast<std::size_t>(i)];
    if (disjoint) {
      for (Index i : row.index) in_block_[static_cast<std::size_t>(i)] = 1;
      block_rows_.push_back(r);
    } else {
      hyperplane_rows_.push_back(r);
    }
  }
  partitioned_ = true;
}

Vec FeasibleRegion::project_box_block(const Vec& p) const {
  Vec x = p.cwiseMax(lower_).cwiseMin(upper_);
  for (std::size_t r : block_rows_) project_box_hyperplane(equalities_[r], lower_, upper_, p, x);
  return x;
}

Vec FeasibleRegion::project(const Vec& p, const ProjectionOptions& opt) const {
  if (p.size() != dim()) throw std::invalid_argument("project: dimension mismatch");
  if (max_violation(p) <= opt.tol) return p;
  partition_equalities();

  const std::size_t nlin = linear_inequalities_.size();
  const std::size_t nconv = inequalities_.size();
  Vec y = p;
  Vec inc_box = Vec::Zero(dim());
  std::vector<double> inc_lin(nlin, 0.0);
  std::vector<Vec> inc_conv(nconv, Vec::Zero(dim()));

  for (int cycle = 0; cycle < opt.max_cycles; ++cycle) {
    const Vec start = y;

    Vec z = y + inc_box;
    y = project_box_block(z);
    inc_box = z - y;

    for (std::size_t r : hyperplane_rows_) {
      const auto& row = equalities_[r];
      const double nn = row.norm2();
      if (nn == 0.0) continue;
      const double t = (row.dot(y) - row.rhs) / nn;
      for (std::size_t j = 0; j < row.index.size(); ++j) y[row.index[j]] -= t * row.coef[j];
    }

    for (std::size_t k = 0; k < nlin; ++k) {
      // The correction for a half-space is a multiple of its normal, so it is
      // stored as a scalar.
      const auto& row = linear_inequalities_[k];
      const double nn = row.norm2();
      if (nn == 0.0) continue;
      const double zdot = row.dot(y) + inc_lin[k] * nn;
      const double t = std::max(0.0, (zdot - row.rhs) / nn);
      for (std::size_t j = 0; j < row.index.size(); ++j) {
        y[row.index[j]] += (inc_lin[k] - t) * row.coef[j];
      }
      inc_lin[k] = t;
    }

    for (std::size_t k = 0; k < nconv; ++k) {
      const auto& g = inequalities_[k];
      z = y + inc_conv[k];
      Vec w = z;
      for (int it = 0; it < opt.max_linearizations; ++it) {
        const double gv = g.value(w);
        if (gv <= 0.1 * opt.tol) break;
        const Vec gg = g.gradient(w);
        const double nn = gg.squaredNorm();
        if (!(nn > 0.0)) break;
        w -= (gv / nn) * gg;
      }
      inc_conv[k] = z - w;
      y = w;
    }

    const double moved = (y - start).lpNorm<Eigen::Infinity>();
    if (moved <= 1e-2 * opt.tol && max_violation(y) <= opt.tol) return y;
    if (!y.allFinite()) break;
  }
  const double viol = max_violation(y);
  if (viol <= opt.tol) return y;
  throw ProjectionError("projection did not reach feasibility (violation " +
                        std::to_string(viol) + "); the region may be empty");
}

}  // namespace mipreg
