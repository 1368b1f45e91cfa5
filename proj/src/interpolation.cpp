#include "msgp/interpolation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "msgp/parallel.hpp"

namespace msgp {

// ---------------------------------------------------------------------------
// InducingGrid

InducingGrid::InducingGrid(std::vector<Eigen::VectorXd> per_dim_nodes)
    : nodes_(std::move(per_dim_nodes)) {
  if (nodes_.empty()) throw std::invalid_argument("InducingGrid: no dimensions");
  spacing_.resize(nodes_.size());
  for (std::size_t d = 0; d < nodes_.size(); ++d) {
    const auto& nd = nodes_[d];
    if (nd.size() < 4)
      throw std::invalid_argument("InducingGrid: dimension " + std::to_string(d) +
                                  " has fewer than 4 nodes");
    const double h = (nd[nd.size() - 1] - nd[0]) / static_cast<double>(nd.size() - 1);
    if (!(h > 0)) throw std::invalid_argument("InducingGrid: nodes not increasing");
    for (Eigen::Index i = 0; i + 1 < nd.size(); ++i) {
      const double hi = nd[i + 1] - nd[i];
      if (!(hi > 0)) throw std::invalid_argument("InducingGrid: nodes not strictly increasing");
      if (std::abs(hi - h) > 1e-12 * std::abs(h) * static_cast<double>(nd.size()))
        throw std::invalid_argument("InducingGrid: spacing not uniform in dimension " +
                                    std::to_string(d));
    }
    spacing_[d] = h;
    total_ *= nd.size();
  }
}

std::vector<int> InducingGrid::shape() const {
  std::vector<int> s(nodes_.size());
  for (std::size_t d = 0; d < nodes_.size(); ++d) s[d] = static_cast<int>(nodes_[d].size());
  return s;
}

Eigen::VectorXd InducingGrid::node_at(Eigen::Index flat) const {
  Eigen::VectorXd x(dims());
  for (int d = dims() - 1; d >= 0; --d) {
    x[d] = nodes_[d][flat % size(d)];
    flat /= size(d);
  }
  return x;
}

InducingGrid build_grid(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                        const std::vector<int>& sizes) {
  if (lower.size() != upper.size() || static_cast<std::size_t>(lower.size()) != sizes.size())
    throw std::invalid_argument("build_grid: dimension mismatch");
  std::vector<Eigen::VectorXd> nodes(sizes.size());
  for (std::size_t d = 0; d < sizes.size(); ++d) {
    if (!(lower[d] < upper[d]))
      throw std::invalid_argument("build_grid: lower must be below upper in dimension " +
                                  std::to_string(d));
    if (sizes[d] < 4)
      throw std::invalid_argument("build_grid: need at least 4 nodes per dimension");
    Eigen::VectorXd nd(sizes[d]);
    const double h = (upper[d] - lower[d]) / static_cast<double>(sizes[d] - 1);
    for (int i = 0; i < sizes[d]; ++i) nd[i] = lower[d] + h * i;
    nd[sizes[d] - 1] = upper[d];
    nodes[d] = std::move(nd);
  }
  return InducingGrid(std::move(nodes));
}

// ---------------------------------------------------------------------------
// Cubic convolution kernel (a = -0.5)

double cubic_kernel(double t) {
  const double at = std::abs(t);
  if (at <= 1.0) return (1.5 * at - 2.5) * at * at + 1.0;
  if (at <= 2.0) return ((-0.5 * at + 2.5) * at - 4.0) * at + 2.0;
  return 0.0;
}

double cubic_kernel_deriv(double t) {
  const double at = std::abs(t);
  double d;
  if (at <= 1.0)
    d = (4.5 * at - 5.0) * at;
  else if (at <= 2.0)
    d = (-1.5 * at + 5.0) * at - 4.0;
  else
    return 0.0;
  return t < 0 ? -d : d;
}

// ---------------------------------------------------------------------------
// SparseInterpolation

SparseInterpolation::SparseInterpolation(Eigen::Index rows, Eigen::Index cols,
                                         std::vector<Eigen::Index> row_offsets,
                                         std::vector<Eigen::Index> indices,
                                         std::vector<double> weights)
    : n_(rows),
      m_(cols),
      row_offsets_(std::move(row_offsets)),
      indices_(std::move(indices)),
      weights_(std::move(weights)) {
  if (row_offsets_.size() != static_cast<std::size_t>(n_ + 1) ||
      indices_.size() != weights_.size())
    throw std::invalid_argument("SparseInterpolation: inconsistent layout");
  build_transpose();
}

void SparseInterpolation::build_transpose() {
  col_offsets_.assign(m_ + 1, 0);
  for (Eigen::Index c : indices_) ++col_offsets_[c + 1];
  for (Eigen::Index c = 0; c < m_; ++c) col_offsets_[c + 1] += col_offsets_[c];
  t_rows_.resize(indices_.size());
  t_weights_.resize(indices_.size());
  std::vector<Eigen::Index> fill(col_offsets_.begin(), col_offsets_.end() - 1);
  for (Eigen::Index r = 0; r < n_; ++r) {
    for (Eigen::Index k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      const Eigen::Index pos = fill[indices_[k]]++;
      t_rows_[pos] = r;
      t_weights_[pos] = weights_[k];
    }
  }
}

Eigen::VectorXd SparseInterpolation::apply(const Eigen::VectorXd& v) const {
  if (v.size() != m_) throw std::invalid_argument("SparseInterpolation::apply: dimension mismatch");
  Eigen::VectorXd out(n_);
  par::for_each_index(n_, [&](std::int64_t r) {
    double acc = 0.0;
    for (Eigen::Index k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      acc += weights_[k] * v[indices_[k]];
    out[r] = acc;
  });
  return out;
}

Eigen::VectorXd SparseInterpolation::apply_serial(const Eigen::VectorXd& v) const {
  if (v.size() != m_) throw std::invalid_argument("SparseInterpolation::apply: dimension mismatch");
  Eigen::VectorXd out(n_);
  for (Eigen::Index r = 0; r < n_; ++r) {
    double acc = 0.0;
    for (Eigen::Index k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      acc += weights_[k] * v[indices_[k]];
    out[r] = acc;
  }
  return out;
}

Eigen::VectorXd SparseInterpolation::apply_transpose(const Eigen::VectorXd& v) const {
  if (v.size() != n_)
    throw std::invalid_argument("SparseInterpolation::apply_transpose: dimension mismatch");
  Eigen::VectorXd out(m_);
  par::for_each_index(m_, [&](std::int64_t c) {
    double acc = 0.0;
    for (Eigen::Index k = col_offsets_[c]; k < col_offsets_[c + 1]; ++k)
      acc += t_weights_[k] * v[t_rows_[k]];
    out[c] = acc;
  });
  return out;
}

Eigen::VectorXd SparseInterpolation::apply_transpose_serial(const Eigen::VectorXd& v) const {
  if (v.size() != n_)
    throw std::invalid_argument("SparseInterpolation::apply_transpose: dimension mismatch");
  // straightforward scatter over the row layout; reference for the
  // transposed-layout path
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m_);
  for (Eigen::Index r = 0; r < n_; ++r)
    for (Eigen::Index k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      out[indices_[k]] += weights_[k] * v[r];
  return out;
}

Eigen::MatrixXd SparseInterpolation::dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_, m_);
  for (Eigen::Index r = 0; r < n_; ++r)
    for (Eigen::Index k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      d(r, indices_[k]) += weights_[k];
  return d;
}

double SparseInterpolation::row_sum(Eigen::Index row) const {
  double s = 0.0;
  for (Eigen::Index k = row_offsets_[row]; k < row_offsets_[row + 1]; ++k) s += weights_[k];
  return s;
}

// ---------------------------------------------------------------------------
// Weight construction

namespace {

struct DimStencil {
  Eigen::Index idx[4];
  double w[4];
  double dw[4];  // d(weight)/d(coordinate)
  int count;     // after merging clamped duplicates
};

// 4-point stencil of one coordinate in one dimension, boundary-clamped and
// normalized to sum 1.
DimStencil dim_stencil(double x, double lo, double hi, double h, Eigen::Index m, int dim,
                       bool clamp, bool want_grad) {
  const double span_tol = 1e-12 * (hi - lo);
  if (x < lo - span_tol || x > hi + span_tol) {
    if (!clamp)
      throw std::invalid_argument("interp_weights: point coordinate " + std::to_string(x) +
                                  " outside grid bounds [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "] in dimension " + std::to_string(dim));
    x = std::min(std::max(x, lo), hi);
  } else {
    x = std::min(std::max(x, lo), hi);
  }
  const double s = (x - lo) / h;
  Eigen::Index j = static_cast<Eigen::Index>(std::floor(s));
  j = std::min(std::max(j, Eigen::Index{0}), m - 2);
  const double t = s - static_cast<double>(j);

  Eigen::Index raw_idx[4] = {j - 1, j, j + 1, j + 2};
  double raw_w[4], raw_dw[4];
  for (int k = 0; k < 4; ++k) {
    const double arg = t - static_cast<double>(k - 1);
    raw_w[k] = cubic_kernel(arg);
    raw_dw[k] = want_grad ? cubic_kernel_deriv(arg) / h : 0.0;
  }

  DimStencil st{};
  st.count = 0;
  for (int k = 0; k < 4; ++k) {
    const Eigen::Index clamped = std::min(std::max(raw_idx[k], Eigen::Index{0}), m - 1);
    bool merged = false;
    for (int q = 0; q < st.count; ++q) {
      if (st.idx[q] == clamped) {
        st.w[q] += raw_w[k];
        st.dw[q] += raw_dw[k];
        merged = true;
        break;
      }
    }
    if (!merged) {
      st.idx[st.count] = clamped;
      st.w[st.count] = raw_w[k];
      st.dw[st.count] = raw_dw[k];
      ++st.count;
    }
  }

  double sum = 0.0, dsum = 0.0;
  for (int q = 0; q < st.count; ++q) {
    sum += st.w[q];
    dsum += st.dw[q];
  }
  // normalized weights w/sum; quotient rule for the derivative
  for (int q = 0; q < st.count; ++q) {
    const double wn = st.w[q] / sum;
    st.dw[q] = (st.dw[q] - wn * dsum) / sum;
    st.w[q] = wn;
  }
  return st;
}

InterpolationWithGrad build_weights(const InducingGrid& grid, const Eigen::MatrixXd& X, bool clamp,
                                    bool want_grad, bool parallel) {
  const int d = grid.dims();
  if (X.cols() != d) throw std::invalid_argument("interp_weights: point dimension mismatch");
  const Eigen::Index n = X.rows();
  const Eigen::Index m = grid.total_size();

  Eigen::Index max_nnz = 1;
  for (int p = 0; p < d; ++p) max_nnz *= 4;

  std::vector<Eigen::Index> strides(d);
  Eigen::Index acc = 1;
  for (int p = d - 1; p >= 0; --p) {
    strides[p] = acc;
    acc *= grid.size(p);
  }

  std::vector<Eigen::Index> counts(n);
  std::vector<Eigen::Index> idx_buf(n * max_nnz);
  std::vector<double> w_buf(n * max_nnz);
  std::vector<std::vector<double>> g_buf(want_grad ? d : 0);
  for (auto& g : g_buf) g.assign(n * max_nnz, 0.0);

  const bool prev = par::enabled();
  if (!parallel) par::set_enabled(false);
  try {
    par::for_each_index(n, [&](std::int64_t i) {
      std::vector<DimStencil> sts(d);
      for (int p = 0; p < d; ++p)
        sts[p] = dim_stencil(X(i, p), grid.lower(p), grid.upper(p), grid.spacing(p), grid.size(p),
                             p, clamp, want_grad);
      // tensor product over dimensions
      Eigen::Index cnt = 0;
      std::vector<int> pos(d, 0);
      while (true) {
        Eigen::Index flat = 0;
        double w = 1.0;
        for (int p = 0; p < d; ++p) {
          flat += sts[p].idx[pos[p]] * strides[p];
          w *= sts[p].w[pos[p]];
        }
        idx_buf[i * max_nnz + cnt] = flat;
        w_buf[i * max_nnz + cnt] = w;
        if (want_grad) {
          for (int q = 0; q < d; ++q) {
            double gw = 1.0;
            for (int p = 0; p < d; ++p)
              gw *= (p == q) ? sts[p].dw[pos[p]] : sts[p].w[pos[p]];
            g_buf[q][i * max_nnz + cnt] = gw;
          }
        }
        ++cnt;
        int p = d - 1;
        while (p >= 0 && ++pos[p] == sts[p].count) pos[p--] = 0;
        if (p < 0) break;
      }
      counts[i] = cnt;
    });
  } catch (...) {
    par::set_enabled(prev);
    throw;
  }
  par::set_enabled(prev);

  std::vector<Eigen::Index> row_offsets(n + 1, 0);
  for (Eigen::Index i = 0; i < n; ++i) row_offsets[i + 1] = row_offsets[i] + counts[i];
  const Eigen::Index nnz = row_offsets[n];
  std::vector<Eigen::Index> indices(nnz);
  std::vector<double> weights(nnz);
  std::vector<std::vector<double>> grads(want_grad ? d : 0);
  for (auto& g : grads) g.resize(nnz);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < counts[i]; ++k) {
      indices[row_offsets[i] + k] = idx_buf[i * max_nnz + k];
      weights[row_offsets[i] + k] = w_buf[i * max_nnz + k];
      for (int q = 0; q < (want_grad ? d : 0); ++q)
        grads[q][row_offsets[i] + k] = g_buf[q][i * max_nnz + k];
    }
  }

  InterpolationWithGrad out{
      SparseInterpolation(n, m, std::move(row_offsets), std::move(indices), std::move(weights)),
      std::move(grads)};
  return out;
}

}  // namespace

SparseInterpolation interp_weights(const InducingGrid& grid, const Eigen::MatrixXd& X,
                                   bool clamp_out_of_range) {
  return build_weights(grid, X, clamp_out_of_range, false, true).w;
}

SparseInterpolation interp_weights_serial(const InducingGrid& grid, const Eigen::MatrixXd& X,
                                          bool clamp_out_of_range) {
  return build_weights(grid, X, clamp_out_of_range, false, false).w;
}

InterpolationWithGrad interp_weights_with_grad(const InducingGrid& grid, const Eigen::MatrixXd& X,
                                               bool clamp_out_of_range) {
  return build_weights(grid, X, clamp_out_of_range, true, true);
}

}  // namespace msgp
