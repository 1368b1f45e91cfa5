#pragma once

#include <vector>

#include <Eigen/Core>

namespace msgp {

/// Regularly spaced rectilinear inducing grid; one node vector per dimension,
/// each strictly increasing with uniform spacing and at least 4 nodes (the
/// cubic stencil needs 4).
class InducingGrid {
 public:
  explicit InducingGrid(std::vector<Eigen::VectorXd> per_dim_nodes);

  int dims() const { return static_cast<int>(nodes_.size()); }
  Eigen::Index total_size() const { return total_; }
  Eigen::Index size(int dim) const { return nodes_[dim].size(); }
  double spacing(int dim) const { return spacing_[dim]; }
  double lower(int dim) const { return nodes_[dim][0]; }
  double upper(int dim) const { return nodes_[dim][nodes_[dim].size() - 1]; }
  const Eigen::VectorXd& nodes(int dim) const { return nodes_[dim]; }

  std::vector<int> shape() const;

  /// Coordinates of the grid node at flat index (dimension 0 slowest).
  Eigen::VectorXd node_at(Eigen::Index flat) const;

 private:
  std::vector<Eigen::VectorXd> nodes_;
  std::vector<double> spacing_;
  Eigen::Index total_ = 1;
};

/// Linearly spaced nodes, endpoints included.
InducingGrid build_grid(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                        const std::vector<int>& sizes);

/// Row-sparse interpolation weights W (n x m): each row carries the tensor
/// product of per-dimension 4-point cubic stencils, so at most 4^d nonzeros
/// (fewer on boundary rows where clamped stencil indices merge). Rows sum
/// to 1.
class SparseInterpolation {
 public:
  SparseInterpolation(Eigen::Index rows, Eigen::Index cols,
                      std::vector<Eigen::Index> row_offsets, std::vector<Eigen::Index> indices,
                      std::vector<double> weights);

  Eigen::Index rows() const { return n_; }
  Eigen::Index cols() const { return m_; }
  Eigen::Index nnz() const { return static_cast<Eigen::Index>(indices_.size()); }

  /// W * v
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  /// W^T * v; runs over the transposed layout so the per-entry summation
  /// order is fixed regardless of thread count.
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& v) const;

  Eigen::VectorXd apply_serial(const Eigen::VectorXd& v) const;
  Eigen::VectorXd apply_transpose_serial(const Eigen::VectorXd& v) const;

  Eigen::MatrixXd dense() const;

  double row_sum(Eigen::Index row) const;

  Eigen::Index row_nnz(Eigen::Index row) const { return row_offsets_[row + 1] - row_offsets_[row]; }
  const std::vector<Eigen::Index>& row_offsets() const { return row_offsets_; }
  const std::vector<Eigen::Index>& indices() const { return indices_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  void build_transpose();

  Eigen::Index n_ = 0, m_ = 0;
  std::vector<Eigen::Index> row_offsets_;  // size n+1
  std::vector<Eigen::Index> indices_;
  std::vector<double> weights_;
  // transposed (CSC-like) layout
  std::vector<Eigen::Index> col_offsets_;
  std::vector<Eigen::Index> t_rows_;
  std::vector<double> t_weights_;
};

/// Keys cubic convolution kernel, a = -0.5.
double cubic_kernel(double t);
/// Derivative of the cubic kernel.
double cubic_kernel_deriv(double t);

/// Cubic interpolation weights of the points X (n x d, one row per point)
/// onto the grid. Points must lie inside the grid bounds; with
/// `clamp_out_of_range` they are clamped to the boundary instead of raising.
/// Stencils at the outermost intervals reuse edge nodes; merged rows are
/// renormalized to sum 1.
SparseInterpolation interp_weights(const InducingGrid& grid, const Eigen::MatrixXd& X,
                                   bool clamp_out_of_range = false);

SparseInterpolation interp_weights_serial(const InducingGrid& grid, const Eigen::MatrixXd& X,
                                          bool clamp_out_of_range = false);

/// Weights plus their derivatives with respect to each point coordinate
/// (needed when the inputs themselves carry parameters, e.g. learned
/// projections). grad[p] holds d(weights)/d(coordinate p) with the same
/// sparsity layout as `w`.
struct InterpolationWithGrad {
  SparseInterpolation w;
  std::vector<std::vector<double>> grad;  // [dim][nnz index]
};

InterpolationWithGrad interp_weights_with_grad(const InducingGrid& grid, const Eigen::MatrixXd& X,
                                               bool clamp_out_of_range = false);

}  // namespace msgp
