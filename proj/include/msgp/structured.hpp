#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "msgp/fft.hpp"

namespace msgp {

/// Symmetric square linear operator with a fast matrix-vector product and a
/// densely materialized fallback. The dense form is the in-tree oracle: it is
/// built straight from the defining formula of each operator type, never
/// through the fast path it is used to check.
///
/// Operators are immutable after construction (spectra are cached eagerly),
/// so mvm() is reentrant and instances can be shared across threads.
class StructuredOperator {
 public:
  virtual ~StructuredOperator() = default;

  virtual Eigen::Index rows() const = 0;

  virtual void mvm(const Eigen::VectorXd& v, Eigen::VectorXd& out) const = 0;

  Eigen::VectorXd mvm(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out;
    mvm(v, out);
    return out;
  }

  virtual Eigen::MatrixXd dense() const = 0;
};

class DenseOperator final : public StructuredOperator {
 public:
  explicit DenseOperator(Eigen::MatrixXd m);

  Eigen::Index rows() const override { return mat_.rows(); }
  void mvm(const Eigen::VectorXd& v, Eigen::VectorXd& out) const override;
  Eigen::MatrixXd dense() const override { return mat_; }
  const Eigen::MatrixXd& matrix() const { return mat_; }

 private:
  Eigen::MatrixXd mat_;
};

/// Symmetric Toeplitz operator T[i,j] = first_column[|i-j|]. The product is
/// computed through the (2m-1)-point circulant embedding: pad, FFT multiply,
/// truncate.
class ToeplitzOperator final : public StructuredOperator {
 public:
  explicit ToeplitzOperator(Eigen::VectorXd first_column);

  Eigen::Index rows() const override { return col_.size(); }
  void mvm(const Eigen::VectorXd& v, Eigen::VectorXd& out) const override;
  Eigen::MatrixXd dense() const override;
  const Eigen::VectorXd& first_column() const { return col_; }

 private:
  Eigen::VectorXd col_;
  std::vector<fft::Complex> embed_spectrum_;  // DFT of the 2m-1 embedding column
};

/// Circulant operator C[i,j] = c[(i-j) mod a]. Eigenvalues are the DFT of the
/// first column; they are only real (and only exposed) when c is symmetric,
/// c[k] == c[a-k].
class CirculantOperator final : public StructuredOperator {
 public:
  explicit CirculantOperator(Eigen::VectorXd first_column);

  Eigen::Index rows() const override { return col_.size(); }
  void mvm(const Eigen::VectorXd& v, Eigen::VectorXd& out) const override;
  Eigen::MatrixXd dense() const override;

  const Eigen::VectorXd& first_column() const { return col_; }
  const std::vector<fft::Complex>& spectrum() const { return spectrum_; }

  bool is_symmetric(double rel_tol = 1e-12) const;

  /// Real eigenvalue vector in DFT order; throws if the column is asymmetric
  /// (the spectrum would be complex).
  Eigen::VectorXd eigenvalues() const;

 private:
  Eigen::VectorXd col_;
  std::vector<fft::Complex> spectrum_;
};

/// Kronecker product K = K_1 (x) ... (x) K_P over arbitrary structured
/// factors. Vectors are indexed row-major with factor 0 slowest. The product
/// is evaluated one tensor mode at a time; the full matrix is never formed.
class KroneckerOperator final : public StructuredOperator {
 public:
  explicit KroneckerOperator(std::vector<std::shared_ptr<const StructuredOperator>> factors);

  Eigen::Index rows() const override { return total_; }
  void mvm(const Eigen::VectorXd& v, Eigen::VectorXd& out) const override;
  Eigen::MatrixXd dense() const override;

  const std::vector<std::shared_ptr<const StructuredOperator>>& factors() const {
    return factors_;
  }

 private:
  std::vector<std::shared_ptr<const StructuredOperator>> factors_;
  Eigen::Index total_ = 1;
};

struct KroneckerEig {
  std::shared_ptr<KroneckerOperator> q;   // eigenvectors as Kronecker of factor Q_p
  std::shared_ptr<KroneckerOperator> qt;  // transposed factors
  Eigen::VectorXd eigenvalues;            // outer product, factor 0 slowest
};

/// Factor-wise eigendecomposition of a Kronecker operator. Each factor is
/// materialized (they are small by construction), checked for symmetry and
/// decomposed densely; Q diag(V) Q^T reconstructs the operator.
KroneckerEig kron_eigendecomp(const KroneckerOperator& op);

/// Symmetric BTTB operator over a D-dimensional grid, generated by a tensor
/// of kernel values at nonnegative lattice offsets:
///   B[i,j] = block[|i_1-j_1|, ..., |i_D-j_D|].
/// The product embeds into the (2n_1-1) x ... x (2n_D-1) BCCB and runs
/// multidimensional FFTs.
class BttbOperator final : public StructuredOperator {
 public:
  BttbOperator(Eigen::VectorXd generating_block, std::vector<int> shape);

  Eigen::Index rows() const override { return total_; }
  void mvm(const Eigen::VectorXd& v, Eigen::VectorXd& out) const override;
  Eigen::MatrixXd dense() const override;

  const std::vector<int>& shape() const { return shape_; }
  const Eigen::VectorXd& generating_block() const { return block_; }

  /// First column of the BCCB embedding (shape 2n_p-1 per dimension).
  Eigen::VectorXd embedding_column() const;
  const std::vector<int>& embedding_shape() const { return emb_shape_; }
  /// Real part of the embedding spectrum, DFT order over embedding_shape().
  Eigen::VectorXd embedding_spectrum() const;

 private:
  Eigen::VectorXd block_;
  std::vector<int> shape_;
  std::vector<int> emb_shape_;
  Eigen::Index total_ = 1;
  std::vector<fft::Complex> embed_spectrum_;
};

/// Block-circulant with circulant blocks; first column is a D-dimensional
/// tensor, diagonalized by the Kronecker product of per-dimension DFTs.
class BccbOperator final : public StructuredOperator {
 public:
  BccbOperator(Eigen::VectorXd first_column, std::vector<int> shape);

  Eigen::Index rows() const override { return total_; }
  void mvm(const Eigen::VectorXd& v, Eigen::VectorXd& out) const override;
  Eigen::MatrixXd dense() const override;

  const std::vector<int>& shape() const { return shape_; }
  const Eigen::VectorXd& first_column() const { return col_; }

  bool is_symmetric(double rel_tol = 1e-12) const;

  /// Real eigenvalues in multidimensional DFT order; throws when the column
  /// tensor lacks the per-dimension circulant symmetry.
  Eigen::VectorXd eigenvalues() const;

 private:
  Eigen::VectorXd col_;
  std::vector<int> shape_;
  Eigen::Index total_ = 1;
  std::vector<fft::Complex> spectrum_;
};

/// A + shift*I without forming anything.
class ShiftedOperator final : public StructuredOperator {
 public:
  ShiftedOperator(std::shared_ptr<const StructuredOperator> inner, double shift)
      : inner_(std::move(inner)), shift_(shift) {}

  Eigen::Index rows() const override { return inner_->rows(); }
  void mvm(const Eigen::VectorXd& v, Eigen::VectorXd& out) const override {
    inner_->mvm(v, out);
    out += shift_ * v;
  }
  Eigen::MatrixXd dense() const override {
    Eigen::MatrixXd d = inner_->dense();
    d.diagonal().array() += shift_;
    return d;
  }

 private:
  std::shared_ptr<const StructuredOperator> inner_;
  double shift_;
};

namespace detail {

/// y = (I (x) ... A_mode ... (x) I) x on a row-major tensor; fibers are
/// independent, so the loop parallelizes deterministically.
void mode_apply(const StructuredOperator& a, int mode, const std::vector<int>& shape,
                const Eigen::VectorXd& x, Eigen::VectorXd& y);

/// Verifies that the imaginary residue left by an inverse FFT is roundoff,
/// not a symmetry bug, then strips it. Throws past 1e-10 * ||result||.
void check_imag_residual(const std::vector<fft::Complex>& v, double real_norm);

}  // namespace detail

}  // namespace msgp
