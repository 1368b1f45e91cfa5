#include "msgp/structured.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "msgp/parallel.hpp"

namespace msgp {

namespace par {
namespace {
bool g_enabled = true;
}
bool enabled() { return g_enabled; }
void set_enabled(bool on) { g_enabled = on; }
int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}
}  // namespace par

namespace detail {

void check_imag_residual(const std::vector<fft::Complex>& v, double real_norm) {
  double imag_sq = 0.0;
  for (const auto& z : v) imag_sq += z.imag() * z.imag();
  const double imag_norm = std::sqrt(imag_sq);
  if (imag_norm > 1e-10 * real_norm + 1e-300) {
    throw std::runtime_error("structured mvm: imaginary residual " + std::to_string(imag_norm) +
                             " exceeds 1e-10 * " + std::to_string(real_norm) +
                             " (symmetry violated?)");
  }
}

namespace {

std::vector<Eigen::Index> row_major_strides(const std::vector<int>& shape) {
  std::vector<Eigen::Index> s(shape.size());
  Eigen::Index acc = 1;
  for (int d = static_cast<int>(shape.size()) - 1; d >= 0; --d) {
    s[d] = acc;
    acc *= shape[d];
  }
  return s;
}

// Pointwise complex product with spectrum, on the embedding lattice.
void spectral_mvm(const std::vector<int>& shape, const std::vector<fft::Complex>& spectrum,
                  std::vector<fft::Complex>& buf, std::vector<fft::Complex>& buf2) {
  fft::forward_nd(shape, buf.data(), buf2.data());
  for (std::size_t i = 0; i < buf2.size(); ++i) buf2[i] *= spectrum[i];
  fft::inverse_nd(shape, buf2.data(), buf.data());
}

}  // namespace

void mode_apply(const StructuredOperator& a, int mode, const std::vector<int>& shape,
                const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  const int dims = static_cast<int>(shape.size());
  const auto strides = row_major_strides(shape);
  const Eigen::Index mp = shape[mode];
  Eigen::Index outer = 1, inner = 1;
  for (int d = 0; d < mode; ++d) outer *= shape[d];
  for (int d = mode + 1; d < dims; ++d) inner *= shape[d];
  y.resize(x.size());
  const Eigen::Index stride = strides[mode];

  par::for_each_index(outer * inner, [&](std::int64_t f) {
    const Eigen::Index o = f / inner;
    const Eigen::Index i = f % inner;
    const Eigen::Index base = o * mp * inner + i;
    Eigen::VectorXd fiber(mp), res;
    for (Eigen::Index j = 0; j < mp; ++j) fiber[j] = x[base + j * stride];
    a.mvm(fiber, res);
    for (Eigen::Index j = 0; j < mp; ++j) y[base + j * stride] = res[j];
  });
}

}  // namespace detail

// ---------------------------------------------------------------------------
// DenseOperator

DenseOperator::DenseOperator(Eigen::MatrixXd m) : mat_(std::move(m)) {
  if (mat_.rows() != mat_.cols()) throw std::invalid_argument("DenseOperator: matrix not square");
}

void DenseOperator::mvm(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
  if (v.size() != mat_.cols()) throw std::invalid_argument("DenseOperator::mvm: dimension mismatch");
  out = mat_ * v;
}

// ---------------------------------------------------------------------------
// ToeplitzOperator

ToeplitzOperator::ToeplitzOperator(Eigen::VectorXd first_column) : col_(std::move(first_column)) {
  const Eigen::Index m = col_.size();
  if (m < 1) throw std::invalid_argument("ToeplitzOperator: empty first column");
  // 2m-1 circulant embedding: [k_0 .. k_{m-1}, k_{m-1} .. k_1]
  const Eigen::Index a = 2 * m - 1;
  std::vector<fft::Complex> c(a);
  for (Eigen::Index i = 0; i < m; ++i) c[i] = col_[i];
  for (Eigen::Index t = m; t < a; ++t) c[t] = col_[a - t];
  embed_spectrum_.resize(a);
  fft::forward(a, c.data(), embed_spectrum_.data());
}

void ToeplitzOperator::mvm(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
  const Eigen::Index m = col_.size();
  if (v.size() != m) throw std::invalid_argument("ToeplitzOperator::mvm: dimension mismatch");
  const Eigen::Index a = 2 * m - 1;
  std::vector<fft::Complex> buf(a, fft::Complex(0, 0)), buf2(a);
  for (Eigen::Index i = 0; i < m; ++i) buf[i] = v[i];
  std::vector<int> shape{static_cast<int>(a)};
  detail::spectral_mvm(shape, embed_spectrum_, buf, buf2);
  out.resize(m);
  double norm_sq = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    out[i] = buf[i].real();
    norm_sq += out[i] * out[i];
  }
  std::vector<fft::Complex> head(buf.begin(), buf.begin() + m);
  detail::check_imag_residual(head, std::sqrt(norm_sq));
}

Eigen::MatrixXd ToeplitzOperator::dense() const {
  const Eigen::Index m = col_.size();
  Eigen::MatrixXd d(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) d(i, j) = col_[std::abs(i - j)];
  return d;
}

// ---------------------------------------------------------------------------
// CirculantOperator

CirculantOperator::CirculantOperator(Eigen::VectorXd first_column) : col_(std::move(first_column)) {
  const Eigen::Index a = col_.size();
  if (a < 1) throw std::invalid_argument("CirculantOperator: empty first column");
  std::vector<fft::Complex> c(a);
  for (Eigen::Index i = 0; i < a; ++i) c[i] = col_[i];
  spectrum_.resize(a);
  fft::forward(a, c.data(), spectrum_.data());
}

void CirculantOperator::mvm(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
  const Eigen::Index a = col_.size();
  if (v.size() != a) throw std::invalid_argument("CirculantOperator::mvm: dimension mismatch");
  std::vector<fft::Complex> buf(a), buf2(a);
  for (Eigen::Index i = 0; i < a; ++i) buf[i] = v[i];
  std::vector<int> shape{static_cast<int>(a)};
  detail::spectral_mvm(shape, spectrum_, buf, buf2);
  out.resize(a);
  for (Eigen::Index i = 0; i < a; ++i) out[i] = buf[i].real();
  detail::check_imag_residual(buf, out.norm());
}

Eigen::MatrixXd CirculantOperator::dense() const {
  const Eigen::Index a = col_.size();
  Eigen::MatrixXd d(a, a);
  for (Eigen::Index i = 0; i < a; ++i)
    for (Eigen::Index j = 0; j < a; ++j) d(i, j) = col_[((i - j) % a + a) % a];
  return d;
}

bool CirculantOperator::is_symmetric(double rel_tol) const {
  const Eigen::Index a = col_.size();
  const double scale = col_.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 1; k < a; ++k)
    if (std::abs(col_[k] - col_[a - k]) > rel_tol * scale + 1e-300) return false;
  return true;
}

Eigen::VectorXd CirculantOperator::eigenvalues() const {
  if (!is_symmetric())
    throw std::runtime_error("CirculantOperator::eigenvalues: column is not symmetric "
                             "(c[k] != c[a-k]); spectrum would be complex");
  const Eigen::Index a = col_.size();
  Eigen::VectorXd lam(a);
  double spec_sq = 0.0, imag_sq = 0.0;
  for (Eigen::Index i = 0; i < a; ++i) {
    lam[i] = spectrum_[i].real();
    spec_sq += std::norm(spectrum_[i]);
    imag_sq += spectrum_[i].imag() * spectrum_[i].imag();
  }
  if (std::sqrt(imag_sq) > 1e-10 * std::sqrt(spec_sq) + 1e-300)
    throw std::runtime_error("CirculantOperator::eigenvalues: imaginary residual too large");
  return lam;
}

// ---------------------------------------------------------------------------
// KroneckerOperator

KroneckerOperator::KroneckerOperator(
    std::vector<std::shared_ptr<const StructuredOperator>> factors)
    : factors_(std::move(factors)) {
  if (factors_.empty()) throw std::invalid_argument("KroneckerOperator: no factors");
  for (const auto& f : factors_) total_ *= f->rows();
}

void KroneckerOperator::mvm(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
  if (v.size() != total_) throw std::invalid_argument("KroneckerOperator::mvm: dimension mismatch");
  std::vector<int> shape(factors_.size());
  for (std::size_t p = 0; p < factors_.size(); ++p) shape[p] = static_cast<int>(factors_[p]->rows());
  Eigen::VectorXd cur = v, next;
  for (std::size_t p = 0; p < factors_.size(); ++p) {
    detail::mode_apply(*factors_[p], static_cast<int>(p), shape, cur, next);
    cur.swap(next);
  }
  out = std::move(cur);
}

Eigen::MatrixXd KroneckerOperator::dense() const {
  Eigen::MatrixXd acc = factors_[0]->dense();
  for (std::size_t p = 1; p < factors_.size(); ++p) {
    const Eigen::MatrixXd b = factors_[p]->dense();
    Eigen::MatrixXd next(acc.rows() * b.rows(), acc.cols() * b.cols());
    for (Eigen::Index i = 0; i < acc.rows(); ++i)
      for (Eigen::Index j = 0; j < acc.cols(); ++j)
        next.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = acc(i, j) * b;
    acc = std::move(next);
  }
  return acc;
}

KroneckerEig kron_eigendecomp(const KroneckerOperator& op) {
  std::vector<std::shared_ptr<const StructuredOperator>> qs, qts;
  std::vector<Eigen::VectorXd> vals;
  for (const auto& f : op.factors()) {
    Eigen::MatrixXd d = f->dense();
    const double scale = d.cwiseAbs().maxCoeff();
    if ((d - d.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale + 1e-300)
      throw std::runtime_error("kron_eigendecomp: factor is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("kron_eigendecomp: factor eigendecomposition failed");
    qs.push_back(std::make_shared<DenseOperator>(es.eigenvectors()));
    qts.push_back(std::make_shared<DenseOperator>(es.eigenvectors().transpose()));
    vals.push_back(es.eigenvalues());
  }
  Eigen::VectorXd lam = Eigen::VectorXd::Ones(1);
  for (const auto& vp : vals) {
    Eigen::VectorXd next(lam.size() * vp.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i)
      for (Eigen::Index j = 0; j < vp.size(); ++j) next[i * vp.size() + j] = lam[i] * vp[j];
    lam = std::move(next);
  }
  KroneckerEig out;
  out.q = std::make_shared<KroneckerOperator>(std::move(qs));
  out.qt = std::make_shared<KroneckerOperator>(std::move(qts));
  out.eigenvalues = std::move(lam);
  return out;
}

// ---------------------------------------------------------------------------
// BttbOperator

namespace {

Eigen::Index shape_total(const std::vector<int>& shape) {
  Eigen::Index t = 1;
  for (int s : shape) t *= s;
  return t;
}

}  // namespace

BttbOperator::BttbOperator(Eigen::VectorXd generating_block, std::vector<int> shape)
    : block_(std::move(generating_block)), shape_(std::move(shape)) {
  if (shape_.empty()) throw std::invalid_argument("BttbOperator: empty shape");
  for (int s : shape_)
    if (s < 1) throw std::invalid_argument("BttbOperator: nonpositive extent");
  total_ = shape_total(shape_);
  if (block_.size() != total_)
    throw std::invalid_argument("BttbOperator: block size does not match shape");
  emb_shape_.resize(shape_.size());
  for (std::size_t d = 0; d < shape_.size(); ++d) emb_shape_[d] = 2 * shape_[d] - 1;

  const Eigen::VectorXd emb = embedding_column();
  std::vector<fft::Complex> c(emb.size());
  for (Eigen::Index i = 0; i < emb.size(); ++i) c[i] = emb[i];
  embed_spectrum_.resize(emb.size());
  fft::forward_nd(emb_shape_, c.data(), embed_spectrum_.data());
}

Eigen::VectorXd BttbOperator::embedding_column() const {
  const int dims = static_cast<int>(shape_.size());
  const Eigen::Index etotal = shape_total(emb_shape_);
  Eigen::VectorXd emb(etotal);
  std::vector<int> t(dims, 0);
  for (Eigen::Index flat = 0; flat < etotal; ++flat) {
    // per-dimension signed offset, then the generating block at |offset|
    Eigen::Index bidx = 0;
    for (int d = 0; d < dims; ++d) {
      int delta = t[d] <= shape_[d] - 1 ? t[d] : t[d] - emb_shape_[d];
      bidx = bidx * shape_[d] + std::abs(delta);
    }
    emb[flat] = block_[bidx];
    for (int d = dims - 1; d >= 0; --d) {
      if (++t[d] < emb_shape_[d]) break;
      t[d] = 0;
    }
  }
  return emb;
}

Eigen::VectorXd BttbOperator::embedding_spectrum() const {
  Eigen::VectorXd s(static_cast<Eigen::Index>(embed_spectrum_.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = embed_spectrum_[i].real();
  return s;
}

void BttbOperator::mvm(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
  if (v.size() != total_) throw std::invalid_argument("BttbOperator::mvm: dimension mismatch");
  const int dims = static_cast<int>(shape_.size());
  const Eigen::Index etotal = shape_total(emb_shape_);
  std::vector<fft::Complex> buf(etotal, fft::Complex(0, 0)), buf2(etotal);

  // scatter v into the zero-padded embedding tensor
  std::vector<int> t(dims, 0);
  for (Eigen::Index flat = 0; flat < total_; ++flat) {
    Eigen::Index eidx = 0;
    for (int d = 0; d < dims; ++d) eidx = eidx * emb_shape_[d] + t[d];
    buf[eidx] = v[flat];
    for (int d = dims - 1; d >= 0; --d) {
      if (++t[d] < shape_[d]) break;
      t[d] = 0;
    }
  }

  detail::spectral_mvm(emb_shape_, embed_spectrum_, buf, buf2);

  out.resize(total_);
  std::vector<fft::Complex> head(total_);
  std::fill(t.begin(), t.end(), 0);
  double norm_sq = 0.0;
  for (Eigen::Index flat = 0; flat < total_; ++flat) {
    Eigen::Index eidx = 0;
    for (int d = 0; d < dims; ++d) eidx = eidx * emb_shape_[d] + t[d];
    out[flat] = buf[eidx].real();
    head[flat] = buf[eidx];
    norm_sq += out[flat] * out[flat];
    for (int d = dims - 1; d >= 0; --d) {
      if (++t[d] < shape_[d]) break;
      t[d] = 0;
    }
  }
  detail::check_imag_residual(head, std::sqrt(norm_sq));
}

Eigen::MatrixXd BttbOperator::dense() const {
  const int dims = static_cast<int>(shape_.size());
  Eigen::MatrixXd d(total_, total_);
  std::vector<int> ti(dims), tj(dims);
  for (Eigen::Index i = 0; i < total_; ++i) {
    Eigen::Index rem = i;
    for (int k = dims - 1; k >= 0; --k) {
      ti[k] = static_cast<int>(rem % shape_[k]);
      rem /= shape_[k];
    }
    for (Eigen::Index j = 0; j < total_; ++j) {
      rem = j;
      for (int k = dims - 1; k >= 0; --k) {
        tj[k] = static_cast<int>(rem % shape_[k]);
        rem /= shape_[k];
      }
      Eigen::Index bidx = 0;
      for (int k = 0; k < dims; ++k) bidx = bidx * shape_[k] + std::abs(ti[k] - tj[k]);
      d(i, j) = block_[bidx];
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// BccbOperator

BccbOperator::BccbOperator(Eigen::VectorXd first_column, std::vector<int> shape)
    : col_(std::move(first_column)), shape_(std::move(shape)) {
  if (shape_.empty()) throw std::invalid_argument("BccbOperator: empty shape");
  total_ = shape_total(shape_);
  if (col_.size() != total_)
    throw std::invalid_argument("BccbOperator: column size does not match shape");
  std::vector<fft::Complex> c(total_);
  for (Eigen::Index i = 0; i < total_; ++i) c[i] = col_[i];
  spectrum_.resize(total_);
  fft::forward_nd(shape_, c.data(), spectrum_.data());
}

void BccbOperator::mvm(const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
  if (v.size() != total_) throw std::invalid_argument("BccbOperator::mvm: dimension mismatch");
  std::vector<fft::Complex> buf(total_), buf2(total_);
  for (Eigen::Index i = 0; i < total_; ++i) buf[i] = v[i];
  detail::spectral_mvm(shape_, spectrum_, buf, buf2);
  out.resize(total_);
  for (Eigen::Index i = 0; i < total_; ++i) out[i] = buf[i].real();
  detail::check_imag_residual(buf, out.norm());
}

Eigen::MatrixXd BccbOperator::dense() const {
  const int dims = static_cast<int>(shape_.size());
  Eigen::MatrixXd d(total_, total_);
  std::vector<int> ti(dims), tj(dims);
  for (Eigen::Index i = 0; i < total_; ++i) {
    Eigen::Index rem = i;
    for (int k = dims - 1; k >= 0; --k) {
      ti[k] = static_cast<int>(rem % shape_[k]);
      rem /= shape_[k];
    }
    for (Eigen::Index j = 0; j < total_; ++j) {
      rem = j;
      for (int k = dims - 1; k >= 0; --k) {
        tj[k] = static_cast<int>(rem % shape_[k]);
        rem /= shape_[k];
      }
      Eigen::Index cidx = 0;
      for (int k = 0; k < dims; ++k) {
        int delta = ((ti[k] - tj[k]) % shape_[k] + shape_[k]) % shape_[k];
        cidx = cidx * shape_[k] + delta;
      }
      d(i, j) = col_[cidx];
    }
  }
  return d;
}

bool BccbOperator::is_symmetric(double rel_tol) const {
  const int dims = static_cast<int>(shape_.size());
  const double scale = col_.cwiseAbs().maxCoeff();
  std::vector<int> t(dims, 0);
  for (Eigen::Index flat = 0; flat < total_; ++flat) {
    Eigen::Index midx = 0;
    for (int d = 0; d < dims; ++d) {
      const int mirrored = t[d] == 0 ? 0 : shape_[d] - t[d];
      midx = midx * shape_[d] + mirrored;
    }
    if (std::abs(col_[flat] - col_[midx]) > rel_tol * scale + 1e-300) return false;
    for (int d = dims - 1; d >= 0; --d) {
      if (++t[d] < shape_[d]) break;
      t[d] = 0;
    }
  }
  return true;
}

Eigen::VectorXd BccbOperator::eigenvalues() const {
  if (!is_symmetric())
    throw std::runtime_error("BccbOperator::eigenvalues: column tensor lacks circulant "
                             "symmetry; spectrum would be complex");
  Eigen::VectorXd lam(total_);
  double spec_sq = 0.0, imag_sq = 0.0;
  for (Eigen::Index i = 0; i < total_; ++i) {
    lam[i] = spectrum_[i].real();
    spec_sq += std::norm(spectrum_[i]);
    imag_sq += spectrum_[i].imag() * spectrum_[i].imag();
  }
  if (std::sqrt(imag_sq) > 1e-10 * std::sqrt(spec_sq) + 1e-300)
    throw std::runtime_error("BccbOperator::eigenvalues: imaginary residual too large");
  return lam;
}

}  // namespace msgp
