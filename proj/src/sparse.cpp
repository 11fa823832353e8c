#include "adjflow/sparse.hpp"

#include <cmath>
#include <stdexcept>

namespace adjflow {

double dot(const BlockVector& a, const BlockVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += dot(a[i], b[i]);
  return s;
}

double norm2(const BlockVector& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const BlockVector& a) {
  double m = 0.0;
  for (const Vec4& v : a) m = std::max(m, norm_inf(v));
  return m;
}

void axpy(double s, const BlockVector& x, BlockVector& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

BlockSparseMatrix::BlockSparseMatrix(const Mesh2D& mesh)
    : incident_(mesh.incident_edges) {
  ends_.reserve(mesh.edges.size());
  for (const DualEdge& e : mesh.edges) ends_.push_back({e.a, e.b});
  diag_.assign(mesh.n_vertices(), Mat4::zero());
  off_lo_.assign(ends_.size(), Mat4::zero());
  off_hi_.assign(ends_.size(), Mat4::zero());
}

void BlockSparseMatrix::set_zero() {
  for (Mat4& m : diag_) m = Mat4::zero();
  for (Mat4& m : off_lo_) m = Mat4::zero();
  for (Mat4& m : off_hi_) m = Mat4::zero();
}

void BlockSparseMatrix::multiply(const BlockVector& x, BlockVector& y) const {
  y.assign(diag_.size(), Vec4{});
  for (int i = 0; i < rows(); ++i) {
    Vec4 acc = diag_[i] * x[i];
    for (int signed_e : incident_[i]) {
      const int e = std::abs(signed_e) - 1;
      if (signed_e > 0)
        acc += off_lo_[e] * x[ends_[e][1]];
      else
        acc += off_hi_[e] * x[ends_[e][0]];
    }
    y[i] = acc;
  }
}

BlockSparseMatrix BlockSparseMatrix::transposed() const {
  BlockSparseMatrix t(*this);
  for (std::size_t i = 0; i < diag_.size(); ++i) t.diag_[i] = diag_[i].transpose();
  for (std::size_t e = 0; e < ends_.size(); ++e) {
    t.off_lo_[e] = off_hi_[e].transpose();
    t.off_hi_[e] = off_lo_[e].transpose();
  }
  return t;
}

namespace {

// Inverses of the diagonal blocks; identity where a block is singular.
std::vector<Mat4> block_jacobi(const BlockSparseMatrix& a) {
  std::vector<Mat4> inv(a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    Mat4 m = Mat4::identity();
    bool ok = true;
    for (int c = 0; c < 4 && ok; ++c) {
      Vec4 unit;
      unit[c] = 1.0;
      Vec4 col;
      ok = solve4(a.diag(i), unit, col);
      for (int r = 0; r < 4; ++r) m(r, c) = col[r];
    }
    inv[i] = ok ? m : Mat4::identity();
  }
  return inv;
}

void apply_blocks(const std::vector<Mat4>& blocks, const BlockVector& x,
                  BlockVector& y) {
  y.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = blocks[i] * x[i];
}

}  // namespace

GmresResult gmres_solve(const BlockSparseMatrix& a, const BlockVector& b,
                        BlockVector& x, const GmresOptions& options) {
  const int n = a.rows();
  if (static_cast<int>(b.size()) != n)
    throw std::invalid_argument("gmres_solve: size mismatch");
  if (x.size() != b.size()) x.assign(b.size(), Vec4{});

  const std::vector<Mat4> precond = block_jacobi(a);
  const double bnorm = norm2(b);
  GmresResult result;
  if (bnorm == 0.0) {
    x.assign(b.size(), Vec4{});
    result.converged = true;
    return result;
  }

  const int m = options.restart;
  std::vector<BlockVector> v(m + 1);
  std::vector<std::vector<double>> h(m + 1, std::vector<double>(m, 0.0));
  std::vector<double> cs(m), sn(m), g(m + 1);
  BlockVector tmp, w;

  int total_iters = 0;
  while (total_iters < options.max_iters) {
    a.multiply(x, tmp);
    BlockVector r = b;
    axpy(-1.0, tmp, r);
    double beta = norm2(r);
    result.relative_residual = beta / bnorm;
    if (result.relative_residual < options.rtol) {
      result.converged = true;
      return result;
    }

    v[0] = r;
    for (Vec4& vi : v[0]) vi *= 1.0 / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    int k = 0;
    for (; k < m && total_iters < options.max_iters; ++k, ++total_iters) {
      apply_blocks(precond, v[k], tmp);
      a.multiply(tmp, w);
      // Modified Gram-Schmidt.
      for (int j = 0; j <= k; ++j) {
        h[j][k] = dot(w, v[j]);
        axpy(-h[j][k], v[j], w);
      }
      h[k + 1][k] = norm2(w);
      const bool breakdown = h[k + 1][k] == 0.0;
      if (!breakdown) {
        v[k + 1] = w;
        for (Vec4& vi : v[k + 1]) vi *= 1.0 / h[k + 1][k];
      }
      // Apply stored Givens rotations, then create the new one.
      for (int j = 0; j < k; ++j) {
        const double t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
        h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
        h[j][k] = t;
      }
      const double denom = std::hypot(h[k][k], h[k + 1][k]);
      cs[k] = denom == 0.0 ? 1.0 : h[k][k] / denom;
      sn[k] = denom == 0.0 ? 0.0 : h[k + 1][k] / denom;
      h[k][k] = denom;
      h[k + 1][k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];

      result.relative_residual = std::fabs(g[k + 1]) / bnorm;
      if (result.relative_residual < options.rtol || breakdown) {
        ++k;
        ++total_iters;
        break;
      }
    }

    // Back-substitute the k x k triangular system and update x.
    std::vector<double> y(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= h[i][j] * y[j];
      y[i] = h[i][i] != 0.0 ? s / h[i][i] : 0.0;
    }
    BlockVector z(b.size(), Vec4{});
    for (int j = 0; j < k; ++j) axpy(y[j], v[j], z);
    apply_blocks(precond, z, tmp);
    axpy(1.0, tmp, x);

    if (result.relative_residual < options.rtol) {
      // Recompute the true residual once to guard against drift.
      a.multiply(x, tmp);
      BlockVector r2 = b;
      axpy(-1.0, tmp, r2);
      result.relative_residual = norm2(r2) / bnorm;
      if (result.relative_residual < options.rtol) {
        result.converged = true;
        result.iterations = total_iters;
        return result;
      }
    }
  }
  result.iterations = total_iters;
  return result;
}

}  // namespace adjflow
