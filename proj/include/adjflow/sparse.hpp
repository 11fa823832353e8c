// Block sparse linear algebra on the mesh vertex graph: 4x4 blocks stored
// per vertex (diagonal) and per edge (two directed off-diagonal blocks),
// transposition, and a restarted GMRES solver with block-Jacobi
// preconditioning. Everything here is serial and deterministic.
#ifndef ADJFLOW_SPARSE_HPP_
#define ADJFLOW_SPARSE_HPP_

#include <vector>

#include "adjflow/matrix4.hpp"
#include "adjflow/mesh.hpp"

namespace adjflow {

/// State-space vector over all mesh vertices.
using BlockVector = std::vector<Vec4>;

double dot(const BlockVector& a, const BlockVector& b);
double norm2(const BlockVector& a);
double norm_inf(const BlockVector& a);
/// y += s * x
void axpy(double s, const BlockVector& x, BlockVector& y);

/// Sparse matrix whose pattern is the mesh edge graph plus the diagonal.
/// Row i, column j holds a 4x4 block; off-diagonal blocks exist exactly for
/// mesh edges and are addressed by (edge id, row endpoint).
class BlockSparseMatrix {
 public:
  /// Zero matrix over the adjacency of `mesh` (which must be built).
  explicit BlockSparseMatrix(const Mesh2D& mesh);

  int rows() const { return static_cast<int>(diag_.size()); }
  int n_edges() const { return static_cast<int>(ends_.size()); }

  Mat4& diag(int i) { return diag_[i]; }
  const Mat4& diag(int i) const { return diag_[i]; }

  /// Block in row `row_vertex` (an endpoint of edge e), column = the other
  /// endpoint.
  Mat4& off(int e, int row_vertex) {
    return row_vertex == ends_[e][0] ? off_lo_[e] : off_hi_[e];
  }
  const Mat4& off(int e, int row_vertex) const {
    return row_vertex == ends_[e][0] ? off_lo_[e] : off_hi_[e];
  }

  void set_zero();

  /// y = A x; per-row accumulation follows the fixed incident-edge order.
  void multiply(const BlockVector& x, BlockVector& y) const;

  /// A^T on the same pattern (blocks transposed and swapped across edges).
  BlockSparseMatrix transposed() const;

 private:
  std::vector<std::array<int, 2>> ends_;       // edge endpoints, lo < hi
  std::vector<std::vector<int>> incident_;     // signed edge ids per row
  std::vector<Mat4> diag_, off_lo_, off_hi_;   // off_lo_: row lo, col hi
};

struct GmresOptions {
  double rtol = 1e-8;   // on ||b - Ax|| / ||b||
  int restart = 60;
  int max_iters = 500;  // total Krylov iterations across restarts
};

struct GmresResult {
  bool converged = false;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Right-preconditioned restarted GMRES with a block-Jacobi preconditioner
/// built from the diagonal blocks (singular diagonal blocks fall back to
/// identity). `x` is the initial guess and receives the solution.
GmresResult gmres_solve(const BlockSparseMatrix& a, const BlockVector& b,
                        BlockVector& x, const GmresOptions& options = {});

}  // namespace adjflow

#endif  // ADJFLOW_SPARSE_HPP_
