#include "icc/eigs.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

namespace icc {

namespace {

// Orthogonalize w against the columns of basis (two passes).
void orthogonalize(Vector& w, const Matrix& basis, Index ncols) {
  if (ncols == 0) return;
  auto B = basis.leftCols(ncols);
  for (int pass = 0; pass < 2; ++pass) w.noalias() -= B * (B.transpose() * w);
}

Vector random_unit(Index dim, std::mt19937_64& eng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) v(i) = gauss(eng);
  double nrm = v.norm();
  if (nrm == 0.0) v.setConstant(1.0), nrm = v.norm();
  return v / nrm;
}

struct RitzPair {
  double value;
  Vector vector;
};

}  // namespace

SymEigsResult lanczos_largest(const LinOp& op, Index dim, int nev, double tol,
                              int max_restarts, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("lanczos_largest: empty operator");
  nev = std::min<int>(nev, static_cast<int>(dim));
  if (nev < 1) throw std::invalid_argument("lanczos_largest: nev < 1");

  auto eng = make_engine(seed);
  std::vector<RitzPair> locked;  // converged, deflated pairs
  Matrix locked_basis(dim, 0);
  int matvecs = 0;
  int cap = static_cast<int>(std::min<Index>(dim, std::max(3 * nev + 30, 90)));

  for (int restart = 0; restart < max_restarts; ++restart) {
    const int want = nev - static_cast<int>(locked.size());
    if (want <= 0) break;
    const Index free_dim = dim - static_cast<Index>(locked.size());
    if (free_dim <= 0) break;
    const int m = static_cast<int>(std::min<Index>(free_dim, cap));

    Matrix V(dim, m);
    Vector alpha = Vector::Zero(m), beta = Vector::Zero(m);
    Vector v = random_unit(dim, eng);
    orthogonalize(v, locked_basis, locked_basis.cols());
    if (v.norm() < 1e-12) break;  // locked space exhausts the reachable space
    V.col(0) = v.normalized();

    Eigen::SelfAdjointEigenSolver<Matrix> tri_solver;
    const std::size_t locked_before = locked.size();

    for (int j = 0; j < m; ++j) {
      Vector w = op(V.col(j));
      ++matvecs;
      if (j > 0) w.noalias() -= beta(j - 1) * V.col(j - 1);
      alpha(j) = V.col(j).dot(w);
      w.noalias() -= alpha(j) * V.col(j);
      orthogonalize(w, V, j + 1);
      orthogonalize(w, locked_basis, locked_basis.cols());
      beta(j) = w.norm();
      const int built = j + 1;

      const bool breakdown = beta(j) < 1e-13 * std::max(1.0, std::abs(alpha(j)));
      const bool last = (built == m);

      if (built >= want || breakdown || last) {
        Matrix T = Matrix::Zero(built, built);
        for (int i = 0; i < built; ++i) {
          T(i, i) = alpha(i);
          if (i + 1 < built) T(i, i + 1) = T(i + 1, i) = beta(i);
        }
        tri_solver.compute(T);
        const Vector& theta = tri_solver.eigenvalues();  // ascending
        const Matrix& S = tri_solver.eigenvectors();
        const int avail = std::min(want, built);

        auto residual = [&](int t) {
          const int col = built - 1 - t;
          return std::abs(beta(j) * S(built - 1, col));
        };
        bool all_ok = true;
        for (int t = 0; t < avail; ++t) {
          const int col = built - 1 - t;
          if (residual(t) > tol * std::max(1.0, std::abs(theta(col)))) {
            all_ok = false;
            break;
          }
        }
        if (all_ok || breakdown || last) {
          for (int t = 0; t < avail; ++t) {
            const int col = built - 1 - t;
            if (residual(t) > tol * std::max(1.0, std::abs(theta(col)))) continue;
            Vector x = V.leftCols(built) * S.col(col);
            x.normalize();
            locked.push_back({theta(col), x});
          }
          locked_basis.conservativeResize(dim, static_cast<Index>(locked.size()));
          for (std::size_t c = 0; c < locked.size(); ++c)
            locked_basis.col(static_cast<Index>(c)) = locked[c].vector;
          break;
        }
      }
      if (breakdown) break;
      if (j + 1 < m) V.col(j + 1) = w / beta(j);
    }

    if (locked.size() == locked_before)
      cap = static_cast<int>(std::min<Index>(dim, 2 * cap));  // retry with a larger space
  }

  if (static_cast<int>(locked.size()) < nev)
    throw std::runtime_error("lanczos_largest: failed to converge requested pairs");

  std::sort(locked.begin(), locked.end(),
            [](const RitzPair& a, const RitzPair& b) { return a.value > b.value; });

  SymEigsResult out;
  out.values = Vector(nev);
  out.vectors = Matrix(dim, nev);
  for (int i = 0; i < nev; ++i) {
    out.values(i) = locked[i].value;
    out.vectors.col(i) = locked[i].vector;
  }
  out.converged = true;
  out.matvecs = matvecs;
  return out;
}

}  // namespace icc
