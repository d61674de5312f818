#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "lojalab/numerics.hpp"

namespace lojalab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxSweeps = 80;

void require_finite(const DenseMatrix& m, const char* who) {
  for (double x : m.data()) {
    require(std::isfinite(x), std::string(who) + ": matrix entries must be finite");
  }
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  require(data_.size() == rows * cols, "matrix entry count does not match shape");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> DenseMatrix::column(std::size_t j) const {
  std::vector<double> c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

void DenseMatrix::set_column(std::size_t j, std::span<const double> values) {
  require(values.size() == rows_, "column length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double DenseMatrix::frobenius_norm() const { return norm2(data_); }

double DenseMatrix::max_abs() const {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::abs(x));
  return m;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.rows(), "matrix product shape mismatch");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix difference shape mismatch");
  std::vector<double> d(a.data());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] -= b.data()[i];
  return DenseMatrix(a.rows(), a.cols(), std::move(d));
}

std::vector<double> operator*(const DenseMatrix& a, std::span<const double> x) {
  require(a.cols() == x.size(), "matrix-vector shape mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

std::vector<double> transpose_times(const DenseMatrix& a, std::span<const double> x) {
  require(a.rows() == x.size(), "transpose-vector shape mismatch");
  std::vector<double> y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += a(i, j) * xi;
  }
  return y;
}

double dot(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "dot product length mismatch");
  return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

double norm2(std::span<const double> x) {
  // scaled accumulation keeps tiny and huge vectors from under/overflowing
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double v : x) {
    const double r = v / scale;
    s += r * r;
  }
  return scale * std::sqrt(s);
}

namespace {

// Hestenes one-sided Jacobi for rows >= cols. Returns column-major work
// columns in w (orthogonal on exit) and the accumulated rotation v.
void hestenes(std::vector<std::vector<double>>& w, DenseMatrix& v) {
  const std::size_t cols = w.size();
  v = DenseMatrix::identity(cols);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        auto& wp = w[p];
        auto& wq = w[q];
        const double alpha = dot(wp, wp);
        const double beta = dot(wq, wq);
        const double gamma = dot(wp, wq);
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= 4.0 * kEps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < wp.size(); ++i) {
          const double a = wp[i];
          const double b = wq[i];
          wp[i] = c * a - s * b;
          wq[i] = s * a + c * b;
        }
        for (std::size_t i = 0; i < cols; ++i) {
          const double a = v(i, p);
          const double b = v(i, q);
          v(i, p) = c * a - s * b;
          v(i, q) = s * a + c * b;
        }
      }
    }
    if (!rotated) return;
  }
  fail(ErrorKind::numerical_failure, "one-sided Jacobi SVD did not converge in " +
                                         std::to_string(kMaxSweeps) + " sweeps");
}

// Replace columns flagged in `missing` with unit vectors orthogonal to all
// other columns of q.
void complete_orthonormal(DenseMatrix& q, const std::vector<bool>& missing) {
  const std::size_t n = q.rows();
  for (std::size_t j = 0; j < q.cols(); ++j) {
    if (!missing[j]) continue;
    std::vector<double> best;
    double best_norm = -1.0;
    for (std::size_t e = 0; e < n; ++e) {
      std::vector<double> cand(n, 0.0);
      cand[e] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < q.cols(); ++k) {
          if (k == j || (missing[k] && k > j)) continue;
          double proj = 0.0;
          for (std::size_t i = 0; i < n; ++i) proj += q(i, k) * cand[i];
          for (std::size_t i = 0; i < n; ++i) cand[i] -= proj * q(i, k);
        }
      }
      const double nc = norm2(cand);
      if (nc > best_norm) {
        best_norm = nc;
        best = std::move(cand);
      }
      if (best_norm > 0.5) break;
    }
    for (std::size_t i = 0; i < n; ++i) q(i, j) = best[i] / best_norm;
  }
}

Svd svd_tall(const DenseMatrix& m) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  std::vector<std::vector<double>> w(cols, std::vector<double>(rows));
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) w[j][i] = m(i, j);
  DenseMatrix v;
  hestenes(w, v);

  std::vector<double> sv(cols);
  for (std::size_t j = 0; j < cols; ++j) sv[j] = norm2(w[j]);
  std::vector<std::size_t> order(cols);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sv[x] > sv[y]; });

  Svd out{DenseMatrix(rows, cols), std::vector<double>(cols), DenseMatrix(cols, cols)};
  const double smax = cols > 0 ? sv[order[0]] : 0.0;
  const double zero_cut = smax * static_cast<double>(rows) * kEps;
  std::vector<bool> missing(cols, false);
  for (std::size_t k = 0; k < cols; ++k) {
    const std::size_t j = order[k];
    out.s[k] = sv[j];
    for (std::size_t i = 0; i < cols; ++i) out.V(i, k) = v(i, j);
    if (sv[j] <= zero_cut || sv[j] == 0.0) {
      missing[k] = true;
      continue;
    }
    for (std::size_t i = 0; i < rows; ++i) out.U(i, k) = w[j][i] / sv[j];
  }
  if (std::find(missing.begin(), missing.end(), true) != missing.end()) {
    complete_orthonormal(out.U, missing);
  }
  return out;
}

}  // namespace

Svd svd_small(const DenseMatrix& m) {
  require(m.rows() > 0 && m.cols() > 0, "svd of an empty matrix");
  require(m.rows() * m.cols() <= 1'000'000, "svd_small is limited to 1e6 entries");
  require_finite(m, "svd_small");
  if (m.rows() >= m.cols()) return svd_tall(m);
  Svd t = svd_tall(m.transpose());
  return Svd{std::move(t.V), std::move(t.s), std::move(t.U)};
}

double spectral_norm(const DenseMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return svd_small(m).s.front();
}

SymEig sym_eigs(const DenseMatrix& m) {
  require(m.rows() == m.cols(), "sym_eigs needs a square matrix");
  require_finite(m, "sym_eigs");
  const std::size_t n = m.rows();
  const double scale = std::max(m.max_abs(), std::numeric_limits<double>::min());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      require(std::abs(m(i, j) - m(j, i)) <= 1e-10 * scale,
              "sym_eigs: matrix is not symmetric within 1e-10 relative");

  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));
  DenseMatrix v = DenseMatrix::identity(n);

  bool converged = n <= 1;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    double off = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        total += a(i, j) * a(i, j);
        if (i != j) off += a(i, j) * a(i, j);
      }
    if (off <= kEps * kEps * total) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        if (std::abs(apq) <= kEps * 1e-3 * (std::abs(app) + std::abs(aqq))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double apr = a(p, r);
          const double aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }
  if (!converged) {
    double off = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        total += a(i, j) * a(i, j);
        if (i != j) off += a(i, j) * a(i, j);
      }
    if (off > 1e4 * kEps * kEps * total)
      fail(ErrorKind::numerical_failure, "cyclic Jacobi eigensolver did not converge");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  SymEig out{std::vector<double>(n), DenseMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

DenseMatrix orthonormal_complement(const DenseMatrix& q) {
  const std::size_t n = q.rows();
  const std::size_t k = q.cols();
  require(k <= n, "complement of more columns than rows");
  // Householder QR of q; the trailing columns of the accumulated orthogonal
  // factor span the complement.
  DenseMatrix r = q;
  std::vector<std::vector<double>> reflectors;
  reflectors.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> x(n - j);
    for (std::size_t i = j; i < n; ++i) x[i - j] = r(i, j);
    const double nx = norm2(x);
    require(nx > 0.0, "orthonormal_complement: columns are rank deficient");
    x[0] += std::copysign(nx, x[0]);
    const double nv = norm2(x);
    for (double& xi : x) xi /= nv;
    for (std::size_t c = j; c < k; ++c) {
      double proj = 0.0;
      for (std::size_t i = j; i < n; ++i) proj += x[i - j] * r(i, c);
      for (std::size_t i = j; i < n; ++i) r(i, c) -= 2.0 * proj * x[i - j];
    }
    reflectors.push_back(std::move(x));
  }
  DenseMatrix out(n, n - k);
  std::vector<double> col(n);
  for (std::size_t c = 0; c < n - k; ++c) {
    std::fill(col.begin(), col.end(), 0.0);
    col[k + c] = 1.0;
    for (std::size_t jj = k; jj-- > 0;) {
      const auto& v = reflectors[jj];
      double proj = 0.0;
      for (std::size_t i = jj; i < n; ++i) proj += v[i - jj] * col[i];
      for (std::size_t i = jj; i < n; ++i) col[i] -= 2.0 * proj * v[i - jj];
    }
    out.set_column(c, col);
  }
  return out;
}

DenseMatrix orthonormalize_columns(const DenseMatrix& a) {
  const std::size_t n = a.rows();
  DenseMatrix q = a;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    std::vector<double> c = q.column(j);
    const double original = norm2(c);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        double proj = 0.0;
        for (std::size_t i = 0; i < n; ++i) proj += q(i, k) * c[i];
        for (std::size_t i = 0; i < n; ++i) c[i] -= proj * q(i, k);
      }
    }
    const double nc = norm2(c);
    if (!(nc > 1e-13 * original) || nc == 0.0)
      fail(ErrorKind::numerical_failure, "orthonormalize_columns: columns are rank deficient");
    for (double& x : c) x /= nc;
    q.set_column(j, c);
  }
  return q;
}

DenseMatrix solve(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows() == a.cols(), "solve needs a square matrix");
  require(a.rows() == b.rows(), "solve right-hand side shape mismatch");
  const std::size_t n = a.rows();
  DenseMatrix lu = a;
  DenseMatrix x = b;
  const double scale = std::max(a.max_abs(), std::numeric_limits<double>::min());
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
    if (std::abs(lu(piv, k)) <= static_cast<double>(n) * kEps * scale)
      fail(ErrorKind::numerical_failure, "solve: matrix is singular to working precision");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
      for (std::size_t j = 0; j < x.cols(); ++j) std::swap(x(k, j), x(piv, j));
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = lu(i, k) / lu(k, k);
      lu(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
      for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= f * x(k, j);
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      double s = x(k, j);
      for (std::size_t i = k + 1; i < n; ++i) s -= lu(k, i) * x(i, j);
      x(k, j) = s / lu(k, k);
    }
  }
  return x;
}

std::vector<double> solve(const DenseMatrix& a, std::span<const double> b) {
  DenseMatrix rhs(b.size(), 1, std::vector<double>(b.begin(), b.end()));
  return solve(a, rhs).column(0);
}

}  // namespace lojalab
