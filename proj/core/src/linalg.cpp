#include "poscon/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace poscon {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string shape(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
  }
}

void require_same_length(std::span<const double> a, std::span<const double> b, const char* op) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(op) + ": vector length mismatch");
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (rows == 0 || cols == 0) {
    throw DimensionError("Matrix: rows and cols must be >= 1");
  }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (rows == 0 || cols == 0) {
    throw DimensionError("Matrix: rows and cols must be >= 1");
  }
  if (data_.size() != rows * cols) {
    throw DimensionError("Matrix: entry count does not match shape");
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  if (rows_ == 0 || cols_ == 0) {
    throw DimensionError("Matrix: rows and cols must be >= 1");
  }
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw DimensionError("Matrix: ragged initializer");
    }
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::column(std::span<const double> v) {
  return {v.size(), 1, std::vector<double>(v.begin(), v.end())};
}

Matrix Matrix::row(std::span<const double> v) {
  return {1, v.size(), std::vector<double>(v.begin(), v.end())};
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw DimensionError("Matrix: rows and cols must be >= 1");
  }
  const std::size_t cols = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw DimensionError("Matrix: ragged row list");
    data.insert(data.end(), r.begin(), r.end());
  }
  return {rows.size(), cols, std::move(data)};
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    out[r].assign(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                  data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
  }
  return out;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

double Matrix::min_entry() const { return *std::min_element(data_.begin(), data_.end()); }

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Vector Matrix::vec() const {
  Vector v;
  v.reserve(data_.size());
  for (std::size_t c = 0; c < cols_; ++c)
    for (std::size_t r = 0; r < rows_; ++r) v.push_back((*this)(r, c));
  return v;
}

Matrix Matrix::unvec(std::span<const double> v, std::size_t rows, std::size_t cols) {
  if (v.size() != rows * cols) throw DimensionError("unvec: length does not match shape");
  Matrix m(rows, cols);
  for (std::size_t c = 0; c < cols; ++c)
    for (std::size_t r = 0; r < rows; ++r) m(r, c) = v[c * rows + r];
  return m;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  require_same_shape(*this, o, "operator+");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  require_same_shape(*this, o, "operator-");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator-(Matrix a) { return a *= -1.0; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("operator*: cannot multiply " + shape(a) + " by " + shape(b));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw DimensionError("operator*: cannot multiply " + shape(a) + " by vector of length " +
                         std::to_string(x.size()));
  }
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

std::ostream& operator<<(std::ostream& os, const Matrix& m) {
  os << '[';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    os << (r ? ", [" : "[");
    for (std::size_t c = 0; c < m.cols(); ++c) os << (c ? ", " : "") << m(r, c);
    os << ']';
  }
  return os << ']';
}

Vector add(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "add");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector sub(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b, "sub");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector scale(std::span<const double> a, double s) {
  Vector out(a.begin(), a.end());
  for (double& v : out) v *= s;
  return out;
}

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double norm2(std::span<const double> a) {
  double scale_ = 0.0;
  double ssq = 1.0;
  for (double v : a) {
    if (v == 0.0) continue;
    const double av = std::abs(v);
    if (scale_ < av) {
      ssq = 1.0 + ssq * (scale_ / av) * (scale_ / av);
      scale_ = av;
    } else {
      ssq += (av / scale_) * (av / scale_);
    }
  }
  return scale_ * std::sqrt(ssq);
}

double min_entry(std::span<const double> a) {
  if (a.empty()) return std::numeric_limits<double>::infinity();
  return *std::min_element(a.begin(), a.end());
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return out;
}

Matrix vstack(std::span<const Matrix> blocks) {
  if (blocks.empty()) throw DimensionError("vstack: no blocks");
  const std::size_t cols = blocks.front().cols();
  std::size_t rows = 0;
  for (const auto& b : blocks) {
    if (b.cols() != cols) throw DimensionError("vstack: column counts differ");
    rows += b.rows();
  }
  Matrix out(rows, cols);
  std::size_t r0 = 0;
  for (const auto& b : blocks) {
    for (std::size_t r = 0; r < b.rows(); ++r)
      for (std::size_t c = 0; c < cols; ++c) out(r0 + r, c) = b(r, c);
    r0 += b.rows();
  }
  return out;
}

Matrix hstack(std::span<const Matrix> blocks) {
  if (blocks.empty()) throw DimensionError("hstack: no blocks");
  const std::size_t rows = blocks.front().rows();
  std::size_t cols = 0;
  for (const auto& b : blocks) {
    if (b.rows() != rows) throw DimensionError("hstack: row counts differ");
    cols += b.cols();
  }
  Matrix out(rows, cols);
  std::size_t c0 = 0;
  for (const auto& b : blocks) {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < b.cols(); ++c) out(r, c0 + c) = b(r, c);
    c0 += b.cols();
  }
  return out;
}

bool is_nonnegative(const Matrix& m, double tol) {
  return std::all_of(m.data().begin(), m.data().end(), [tol](double v) { return v >= -tol; });
}

// ---------------------------------------------------------------------------
// Eigenvalues
// ---------------------------------------------------------------------------

namespace {

// Parlett-Reinsch balancing with radix-2 scaling. Similarity transform only,
// so the spectrum is preserved exactly up to rounding.
void balance(Matrix& a) {
  const std::size_t n = a.rows();
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  bool done = false;
  while (!done) {
    done = true;
    for (std::size_t i = 0; i < n; ++i) {
      double r = 0.0;
      double c = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        g = 1.0 / f;
        for (std::size_t j = 0; j < n; ++j) a(i, j) *= g;
        for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
      }
    }
  }
}

// Householder reduction to upper Hessenberg form, in place.
void to_hessenberg(Matrix& h) {
  const std::size_t n = h.rows();
  if (n < 3) return;
  Vector ort(n, 0.0);
  for (std::size_t m = 1; m + 1 < n; ++m) {
    double scale = 0.0;
    for (std::size_t i = m; i < n; ++i) scale += std::abs(h(i, m - 1));
    if (scale == 0.0) continue;

    double hh = 0.0;
    for (std::size_t i = n; i-- > m;) {
      ort[i] = h(i, m - 1) / scale;
      hh += ort[i] * ort[i];
    }
    double g = std::sqrt(hh);
    if (ort[m] > 0) g = -g;
    hh -= ort[m] * g;
    ort[m] -= g;

    for (std::size_t j = m; j < n; ++j) {
      double f = 0.0;
      for (std::size_t i = n; i-- > m;) f += ort[i] * h(i, j);
      f /= hh;
      for (std::size_t i = m; i < n; ++i) h(i, j) -= f * ort[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double f = 0.0;
      for (std::size_t j = n; j-- > m;) f += ort[j] * h(i, j);
      f /= hh;
      for (std::size_t j = m; j < n; ++j) h(i, j) -= f * ort[j];
    }
    ort[m] *= scale;
    h(m, m - 1) = scale * g;
    for (std::size_t i = m + 1; i < n; ++i) h(i, m - 1) = 0.0;
  }
}

// Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).
std::vector<std::complex<double>> hessenberg_qr(Matrix h) {
  const int nn = static_cast<int>(h.rows());
  Vector wr(static_cast<std::size_t>(nn), 0.0);
  Vector wi(static_cast<std::size_t>(nn), 0.0);
  auto H = [&h](int r, int c) -> double& {
    return h(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  };
  auto d = [&wr](int i) -> double& { return wr[static_cast<std::size_t>(i)]; };
  auto e = [&wi](int i) -> double& { return wi[static_cast<std::size_t>(i)]; };

  int n = nn - 1;
  const int low = 0;
  double exshift = 0.0;
  double p = 0, q = 0, r = 0, s = 0, z = 0, t = 0, w = 0, x = 0, y = 0;

  double norm = 0.0;
  for (int i = 0; i < nn; ++i)
    for (int j = std::max(i - 1, 0); j < nn; ++j) norm += std::abs(H(i, j));

  int iter = 0;
  int total_iter = 0;
  const int max_total = 30 * nn;
  while (n >= low) {
    int l = n;
    while (l > low) {
      s = std::abs(H(l - 1, l - 1)) + std::abs(H(l, l));
      if (s == 0.0) s = norm;
      if (std::abs(H(l, l - 1)) <= kEps * s) break;
      --l;
    }

    if (l == n) {
      // One root found.
      H(n, n) += exshift;
      d(n) = H(n, n);
      e(n) = 0.0;
      --n;
      iter = 0;
    } else if (l == n - 1) {
      // Two roots found.
      w = H(n, n - 1) * H(n - 1, n);
      p = (H(n - 1, n - 1) - H(n, n)) / 2.0;
      q = p * p + w;
      z = std::sqrt(std::abs(q));
      H(n, n) += exshift;
      H(n - 1, n - 1) += exshift;
      x = H(n, n);
      if (q >= 0) {
        z = (p >= 0) ? p + z : p - z;
        d(n - 1) = x + z;
        d(n) = d(n - 1);
        if (z != 0.0) d(n) = x - w / z;
        e(n - 1) = 0.0;
        e(n) = 0.0;
      } else {
        d(n - 1) = x + p;
        d(n) = x + p;
        e(n - 1) = z;
        e(n) = -z;
      }
      n -= 2;
      iter = 0;
    } else {
      x = H(n, n);
      y = 0.0;
      w = 0.0;
      if (l < n) {
        y = H(n - 1, n - 1);
        w = H(n, n - 1) * H(n - 1, n);
      }

      // Ad hoc exceptional shifts.
      if (iter == 10) {
        exshift += x;
        for (int i = low; i <= n; ++i) H(i, i) -= x;
        s = std::abs(H(n, n - 1)) + std::abs(H(n - 1, n - 2));
        x = y = 0.75 * s;
        w = -0.4375 * s * s;
      }
      if (iter == 30) {
        s = (y - x) / 2.0;
        s = s * s + w;
        if (s > 0) {
          s = std::sqrt(s);
          if (y < x) s = -s;
          s = x - w / ((y - x) / 2.0 + s);
          for (int i = low; i <= n; ++i) H(i, i) -= s;
          exshift += s;
          x = y = w = 0.964;
        }
      }

      ++iter;
      if (++total_iter > max_total) {
        throw ConvergenceError("eigenvalues: QR iteration did not converge");
      }

      // Look for two consecutive small sub-diagonal elements.
      int m = n - 2;
      while (m >= l) {
        z = H(m, m);
        r = x - z;
        s = y - z;
        p = (r * s - w) / H(m + 1, m) + H(m, m + 1);
        q = H(m + 1, m + 1) - z - r - s;
        r = H(m + 2, m + 1);
        s = std::abs(p) + std::abs(q) + std::abs(r);
        p /= s;
        q /= s;
        r /= s;
        if (m == l) break;
        if (std::abs(H(m, m - 1)) * (std::abs(q) + std::abs(r)) <
            kEps * (std::abs(p) * (std::abs(H(m - 1, m - 1)) + std::abs(z) + std::abs(H(m + 1, m + 1))))) {
          break;
        }
        --m;
      }

      for (int i = m + 2; i <= n; ++i) {
        H(i, i - 2) = 0.0;
        if (i > m + 2) H(i, i - 3) = 0.0;
      }

      // Double QR step involving rows l:n and columns m:n.
      for (int k = m; k <= n - 1; ++k) {
        const bool notlast = (k != n - 1);
        if (k != m) {
          p = H(k, k - 1);
          q = H(k + 1, k - 1);
          r = notlast ? H(k + 2, k - 1) : 0.0;
          x = std::abs(p) + std::abs(q) + std::abs(r);
          if (x == 0.0) continue;
          p /= x;
          q /= x;
          r /= x;
        }
        s = std::sqrt(p * p + q * q + r * r);
        if (p < 0) s = -s;
        if (s != 0.0) {
          if (k != m) {
            H(k, k - 1) = -s * x;
          } else if (l != m) {
            H(k, k - 1) = -H(k, k - 1);
          }
          p += s;
          x = p / s;
          y = q / s;
          z = r / s;
          q /= p;
          r /= p;

          for (int j = k; j < nn; ++j) {
            t = H(k, j) + q * H(k + 1, j);
            if (notlast) {
              t += r * H(k + 2, j);
              H(k + 2, j) -= t * z;
            }
            H(k, j) -= t * x;
            H(k + 1, j) -= t * y;
          }
          for (int i = 0; i <= std::min(n, k + 3); ++i) {
            t = x * H(i, k) + y * H(i, k + 1);
            if (notlast) {
              t += z * H(i, k + 2);
              H(i, k + 2) -= t * r;
            }
            H(i, k) -= t;
            H(i, k + 1) -= t * q;
          }
        }
      }
    }
  }

  std::vector<std::complex<double>> out;
  out.reserve(static_cast<std::size_t>(nn));
  for (int i = 0; i < nn; ++i) out.emplace_back(d(i), e(i));
  return out;
}

}  // namespace

std::vector<std::complex<double>> eigenvalues(const Matrix& m) {
  if (!m.is_square()) {
    throw DimensionError("eigenvalues: matrix must be square, got " + shape(m));
  }
  for (double v : m.data()) {
    if (!std::isfinite(v)) throw std::domain_error("eigenvalues: non-finite entry");
  }
  Matrix h = m;
  balance(h);
  to_hessenberg(h);
  return hessenberg_qr(std::move(h));
}

double spectral_radius(const Matrix& m) {
  double rho = 0.0;
  for (const auto& lambda : eigenvalues(m)) rho = std::max(rho, std::abs(lambda));
  return rho;
}

Vector symmetric_eigenvalues(const Matrix& m) {
  Vector out;
  for (const auto& lambda : eigenvalues(m)) out.push_back(lambda.real());
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Least squares
// ---------------------------------------------------------------------------

namespace {

// Householder QR with optional column pivoting. The factor is stored in
// compact form: R on and above the diagonal, reflector tails below it.
struct HouseholderQR {
  Matrix qr;
  Vector beta;
  std::vector<std::size_t> perm;
  std::size_t rank = 0;

  HouseholderQR(Matrix a, bool pivot) : qr(std::move(a)) {
    const std::size_t m = qr.rows();
    const std::size_t n = qr.cols();
    const std::size_t steps = std::min(m, n);
    beta.assign(steps, 0.0);
    perm.resize(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});

    Vector colnorm(n, 0.0);
    auto recompute_norm = [&](std::size_t j, std::size_t from) {
      double s = 0.0;
      for (std::size_t i = from; i < m; ++i) s += qr(i, j) * qr(i, j);
      colnorm[j] = s;
    };
    for (std::size_t j = 0; j < n; ++j) recompute_norm(j, 0);

    for (std::size_t k = 0; k < steps; ++k) {
      if (pivot) {
        // Recompute trailing norms exactly; the matrices here are small.
        for (std::size_t j = k; j < n; ++j) recompute_norm(j, k);
        std::size_t best = k;
        for (std::size_t j = k + 1; j < n; ++j)
          if (colnorm[j] > colnorm[best]) best = j;
        if (best != k) {
          for (std::size_t i = 0; i < m; ++i) std::swap(qr(i, k), qr(i, best));
          std::swap(perm[k], perm[best]);
          std::swap(colnorm[k], colnorm[best]);
        }
      }

      Vector xk(m - k);
      for (std::size_t i = k; i < m; ++i) xk[i - k] = qr(i, k);
      const double alpha = norm2(xk);
      if (alpha == 0.0) {
        beta[k] = 0.0;
        continue;
      }
      const double v0 = xk[0] >= 0 ? xk[0] + alpha : xk[0] - alpha;
      const double rkk = xk[0] >= 0 ? -alpha : alpha;
      // v = [1, x_tail / v0]; H = I - beta v v^T.
      for (std::size_t i = k + 1; i < m; ++i) qr(i, k) /= v0;
      double vtv = 1.0;
      for (std::size_t i = k + 1; i < m; ++i) vtv += qr(i, k) * qr(i, k);
      beta[k] = 2.0 / vtv;
      qr(k, k) = rkk;

      for (std::size_t j = k + 1; j < n; ++j) {
        double dot = qr(k, j);
        for (std::size_t i = k + 1; i < m; ++i) dot += qr(i, k) * qr(i, j);
        dot *= beta[k];
        qr(k, j) -= dot;
        for (std::size_t i = k + 1; i < m; ++i) qr(i, j) -= dot * qr(i, k);
      }
    }

    const double r00 = steps ? std::abs(qr(0, 0)) : 0.0;
    const double tol = static_cast<double>(std::max(m, n)) * kEps * 16.0 * r00;
    rank = 0;
    for (std::size_t k = 0; k < steps; ++k) {
      if (std::abs(qr(k, k)) > tol && r00 > 0.0) {
        ++rank;
      } else {
        break;
      }
    }
  }

  // In-place b <- Q^T b.
  void apply_qt(Vector& b) const {
    const std::size_t m = qr.rows();
    for (std::size_t k = 0; k < beta.size(); ++k) {
      if (beta[k] == 0.0) continue;
      double dot = b[k];
      for (std::size_t i = k + 1; i < m; ++i) dot += qr(i, k) * b[i];
      dot *= beta[k];
      b[k] -= dot;
      for (std::size_t i = k + 1; i < m; ++i) b[i] -= dot * qr(i, k);
    }
  }

  // In-place b <- Q b (b has qr.rows() entries).
  void apply_q(Vector& b) const {
    const std::size_t m = qr.rows();
    for (std::size_t k = beta.size(); k-- > 0;) {
      if (beta[k] == 0.0) continue;
      double dot = b[k];
      for (std::size_t i = k + 1; i < m; ++i) dot += qr(i, k) * b[i];
      dot *= beta[k];
      b[k] -= dot;
      for (std::size_t i = k + 1; i < m; ++i) b[i] -= dot * qr(i, k);
    }
  }
};

double residual_norm(const Matrix& a, std::span<const double> x, std::span<const double> b) {
  return norm2(sub(a * x, b));
}

}  // namespace

LeastSquaresResult solve_linear_least_squares(const Matrix& a, std::span<const double> b) {
  if (b.size() != a.rows()) {
    throw DimensionError("solve_linear_least_squares: rhs length " + std::to_string(b.size()) +
                         " does not match " + shape(a));
  }
  const std::size_t n = a.cols();
  HouseholderQR f(a, /*pivot=*/true);
  const std::size_t r = f.rank;

  LeastSquaresResult out;
  out.rank = r;
  out.x.assign(n, 0.0);
  if (r == 0) {
    out.residual = norm2(b);
    return out;
  }

  Vector qtb(b.begin(), b.end());
  f.apply_qt(qtb);

  // A P = Q [R11 R12; 0 0]. Factor [R11 R12]^T = Z T so that
  // A P = Q1 T^T Z^T and the minimum-norm solution is P Z T^{-T} (Q1^T b).
  Matrix rt(n, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = i; j < n; ++j) rt(j, i) = f.qr(i, j);
  HouseholderQR g(rt, /*pivot=*/false);

  // Forward substitution with T^T (lower triangular).
  Vector y(n, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    double s = qtb[i];
    for (std::size_t j = 0; j < i; ++j) s -= g.qr(j, i) * y[j];
    y[i] = s / g.qr(i, i);
  }
  g.apply_q(y);

  for (std::size_t j = 0; j < n; ++j) out.x[f.perm[j]] = y[j];
  out.residual = residual_norm(a, out.x, b);
  return out;
}

LeastSquaresResult solve_nonnegative_least_squares(const Matrix& a, std::span<const double> b) {
  if (b.size() != a.rows()) {
    throw DimensionError("solve_nonnegative_least_squares: rhs length mismatch");
  }
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  const double tol = 10.0 * kEps * static_cast<double>(std::max(m, n)) *
                     std::max(1.0, a.max_abs()) * std::max(1.0, norm_inf(b));

  Vector x(n, 0.0);
  std::vector<bool> passive(n, false);
  const Matrix at = a.transpose();

  auto gradient = [&](const Vector& xv) { return at * sub(b, a * xv); };

  auto solve_passive = [&](Vector& z) {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < n; ++j)
      if (passive[j]) idx.push_back(j);
    z.assign(n, 0.0);
    if (idx.empty()) return;
    Matrix sub_a(m, idx.size());
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < idx.size(); ++k) sub_a(i, k) = a(i, idx[k]);
    const auto ls = solve_linear_least_squares(sub_a, b);
    for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = ls.x[k];
  };

  const std::size_t max_outer = 3 * n + 10;
  Vector w = gradient(x);
  for (std::size_t outer = 0; outer < max_outer; ++outer) {
    std::size_t t = n;
    double best = tol;
    for (std::size_t j = 0; j < n; ++j) {
      if (!passive[j] && w[j] > best) {
        best = w[j];
        t = j;
      }
    }
    if (t == n) break;
    passive[t] = true;

    Vector z;
    for (std::size_t inner = 0; inner <= n; ++inner) {
      solve_passive(z);
      bool feasible = true;
      for (std::size_t j = 0; j < n; ++j)
        if (passive[j] && z[j] <= 0.0) feasible = false;
      if (feasible) break;

      double alpha = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        if (passive[j] && z[j] <= 0.0) alpha = std::min(alpha, x[j] / (x[j] - z[j]));
      }
      for (std::size_t j = 0; j < n; ++j) x[j] += alpha * (z[j] - x[j]);
      for (std::size_t j = 0; j < n; ++j) {
        if (passive[j] && x[j] <= tol) {
          passive[j] = false;
          x[j] = 0.0;
        }
      }
    }
    x = z;
    for (double& v : x) v = std::max(v, 0.0);
    w = gradient(x);
  }

  LeastSquaresResult out;
  out.x = std::move(x);
  out.residual = residual_norm(a, out.x, b);
  out.rank = static_cast<std::size_t>(std::count(passive.begin(), passive.end(), true));
  return out;
}

}  // namespace poscon
