#include "ehrlab/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ehrlab/errors.hpp"

namespace ehrlab {

SymMatrix::SymMatrix(std::size_t dim) : n_(dim), a_(dim * dim, 0.0) {
  if (dim == 0 || dim > kMaxDim) throw ShapeError("SymMatrix: dimension must be in [1, 64]");
}

SymMatrix SymMatrix::identity(std::size_t dim) {
  SymMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m.a_[i * dim + i] = 1.0;
  return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> d) {
  SymMatrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m.a_[i * d.size() + i] = d[i];
  return m;
}

SymMatrix SymMatrix::outer(std::span<const double> u) {
  SymMatrix m(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < u.size(); ++j) m.a_[i * u.size() + j] = u[i] * u[j];
  return m;
}

SymMatrix SymMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  SymMatrix m(n);
  double scale = 0.0;
  for (const auto& r : rows) {
    if (r.size() != n) throw ShapeError("SymMatrix::from_rows: rows must form a square array");
    for (double v : r) scale = std::max(scale, std::fabs(v));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (std::fabs(rows[i][j] - rows[j][i]) > 1e-12 * std::max(1.0, scale))
        throw ShapeError("SymMatrix::from_rows: input is not symmetric");
      m.a_[i * n + j] = 0.5 * (rows[i][j] + rows[j][i]);
    }
  }
  return m;
}

SymMatrix SymMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<std::vector<double>> v;
  for (const auto& r : rows) v.emplace_back(r);
  return from_rows(v);
}

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
  if (o.n_ != n_) throw ShapeError("SymMatrix: dimension mismatch in +");
  SymMatrix r = *this;
  for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] += o.a_[k];
  return r;
}

SymMatrix SymMatrix::operator-(const SymMatrix& o) const {
  if (o.n_ != n_) throw ShapeError("SymMatrix: dimension mismatch in -");
  SymMatrix r = *this;
  for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] -= o.a_[k];
  return r;
}

SymMatrix SymMatrix::operator*(double s) const {
  SymMatrix r = *this;
  for (double& v : r.a_) v *= s;
  return r;
}

double SymMatrix::quad_form(std::span<const double> v) const {
  if (v.size() != n_) throw ShapeError("SymMatrix::quad_form: vector length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n_; ++j) row += a_[i * n_ + j] * v[j];
    s += v[i] * row;
  }
  return s;
}

std::vector<double> SymMatrix::apply(std::span<const double> v) const {
  if (v.size() != n_) throw ShapeError("SymMatrix::apply: vector length mismatch");
  std::vector<double> out(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) out[i] += a_[i * n_ + j] * v[j];
  return out;
}

double SymMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : a_) m = std::max(m, std::fabs(v));
  return m;
}

double SymMatrix::frobenius() const noexcept {
  double s = 0.0;
  for (double v : a_) s += v * v;
  return std::sqrt(s);
}

SymMatrix hadamard(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw ShapeError("hadamard: dimension mismatch");
  SymMatrix r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = i; j < a.dim(); ++j) r.set(i, j, a(i, j) * b(i, j));
  return r;
}

SymMatrix block_expand(const SymMatrix& m, std::span<const int> dims) {
  if (dims.empty() || dims.size() != m.dim())
    throw ShapeError("block_expand: need one block size per matrix row");
  std::size_t total = 0;
  for (int d : dims) {
    if (d < 1) throw ShapeError("block_expand: block sizes must be positive");
    total += static_cast<std::size_t>(d);
  }
  if (total > kMaxDim) throw ShapeError("block_expand: expanded dimension exceeds 64");
  std::vector<std::size_t> owner;
  for (std::size_t i = 0; i < dims.size(); ++i)
    for (int k = 0; k < dims[i]; ++k) owner.push_back(i);
  SymMatrix r(total);
  for (std::size_t i = 0; i < total; ++i)
    for (std::size_t j = i; j < total; ++j) r.set(i, j, m(owner[i], owner[j]));
  return r;
}

EigenSystem eigen_decompose(const SymMatrix& m) {
  const std::size_t n = m.dim();
  std::vector<double> a(n * n), v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = m(i, j);
    v[i * n + i] = 1.0;
  }
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };
  double total = 0.0;
  for (double x : a) total += x * x;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += at(p, q) * at(p, q);
    if (off <= 1e-36 * total || off == 0.0) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double tau = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
        at(p, q) = 0.0;
        at(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    return at(x, x) < at(y, y) || (at(x, x) == at(y, y) && x < y);
  });
  EigenSystem es;
  for (std::size_t k : idx) {
    es.values.push_back(at(k, k));
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = v[i * n + k];
    es.vectors.push_back(std::move(col));
  }
  return es;
}

PsdVerdict min_eig(const SymMatrix& m) {
  PsdVerdict out;
  if (m.dim() == 3) {
    const MinEig3 r = min_eig3(to_sym3(m));
    out.min_eigenvalue = r.value;
    out.witness_vector.assign(r.vector.begin(), r.vector.end());
    out.norm = r.norm;
  } else {
    const EigenSystem es = eigen_decompose(m);
    out.witness_vector = es.vectors.front();
    out.min_eigenvalue = m.quad_form(out.witness_vector);
    out.norm = std::max(std::fabs(es.values.front()), std::fabs(es.values.back()));
  }
  out.is_psd = out.min_eigenvalue >= -kPsdTol * std::max(1.0, out.norm);
  return out;
}

double op_norm(const SymMatrix& m) {
  const EigenSystem es = eigen_decompose(m);
  return std::max(std::fabs(es.values.front()), std::fabs(es.values.back()));
}

double perturbation_bound(double delta, double norm_b) {
  if (!(delta > 0.0)) throw DomainError("perturbation_bound: delta must be positive");
  if (norm_b == 0.0) return std::numeric_limits<double>::infinity();
  return delta * delta / (norm_b * norm_b + delta * norm_b);
}

double psd_perturbation_bound(const SymMatrix& a, const SymMatrix& b, double delta) {
  if (a.dim() != b.dim()) throw ShapeError("psd_perturbation_bound: dimension mismatch");
  if (!(delta > 0.0)) throw DomainError("psd_perturbation_bound: delta must be positive");
  const std::size_t n = a.dim();
  const EigenSystem es = eigen_decompose(a);
  const double norm_a = std::max(std::fabs(es.values.front()), std::fabs(es.values.back()));
  const double kernel_tol = kPsdTol * std::max(1.0, norm_a);
  const double slack = delta * (1.0 - 1e-9);
  std::vector<std::size_t> kernel;
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = es.values[k];
    if (lam < -kernel_tol)
      throw PreconditionError("psd_perturbation_bound: A is not PSD", es.vectors[k]);
    if (lam <= kernel_tol) {
      kernel.push_back(k);
    } else if (lam < slack) {
      throw PreconditionError(
          "psd_perturbation_bound: A is below delta on the orthogonal complement of its kernel",
          es.vectors[k]);
    }
  }
  if (!kernel.empty()) {
    // B restricted to ker A, in the orthonormal eigenbasis
    SymMatrix restricted(kernel.size());
    std::vector<std::vector<double>> bk;
    for (std::size_t k : kernel) bk.push_back(b.apply(es.vectors[k]));
    for (std::size_t i = 0; i < kernel.size(); ++i) {
      for (std::size_t j = i; j < kernel.size(); ++j) {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) s += es.vectors[kernel[i]][r] * bk[j][r];
        restricted.set(i, j, s);
      }
    }
    const EigenSystem rs = eigen_decompose(restricted);
    if (rs.values.front() < slack) {
      std::vector<double> u(n, 0.0);
      for (std::size_t i = 0; i < kernel.size(); ++i)
        for (std::size_t r = 0; r < n; ++r) u[r] += rs.vectors.front()[i] * es.vectors[kernel[i]][r];
      throw PreconditionError("psd_perturbation_bound: B is below delta on ker A", u);
    }
  }
  return perturbation_bound(delta, op_norm(b));
}

std::pair<std::vector<double>, std::vector<double>> rank2_factor(const SymMatrix& a) {
  if (a.dim() != 3) throw ShapeError("rank2_factor: matrix must be 3x3");
  const EigenSystem es = eigen_decompose(a);
  const double norm = std::max(std::fabs(es.values.front()), std::fabs(es.values.back()));
  if (std::fabs(es.values[0]) > kPsdTol * std::max(1.0, norm) || es.values[1] < -kPsdTol * norm)
    throw PreconditionError("rank2_factor: matrix is not PSD of rank <= 2", es.vectors[0]);
  std::vector<double> f1(3), f2(3);
  const double s2 = std::sqrt(std::max(0.0, es.values[2]));
  const double s1 = std::sqrt(std::max(0.0, es.values[1]));
  for (int i = 0; i < 3; ++i) {
    f1[i] = s2 * es.vectors[2][i];
    f2[i] = s1 * es.vectors[1][i];
  }
  return {f1, f2};
}

Sym3 to_sym3(const SymMatrix& m) {
  if (m.dim() != 3) throw ShapeError("to_sym3: matrix must be 3x3");
  return {m(0, 0), m(0, 1), m(0, 2), m(1, 1), m(1, 2), m(2, 2)};
}

SymMatrix from_sym3(const Sym3& m) {
  SymMatrix r(3);
  r.set(0, 0, m.a00);
  r.set(0, 1, m.a01);
  r.set(0, 2, m.a02);
  r.set(1, 1, m.a11);
  r.set(1, 2, m.a12);
  r.set(2, 2, m.a22);
  return r;
}

namespace {

using Vec3 = std::array<double, 3>;

Vec3 cross(const Vec3& x, const Vec3& y) {
  return {x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]};
}

double dot(const Vec3& x, const Vec3& y) { return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; }

double quad3(const Sym3& m, const Vec3& v) {
  return m.a00 * v[0] * v[0] + m.a11 * v[1] * v[1] + m.a22 * v[2] * v[2] +
         2.0 * (m.a01 * v[0] * v[1] + m.a02 * v[0] * v[2] + m.a12 * v[1] * v[2]);
}

MinEig3 jacobi_fallback(const Sym3& m) {
  const EigenSystem es = eigen_decompose(from_sym3(m));
  MinEig3 r;
  r.vector = {es.vectors[0][0], es.vectors[0][1], es.vectors[0][2]};
  r.value = quad3(m, r.vector);
  r.norm = std::max(std::fabs(es.values[0]), std::fabs(es.values[2]));
  return r;
}

}  // namespace

MinEig3 min_eig3(const Sym3& m0) noexcept {
  const double scale = std::max({std::fabs(m0.a00), std::fabs(m0.a01), std::fabs(m0.a02),
                                 std::fabs(m0.a11), std::fabs(m0.a12), std::fabs(m0.a22)});
  MinEig3 out;
  if (scale == 0.0) return out;
  if (!std::isfinite(scale)) {
    out.value = std::numeric_limits<double>::quiet_NaN();
    out.norm = std::numeric_limits<double>::infinity();
    return out;
  }
  const double inv = 1.0 / scale;
  const Sym3 m{m0.a00 * inv, m0.a01 * inv, m0.a02 * inv, m0.a11 * inv, m0.a12 * inv, m0.a22 * inv};
  const double q = (m.a00 + m.a11 + m.a22) / 3.0;
  const double p1 = m.a01 * m.a01 + m.a02 * m.a02 + m.a12 * m.a12;
  const double b00 = m.a00 - q, b11 = m.a11 - q, b22 = m.a22 - q;
  const double p2 = b00 * b00 + b11 * b11 + b22 * b22 + 2.0 * p1;
  if (p2 <= 0.0) {
    out.value = q * scale;
    out.norm = std::fabs(q) * scale;
    return out;
  }
  const double p = std::sqrt(p2 / 6.0);
  const double det = b00 * (b11 * b22 - m.a12 * m.a12) - m.a01 * (m.a01 * b22 - m.a12 * m.a02) +
                     m.a02 * (m.a01 * m.a12 - b11 * m.a02);
  const double r = std::clamp(det / (2.0 * p * p * p), -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double lmax = q + 2.0 * p * std::cos(phi);
  const double lmin = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  const double norm = std::max(std::fabs(lmax), std::fabs(lmin));

  const Vec3 r0{m.a00 - lmin, m.a01, m.a02};
  const Vec3 r1{m.a01, m.a11 - lmin, m.a12};
  const Vec3 r2{m.a02, m.a12, m.a22 - lmin};
  const Vec3 c01 = cross(r0, r1), c02 = cross(r0, r2), c12 = cross(r1, r2);
  const double d01 = dot(c01, c01), d02 = dot(c02, c02), d12 = dot(c12, c12);
  const double row_max = std::max({dot(r0, r0), dot(r1, r1), dot(r2, r2)});
  Vec3 v{1.0, 0.0, 0.0};
  const double dmax = std::max({d01, d02, d12});
  if (dmax > 1e-24 * row_max * row_max && dmax > 0.0) {
    v = dmax == d01 ? c01 : (dmax == d02 ? c02 : c12);
  } else if (row_max > 0.0) {
    // (A - lmin I) has rank <= 1: any vector orthogonal to its row space
    const Vec3& big = row_max == dot(r0, r0) ? r0 : (row_max == dot(r1, r1) ? r1 : r2);
    int k = 0;
    for (int i = 1; i < 3; ++i)
      if (std::fabs(big[i]) < std::fabs(big[k])) k = i;
    Vec3 e{0.0, 0.0, 0.0};
    e[k] = 1.0;
    v = cross(big, e);
  }
  const double len = std::sqrt(dot(v, v));
  v = {v[0] / len, v[1] / len, v[2] / len};
  const double rq = quad3(m, v);
  if (!(std::fabs(rq - lmin) <= 1e-8 * std::max(norm, 1e-300))) {
    MinEig3 fb = jacobi_fallback(m);
    fb.value *= scale;
    fb.norm *= scale;
    return fb;
  }
  out.value = rq * scale;
  out.vector = v;
  out.norm = norm * scale;
  return out;
}

}  // namespace ehrlab
