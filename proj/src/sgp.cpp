#include "jumpconv/sgp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "jumpconv/errors.hpp"

namespace jumpconv {

Matrix expm_pade13(const Matrix& a) {
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  static constexpr double theta13 = 5.371920351148152;
  const auto n = a.rows();
  if (n == 0) return a;
  if (!a.allFinite()) throw NumericError("expm: non-finite matrix entry");
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  const Matrix x = a * std::ldexp(1.0, -s);
  const Matrix id = Matrix::Identity(n, n);
  const Matrix x2 = x * x;
  const Matrix x4 = x2 * x2;
  const Matrix x6 = x4 * x2;
  const Matrix u = x * (x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id);
  const Matrix v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;
  Matrix r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

Generator::Generator(Kind kind, Matrix a) : kind_(kind), a_(std::move(a)) {}

Generator Generator::identity(std::size_t d) {
  if (d < 1) throw DomainError("Generator: dimension must be >= 1");
  const auto n = static_cast<Eigen::Index>(d);
  Generator g(Kind::identity, Matrix::Zero(n, n));
  g.eigenvalues_ = Point::Zero(n);
  g.eigenvectors_ = Matrix::Identity(n, n);
  return g;
}

Generator Generator::diagonal(std::vector<double> rates) {
  if (rates.empty()) throw DomainError("Generator: dimension must be >= 1");
  for (double r : rates)
    if (!(r <= 0.0) || !std::isfinite(r)) throw DomainError("Generator: diagonal rates must be finite and <= 0");
  const auto n = static_cast<Eigen::Index>(rates.size());
  const Point ev = Eigen::Map<const Point>(rates.data(), n);
  Generator g(Kind::diagonal, ev.asDiagonal().toDenseMatrix());
  g.eigenvalues_ = ev;
  g.eigenvectors_ = Matrix::Identity(n, n);
  return g;
}

Generator Generator::dirichlet_laplacian(std::size_t d, double scale) {
  if (d < 1) throw DomainError("Generator: dimension must be >= 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("Generator: Laplacian scale must be > 0");
  const auto n = static_cast<Eigen::Index>(d);
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = -2.0 * scale;
    if (i + 1 < n) a(i, i + 1) = a(i + 1, i) = scale;
  }
  Generator g(Kind::dirichlet_laplacian, std::move(a));
  g.eigenvalues_.resize(n);
  g.eigenvectors_.resize(n, n);
  const double h = std::numbers::pi / static_cast<double>(n + 1);
  const double c = std::sqrt(2.0 / static_cast<double>(n + 1));
  for (Eigen::Index k = 0; k < n; ++k) {
    const double s = std::sin(0.5 * static_cast<double>(k + 1) * h);
    g.eigenvalues_[k] = -4.0 * scale * s * s;
    for (Eigen::Index j = 0; j < n; ++j)
      g.eigenvectors_(j, k) = c * std::sin(static_cast<double>((j + 1) * (k + 1)) * h);
  }
  return g;
}

Generator Generator::dense(Matrix a) {
  if (a.rows() < 1 || a.rows() != a.cols()) throw DomainError("Generator: dense matrix must be square, d >= 1");
  if (!a.allFinite()) throw DomainError("Generator: dense matrix has non-finite entries");
  return Generator(Kind::dense, std::move(a));
}

std::string Generator::kind_name() const {
  switch (kind_) {
    case Kind::identity: return "identity";
    case Kind::diagonal: return "diagonal";
    case Kind::dirichlet_laplacian: return "dirichlet_laplacian";
    case Kind::dense: return "dense";
  }
  return "unknown";
}

Matrix Generator::propagator(double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("propagator: t must be finite and >= 0");
  const auto n = a_.rows();
  if (t == 0.0 || kind_ == Kind::identity) return Matrix::Identity(n, n);
  switch (kind_) {
    case Kind::diagonal: return (eigenvalues_ * t).array().exp().matrix().asDiagonal().toDenseMatrix();
    case Kind::dirichlet_laplacian:
      return eigenvectors_ * (eigenvalues_ * t).array().exp().matrix().asDiagonal() * eigenvectors_.transpose();
    default: return expm_pade13(t * a_);
  }
}

Point Generator::apply(double t, const Point& x) const {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("apply: t must be finite and >= 0");
  if (x.size() != a_.rows()) throw DomainError("apply: dimension mismatch");
  if (t == 0.0 || kind_ == Kind::identity) return x;
  switch (kind_) {
    case Kind::diagonal: return ((eigenvalues_ * t).array().exp() * x.array()).matrix();
    case Kind::dirichlet_laplacian: {
      const Point c = eigenvectors_.transpose() * x;
      return eigenvectors_ * ((eigenvalues_ * t).array().exp() * c.array()).matrix();
    }
    default: return expm_pade13(t * a_) * x;
  }
}

Matrix Generator::resolvent_matrix(double lambda) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("resolvent: lambda must be > 0");
  const auto n = a_.rows();
  if (kind_ == Kind::dense) {
    Eigen::PartialPivLU<Matrix> lu(lambda * Matrix::Identity(n, n) - a_);
    Matrix r = lu.solve(Matrix::Identity(n, n));
    if (!r.allFinite()) throw NumericError("resolvent: singular system");
    return r;
  }
  const Point inv = (lambda - eigenvalues_.array()).inverse().matrix();
  if (kind_ == Kind::dirichlet_laplacian) return eigenvectors_ * inv.asDiagonal() * eigenvectors_.transpose();
  return inv.asDiagonal().toDenseMatrix();
}

Point resolvent(const Generator& gen, double lambda, const Point& x) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("resolvent: lambda must be > 0");
  if (static_cast<std::size_t>(x.size()) != gen.dim()) throw DomainError("resolvent: dimension mismatch");
  switch (gen.kind()) {
    case Generator::Kind::identity: return x / lambda;
    case Generator::Kind::diagonal: return (x.array() / (lambda - gen.eigenvalues().array())).matrix();
    case Generator::Kind::dirichlet_laplacian: {
      const Point c = gen.eigenvectors().transpose() * x;
      return gen.eigenvectors() * (c.array() / (lambda - gen.eigenvalues().array())).matrix();
    }
    case Generator::Kind::dense: {
      const auto n = static_cast<Eigen::Index>(gen.dim());
      Eigen::PartialPivLU<Matrix> lu(lambda * Matrix::Identity(n, n) - gen.matrix());
      Point y = lu.solve(x);
      // One step of iterative refinement keeps the residual at working precision.
      const Point res = x - (lambda * y - gen.matrix() * y);
      y += lu.solve(res);
      if (!y.allFinite()) throw NumericError("resolvent: singular system");
      return y;
    }
  }
  return x;
}

Point yosida_scale(const Generator& gen, double n, const Point& x) {
  if (!(n > 0.0)) throw DomainError("yosida_scale: n must be > 0");
  if (gen.kind() == Generator::Kind::identity) return x;
  return n * resolvent(gen, n, x);
}

Point yosida_operator(const Generator& gen, double lambda, const Point& x) {
  if (!(lambda > 0.0)) throw DomainError("yosida_operator: lambda must be > 0");
  return lambda * (yosida_scale(gen, lambda, x) - x);
}

std::vector<double> default_certification_times() {
  return {1e-3, 1e-2, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0};
}

namespace {

// Unit test directions: coordinate axes, sign patterns of the all-ones
// vector (small d), sparse pairs and Gaussian directions.
std::vector<Point> probe_directions(const SmoothSpace& sp, std::size_t n_random, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(sp.dim());
  std::vector<Point> dirs;
  for (Eigen::Index i = 0; i < d; ++i) dirs.push_back(Point::Unit(d, i));
  if (d <= 10) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
      Point x(d);
      for (Eigen::Index i = 0; i < d; ++i) x[i] = (mask >> i) & 1 ? -1.0 : 1.0;
      dirs.push_back(x / norm(sp, x));
    }
  }
  for (std::size_t k = 0; k < n_random; ++k) {
    if (k % 4 == 3 && d >= 2) {
      Point x = Point::Zero(d);
      const auto i = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(d));
      const auto j = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(d));
      x[i] += rng.normal();
      x[j] += rng.normal();
      if (x.cwiseAbs().maxCoeff() > 0.0) {
        dirs.push_back(x / norm(sp, x));
        continue;
      }
    }
    dirs.push_back(random_unit_point(sp, rng));
  }
  return dirs;
}

}  // namespace

double check_contraction(const Generator& gen, const SmoothSpace& sp, const std::vector<double>& t_grid,
                         std::size_t n_sphere, std::uint64_t seed) {
  if (t_grid.empty()) throw DomainError("check_contraction: empty time grid");
  if (n_sphere < 100) throw DomainError("check_contraction: n_sphere must be >= 100");
  if (gen.dim() != sp.dim()) throw DomainError("check_contraction: dimension mismatch");
  Rng rng(seed);
  const auto dirs = probe_directions(sp, n_sphere, rng);
  double worst = 0.0;
  for (double t : t_grid) {
    const Matrix s = gen.propagator(t);
    for (const auto& x : dirs) worst = std::max(worst, norm(sp, s * x) / norm(sp, x));
  }
  return worst;
}

double check_dissipativity_phi(const Generator& gen, const SmoothSpace& sp, std::size_t n_samples,
                               std::uint64_t seed) {
  if (n_samples < 100) throw DomainError("check_dissipativity_phi: n_samples must be >= 100");
  if (gen.dim() != sp.dim()) throw DomainError("check_dissipativity_phi: dimension mismatch");
  Rng rng(seed);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& x : probe_directions(sp, n_samples, rng)) worst = std::max(worst, phi_grad(sp, x, gen.generate(x)));
  return worst;
}

}  // namespace jumpconv
