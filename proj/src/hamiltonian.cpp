#include "weldray/hamiltonian.hpp"

#include <cmath>

namespace weldray {

namespace {

// (A_jl)_ik = a_ijkl for fixed in-plane j, l.
Mat3 slice(const Voigt6& a, int j, int l) {
  Mat3 m;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) m(i, k) = tensor_component(a, i, j, k, l);
  }
  return m;
}

}  // namespace

PlaneChristoffel::PlaneChristoffel(const ElasticMaterial& material) {
  const Voigt6 a = material.normalized_mm_us();
  a11_ = slice(a, 0, 0);
  a22_ = slice(a, 1, 1);
  b12_ = slice(a, 0, 1) + slice(a, 1, 0);
}

Mat3 PlaneChristoffel::gamma(const Vec2& q) const {
  return a11_ * (q.x() * q.x()) + b12_ * (q.x() * q.y()) + a22_ * (q.y() * q.y());
}

Mat3 PlaneChristoffel::gamma_derivative(int k, const Vec2& q) const {
  return k == 0 ? Mat3(2.0 * q.x() * a11_ + q.y() * b12_)
                : Mat3(q.x() * b12_ + 2.0 * q.y() * a22_);
}

PlaneChristoffel::QL PlaneChristoffel::qL(const Vec2& q) const {
  const Mat3 g = gamma(q);
  Eigen::SelfAdjointEigenSolver<Mat3> es;
  es.computeDirect(g);
  Vec3 v = es.eigenvectors().col(2);
  // One Rayleigh-quotient inverse-iteration pass sharpens the direct
  // solver's eigenvector, which feeds finite-difference Hessians.
  const double lambda0 = es.eigenvalues()[2];
  const double shift = lambda0 + 1e-9 * std::abs(lambda0) + 1e-300;
  Eigen::LDLT<Mat3> ldlt(g - shift * Mat3::Identity());
  Vec3 w = ldlt.solve(v);
  if (w.allFinite() && w.norm() > 0) v = w.normalized();
  QL out;
  out.polarization = v;
  out.G = v.dot(g * v);
  out.grad = Vec2(v.dot(gamma_derivative(0, q) * v),
                  v.dot(gamma_derivative(1, q) * v));
  return out;
}

Medium::Medium(Specimen specimen, double frequency_mhz, double attenuation_exponent)
    : specimen_(std::move(specimen)), frequency_(frequency_mhz) {
  specimen_.validate();
  for (std::size_t r = 0; r < specimen_.regions.size(); ++r) {
    const auto& mat = specimen_.material_of(static_cast<int>(r));
    christoffel_.emplace_back(mat);
    isotropic_.push_back(mat.is_isotropic() ? 1 : 0);
    uniform_.push_back(
        (isotropic_.back() || is_uniform(specimen_.regions[r].orientation)) ? 1 : 0);
    attenuation_.push_back(mat.attenuation_at(frequency_mhz, attenuation_exponent));
  }
}

HamiltonianEval Medium::eval(int region, const Vec2& x, const Vec2& p) const {
  HamiltonianEval e;
  OrientationSample s;
  if (!isotropic_[region]) {
    s = sample_orientation(specimen_.regions[region].orientation, x);
  }
  e.theta = s.theta;
  const double c = std::cos(s.theta);
  const double sn = std::sin(s.theta);
  const Vec2 q(c * p.x() + sn * p.y(), -sn * p.x() + c * p.y());
  const auto ql = christoffel_[region].qL(q);
  e.G = ql.G;
  e.Gp = Vec2(c * ql.grad.x() - sn * ql.grad.y(), sn * ql.grad.x() + c * ql.grad.y());
  const double dG_dtheta = ql.grad.x() * q.y() - ql.grad.y() * q.x();
  e.Gx = dG_dtheta * s.grad;
  e.polarization = Vec3(c * ql.polarization.x() - sn * ql.polarization.y(),
                        sn * ql.polarization.x() + c * ql.polarization.y(),
                        ql.polarization.z());
  return e;
}

HamiltonianHessian Medium::hessian(int region, const Vec2& x, const Vec2& p) const {
  HamiltonianHessian h;
  const double hp = 1e-6 * p.norm();
  for (int j = 0; j < 2; ++j) {
    Vec2 dp = Vec2::Zero();
    dp[j] = hp;
    const auto plus = eval(region, x, p + dp);
    const auto minus = eval(region, x, p - dp);
    h.pp.col(j) = (plus.Gp - minus.Gp) / (2.0 * hp);
    h.xp.col(j) = (plus.Gx - minus.Gx) / (2.0 * hp);
  }
  h.pp = 0.5 * (h.pp + h.pp.transpose()).eval();
  if (uniform_[region]) {
    h.xp.setZero();
    return h;
  }
  const double hx = 1e-6 * std::max(1.0, x.cwiseAbs().maxCoeff());
  Mat2 xp_alt;
  for (int j = 0; j < 2; ++j) {
    Vec2 dx = Vec2::Zero();
    dx[j] = hx;
    const auto plus = eval(region, x + dx, p);
    const auto minus = eval(region, x - dx, p);
    h.xx.col(j) = (plus.Gx - minus.Gx) / (2.0 * hx);
    // d/dx_j of Gp gives d^2G/dp_i dx_j, i.e. xp transposed.
    xp_alt.row(j) = ((plus.Gp - minus.Gp) / (2.0 * hx)).transpose();
  }
  h.xx = 0.5 * (h.xx + h.xx.transpose()).eval();
  h.xp = 0.5 * (h.xp + xp_alt);
  return h;
}

double Medium::slowness(int region, const Vec2& x, const Vec2& n) const {
  return 1.0 / std::sqrt(eval(region, x, n).G);
}

}  // namespace weldray
