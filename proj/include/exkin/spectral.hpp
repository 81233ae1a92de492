#pragma once

// Fourier-Galerkin evaluation of the two-dimensional Maxwell-molecule
// collision operator with constant angular kernel.
//
// The distribution is periodised on [-L, L]^2 and relative velocities are
// truncated to |q| <= 2R. With xi_k = pi k / L the truncated operator reads
//
//   Q^_k = sum_{l+m=k} beta(l, m) f^_l f^_m,
//   B(l, m) = 2 pi S int_0^{2R} r J0(r |xi_l + xi_m| / 2) J0(r |xi_l - xi_m| / 2) dr,
//   beta(l, m) = B(l, m) - B(m, m),
//
// where S is the total angular cross section. The radial integral is a
// Lommel integral and is evaluated in closed form.

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "exkin/error.hpp"
#include "exkin/state.hpp"

namespace exkin {

class SpectralMaxwellOperator {
public:
  /// `modes` is the number of Fourier modes per axis (even, <= grid points);
  /// the Nyquist mode is dropped so the retained set is symmetric.
  SpectralMaxwellOperator(VelocityGrid grid, int modes, double cross_section, double truncation_radius)
      : grid_(grid), modes_(modes), cross_section_(cross_section), radius_(truncation_radius) {
    if (grid.dim != 2) throw ConfigError("spectral Maxwell model requires a 2-D velocity grid");
    if (modes < 4 || modes % 2 != 0 || modes > grid.points)
      throw ConfigError("spectral model: modes per axis must be even, >= 4 and <= grid points");
    if (!(cross_section > 0.0)) throw ConfigError("spectral model: cross section S must be positive");
    if (!(truncation_radius > 0.0)) throw ConfigError("spectral model: truncation radius must be positive");
    kmax_ = modes / 2 - 1;
    nk_ = 2 * kmax_ + 1;
    build_transforms();
    build_weights();
    build_projection();
  }

  /// Default truncation radius: the largest R with L >= (3 + sqrt 2) R / 2.
  static double default_radius(const VelocityGrid& g) { return 2.0 * g.extent / (3.0 + std::numbers::sqrt2); }

  /// int_0^a r J0(alpha r) J0(beta r) dr in closed form.
  static double radial_integral(double a, double alpha, double beta) {
    return lommel_integral(a, alpha, beta, std::cyl_bessel_j(0.0, alpha * a), std::cyl_bessel_j(1.0, alpha * a),
                           std::cyl_bessel_j(0.0, beta * a), std::cyl_bessel_j(1.0, beta * a));
  }

  const VelocityGrid& grid() const { return grid_; }
  int modes() const { return modes_; }
  double cross_section() const { return cross_section_; }
  double radius() const { return radius_; }

  /// Symmetrised bilinear collision operator Q(f, g) on the grid, with its
  /// conserved moments removed by a fixed weighted projection.
  std::vector<double> collide(const std::vector<double>& f, const std::vector<double>& g) const {
    const std::size_t nm = static_cast<std::size_t>(nk_) * nk_;
    std::vector<double> fr(nm), fi(nm), gr, gi;
    forward(f, fr, fi);
    const bool same = (&f == &g) || f == g;
    if (!same) {
      gr.resize(nm);
      gi.resize(nm);
      forward(g, gr, gi);
    }
    const std::vector<double>& hr = same ? fr : gr;
    const std::vector<double>& hi = same ? fi : gi;

    std::vector<double> qr(nm, 0.0), qi(nm, 0.0);
    std::size_t w = 0;
    for (int k1 = -kmax_; k1 <= kmax_; ++k1) {
      const int l1lo = std::max(-kmax_, k1 - kmax_), l1hi = std::min(kmax_, k1 + kmax_);
      for (int k2 = -kmax_; k2 <= kmax_; ++k2) {
        const int l2lo = std::max(-kmax_, k2 - kmax_), l2hi = std::min(kmax_, k2 + kmax_);
        double sr = 0.0, si = 0.0;
        for (int l1 = l1lo; l1 <= l1hi; ++l1) {
          const std::size_t lrow = static_cast<std::size_t>(l1 + kmax_) * nk_;
          const std::size_t mrow = static_cast<std::size_t>(k1 - l1 + kmax_) * nk_;
          for (int l2 = l2lo; l2 <= l2hi; ++l2) {
            const std::size_t li = lrow + (l2 + kmax_);
            const std::size_t mi = mrow + (k2 - l2 + kmax_);
            const double b = weights_[w++];
            sr += b * (fr[li] * hr[mi] - fi[li] * hi[mi]);
            si += b * (fr[li] * hi[mi] + fi[li] * hr[mi]);
          }
        }
        const std::size_t ki = static_cast<std::size_t>(k1 + kmax_) * nk_ + (k2 + kmax_);
        qr[ki] = sr;
        qi[ki] = si;
      }
    }
    std::vector<double> q = inverse(qr, qi);
    project_out_moments(q);
    return q;
  }

  /// Removes the (1, v, |v|^2/2) moments of `q` with a correction supported
  /// on a fixed Gaussian weight; linear in q.
  void project_out_moments(std::vector<double>& q) const {
    const double w = grid_.weight();
    Eigen::Vector4d c = Eigen::Vector4d::Zero();
    for (std::size_t k = 0; k < q.size(); ++k) c += (w * q[k]) * features_[k];
    const Eigen::Vector4d alpha = gram_.solve(c);
    for (std::size_t k = 0; k < q.size(); ++k) q[k] -= proj_weight_[k] * alpha.dot(features_[k]);
  }

private:
  // Lommel's formula given J0, J1 at alpha a and beta a.
  static double lommel_integral(double a, double alpha, double beta, double j0a, double j1a, double j0b, double j1b) {
    if (alpha == beta) return 0.5 * a * a * (j0a * j0a + j1a * j1a);
    return a * (alpha * j1a * j0b - beta * j0a * j1b) / (alpha * alpha - beta * beta);
  }

  void build_transforms() {
    const int n = grid_.points;
    const double L = grid_.extent, h = grid_.spacing();
    fwd_.assign(static_cast<std::size_t>(nk_) * n, {});
    inv_.assign(static_cast<std::size_t>(n) * nk_, {});
    for (int k = -kmax_; k <= kmax_; ++k) {
      const double xi = std::numbers::pi * k / L;
      for (int j = 0; j < n; ++j) {
        const double arg = xi * grid_.node(j);
        const std::complex<double> e(std::cos(arg), std::sin(arg));
        fwd_[static_cast<std::size_t>(k + kmax_) * n + j] = std::conj(e) * (h / (2.0 * L));
        inv_[static_cast<std::size_t>(j) * nk_ + (k + kmax_)] = e;
      }
    }
  }

  // Fourier coefficients f^_k = (2L)^{-2} sum_j h^2 f_j e^{-i xi_k . v_j}.
  void forward(const std::vector<double>& f, std::vector<double>& re, std::vector<double>& im) const {
    const int n = grid_.points;
    std::vector<std::complex<double>> tmp(static_cast<std::size_t>(nk_) * n);
    for (int k1 = 0; k1 < nk_; ++k1)
      for (int j2 = 0; j2 < n; ++j2) {
        std::complex<double> s = 0.0;
        for (int j1 = 0; j1 < n; ++j1)
          s += fwd_[static_cast<std::size_t>(k1) * n + j1] * f[static_cast<std::size_t>(j1) * n + j2];
        tmp[static_cast<std::size_t>(k1) * n + j2] = s;
      }
    for (int k1 = 0; k1 < nk_; ++k1)
      for (int k2 = 0; k2 < nk_; ++k2) {
        std::complex<double> s = 0.0;
        for (int j2 = 0; j2 < n; ++j2)
          s += fwd_[static_cast<std::size_t>(k2) * n + j2] * tmp[static_cast<std::size_t>(k1) * n + j2];
        re[static_cast<std::size_t>(k1) * nk_ + k2] = s.real();
        im[static_cast<std::size_t>(k1) * nk_ + k2] = s.imag();
      }
  }

  std::vector<double> inverse(const std::vector<double>& re, const std::vector<double>& im) const {
    const int n = grid_.points;
    std::vector<std::complex<double>> tmp(static_cast<std::size_t>(n) * nk_);
    for (int j1 = 0; j1 < n; ++j1)
      for (int k2 = 0; k2 < nk_; ++k2) {
        std::complex<double> s = 0.0;
        for (int k1 = 0; k1 < nk_; ++k1) {
          const std::size_t ki = static_cast<std::size_t>(k1) * nk_ + k2;
          s += inv_[static_cast<std::size_t>(j1) * nk_ + k1] * std::complex<double>(re[ki], im[ki]);
        }
        tmp[static_cast<std::size_t>(j1) * nk_ + k2] = s;
      }
    std::vector<double> out(static_cast<std::size_t>(n) * n);
    for (int j1 = 0; j1 < n; ++j1)
      for (int j2 = 0; j2 < n; ++j2) {
        double s = 0.0;
        for (int k2 = 0; k2 < nk_; ++k2) {
          const auto a = inv_[static_cast<std::size_t>(j2) * nk_ + k2];
          const auto b = tmp[static_cast<std::size_t>(j1) * nk_ + k2];
          s += a.real() * b.real() - a.imag() * b.imag();
        }
        out[static_cast<std::size_t>(j1) * n + j2] = s;
      }
    return out;
  }

  void build_weights() {
    // |xi_l +- xi_m| / 2 = c sqrt(s) with s an integer squared norm.
    const double c = std::numbers::pi / (2.0 * grid_.extent);
    const double a = 2.0 * radius_;
    const int smax = 8 * kmax_ * kmax_;
    std::vector<double> j0(smax + 1), j1(smax + 1);
    for (int s = 0; s <= smax; ++s) {
      const double x = c * std::sqrt(static_cast<double>(s)) * a;
      j0[s] = std::cyl_bessel_j(0.0, x);
      j1[s] = std::cyl_bessel_j(1.0, x);
    }
    auto lommel = [&](int s1, int s2) {
      return lommel_integral(a, c * std::sqrt(static_cast<double>(s1)), c * std::sqrt(static_cast<double>(s2)), j0[s1],
                             j1[s1], j0[s2], j1[s2]);
    };
    // 4 pi^2 sigma with sigma = S / (2 pi).
    const double scale = 2.0 * std::numbers::pi * cross_section_;
    auto B = [&](int l1, int l2, int m1, int m2) {
      const int p1 = l1 + m1, p2 = l2 + m2, d1 = l1 - m1, d2 = l2 - m2;
      return scale * lommel(p1 * p1 + p2 * p2, d1 * d1 + d2 * d2);
    };
    weights_.clear();
    for (int k1 = -kmax_; k1 <= kmax_; ++k1) {
      const int l1lo = std::max(-kmax_, k1 - kmax_), l1hi = std::min(kmax_, k1 + kmax_);
      for (int k2 = -kmax_; k2 <= kmax_; ++k2) {
        const int l2lo = std::max(-kmax_, k2 - kmax_), l2hi = std::min(kmax_, k2 + kmax_);
        for (int l1 = l1lo; l1 <= l1hi; ++l1)
          for (int l2 = l2lo; l2 <= l2hi; ++l2) {
            const int m1 = k1 - l1, m2 = k2 - l2;
            // Symmetrised in (l, m): the gain part is already symmetric.
            weights_.push_back(B(l1, l2, m1, m2) - 0.5 * (B(m1, m2, m1, m2) + B(l1, l2, l1, l2)));
          }
      }
    }
  }

  void build_projection() {
    const std::size_t n = grid_.size();
    const double w = grid_.weight();
    const double spread = grid_.extent / 4.0;
    features_.resize(n);
    proj_weight_.resize(n);
    Eigen::Matrix4d G = Eigen::Matrix4d::Zero();
    for (std::size_t k = 0; k < n; ++k) {
      const auto v = grid_.coords(k);
      const double v2 = v[0] * v[0] + v[1] * v[1];
      features_[k] = Eigen::Vector4d(1.0, v[0], v[1], 0.5 * v2);
      proj_weight_[k] = std::exp(-v2 / (2.0 * spread * spread));
      G += (w * proj_weight_[k]) * features_[k] * features_[k].transpose();
    }
    gram_ = G.ldlt();
  }

  VelocityGrid grid_;
  int modes_;
  double cross_section_;
  double radius_;
  int kmax_ = 0, nk_ = 0;
  std::vector<std::complex<double>> fwd_, inv_;
  std::vector<double> weights_;
  std::vector<Eigen::Vector4d, Eigen::aligned_allocator<Eigen::Vector4d>> features_;
  std::vector<double> proj_weight_;
  Eigen::LDLT<Eigen::Matrix4d> gram_;
};

} // namespace exkin
