#pragma once

// Reference implementations for cross-checking the library. Each avoids the
// library's solvers and most of Eigen's decompositions on purpose.

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace oracle {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Dense solve by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) < 1e-300) throw std::runtime_error("singular system");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

struct PivotSolution {
  Vec3 tip;
  Vec3 pivot;
};

/// Pivot calibration through the normal equations A^T A x = A^T b of [R_i | -I] x = -t_i.
inline PivotSolution pivot_normal_equations(const std::vector<std::pair<Mat3, Vec3>>& poses) {
  std::vector<std::vector<double>> ata(6, std::vector<double>(6, 0.0));
  std::vector<double> atb(6, 0.0);
  for (const auto& [r, t] : poses) {
    for (int row = 0; row < 3; ++row) {
      double a[6];
      for (int c = 0; c < 3; ++c) a[c] = r(row, c);
      for (int c = 0; c < 3; ++c) a[3 + c] = (c == row) ? -1.0 : 0.0;
      const double b = -t(row);
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) ata[i][j] += a[i] * a[j];
        atb[i] += a[i] * b;
      }
    }
  }
  auto x = solve_dense(ata, atb);
  return {Vec3(x[0], x[1], x[2]), Vec3(x[3], x[4], x[5])};
}

/// Largest-eigenvalue eigenvector of a symmetric 4x4 matrix by cyclic Jacobi rotations.
inline std::array<double, 4> dominant_eigenvector(std::array<std::array<double, 4>, 4> a) {
  std::array<std::array<double, 4>, 4> v{};
  for (int i = 0; i < 4; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < 4; ++p) {
      for (int q = p + 1; q < 4; ++q) off += a[p][q] * a[p][q];
    }
    if (off < 1e-30) break;
    for (int p = 0; p < 4; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 4; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 4; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 4; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i < 4; ++i) {
    if (a[i][i] > a[best][best]) best = i;
  }
  return {v[0][best], v[1][best], v[2][best], v[3][best]};
}

struct Rigid {
  Mat3 r = Mat3::Identity();
  Vec3 t = Vec3::Zero();
};

/// Horn's closed-form absolute orientation with unit quaternions.
inline Rigid horn_register(const std::vector<Vec3>& model, const std::vector<Vec3>& patient) {
  const std::size_t n = model.size();
  Vec3 cm = Vec3::Zero(), cp = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    cm += model[i];
    cp += patient[i];
  }
  cm /= static_cast<double>(n);
  cp /= static_cast<double>(n);
  Mat3 s = Mat3::Zero();
  for (std::size_t i = 0; i < n; ++i) s += (model[i] - cm) * (patient[i] - cp).transpose();
  const double sxx = s(0, 0), sxy = s(0, 1), sxz = s(0, 2);
  const double syx = s(1, 0), syy = s(1, 1), syz = s(1, 2);
  const double szx = s(2, 0), szy = s(2, 1), szz = s(2, 2);
  std::array<std::array<double, 4>, 4> nm{{
      {sxx + syy + szz, syz - szy, szx - sxz, sxy - syx},
      {syz - szy, sxx - syy - szz, sxy + syx, szx + sxz},
      {szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy},
      {sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz},
  }};
  auto q = dominant_eigenvector(nm);
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Rigid out;
  out.r << w * w + x * x - y * y - z * z, 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), w * w - x * x + y * y - z * z, 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), w * w - x * x - y * y + z * z;
  out.t = cp - out.r * cm;
  return out;
}

/// Naive RMSE accumulation.
inline double rmse(const std::vector<Vec3>& model, const std::vector<Vec3>& patient, const Mat3& r, const Vec3& t) {
  double s = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) s += (patient[i] - (r * model[i] + t)).squaredNorm();
  return std::sqrt(s / static_cast<double>(model.size()));
}

inline Mat3 rotation_from_vector(const Vec3& w) {
  const double angle = w.norm();
  if (angle < 1e-300) return Mat3::Identity();
  const Vec3 k = w / angle;
  Mat3 kx;
  kx << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  return Mat3::Identity() + std::sin(angle) * kx + (1 - std::cos(angle)) * kx * kx;
}

/// Exhaustive search over rotation vectors (coarse grid, then shrinking pattern
/// search). Translation is the optimal one for each rotation.
inline Rigid grid_register(const std::vector<Vec3>& model, const std::vector<Vec3>& patient) {
  Vec3 cm = Vec3::Zero(), cp = Vec3::Zero();
  for (std::size_t i = 0; i < model.size(); ++i) {
    cm += model[i];
    cp += patient[i];
  }
  cm /= static_cast<double>(model.size());
  cp /= static_cast<double>(model.size());
  auto cost = [&](const Vec3& w) {
    Mat3 r = rotation_from_vector(w);
    return std::pow(rmse(model, patient, r, cp - r * cm), 2);
  };
  const double pi = std::acos(-1.0);
  const int steps = 16;
  Vec3 best = Vec3::Zero();
  double best_cost = cost(best);
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j <= steps; ++j) {
      for (int k = 0; k <= steps; ++k) {
        Vec3 w(-pi + 2 * pi * i / steps, -pi + 2 * pi * j / steps, -pi + 2 * pi * k / steps);
        if (w.norm() > pi) continue;
        double c = cost(w);
        if (c < best_cost) {
          best_cost = c;
          best = w;
        }
      }
    }
  }
  for (double h = 2 * pi / steps; h > 1e-12; h *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int axis = 0; axis < 3; ++axis) {
        for (double sign : {-1.0, 1.0}) {
          Vec3 w = best;
          w(axis) += sign * h;
          double c = cost(w);
          if (c < best_cost) {
            best_cost = c;
            best = w;
            improved = true;
          }
        }
      }
    }
  }
  Rigid out;
  out.r = rotation_from_vector(best);
  out.t = cp - out.r * cm;
  return out;
}

/// Angle of a rotation matrix in degrees from its trace.
inline double angle_deg(const Mat3& r) {
  double c = std::max(-1.0, std::min(1.0, (r.trace() - 1.0) / 2.0));
  return std::acos(c) * 180.0 / std::acos(-1.0);
}

}  // namespace oracle
