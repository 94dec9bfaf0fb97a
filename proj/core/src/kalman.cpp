#include "ulmtrack/kalman.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "ulmtrack/error.hpp"
#include "ulmtrack/units.hpp"

namespace ulmtrack {
namespace {

int block_size(MotionKind kind) { return kind == MotionKind::constant_acceleration ? 3 : 2; }
int state_dim(MotionKind kind) { return 2 * block_size(kind); }

void check_conditioning(const Eigen::Matrix2d& cov) {
  // Closed-form eigenvalues of a symmetric 2x2 matrix.
  const double a = cov(0, 0);
  const double d = cov(1, 1);
  const double b = 0.5 * (cov(0, 1) + cov(1, 0));
  const double mean = 0.5 * (a + d);
  const double radius = std::hypot(0.5 * (a - d), b);
  const double lo = mean - radius;
  const double hi = mean + radius;
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo <= 0.0 || hi / lo > kMaxCondition) {
    throw DegenerateCovariance("innovation covariance is singular or ill-conditioned");
  }
}

double clamp_cost(double log_cost) {
  // exp() saturates to 0 / inf well outside these bounds; clamp in log space.
  static const double lo = std::log(kMinCost);
  static const double hi = std::log(kMaxCost);
  if (log_cost <= lo) return kMinCost;
  if (log_cost >= hi) return kMaxCost;
  return std::exp(log_cost);
}

}  // namespace

int position_index(MotionKind kind, int axis) { return axis * block_size(kind); }
int velocity_index(MotionKind kind, int axis) { return axis * block_size(kind) + 1; }
int acceleration_index(MotionKind kind, int axis) {
  return kind == MotionKind::constant_acceleration ? axis * 3 + 2 : -1;
}

KalmanState KalmanState::zero(MotionKind kind) {
  const int n = state_dim(kind);
  return {kind, Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n)};
}

Vec2 KalmanState::position() const {
  return {s(position_index(kind, 0)), s(position_index(kind, 1))};
}

Vec2 KalmanState::velocity() const {
  return {s(velocity_index(kind, 0)), s(velocity_index(kind, 1))};
}

Vec2 KalmanState::acceleration() const {
  if (kind != MotionKind::constant_acceleration) return Vec2::Zero();
  return {s(acceleration_index(kind, 0)), s(acceleration_index(kind, 1))};
}

MotionModel MotionModel::make(MotionKind kind, double dt, double sigma_a, double r_std) {
  const int b = block_size(kind);
  const int n = 2 * b;

  Eigen::MatrixXd fb(b, b);
  Eigen::VectorXd g(b);
  if (kind == MotionKind::constant_acceleration) {
    fb << 1.0, dt, 0.5 * dt * dt,
          0.0, 1.0, dt,
          0.0, 0.0, 1.0;
    g << 0.5 * dt * dt, dt, 1.0;
  } else {
    fb << 1.0, dt,
          0.0, 1.0;
    g << 0.5 * dt * dt, dt;
  }
  const Eigen::MatrixXd qb = sigma_a * sigma_a * g * g.transpose();

  MotionModel m;
  m.kind = kind;
  m.dt = dt;
  m.F = Eigen::MatrixXd::Zero(n, n);
  m.Q = Eigen::MatrixXd::Zero(n, n);
  for (int axis = 0; axis < 2; ++axis) {
    m.F.block(axis * b, axis * b, b, b) = fb;
    m.Q.block(axis * b, axis * b, b, b) = qb;
  }
  m.H = Eigen::MatrixXd::Zero(2, n);
  m.H(0, position_index(kind, 0)) = 1.0;
  m.H(1, position_index(kind, 1)) = 1.0;
  m.R = r_std * r_std * Eigen::Matrix2d::Identity();
  return m;
}

MotionModel MotionModel::from_config(MotionKind kind, double dt, const TrackerConfig& cfg) {
  const double sigma_a = kind == MotionKind::constant_acceleration ? cfg.sigma_a_mm_s2 : cfg.sigma_a_cv_mm_s2;
  return make(kind, dt, units::um_per_s2(sigma_a), cfg.r_std_um);
}

KalmanState predict(const KalmanState& state, const MotionModel& model) {
  KalmanState out;
  out.kind = state.kind;
  out.s = model.F * state.s;
  out.P = model.F * state.P * model.F.transpose() + model.Q;
  out.P = 0.5 * (out.P + out.P.transpose());
  return out;
}

Innovation innovation(const KalmanState& predicted, const MotionModel& model) {
  Innovation inn;
  inn.mean = model.H * predicted.s;
  inn.cov = model.H * predicted.P * model.H.transpose() + model.R;
  inn.cov = 0.5 * (inn.cov + inn.cov.transpose()).eval();
  return inn;
}

double mahalanobis_squared(const Innovation& inn, const Vec2& z) {
  check_conditioning(inn.cov);
  const Vec2 r = z - inn.mean;
  return r.dot(inn.cov.ldlt().solve(r));
}

double pair_cost(const Innovation& inn, const Vec2& z) {
  const double d2 = mahalanobis_squared(inn, z);
  // -log p = log(2 pi) + 0.5 log det(Sigma) + 0.5 d^2
  const double log_cost = std::log(2.0 * std::numbers::pi) + 0.5 * std::log(inn.cov.determinant()) + 0.5 * d2;
  return clamp_cost(log_cost);
}

double pair_cost(const KalmanState& predicted, const MotionModel& model, const Vec2& z) {
  return pair_cost(innovation(predicted, model), z);
}

double cost_at_mahalanobis(const Eigen::Matrix2d& cov, double d) {
  check_conditioning(cov);
  const double log_cost = std::log(2.0 * std::numbers::pi) + 0.5 * std::log(cov.determinant()) + 0.5 * d * d;
  return clamp_cost(log_cost);
}

KalmanState update(const KalmanState& predicted, const MotionModel& model, const Vec2& z) {
  const Innovation inn = innovation(predicted, model);
  check_conditioning(inn.cov);

  const Eigen::MatrixXd PHt = predicted.P * model.H.transpose();
  const Eigen::MatrixXd K = inn.cov.ldlt().solve(PHt.transpose()).transpose();
  const int n = predicted.dim();
  const Eigen::MatrixXd IKH = Eigen::MatrixXd::Identity(n, n) - K * model.H;

  KalmanState out;
  out.kind = predicted.kind;
  out.s = predicted.s + K * (z - inn.mean);
  out.P = IKH * predicted.P * IKH.transpose() + K * model.R * K.transpose();
  out.P = 0.5 * (out.P + out.P.transpose());
  return out;
}

Eigen::MatrixXd initial_covariance(MotionKind kind, const TrackerConfig& cfg) {
  const int n = state_dim(kind);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  const double v_sd = units::um_per_s(cfg.v_max_mm_s) / 3.0;
  const double a_sd = units::um_per_s2(cfg.sigma_a_mm_s2);
  for (int axis = 0; axis < 2; ++axis) {
    P(position_index(kind, axis), position_index(kind, axis)) = cfg.r_std_um * cfg.r_std_um;
    P(velocity_index(kind, axis), velocity_index(kind, axis)) = v_sd * v_sd;
    if (kind == MotionKind::constant_acceleration) {
      P(acceleration_index(kind, axis), acceleration_index(kind, axis)) = a_sd * a_sd;
    }
  }
  return P;
}

}  // namespace ulmtrack
