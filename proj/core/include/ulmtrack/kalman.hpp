#pragma once

#include <Eigen/Core>

#include "ulmtrack/types.hpp"

namespace ulmtrack {

/// Motion model family. `constant_acceleration` carries the state
/// (x, vx, ax, y, vy, ay); `constant_velocity` is its 4-state reduction
/// (x, vx, y, vy) with process noise applied through the velocity block.
enum class MotionKind { constant_acceleration, constant_velocity };

/// Kalman state in internal units: um, um/s, um/s^2.
struct KalmanState {
  MotionKind kind = MotionKind::constant_acceleration;
  Eigen::VectorXd s;
  Eigen::MatrixXd P;

  static KalmanState zero(MotionKind kind);

  int dim() const { return static_cast<int>(s.size()); }
  Vec2 position() const;
  Vec2 velocity() const;
  /// Zero for the constant-velocity model.
  Vec2 acceleration() const;
};

/// Discrete-time linear Gaussian motion model at a fixed frame interval.
///
/// F advances each axis by the kinematic block [1 dt dt^2/2; 0 1 dt; 0 0 1];
/// Q = sigma_a^2 g g^T per axis with g = (dt^2/2, dt, 1) (or (dt^2/2, dt) for
/// constant velocity); H selects (x, y); R = r_std^2 I.
struct MotionModel {
  MotionKind kind = MotionKind::constant_acceleration;
  double dt = 0.0;
  Eigen::MatrixXd F;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd H;
  Eigen::Matrix2d R;

  /// `sigma_a` in um/s^2, `r_std` in um, `dt` in seconds.
  static MotionModel make(MotionKind kind, double dt, double sigma_a, double r_std);
  /// Same, taking the tracker's public-unit configuration.
  static MotionModel from_config(MotionKind kind, double dt, const TrackerConfig& cfg);

  int dim() const { return kind == MotionKind::constant_acceleration ? 6 : 4; }
};

/// Per-axis index of the position, velocity and (if present) acceleration.
int position_index(MotionKind kind, int axis);
int velocity_index(MotionKind kind, int axis);
int acceleration_index(MotionKind kind, int axis);  // -1 for constant velocity

/// Predicted observation distribution N(mu, Sigma) with mu = H s and
/// Sigma = H P H^T + R.
struct Innovation {
  Vec2 mean;
  Eigen::Matrix2d cov;
};

Innovation innovation(const KalmanState& predicted, const MotionModel& model);

/// Time update: s' = F s, P' = F P F^T + Q.
KalmanState predict(const KalmanState& state, const MotionModel& model);

/// Pairing cost 1/p where p is the bivariate normal density of `z` under the
/// predicted observation distribution. Evaluated in the log domain and clamped
/// to [1e-300, 1e300]. Throws DegenerateCovariance when Sigma's condition
/// number exceeds 1e12.
double pair_cost(const KalmanState& predicted, const MotionModel& model, const Vec2& z);
double pair_cost(const Innovation& inn, const Vec2& z);

/// Cost of a point at Mahalanobis distance `d` under covariance `cov`:
/// 2*pi*sqrt(det cov)*exp(d^2/2), clamped like pair_cost.
double cost_at_mahalanobis(const Eigen::Matrix2d& cov, double d);

double mahalanobis_squared(const Innovation& inn, const Vec2& z);

/// Measurement update with the Joseph-form covariance correction.
KalmanState update(const KalmanState& predicted, const MotionModel& model, const Vec2& z);

/// Weakly-informative covariance for a brand-new track:
/// diag(r_std^2, (v_max/3)^2, sigma_a^2) per axis (internal units).
Eigen::MatrixXd initial_covariance(MotionKind kind, const TrackerConfig& cfg);

inline constexpr double kMinCost = 1e-300;
inline constexpr double kMaxCost = 1e300;
inline constexpr double kMaxCondition = 1e12;

}  // namespace ulmtrack
