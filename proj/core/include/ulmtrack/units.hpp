#pragma once

// Unit policy.
//
// Public quantities: positions in micrometres, velocities in mm/s,
// accelerations in mm/s^2, time in seconds. Internally every computation runs
// in micrometres and seconds (velocities in um/s, accelerations in um/s^2).
// The helpers below are the only place scale factors appear.

namespace ulmtrack::units {

inline constexpr double kUmPerMm = 1000.0;

constexpr double um_per_s(double mm_per_s) { return mm_per_s * kUmPerMm; }
constexpr double mm_per_s(double um_per_s) { return um_per_s / kUmPerMm; }

constexpr double um_per_s2(double mm_per_s2) { return mm_per_s2 * kUmPerMm; }
constexpr double mm_per_s2(double um_per_s2) { return um_per_s2 / kUmPerMm; }

constexpr double um(double mm) { return mm * kUmPerMm; }

}  // namespace ulmtrack::units
