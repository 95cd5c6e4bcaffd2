#pragma once

#include <optional>
#include <string>
#include <vector>

#include "d2dgeo/errors.hpp"

namespace d2dgeo {

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  std::optional<double> se;  // present iff Monte Carlo backed
};

struct CurveSeries {
  std::string label;
  std::string x_name;
  std::string x_unit;
  std::string y_name;
  std::string y_unit;
  std::vector<CurvePoint> points;
  std::string config_hash;
};

inline void validate(const CurveSeries& c) {
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    if (!(c.points[i].x > c.points[i - 1].x)) throw config_error("curve '" + c.label + "': x must be strictly ascending");
  }
  for (const auto& p : c.points) {
    if (p.se.has_value() != c.points.front().se.has_value()) {
      throw config_error("curve '" + c.label + "': standard errors must be present on all points or none");
    }
  }
}

inline bool operator==(const CurvePoint& a, const CurvePoint& b) { return a.x == b.x && a.y == b.y && a.se == b.se; }

inline bool operator==(const CurveSeries& a, const CurveSeries& b) {
  return a.label == b.label && a.x_name == b.x_name && a.x_unit == b.x_unit && a.y_name == b.y_name &&
         a.y_unit == b.y_unit && a.points == b.points && a.config_hash == b.config_hash;
}

}  // namespace d2dgeo
