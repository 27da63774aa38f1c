#include "fhr/baselines.hpp"

#include <algorithm>
#include <deque>

#include <Eigen/Core>

#include "fhr/errors.hpp"

namespace fhr {

namespace {

std::vector<Eigen::VectorXd> flatten(const TrajectorySequence& seq) {
  std::vector<Eigen::VectorXd> out(seq.frames.size());
  for (size_t t = 0; t < seq.frames.size(); ++t) out[t] = to_vector(seq.frames[t]);
  return out;
}

std::vector<Eigen::VectorXd> moving_average(const std::vector<Eigen::VectorXd>& z, int window) {
  std::vector<Eigen::VectorXd> x(z.size());
  for (size_t t = 0; t < z.size(); ++t) {
    const size_t first = t + 1 >= static_cast<size_t>(window) ? t + 1 - window : 0;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(z[t].size());
    for (size_t u = first; u <= t; ++u) acc += z[u];
    x[t] = acc / static_cast<double>(t - first + 1);
  }
  return x;
}

std::vector<Eigen::VectorXd> first_order(const std::vector<Eigen::VectorXd>& z, double a) {
  std::vector<Eigen::VectorXd> x(z.size());
  for (size_t t = 0; t < z.size(); ++t) {
    x[t] = (t == 0) ? z[t] : Eigen::VectorXd(a * z[t] + (1.0 - a) * x[t - 1]);
  }
  return x;
}

// Level + trend double exponential smoothing, both coefficients equal.
std::vector<Eigen::VectorXd> second_order(const std::vector<Eigen::VectorXd>& z, double a) {
  std::vector<Eigen::VectorXd> x(z.size());
  Eigen::VectorXd level, trend;
  for (size_t t = 0; t < z.size(); ++t) {
    if (t == 0) {
      level = z[t];
      trend = Eigen::VectorXd::Zero(z[t].size());
    } else {
      const Eigen::VectorXd prev_level = level;
      level = a * z[t] + (1.0 - a) * (level + trend);
      trend = a * (level - prev_level) + (1.0 - a) * trend;
    }
    x[t] = level;
  }
  return x;
}

// Blend of the observation with the constant-velocity prediction from the
// two previous outputs.
std::vector<Eigen::VectorXd> constant_speed(const std::vector<Eigen::VectorXd>& z, double a) {
  std::vector<Eigen::VectorXd> x(z.size());
  for (size_t t = 0; t < z.size(); ++t) {
    if (t == 0) {
      x[t] = z[t];
    } else {
      const Eigen::VectorXd prediction =
          (t >= 2) ? Eigen::VectorXd(x[t - 1] + (x[t - 1] - x[t - 2])) : x[t - 1];
      x[t] = a * z[t] + (1.0 - a) * prediction;
    }
  }
  return x;
}

}  // namespace

BaselineKind parse_baseline(const std::string& text) {
  BaselineKind kind;
  std::string name = text;
  std::string param;
  if (const auto pos = text.find(':'); pos != std::string::npos) {
    name = text.substr(0, pos);
    param = text.substr(pos + 1);
  }
  try {
    if (name == "moving_average") {
      kind.type = BaselineKind::Type::kMovingAverage;
      if (!param.empty()) kind.window = std::stoi(param);
    } else if (name == "first_order") {
      kind.type = BaselineKind::Type::kFirstOrder;
      if (!param.empty()) kind.alpha = std::stod(param);
    } else if (name == "second_order") {
      kind.type = BaselineKind::Type::kSecondOrder;
      if (!param.empty()) kind.alpha = std::stod(param);
    } else if (name == "constant_speed") {
      kind.type = BaselineKind::Type::kConstantSpeed;
      if (!param.empty()) kind.alpha = std::stod(param);
    } else {
      throw ConfigError("unknown baseline kind: " + name);
    }
  } catch (const std::invalid_argument&) {
    throw ConfigError("bad baseline parameter: " + param);
  } catch (const std::out_of_range&) {
    throw ConfigError("bad baseline parameter: " + param);
  }
  if (kind.window < 1) throw ConfigError("moving average window must be >= 1");
  if (!(kind.alpha > 0.0 && kind.alpha <= 1.0)) throw ConfigError("coefficient must be in (0, 1]");
  return kind;
}

std::string to_string(const BaselineKind& kind) {
  switch (kind.type) {
    case BaselineKind::Type::kMovingAverage:
      return "moving_average:" + std::to_string(kind.window);
    case BaselineKind::Type::kFirstOrder:
      return "first_order:" + std::to_string(kind.alpha);
    case BaselineKind::Type::kSecondOrder:
      return "second_order:" + std::to_string(kind.alpha);
    case BaselineKind::Type::kConstantSpeed:
      return "constant_speed:" + std::to_string(kind.alpha);
  }
  return "?";
}

TrajectorySequence apply_baseline(const BaselineKind& kind, const TrajectorySequence& z_seq) {
  if (z_seq.frames.empty()) throw InsufficientDataError("sequence has no frames");
  const auto z = flatten(z_seq);
  std::vector<Eigen::VectorXd> x;
  switch (kind.type) {
    case BaselineKind::Type::kMovingAverage:
      x = moving_average(z, kind.window);
      break;
    case BaselineKind::Type::kFirstOrder:
      x = first_order(z, kind.alpha);
      break;
    case BaselineKind::Type::kSecondOrder:
      x = second_order(z, kind.alpha);
      break;
    case BaselineKind::Type::kConstantSpeed:
      x = constant_speed(z, kind.alpha);
      break;
  }
  TrajectorySequence out = z_seq;
  for (size_t t = 0; t < x.size(); ++t) out.frames[t] = to_landmarks(x[t]);
  return out;
}

}  // namespace fhr
