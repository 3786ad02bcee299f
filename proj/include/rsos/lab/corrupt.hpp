#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsos/lab/model.hpp"

namespace rsos::lab {

struct CorruptedSample {
  Eigen::MatrixXd data;
  std::vector<bool> corrupted_mask;
  double epsilon = 0.0;  // corrupted rows / n
  std::optional<Eigen::MatrixXd> clean_reference;
  std::string adversary;

  int n() const { return static_cast<int>(data.rows()); }
  int d() const { return static_cast<int>(data.cols()); }
  int corrupted_count() const;
  /// Wraps an uncorrupted sample.
  static CorruptedSample clean(Eigen::MatrixXd data);
};

struct Adversary {
  enum class Kind { PointMass, SymmetricPointMass, MeanShiftCluster, CovInflate, ReplaceWithSpec };

  Kind kind = Kind::PointMass;
  Eigen::VectorXd location;  // PointMass, SymmetricPointMass, MeanShiftCluster
  double scale = 1.0;        // CovInflate: replacement rows ~ N(0, scale I)
  ModelSpec replacement;     // ReplaceWithSpec

  static Adversary point_mass(Eigen::VectorXd at);
  static Adversary symmetric_point_mass(Eigen::VectorXd at);
  static Adversary mean_shift_cluster(Eigen::VectorXd center);
  static Adversary cov_inflate(double scale);
  static Adversary replace_with(ModelSpec spec);
};

const char* to_string(Adversary::Kind kind);

/// Replaces exactly floor(epsilon n) rows, chosen uniformly at random, according to the adversary.
CorruptedSample corrupt(const Eigen::MatrixXd& clean, const Adversary& adversary, double epsilon, std::uint64_t seed);

}  // namespace rsos::lab
