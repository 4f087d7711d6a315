#pragma once

#include <cpc/centroidal.h>

#include <Eigen/Core>

#include <array>
#include <span>
#include <string>
#include <vector>

namespace cpc
{

enum class ContactMode
{
  /// Pushing only: one friction pyramid per vertex.
  Unilateral,
  /// Grasping: two opposing pyramids per vertex.
  Grasp
};

/// One limb-end contact with its polygon vertices in world coordinates.
struct ContactSpec
{
  std::string limbId;
  std::vector<Vector3> vertices;
  Vector3 normal = Vector3::UnitZ();
  std::array<Vector3, 2> tangents = {Vector3::UnitX(), Vector3::UnitY()};
  double frictionCoeff = 0.6;
  ContactMode mode = ContactMode::Unilateral;
  int ridgeCount = 4;

  /// Builds a contact whose tangent basis is derived from the normal.
  static ContactSpec make(std::string limbId,
                          std::vector<Vector3> vertices,
                          const Vector3 & normal,
                          double frictionCoeff = 0.6,
                          ContactMode mode = ContactMode::Unilateral,
                          int ridgeCount = 4);

  /// Axis-aligned rectangle of the given size centered at `center`, lying in the plane orthogonal to `normal`.
  static ContactSpec rectangle(std::string limbId,
                               const Vector3 & center,
                               const Matrix3 & orientation,
                               double length,
                               double width,
                               double frictionCoeff = 0.6,
                               ContactMode mode = ContactMode::Unilateral);

  void validate() const;

  Vector3 center() const;
  /// Columns are (tangent 1, tangent 2, normal).
  Matrix3 frame() const;
  /// Vertices moved toward the centroid by `margin` (collapsing onto it when closer than that).
  ContactSpec shrunk(double margin) const;
  /// Rigid transform of the vertices and directions.
  ContactSpec transformed(const Matrix3 & rotation, const Vector3 & translation) const;
};

/// Unit pyramid edges normal + mu (cos t_k t1 + sin t_k t2), t_k = 2 pi k / K. Requires K >= 4 and mu > 0.
std::vector<Vector3> ridgeVectors(const Vector3 & normal,
                                  const std::array<Vector3, 2> & tangents,
                                  double frictionCoeff,
                                  int ridgeCount);

/// Orthonormal tangent pair for a unit normal.
std::array<Vector3, 2> tangentBasis(const Vector3 & normal);

struct LimbBlock
{
  std::string limbId;
  Eigen::Index offset = 0;
  Eigen::Index count = 0;
  /// Contact surface frame of the limb, used for local wrench conversions.
  Matrix3 frame = Matrix3::Identity();
  Vector3 origin = Vector3::Zero();
};

/// Rows: force, then moment about the world origin. Columns ordered by (limb, vertex, ridge).
struct GraspMatrix
{
  Eigen::Matrix<double, 6, Eigen::Dynamic> columns;
  std::vector<LimbBlock> blocks;

  Eigen::Index cols() const
  {
    return columns.cols();
  }
  const LimbBlock * find(const std::string & limbId) const;
  /// Sum of the columns of one limb weighted by its slice of lambda.
  Vector6 limbWrench(const LimbBlock & block, const Eigen::VectorXd & lambda) const;
};

/// Throws EmptyContactSet on an empty list and InvalidArgument on a duplicated limb id.
GraspMatrix assembleGraspMatrix(std::span<const ContactSpec> contacts);

/// Convex polygon, counter-clockwise. May degenerate to a segment or a point.
struct Polygon2
{
  std::vector<Vector2> vertices;

  /// Distance to the boundary, positive inside. For degenerate polygons: minus the distance to the set.
  double signedDistance(const Vector2 & p) const;
  bool contains(const Vector2 & p, double tolerance = 1e-9) const
  {
    return signedDistance(p) >= -tolerance;
  }
};

Polygon2 convexHull(std::vector<Vector2> points);

/// Hull of the ground projection of every unilateral contact whose normal points upward.
/// Throws NoSupportingContact if there is none.
Polygon2 supportPolygon(std::span<const ContactSpec> contacts);

} // namespace cpc
