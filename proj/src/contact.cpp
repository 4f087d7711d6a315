#include <cpc/contact.h>
#include <cpc/errors.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace cpc
{

namespace
{

double cross2(const Vector2 & o, const Vector2 & a, const Vector2 & b)
{
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

double segmentDistance(const Vector2 & p, const Vector2 & a, const Vector2 & b)
{
  const Vector2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if(len2 == 0.0)
  {
    return (p - a).norm();
  }
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

} // namespace

std::array<Vector3, 2> tangentBasis(const Vector3 & normal)
{
  const Vector3 n = normal.normalized();
  const Vector3 seed = std::abs(n.x()) < 0.9 ? Vector3::UnitX() : Vector3::UnitY();
  const Vector3 t1 = (seed - seed.dot(n) * n).normalized();
  return {t1, n.cross(t1)};
}

ContactSpec ContactSpec::make(std::string limbId,
                              std::vector<Vector3> vertices,
                              const Vector3 & normal,
                              double frictionCoeff,
                              ContactMode mode,
                              int ridgeCount)
{
  ContactSpec c;
  c.limbId = std::move(limbId);
  c.vertices = std::move(vertices);
  c.normal = normal.normalized();
  c.tangents = tangentBasis(c.normal);
  c.frictionCoeff = frictionCoeff;
  c.mode = mode;
  c.ridgeCount = ridgeCount;
  return c;
}

ContactSpec ContactSpec::rectangle(std::string limbId,
                                   const Vector3 & center,
                                   const Matrix3 & orientation,
                                   double length,
                                   double width,
                                   double frictionCoeff,
                                   ContactMode mode)
{
  const Vector3 t1 = orientation.col(0);
  const Vector3 t2 = orientation.col(1);
  const double hl = 0.5 * length;
  const double hw = 0.5 * width;
  ContactSpec c;
  c.limbId = std::move(limbId);
  c.vertices = {center + hl * t1 + hw * t2, center - hl * t1 + hw * t2, center - hl * t1 - hw * t2,
                center + hl * t1 - hw * t2};
  c.normal = orientation.col(2);
  c.tangents = {t1, t2};
  c.frictionCoeff = frictionCoeff;
  c.mode = mode;
  return c;
}

void ContactSpec::validate() const
{
  if(vertices.empty())
  {
    throw InvalidArgument("ContactSpec " + limbId + ": no vertices");
  }
  for(const auto & v : vertices)
  {
    if(!v.allFinite())
    {
      throw InvalidArgument("ContactSpec " + limbId + ": non-finite vertex");
    }
  }
  if(!(frictionCoeff > 0.0) || !std::isfinite(frictionCoeff))
  {
    throw InvalidArgument("ContactSpec " + limbId + ": friction coefficient must be positive");
  }
  if(ridgeCount < 4)
  {
    throw InvalidArgument("ContactSpec " + limbId + ": at least four ridges per vertex are required");
  }
  if(std::abs(normal.norm() - 1.0) > 1e-9 || std::abs(tangents[0].norm() - 1.0) > 1e-9
     || std::abs(tangents[1].norm() - 1.0) > 1e-9)
  {
    throw InvalidArgument("ContactSpec " + limbId + ": normal and tangents must be unit vectors");
  }
  if(std::abs(normal.dot(tangents[0])) > 1e-9 || std::abs(normal.dot(tangents[1])) > 1e-9
     || std::abs(tangents[0].dot(tangents[1])) > 1e-9)
  {
    throw InvalidArgument("ContactSpec " + limbId + ": normal and tangents must be orthogonal");
  }
  if(mode == ContactMode::Unilateral)
  {
    const Vector3 c = center();
    for(const auto & v : vertices)
    {
      if(std::abs((v - c).dot(normal)) > 1e-6)
      {
        throw InvalidArgument("ContactSpec " + limbId + ": vertices are not coplanar");
      }
    }
  }
}

Vector3 ContactSpec::center() const
{
  Vector3 sum = Vector3::Zero();
  for(const auto & v : vertices)
  {
    sum += v;
  }
  return vertices.empty() ? sum : Vector3(sum / static_cast<double>(vertices.size()));
}

Matrix3 ContactSpec::frame() const
{
  Matrix3 R;
  R.col(0) = tangents[0];
  R.col(1) = tangents[1];
  R.col(2) = normal;
  return R;
}

ContactSpec ContactSpec::shrunk(double margin) const
{
  ContactSpec out = *this;
  if(margin <= 0.0)
  {
    return out;
  }
  const Vector3 c = center();
  for(auto & v : out.vertices)
  {
    const Vector3 d = c - v;
    const double dist = d.norm();
    v = dist > margin ? Vector3(v + margin * d / dist) : c;
  }
  return out;
}

ContactSpec ContactSpec::transformed(const Matrix3 & rotation, const Vector3 & translation) const
{
  ContactSpec out = *this;
  for(auto & v : out.vertices)
  {
    v = rotation * v + translation;
  }
  out.normal = rotation * normal;
  out.tangents = {rotation * tangents[0], rotation * tangents[1]};
  return out;
}

std::vector<Vector3> ridgeVectors(const Vector3 & normal,
                                  const std::array<Vector3, 2> & tangents,
                                  double frictionCoeff,
                                  int ridgeCount)
{
  if(ridgeCount < 4)
  {
    throw InvalidArgument("ridgeVectors: at least four ridges are required, got " + std::to_string(ridgeCount));
  }
  if(!(frictionCoeff > 0.0))
  {
    throw InvalidArgument("ridgeVectors: friction coefficient must be positive");
  }
  std::vector<Vector3> ridges;
  ridges.reserve(static_cast<std::size_t>(ridgeCount));
  for(int k = 0; k < ridgeCount; ++k)
  {
    const double theta = 2.0 * std::numbers::pi * k / ridgeCount;
    ridges.push_back(
        (normal + frictionCoeff * (std::cos(theta) * tangents[0] + std::sin(theta) * tangents[1])).normalized());
  }
  return ridges;
}

const LimbBlock * GraspMatrix::find(const std::string & limbId) const
{
  for(const auto & b : blocks)
  {
    if(b.limbId == limbId)
    {
      return &b;
    }
  }
  return nullptr;
}

Vector6 GraspMatrix::limbWrench(const LimbBlock & block, const Eigen::VectorXd & lambda) const
{
  return columns.middleCols(block.offset, block.count) * lambda.segment(block.offset, block.count);
}

GraspMatrix assembleGraspMatrix(std::span<const ContactSpec> contacts)
{
  if(contacts.empty())
  {
    throw EmptyContactSet("assembleGraspMatrix: no contacts");
  }
  Eigen::Index total = 0;
  std::set<std::string> seen;
  for(const auto & c : contacts)
  {
    c.validate();
    if(!seen.insert(c.limbId).second)
    {
      throw InvalidArgument("assembleGraspMatrix: limb " + c.limbId + " appears twice");
    }
    const int pyramids = c.mode == ContactMode::Grasp ? 2 : 1;
    total += static_cast<Eigen::Index>(c.vertices.size()) * c.ridgeCount * pyramids;
  }

  GraspMatrix G;
  G.columns.resize(6, total);
  Eigen::Index col = 0;
  for(const auto & c : contacts)
  {
    LimbBlock block;
    block.limbId = c.limbId;
    block.offset = col;
    block.frame = c.frame();
    block.origin = c.center();
    const auto ridges = ridgeVectors(c.normal, c.tangents, c.frictionCoeff, c.ridgeCount);
    std::vector<Vector3> mirrored;
    if(c.mode == ContactMode::Grasp)
    {
      mirrored = ridgeVectors(-c.normal, c.tangents, c.frictionCoeff, c.ridgeCount);
    }
    for(const auto & p : c.vertices)
    {
      for(const std::vector<Vector3> * set : std::array<const std::vector<Vector3> *, 2>{&ridges, &mirrored})
      {
        for(const auto & rho : *set)
        {
          G.columns.col(col).head<3>() = rho;
          G.columns.col(col).tail<3>() = p.cross(rho);
          ++col;
        }
      }
    }
    block.count = col - block.offset;
    G.blocks.push_back(block);
  }
  return G;
}

Polygon2 convexHull(std::vector<Vector2> points)
{
  std::sort(points.begin(), points.end(),
            [](const Vector2 & a, const Vector2 & b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const Vector2 & a, const Vector2 & b) { return (a - b).norm() < 1e-12; }),
               points.end());
  Polygon2 hull;
  if(points.size() < 3)
  {
    hull.vertices = points;
    return hull;
  }
  std::vector<Vector2> h(2 * points.size());
  std::size_t k = 0;
  for(const auto & p : points)
  {
    while(k >= 2 && cross2(h[k - 2], h[k - 1], p) <= 1e-15)
    {
      --k;
    }
    h[k++] = p;
  }
  for(std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;)
  {
    const auto & p = points[i];
    while(k >= lower && cross2(h[k - 2], h[k - 1], p) <= 1e-15)
    {
      --k;
    }
    h[k++] = p;
  }
  h.resize(k - 1);
  hull.vertices = std::move(h);
  return hull;
}

double Polygon2::signedDistance(const Vector2 & p) const
{
  if(vertices.empty())
  {
    return -std::numeric_limits<double>::infinity();
  }
  const std::size_t n = vertices.size();
  if(n == 1)
  {
    return -(p - vertices[0]).norm();
  }
  if(n == 2)
  {
    return -segmentDistance(p, vertices[0], vertices[1]);
  }
  bool inside = true;
  double inner = std::numeric_limits<double>::infinity();
  double outer = std::numeric_limits<double>::infinity();
  for(std::size_t i = 0; i < n; ++i)
  {
    const Vector2 & a = vertices[i];
    const Vector2 & b = vertices[(i + 1) % n];
    const Vector2 edge = b - a;
    const double lineDist = cross2(a, b, p) / edge.norm();
    if(lineDist < 0.0)
    {
      inside = false;
    }
    inner = std::min(inner, lineDist);
    outer = std::min(outer, segmentDistance(p, a, b));
  }
  return inside ? inner : -outer;
}

Polygon2 supportPolygon(std::span<const ContactSpec> contacts)
{
  std::vector<Vector2> points;
  for(const auto & c : contacts)
  {
    if(c.mode != ContactMode::Unilateral || c.normal.z() <= 0.0)
    {
      continue;
    }
    for(const auto & v : c.vertices)
    {
      points.emplace_back(v.x(), v.y());
    }
  }
  if(points.empty())
  {
    throw NoSupportingContact("supportPolygon: no unilateral contact with an upward normal");
  }
  return convexHull(std::move(points));
}

} // namespace cpc
