#pragma once

#include <map>
#include <string>
#include <vector>

#include "navkit/geometry.hpp"

namespace navkit {

enum class EdgeSource { Tracked, Calibrated, Registered, Fixed };

std::string_view to_string(EdgeSource s);

/// Edge parent -> child storing T^parent_child.
struct FrameEdge {
  std::string parent;
  std::string child;
  RigidTransform transform;
  EdgeSource source = EdgeSource::Fixed;
};

/**
 * Coordinate-frame forest (typically one tree rooted at "world":
 * world -> camera -> marker -> tooltip, world -> image). Any edge whose
 * endpoints are already connected is rejected with CycleError, so there is
 * exactly one path between connected frames.
 */
class FrameGraph {
public:
  void add_frame(const std::string& id);
  bool has_frame(const std::string& id) const { return adjacency_.count(id) != 0; }

  /// Adds missing endpoint frames. Throws CycleError if parent and child are already connected.
  void add_edge(const std::string& parent, const std::string& child, const RigidTransform& parent_from_child,
                EdgeSource source);
  /// Replaces the transform of an existing edge (in either direction). Throws UnknownFrame / NoPath.
  void update_edge(const std::string& parent, const std::string& child, const RigidTransform& parent_from_child);

  const std::vector<FrameEdge>& edges() const noexcept { return edges_; }

  /// T^from_to: maps coordinates in `to` into `from`. Throws UnknownFrame or NoPath.
  RigidTransform resolve(const std::string& from, const std::string& to) const;

private:
  bool connected(const std::string& a, const std::string& b) const;

  std::vector<FrameEdge> edges_;
  std::map<std::string, std::vector<std::size_t>> adjacency_;  // frame -> incident edge indices
};

inline RigidTransform resolve_frame(const FrameGraph& g, const std::string& from, const std::string& to) {
  return g.resolve(from, to);
}

}  // namespace navkit
